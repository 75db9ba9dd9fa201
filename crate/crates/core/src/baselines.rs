//! Comparison strategies, all scored by the same simulator.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ga::{Ga, GaError, GaParams, GenerationStats, Objective, SearchSpace};
use crate::model::{Chromosome, CostBreakdown, Instance, ShipRowPlan, TimingParams};
use crate::sim::{CycleMode, Evaluator, SimError};

/// Trial relocations per elite and generation for the yard-only search.
pub const ILS_BUDGET: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Stacks worked by descending discharge count, template yard.
    Greedy,
    /// Sequence-only search that ignores rehandles while searching.
    BiLevel,
    /// Sequence-only search with dual cycling, template yard.
    Ilsrs1,
    /// Yard-only search with single cycles and ship order.
    Ilsrs2,
    /// Joint search over sequence and yard.
    #[serde(rename = "qcdc-dr-ga")]
    QcdcDrGa,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Greedy,
        StrategyKind::BiLevel,
        StrategyKind::Ilsrs1,
        StrategyKind::Ilsrs2,
        StrategyKind::QcdcDrGa,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Greedy => "greedy",
            StrategyKind::BiLevel => "bilevel",
            StrategyKind::Ilsrs1 => "ilsrs1",
            StrategyKind::Ilsrs2 => "ilsrs2",
            StrategyKind::QcdcDrGa => "qcdc-dr-ga",
        }
    }

    pub fn is_search(&self) -> bool {
        *self != StrategyKind::Greedy
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown strategy {0:?} (expected greedy, bilevel, ilsrs1, ilsrs2 or qcdc-dr-ga)")]
pub struct UnknownStrategy(pub String);

impl FromStr for StrategyKind {
    type Err = UnknownStrategy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownStrategy(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Ga(#[from] GaError),
    #[error("template yard is infeasible for the greedy sequence: {0}")]
    Sim(#[from] SimError),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub strategy: StrategyKind,
    pub chromosome: Chromosome,
    pub cost: CostBreakdown,
    /// Per-generation objective; empty for greedy.
    pub history: Vec<GenerationStats>,
    /// Cycle mode the cost was evaluated under.
    pub mode: CycleMode,
}

/// Stacks by descending discharge count; ties keep the lower index first.
pub fn greedy_sequence(plan: &ShipRowPlan) -> Vec<usize> {
    let mut seq = plan.identity_sequence();
    seq.sort_by_key(|&i| std::cmp::Reverse(plan.stacks[i].unload));
    seq
}

/// Solver settings shared by every strategy.
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub timing: TimingParams,
    pub params: GaParams,
    pub threads: Option<usize>,
}

pub fn solve(
    kind: StrategyKind,
    instance: &Instance,
    opts: &SolveOptions,
) -> Result<Solution, SolveError> {
    if let Some(v) = instance.validate().first() {
        return Err(SolveError::InvalidInstance(v.to_string()));
    }
    let plan = &instance.plan;
    let template = &instance.yard;

    if kind == StrategyKind::Greedy {
        let chromosome = Chromosome {
            unload_seq: greedy_sequence(plan),
            yard: template.clone(),
        };
        let cost = Evaluator::new(plan, opts.timing, CycleMode::Dual).cost(&chromosome)?;
        return Ok(Solution {
            strategy: kind,
            chromosome,
            cost,
            history: Vec::new(),
            mode: CycleMode::Dual,
        });
    }

    let ga = Ga::new(plan, template, opts.params.clone())?
        .timing(opts.timing)
        .threads(opts.threads);
    let (ga, mode) = match kind {
        StrategyKind::BiLevel => (
            ga.search_space(SearchSpace::SEQUENCE)
                .objective(Objective::CycleTime),
            CycleMode::Dual,
        ),
        StrategyKind::Ilsrs1 => (ga.search_space(SearchSpace::SEQUENCE), CycleMode::Dual),
        StrategyKind::Ilsrs2 => (
            ga.search_space(SearchSpace::YARD)
                .mode(CycleMode::SingleOnly)
                .local_search(ILS_BUDGET),
            CycleMode::SingleOnly,
        ),
        StrategyKind::QcdcDrGa => (ga, CycleMode::Dual),
        StrategyKind::Greedy => unreachable!(),
    };
    let out = ga.run()?;
    let cost = out
        .best
        .cost
        .clone()
        .expect("best individual of a successful run is feasible");
    Ok(Solution {
        strategy: kind,
        chromosome: out.best.chromosome,
        cost,
        history: out.history,
        mode,
    })
}
