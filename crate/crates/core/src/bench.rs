//! Repeated paired runs over preset scenarios, with CSV reports.
//!
//! Repetition `k` uses seed `base_seed + k` for both the instance and the
//! search, so every strategy sees the same instances and the samples pair up.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{solve, SolveError, SolveOptions, StrategyKind};
use crate::ga::GaParams;
use crate::model::TimingParams;
use crate::scenario::{generate_preset, preset, ScenarioError};
use crate::stats::{improvement_pct, paired_t_test, summary, PairedSample};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid bench plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("scenario {scenario}, {strategy}, rep {rep}: {source}")]
    Solve {
        scenario: u32,
        strategy: StrategyKind,
        rep: usize,
        source: SolveError,
    },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

#[derive(Debug, Clone)]
pub struct BenchPlan {
    pub scenarios: Vec<u32>,
    pub strategies: Vec<StrategyKind>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub timing: TimingParams,
    pub params: GaParams,
    /// Significance level of the paired t-tests.
    pub alpha: f64,
}

impl Default for BenchPlan {
    fn default() -> Self {
        Self {
            scenarios: (1..=6).collect(),
            strategies: StrategyKind::ALL.to_vec(),
            repetitions: 20,
            base_seed: 0,
            timing: TimingParams::default(),
            params: GaParams::default(),
            alpha: 0.05,
        }
    }
}

impl BenchPlan {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::InvalidPlan(m));
        if self.strategies.is_empty() {
            return bad("no strategies".into());
        }
        if self.scenarios.is_empty() {
            return bad("no scenarios".into());
        }
        if self.repetitions < 2 {
            return bad(format!(
                "paired t-tests need at least 2 repetitions, got {}",
                self.repetitions
            ));
        }
        for &s in &self.scenarios {
            preset(s)?;
        }
        self.timing
            .validate()
            .map_err(|e| BenchError::InvalidPlan(e.to_string()))?;
        self.params
            .validate()
            .map_err(|e| BenchError::InvalidPlan(e.to_string()))
    }

    /// Strategy the others are compared against.
    pub fn reference(&self) -> StrategyKind {
        if self.strategies.contains(&StrategyKind::QcdcDrGa) {
            StrategyKind::QcdcDrGa
        } else {
            self.strategies[0]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: u32,
    pub stacks: usize,
    pub max_height: u32,
    pub strategy: StrategyKind,
    pub rep: usize,
    pub seed: u64,
    pub singles: u64,
    pub duals: u64,
    pub rehandles: u64,
    pub total_seconds: f64,
    pub total_minutes: f64,
    pub generations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub scenario: u32,
    pub stacks: usize,
    pub max_height: u32,
    pub strategy: StrategyKind,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sd: f64,
    /// Pearson r, t and p against the reference strategy; empty on the
    /// reference row and for degenerate samples.
    pub r: Option<f64>,
    pub t: Option<f64>,
    pub p: Option<f64>,
    pub significant: Option<bool>,
    /// Reduction of the reference's mean relative to this strategy's mean.
    pub improvement_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub scenario: u32,
    pub strategy: StrategyKind,
    pub rep: usize,
    pub generation: usize,
    pub best_cost_s: f64,
    pub mean_cost_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub stacks: usize,
    pub mean_minutes: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub reference: StrategyKind,
    pub runs: Vec<RunRecord>,
    pub stats: Vec<StatsRow>,
    pub history: Vec<HistoryRow>,
    pub plot: BTreeMap<StrategyKind, Vec<PlotPoint>>,
}

/// Runs every (scenario, strategy, repetition) cell. `threads` caps the
/// worker count; `None` uses the global pool. Output order is canonical.
pub fn run_bench(plan: &BenchPlan, threads: Option<usize>) -> Result<BenchReport, BenchError> {
    plan.validate()?;
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| BenchError::ThreadPool(e.to_string()))?
            .install(|| run_cells(plan)),
        None => run_cells(plan),
    }
}

fn run_cells(plan: &BenchPlan) -> Result<BenchReport, BenchError> {
    let mut scenarios = plan.scenarios.clone();
    scenarios.sort_unstable();
    scenarios.dedup();
    let mut strategies = plan.strategies.clone();
    strategies.sort_unstable();
    strategies.dedup();

    let cells: Vec<(u32, StrategyKind, usize)> = scenarios
        .iter()
        .flat_map(|&sc| {
            strategies
                .iter()
                .flat_map(move |&st| (0..plan.repetitions).map(move |rep| (sc, st, rep)))
        })
        .collect();

    let results = cells
        .par_iter()
        .map(|&(scenario, strategy, rep)| {
            let seed = plan.base_seed.wrapping_add(rep as u64);
            let inst = generate_preset(scenario, seed)?;
            let opts = SolveOptions {
                timing: plan.timing,
                params: GaParams {
                    seed,
                    ..plan.params.clone()
                },
                threads: None,
            };
            let sol = solve(strategy, &inst, &opts).map_err(|source| BenchError::Solve {
                scenario,
                strategy,
                rep,
                source,
            })?;
            let record = RunRecord {
                scenario,
                stacks: inst.plan.len(),
                max_height: inst.plan.max_height,
                strategy,
                rep,
                seed,
                singles: sol.cost.singles,
                duals: sol.cost.duals,
                rehandles: sol.cost.rehandles,
                total_seconds: sol.cost.total_seconds,
                total_minutes: sol.cost.total_minutes(),
                generations: sol.history.len().saturating_sub(1),
            };
            let history = sol
                .history
                .iter()
                .map(|g| HistoryRow {
                    scenario,
                    strategy,
                    rep,
                    generation: g.generation,
                    best_cost_s: g.best,
                    mean_cost_s: g.mean,
                })
                .collect::<Vec<_>>();
            Ok((record, history))
        })
        .collect::<Result<Vec<_>, BenchError>>()?;

    let mut runs = Vec::with_capacity(results.len());
    let mut history = Vec::new();
    for (r, h) in results {
        runs.push(r);
        history.extend(h);
    }
    let reference = plan.reference();
    let stats = stats_rows(&runs, reference, plan.alpha);
    let plot = plot_points(&stats);
    Ok(BenchReport {
        reference,
        runs,
        stats,
        history,
        plot,
    })
}

fn stats_rows(runs: &[RunRecord], reference: StrategyKind, alpha: f64) -> Vec<StatsRow> {
    // runs arrive sorted by (scenario, strategy, rep)
    let mut groups: BTreeMap<(u32, StrategyKind), Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        groups.entry((r.scenario, r.strategy)).or_default().push(r);
    }
    let minutes = |v: &[&RunRecord]| v.iter().map(|r| r.total_minutes).collect::<Vec<_>>();
    groups
        .iter()
        .map(|(&(scenario, strategy), rows)| {
            let xs = minutes(rows);
            let s = summary(&xs);
            let mut row = StatsRow {
                scenario,
                stacks: rows[0].stacks,
                max_height: rows[0].max_height,
                strategy,
                min: s.min,
                max: s.max,
                mean: s.mean,
                sd: s.sd,
                r: None,
                t: None,
                p: None,
                significant: None,
                improvement_pct: None,
            };
            if strategy != reference {
                if let Some(base) = groups.get(&(scenario, reference)) {
                    let ref_xs = minutes(base);
                    let ref_mean = summary(&ref_xs).mean;
                    row.improvement_pct = Some(improvement_pct(s.mean, ref_mean));
                    if let Ok(tt) = PairedSample::new(ref_xs, xs)
                        .and_then(|sample| paired_t_test(&sample, alpha))
                    {
                        row.r = tt.pearson_r;
                        row.t = Some(tt.t);
                        row.p = Some(tt.p);
                        row.significant = Some(tt.significant);
                    }
                }
            }
            row
        })
        .collect()
}

fn plot_points(stats: &[StatsRow]) -> BTreeMap<StrategyKind, Vec<PlotPoint>> {
    let mut out: BTreeMap<StrategyKind, Vec<PlotPoint>> = BTreeMap::new();
    for s in stats {
        out.entry(s.strategy).or_default().push(PlotPoint {
            stacks: s.stacks,
            mean_minutes: s.mean,
        });
    }
    for pts in out.values_mut() {
        pts.sort_by_key(|p| p.stacks);
    }
    out
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), BenchError> {
    let csv_err = |source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads any CSV this module writes.
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, BenchError> {
    let csv_err = |source| BenchError::Csv {
        path: path.to_path_buf(),
        source,
    };
    csv::Reader::from_path(path)
        .map_err(csv_err)?
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(csv_err)
}

pub const RUNS_FILE: &str = "runs.csv";
pub const STATS_FILE: &str = "stats.csv";
pub const HISTORY_FILE: &str = "history.csv";

pub fn plot_file(strategy: StrategyKind) -> String {
    format!("plot_{}.csv", strategy.name())
}

impl BenchReport {
    /// Writes runs, stats, history and one plot file per strategy. Returns
    /// the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        let mut put = |name: String, f: &dyn Fn(&Path) -> Result<(), BenchError>| {
            let p = dir.join(name);
            f(&p)?;
            written.push(p);
            Ok::<_, BenchError>(())
        };
        put(RUNS_FILE.into(), &|p| write_csv(p, &self.runs))?;
        put(STATS_FILE.into(), &|p| write_csv(p, &self.stats))?;
        put(HISTORY_FILE.into(), &|p| write_csv(p, &self.history))?;
        for (k, pts) in &self.plot {
            put(plot_file(*k), &|p| write_csv(p, pts))?;
        }
        Ok(written)
    }
}
