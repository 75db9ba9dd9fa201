use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::operators::{
    crossover_1d, crossover_2d, mutate_1d, mutate_2d, random_yard, relocate_tag, OperatorError,
};
use super::params::{GaParams, ParamsError};
use super::selection::{roulette_select, Individual, RankedPopulation};
use crate::model::{
    is_permutation, validate_instance, Chromosome, ShipRowPlan, TimingParams, YardState,
};
use crate::sim::{CycleMode, Evaluator};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("yard template cannot hold {tags} outbound containers (room for {room})")]
    InfeasibleTemplate { tags: usize, room: usize },
    #[error("every member of the population is infeasible")]
    AllInfeasible,
    #[error(transparent)]
    Operator(OperatorError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl From<OperatorError> for GaError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::InfeasibleTemplate { tags, room } => {
                GaError::InfeasibleTemplate { tags, room }
            }
            e => GaError::Operator(e),
        }
    }
}

/// What the search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Crane cycles plus yard rehandles.
    #[default]
    TotalTime,
    /// Crane cycles only; rehandles are ignored during search.
    CycleTime,
}

/// Which chromosome parts the operators touch. A frozen part keeps its
/// fixed value in every individual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchSpace {
    pub sequence: bool,
    pub yard: bool,
}

impl SearchSpace {
    pub const BOTH: Self = Self {
        sequence: true,
        yard: true,
    };
    pub const SEQUENCE: Self = Self {
        sequence: true,
        yard: false,
    };
    pub const YARD: Self = Self {
        sequence: false,
        yard: true,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best: Individual,
    pub history: Vec<GenerationStats>,
    /// Generations evolved after the initial population.
    pub generations: usize,
    pub stagnated: bool,
}

/// Configurable genetic search over a single instance.
#[derive(Debug, Clone)]
pub struct Ga<'a> {
    template: &'a YardState,
    params: GaParams,
    eval: Evaluator<'a>,
    objective: Objective,
    space: SearchSpace,
    fixed_sequence: Vec<usize>,
    local_search: usize,
    threads: Option<usize>,
}

impl<'a> Ga<'a> {
    /// Full two-part search with default timing and dual cycling.
    pub fn new(
        plan: &'a ShipRowPlan,
        template: &'a YardState,
        params: GaParams,
    ) -> Result<Self, GaError> {
        params.validate()?;
        let violations = validate_instance(plan, template);
        if let Some(v) = violations.first() {
            return Err(GaError::InvalidInstance(v.to_string()));
        }
        let room: usize = template
            .foreign_counts()
            .iter()
            .map(|&b| (template.cap as usize).saturating_sub(b))
            .sum();
        if room < template.tag_count() {
            return Err(GaError::InfeasibleTemplate {
                tags: template.tag_count(),
                room,
            });
        }
        Ok(Self {
            template,
            params,
            eval: Evaluator::new(plan, TimingParams::default(), CycleMode::Dual),
            objective: Objective::TotalTime,
            space: SearchSpace::BOTH,
            fixed_sequence: plan.identity_sequence(),
            local_search: 0,
            threads: None,
        })
    }

    pub fn timing(mut self, timing: TimingParams) -> Self {
        self.eval = Evaluator::new(self.eval.plan(), timing, self.eval.mode());
        self
    }

    pub fn mode(mut self, mode: CycleMode) -> Self {
        self.eval = Evaluator::new(self.eval.plan(), *self.eval.timing(), mode);
        self
    }

    pub fn objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn search_space(mut self, space: SearchSpace) -> Self {
        self.space = space;
        self
    }

    /// Sequence used when the sequence part is frozen.
    pub fn fixed_sequence(mut self, seq: Vec<usize>) -> Result<Self, GaError> {
        if !is_permutation(&seq, self.eval.plan().len()) {
            return Err(GaError::InvalidInstance(
                "fixed sequence is not a permutation of the ship stacks".into(),
            ));
        }
        self.fixed_sequence = seq;
        Ok(self)
    }

    /// Per-generation relocation search on each elite, `budget` trial moves
    /// per elite; 0 disables it.
    pub fn local_search(mut self, budget: usize) -> Self {
        self.local_search = budget;
        self
    }

    /// Worker thread cap; `None` uses the global rayon pool.
    pub fn threads(mut self, threads: Option<usize>) -> Self {
        self.threads = threads;
        self
    }

    pub fn params(&self) -> &GaParams {
        &self.params
    }

    pub fn evaluator(&self) -> &Evaluator<'a> {
        &self.eval
    }

    pub fn score(&self, chromosome: Chromosome) -> Individual {
        match self.eval.cost(&chromosome) {
            Ok(cost) => {
                let objective = match self.objective {
                    Objective::TotalTime => cost.total_seconds,
                    Objective::CycleTime => cost.cycle_seconds(self.eval.timing()),
                };
                Individual {
                    chromosome,
                    cost: Some(cost),
                    objective,
                }
            }
            Err(_) => Individual {
                chromosome,
                cost: None,
                objective: f64::INFINITY,
            },
        }
    }

    fn score_all(&self, chromosomes: Vec<Chromosome>) -> Vec<Individual> {
        chromosomes.into_par_iter().map(|c| self.score(c)).collect()
    }

    fn random_chromosome<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Chromosome, GaError> {
        let unload_seq = if self.space.sequence {
            let mut s = self.eval.plan().identity_sequence();
            s.shuffle(rng);
            s
        } else {
            self.fixed_sequence.clone()
        };
        let yard = if self.space.yard {
            random_yard(self.template, rng)?
        } else {
            self.template.clone()
        };
        Ok(Chromosome { unload_seq, yard })
    }

    pub fn init_population<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<RankedPopulation, GaError> {
        let chromosomes = (0..self.params.population_size)
            .map(|_| self.random_chromosome(rng))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RankedPopulation::new(self.score_all(chromosomes)))
    }

    fn breed<R: Rng + ?Sized>(
        &self,
        a: &Chromosome,
        b: &Chromosome,
        rng: &mut R,
    ) -> Result<(Chromosome, Chromosome), GaError> {
        let (mut x, mut y) = (a.clone(), b.clone());
        if rng.gen::<f64>() < self.params.crossover_rate {
            if self.space.sequence {
                (x.unload_seq, y.unload_seq) = crossover_1d(&a.unload_seq, &b.unload_seq, rng);
            }
            if self.space.yard {
                (x.yard, y.yard) = crossover_2d(&a.yard, &b.yard, rng)?;
            }
        }
        for c in [&mut x, &mut y] {
            if rng.gen::<f64>() < self.params.mutation_rate {
                if self.space.sequence {
                    c.unload_seq = mutate_1d(&c.unload_seq, rng);
                }
                if self.space.yard {
                    c.yard = mutate_2d(&c.yard, rng);
                }
            }
        }
        Ok((x, y))
    }

    /// One generation: elites carry over, the rest are bred from roulette
    /// picks of the whole ranked population.
    pub fn evolve_generation<R: Rng + ?Sized>(
        &self,
        pop: &RankedPopulation,
        rng: &mut R,
    ) -> Result<RankedPopulation, GaError> {
        let n = self.params.population_size;
        let elite_n = self.params.elite_count().min(pop.len());
        let mut elites: Vec<Individual> = pop.members()[..elite_n].to_vec();
        let mut kids = Vec::with_capacity(n - elite_n);
        while elite_n + kids.len() < n {
            let a = roulette_select(pop, rng).ok_or(GaError::AllInfeasible)?;
            let b = roulette_select(pop, rng).ok_or(GaError::AllInfeasible)?;
            let (x, y) = self.breed(&a.chromosome, &b.chromosome, rng)?;
            kids.push(x);
            if elite_n + kids.len() < n {
                kids.push(y);
            }
        }
        if self.local_search > 0 && self.space.yard {
            for e in elites.iter_mut() {
                self.improve(e, rng);
            }
        }
        elites.extend(self.score_all(kids));
        Ok(RankedPopulation::new(elites))
    }

    /// First-improvement relocation of a single outbound container.
    fn improve<R: Rng + ?Sized>(&self, ind: &mut Individual, rng: &mut R) {
        let yard = &ind.chromosome.yard;
        let cap = yard.cap as usize;
        let cells: Vec<(usize, usize)> = yard
            .stacks
            .iter()
            .enumerate()
            .flat_map(|(r, s)| {
                let n = s.iter().filter(|x| x.tag().is_some()).count();
                (0..n).map(move |c| (r, c))
            })
            .collect();
        if cells.is_empty() || yard.stacks.len() < 2 {
            return;
        }
        let moves: Vec<((usize, usize), usize)> = (0..self.local_search)
            .filter_map(|_| {
                let from = cells[rng.gen_range(0..cells.len())];
                let dest = rng.gen_range(0..yard.stacks.len());
                (dest != from.0 && yard.stacks[dest].len() < cap).then_some((from, dest))
            })
            .collect();
        let best = moves
            .into_par_iter()
            .map(|(from, dest)| {
                self.score(Chromosome {
                    unload_seq: ind.chromosome.unload_seq.clone(),
                    yard: relocate_tag(yard, from, dest),
                })
            })
            .find_first(|c| c.objective < ind.objective);
        if let Some(better) = best {
            *ind = better;
        }
    }

    /// Evolves until the generation cap or the stagnation limit.
    pub fn run(&self) -> Result<GaOutcome, GaError> {
        match self.threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| GaError::ThreadPool(e.to_string()))?
                .install(|| self.run_inner()),
            None => self.run_inner(),
        }
    }

    fn run_inner(&self) -> Result<GaOutcome, GaError> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.params.seed);
        let mut pop = self.init_population(&mut rng)?;
        let stats = |g: usize, p: &RankedPopulation| GenerationStats {
            generation: g,
            best: p.best().map_or(f64::INFINITY, |b| b.objective),
            mean: p.mean_objective(),
        };
        let mut history = vec![stats(0, &pop)];
        let mut best = pop.best().cloned().ok_or(GaError::AllInfeasible)?;
        let mut still = 0;
        let mut generations = 0;
        while generations < self.params.max_generations && still < self.params.stagnation_limit {
            pop = self.evolve_generation(&pop, &mut rng)?;
            generations += 1;
            history.push(stats(generations, &pop));
            let head = pop.best().expect("population is never empty");
            if head.objective < best.objective {
                best = head.clone();
                still = 0;
            } else {
                still += 1;
            }
        }
        if !best.is_feasible() {
            return Err(GaError::AllInfeasible);
        }
        Ok(GaOutcome {
            best,
            history,
            generations,
            stagnated: still >= self.params.stagnation_limit,
        })
    }
}

/// Full dual-cycle search with default timing.
pub fn run(
    plan: &ShipRowPlan,
    template: &YardState,
    params: GaParams,
) -> Result<GaOutcome, GaError> {
    Ga::new(plan, template, params)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContainerTag, ShipStack, Slot};

    fn tag(s: &str) -> ContainerTag {
        s.parse().unwrap()
    }

    fn small() -> (ShipRowPlan, YardState) {
        let plan = ShipRowPlan {
            max_height: 4,
            stacks: vec![
                ShipStack {
                    stay: 0,
                    unload: 2,
                    load: vec![tag("1A"), tag("1B")],
                },
                ShipStack {
                    stay: 1,
                    unload: 1,
                    load: vec![tag("2B"), tag("2C")],
                },
                ShipStack {
                    stay: 0,
                    unload: 3,
                    load: vec![tag("3A")],
                },
            ],
        };
        let yard = YardState {
            cap: 4,
            stacks: vec![
                vec![Slot::Foreign, Slot::Tag(tag("1A")), Slot::Tag(tag("1B"))],
                vec![Slot::Tag(tag("2C")), Slot::Tag(tag("2B"))],
                vec![Slot::Tag(tag("3A"))],
            ],
        };
        (plan, yard)
    }

    fn params(seed: u64) -> GaParams {
        GaParams {
            population_size: 20,
            max_generations: 30,
            stagnation_limit: 10,
            seed,
            ..GaParams::default()
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let (plan, yard) = small();
        let a = run(&plan, &yard, params(4)).unwrap();
        let b = Ga::new(&plan, &yard, params(4))
            .unwrap()
            .threads(Some(3))
            .run()
            .unwrap();
        assert_eq!(a.best.chromosome, b.best.chromosome);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn best_is_monotone() {
        let (plan, yard) = small();
        let out = run(&plan, &yard, params(8)).unwrap();
        for w in out.history.windows(2) {
            assert!(w[1].best <= w[0].best);
        }
        assert_eq!(out.best.objective, out.history.last().unwrap().best);
    }

    #[test]
    fn copies_without_variation() {
        let (plan, yard) = small();
        let p = GaParams {
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            ..params(2)
        };
        let ga = Ga::new(&plan, &yard, p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pop = ga.init_population(&mut rng).unwrap();
        let next = ga.evolve_generation(&pop, &mut rng).unwrap();
        assert_eq!(next.len(), pop.len());
        for m in next.members() {
            assert!(pop.members().iter().any(|o| o.chromosome == m.chromosome));
        }
    }

    #[test]
    fn frozen_parts_stay_fixed() {
        let (plan, yard) = small();
        let seq_only = Ga::new(&plan, &yard, params(1))
            .unwrap()
            .search_space(SearchSpace::SEQUENCE)
            .run()
            .unwrap();
        assert_eq!(seq_only.best.chromosome.yard, yard);
        let yard_only = Ga::new(&plan, &yard, params(1))
            .unwrap()
            .search_space(SearchSpace::YARD)
            .fixed_sequence(vec![2, 0, 1])
            .unwrap()
            .local_search(8)
            .run()
            .unwrap();
        assert_eq!(yard_only.best.chromosome.unload_seq, vec![2, 0, 1]);
    }

    #[test]
    fn rejects_overfull_template() {
        let (plan, mut yard) = small();
        yard.cap = 2;
        yard.stacks[0].remove(0);
        yard.stacks[1].push(Slot::Foreign);
        yard.stacks[1].swap(0, 2);
        yard.stacks[2].insert(0, Slot::Foreign);
        yard.stacks[2].insert(0, Slot::Foreign);
        let e = Ga::new(&plan, &yard, params(0)).unwrap_err();
        assert!(matches!(
            e,
            GaError::InvalidInstance(_) | GaError::InfeasibleTemplate { .. }
        ));
    }
}
