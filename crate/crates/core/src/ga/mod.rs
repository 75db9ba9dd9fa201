//! Genetic search over unloading sequences and dockyard arrangements.

mod engine;
pub mod operators;
mod params;
mod selection;

pub use engine::{run, Ga, GaError, GaOutcome, GenerationStats, Objective, SearchSpace};
pub use operators::{
    crossover_1d, crossover_1d_at, crossover_2d, crossover_2d_at, mutate_1d, mutate_1d_at,
    mutate_2d, mutate_2d_at, random_yard, OperatorError, SubstringCut,
};
pub use params::{GaParams, ParamsError, CONFIG_KEYS};
pub use selection::{roulette_select, Individual, RankedPopulation};
