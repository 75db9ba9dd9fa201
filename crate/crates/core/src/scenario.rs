//! Seeded instance generator and the six benchmark presets.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use thiserror::Error;

use crate::model::{ContainerTag, Instance, ShipRowPlan, ShipStack, Slot, YardState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario {0} (expected 1..=6)")]
    UnknownScenario(u32),
    #[error("invalid scenario config: {0}")]
    InvalidConfig(String),
    #[error("yard has room for {room} outbound containers but {tags} are needed")]
    GenerationInfeasible { tags: usize, room: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub num_stacks: usize,
    pub max_ship_height: u32,
    pub yard_cap: u32,
    /// Yard width; `None` derives it from the number of outbound tags.
    pub yard_stacks: Option<usize>,
    /// Chance that a ship stack keeps one or two containers aboard.
    pub stay_probability: f64,
    /// Expected fill of the free height for both discharge and load counts.
    pub fill_density: f64,
    /// Foreign containers per yard stack are drawn from `0..=max_foreign`.
    pub max_foreign: u32,
    pub seed: u64,
}

/// (stacks, max height) per preset, 1-based.
pub const PRESETS: [(usize, u32); 6] = [(30, 10), (25, 10), (20, 10), (15, 8), (10, 5), (5, 4)];

impl ScenarioConfig {
    pub fn new(num_stacks: usize, max_ship_height: u32) -> Self {
        Self {
            num_stacks,
            max_ship_height,
            yard_cap: 6,
            yard_stacks: None,
            stay_probability: 0.3,
            fill_density: 0.8,
            max_foreign: 2,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: &str| Err(ScenarioError::InvalidConfig(m.into()));
        if self.num_stacks == 0 || self.num_stacks > usize::from(u16::MAX) {
            return bad("num_stacks must be in 1..=65535");
        }
        if self.max_ship_height == 0 {
            return bad("max_ship_height must be positive");
        }
        if self.yard_cap == 0 {
            return bad("yard_cap must be positive");
        }
        if !(0.0..=1.0).contains(&self.stay_probability) {
            return bad("stay_probability must be in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.fill_density) {
            return bad("fill_density must be in [0, 1]");
        }
        if self.yard_stacks == Some(0) {
            return bad("yard_stacks must be positive");
        }
        Ok(())
    }
}

pub fn preset(id: u32) -> Result<ScenarioConfig, ScenarioError> {
    let (s, h) = id
        .checked_sub(1)
        .and_then(|i| PRESETS.get(i as usize))
        .ok_or(ScenarioError::UnknownScenario(id))?;
    Ok(ScenarioConfig::new(*s, *h))
}

fn binomial<R: Rng + ?Sized>(n: u32, p: f64, rng: &mut R) -> u32 {
    if n == 0 {
        return 0;
    }
    Binomial::new(u64::from(n), p)
        .expect("probability validated")
        .sample(rng) as u32
}

/// Builds a plan and a dockyard template. Foreign containers form the base
/// of each yard stack; outbound tags are shuffled onto random stacks with
/// room above them.
pub fn generate_instance(config: &ScenarioConfig) -> Result<Instance, ScenarioError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let h = config.max_ship_height;

    let mut stacks = Vec::with_capacity(config.num_stacks);
    for c in 0..config.num_stacks {
        let stay = if rng.gen::<f64>() < config.stay_probability {
            rng.gen_range(1..=2u32).min(h)
        } else {
            0
        };
        let free = h - stay;
        let unload = binomial(free, config.fill_density, &mut rng);
        let loads = binomial(free, config.fill_density, &mut rng);
        let load = (1..=loads)
            .map(|k| ContainerTag::new(c as u16 + 1, k as u16).expect("1-based"))
            .collect();
        stacks.push(ShipStack { stay, unload, load });
    }
    let plan = ShipRowPlan {
        max_height: h,
        stacks,
    };

    let mut tags: Vec<ContainerTag> = plan.load_tags().collect();
    let width = config
        .yard_stacks
        .unwrap_or_else(|| tags.len().div_ceil(3) + 2);
    let cap = config.yard_cap;
    let mut yard: Vec<Vec<Slot>> = (0..width)
        .map(|_| {
            let f = rng.gen_range(0..=config.max_foreign).min(cap);
            vec![Slot::Foreign; f as usize]
        })
        .collect();
    let room: usize = yard.iter().map(|s| cap as usize - s.len()).sum();
    if room < tags.len() {
        return Err(ScenarioError::GenerationInfeasible {
            tags: tags.len(),
            room,
        });
    }
    tags.shuffle(&mut rng);
    let mut open: Vec<usize> = (0..width)
        .filter(|&i| yard[i].len() < cap as usize)
        .collect();
    for t in tags {
        let k = rng.gen_range(0..open.len());
        let i = open[k];
        yard[i].push(Slot::Tag(t));
        if yard[i].len() >= cap as usize {
            open.swap_remove(k);
        }
    }

    Ok(Instance {
        plan,
        yard: YardState { cap, stacks: yard },
    })
}

/// Preset instance for one seed.
pub fn generate_preset(id: u32, seed: u64) -> Result<Instance, ScenarioError> {
    generate_instance(&preset(id)?.with_seed(seed))
}
