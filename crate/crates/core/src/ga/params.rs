use std::fmt;

use thiserror::Error;

/// GA control parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    /// Share of the ranked population copied unchanged; rounded up.
    pub elite_fraction: f64,
    pub max_generations: usize,
    /// Stop after this many generations without a better best.
    pub stagnation_limit: usize,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population_size: 200,
            crossover_rate: 0.8,
            mutation_rate: 0.3,
            elite_fraction: 0.2,
            max_generations: 2000,
            stagnation_limit: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("invalid GA parameter {key}: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("line {line}: {reason}")]
    Config { line: usize, reason: String },
}

fn invalid(key: &'static str, reason: impl fmt::Display) -> ParamsError {
    ParamsError::Invalid {
        key,
        reason: reason.to_string(),
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "population_size",
    "crossover_rate",
    "mutation_rate",
    "elite_fraction",
    "max_generations",
    "stagnation_limit",
    "seed",
];

impl GaParams {
    pub fn elite_count(&self) -> usize {
        ((self.elite_fraction * self.population_size as f64).ceil() as usize)
            .min(self.population_size)
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if self.population_size < 2 {
            return Err(invalid("population_size", "must be at least 2"));
        }
        for (key, v) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(key, format!("{v} is outside [0, 1]")));
            }
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return Err(invalid(
                "elite_fraction",
                format!("{} is outside (0, 1)", self.elite_fraction),
            ));
        }
        if self.max_generations == 0 {
            return Err(invalid("max_generations", "must be positive"));
        }
        if self.stagnation_limit == 0 {
            return Err(invalid("stagnation_limit", "must be positive"));
        }
        Ok(())
    }

    /// Sets one parameter from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("bad value {v:?}: {e}"))
        }
        match key {
            "population_size" => self.population_size = num(value)?,
            "crossover_rate" => self.crossover_rate = num(value)?,
            "mutation_rate" => self.mutation_rate = num(value)?,
            "elite_fraction" => self.elite_fraction = num(value)?,
            "max_generations" => self.max_generations = num(value)?,
            "stagnation_limit" => self.stagnation_limit = num(value)?,
            "seed" => self.seed = num(value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_config(&mut self, text: &str) -> Result<(), ParamsError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |reason: String| ParamsError::Config {
                line: i + 1,
                reason,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err("expected key = value".into()))?;
            self.set(k.trim(), v.trim()).map_err(err)?;
        }
        Ok(())
    }
}
