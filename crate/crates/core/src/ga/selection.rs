use rand::Rng;

use crate::model::{Chromosome, CostBreakdown};

/// A scored chromosome. `objective` is what the search minimizes; it is
/// infinite when the simulation failed.
#[derive(Debug, Clone)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub cost: Option<CostBreakdown>,
    pub objective: f64,
}

impl Individual {
    pub fn fitness(&self) -> f64 {
        if self.objective.is_finite() {
            1.0 / self.objective.max(1e-9)
        } else {
            0.0
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.objective.is_finite()
    }
}

/// Population sorted by ascending objective, with the cumulative fitness
/// ladder used for roulette selection.
#[derive(Debug, Clone)]
pub struct RankedPopulation {
    members: Vec<Individual>,
    ladder: Vec<f64>,
}

impl RankedPopulation {
    pub fn new(mut members: Vec<Individual>) -> Self {
        members.sort_by(|a, b| a.objective.total_cmp(&b.objective));
        let mut acc = 0.0;
        let ladder = members
            .iter()
            .map(|m| {
                acc += m.fitness();
                acc
            })
            .collect();
        Self { members, ladder }
    }

    pub fn members(&self) -> &[Individual] {
        &self.members
    }

    pub fn into_members(self) -> Vec<Individual> {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> Option<&Individual> {
        self.members.first()
    }

    pub fn total_fitness(&self) -> f64 {
        self.ladder.last().copied().unwrap_or(0.0)
    }

    /// Mean objective over feasible members; infinite if there are none.
    pub fn mean_objective(&self) -> f64 {
        let feasible: Vec<f64> = self
            .members
            .iter()
            .filter(|m| m.is_feasible())
            .map(|m| m.objective)
            .collect();
        if feasible.is_empty() {
            f64::INFINITY
        } else {
            feasible.iter().sum::<f64>() / feasible.len() as f64
        }
    }
}

/// Fitness-proportional pick. Members with zero fitness are never chosen;
/// `None` when every member is infeasible.
pub fn roulette_select<'a, R: Rng + ?Sized>(
    pop: &'a RankedPopulation,
    rng: &mut R,
) -> Option<&'a Individual> {
    let total = pop.total_fitness();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    let r = rng.gen_range(0.0..total);
    let i = pop.ladder.partition_point(|&x| x <= r);
    pop.members.get(i.min(pop.members.len() - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::YardState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ind(tag: usize, objective: f64) -> Individual {
        Individual {
            chromosome: Chromosome {
                unload_seq: vec![tag],
                yard: YardState {
                    cap: 1,
                    stacks: vec![],
                },
            },
            cost: None,
            objective,
        }
    }

    #[test]
    fn sorted_and_laddered() {
        let p = RankedPopulation::new(vec![ind(0, 4.0), ind(1, f64::INFINITY), ind(2, 1.0)]);
        let order: Vec<usize> = p
            .members()
            .iter()
            .map(|m| m.chromosome.unload_seq[0])
            .collect();
        assert_eq!(order, [2, 0, 1]);
        assert!((p.total_fitness() - 1.25).abs() < 1e-12);
        assert_eq!(p.mean_objective(), 2.5);
    }

    #[test]
    fn roulette_follows_fitness() {
        let p = RankedPopulation::new(vec![ind(0, 1.0), ind(1, 3.0), ind(2, f64::INFINITY)]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = [0usize; 3];
        let n = 40_000;
        for _ in 0..n {
            hits[roulette_select(&p, &mut rng).unwrap().chromosome.unload_seq[0]] += 1;
        }
        assert_eq!(hits[2], 0);
        let share = hits[0] as f64 / n as f64;
        assert!((share - 0.75).abs() < 0.01, "{share}");
    }

    #[test]
    fn all_infeasible_selects_nothing() {
        let p = RankedPopulation::new(vec![ind(0, f64::INFINITY)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(roulette_select(&p, &mut rng).is_none());
    }
}
