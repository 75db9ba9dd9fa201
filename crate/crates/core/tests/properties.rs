mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_case;
use quaydeck::ga::{
    crossover_1d, crossover_1d_at, crossover_2d, mutate_1d, mutate_2d, random_yard,
};
use quaydeck::model::{Chromosome, ContainerTag, Instance, TimingParams, YardState};
use quaydeck::scenario::{generate_instance, ScenarioConfig};
use quaydeck::sim::{evaluate_with, CycleMode, SimTrace};
use quaydeck::stats::{paired_t_test, pearson_r, two_tailed_p, PairedSample};

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn two_perms() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..20).prop_flat_map(|n| (perm(n), perm(n)))
}

fn is_perm(v: &[usize]) -> bool {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.iter().enumerate().all(|(i, &x)| i == x)
}

/// Two yards with the same foreign base and tag set, shuffled apart.
fn yard_pair(seed: u64) -> Option<(YardState, YardState)> {
    let (inst, _) = random_case(seed, 6, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let a = random_yard(&inst.yard, &mut rng).ok()?;
    let b = random_yard(&inst.yard, &mut rng).ok()?;
    Some((a, b))
}

fn shape(y: &YardState) -> (Vec<usize>, Vec<ContainerTag>) {
    (y.foreign_counts(), y.sorted_tags())
}

proptest! {
    #[test]
    fn crossover_1d_keeps_permutations((a, b) in two_perms(), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = crossover_1d(&a, &b, &mut rng);
        prop_assert!(is_perm(&x));
        prop_assert!(is_perm(&y));
    }

    #[test]
    fn crossover_1d_outside_segment_is_own_parent((a, b) in two_perms(), lo in 0usize..20, len in 0usize..20) {
        let lo = lo.min(a.len());
        let hi = (lo + len).min(a.len());
        let (x, _) = crossover_1d_at(&a, &b, lo, hi);
        prop_assert_eq!(&x[..lo], &a[..lo]);
    }

    #[test]
    fn mutate_1d_keeps_permutation(a in (1usize..30).prop_flat_map(perm), seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = mutate_1d(&a, &mut rng);
        prop_assert!(is_perm(&m));
        prop_assert!(a.iter().zip(&m).filter(|(p, q)| p != q).count() <= 2);
    }

    #[test]
    fn yard_operators_keep_tags_and_caps(seed: u64) {
        if let Some((a, b)) = yard_pair(seed) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (x, y) = crossover_2d(&a, &b, &mut rng).unwrap();
            for c in [&x, &y, &mutate_2d(&a, &mut rng)] {
                prop_assert_eq!(shape(c), shape(&a));
                prop_assert!(c.stacks.iter().all(|s| s.len() <= c.cap as usize));
            }
            let m = mutate_2d(&a, &mut rng);
            prop_assert_eq!(m.heights(), a.heights());
        }
    }

    #[test]
    fn cost_identity_any_timing(seed: u64, alpha in 1.0f64..200.0, beta in 1.0f64..400.0, gamma in 1.0f64..100.0) {
        let (inst, seq) = random_case(seed, 6, 6);
        let timing = TimingParams { alpha, beta, gamma };
        let chrom = Chromosome { unload_seq: seq, yard: inst.yard.clone() };
        if let Ok((c, _)) = evaluate_with(&chrom, &inst.plan, &timing, CycleMode::Dual) {
            let t = alpha * c.singles as f64 + beta * c.duals as f64 + gamma * c.rehandles as f64;
            prop_assert!((c.total_seconds - t).abs() <= 1e-9 * t.max(1.0));
            prop_assert_eq!(c.moves(), inst.plan.total_unloads() + inst.plan.total_loads());
        }
    }

    #[test]
    fn completion_times_are_ordered(seed: u64) {
        let (inst, seq) = random_case(seed, 6, 6);
        let timing = TimingParams::default();
        let chrom = Chromosome { unload_seq: seq, yard: inst.yard.clone() };
        for mode in [CycleMode::Dual, CycleMode::SingleOnly] {
            if let Ok((c, _)) = evaluate_with(&chrom, &inst.plan, &timing, mode) {
                for (i, s) in inst.plan.stacks.iter().enumerate() {
                    let gap = c.tl[i] - c.tu[i];
                    prop_assert!(gap >= timing.alpha * s.load.len() as f64 - 1e-9, "stack {}: {}", i, gap);
                    if s.load.is_empty() {
                        prop_assert_eq!(c.tl[i], c.tu[i]);
                    }
                    prop_assert!(c.tl[i] <= c.total_seconds);
                }
                if mode == CycleMode::SingleOnly {
                    prop_assert_eq!(c.duals, 0);
                }
            }
        }
    }

    #[test]
    fn trace_csv_round_trips(seed: u64) {
        let (inst, seq) = random_case(seed, 5, 5);
        let chrom = Chromosome { unload_seq: seq, yard: inst.yard.clone() };
        if let Ok((_, trace)) = evaluate_with(&chrom, &inst.plan, &TimingParams::default(), CycleMode::Dual) {
            let mut buf = Vec::new();
            trace.write_csv(&mut buf).unwrap();
            let back = SimTrace::read_csv(&buf[..]).unwrap();
            prop_assert_eq!(back, trace);
        }
    }

    #[test]
    fn instance_json_round_trips(seed: u64) {
        let (inst, _) = random_case(seed, 6, 6);
        let back = Instance::from_json(&inst.to_json()).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn tags_round_trip(stack in 1u16..=u16::MAX, label in 1u16..=u16::MAX) {
        let t = ContainerTag::new(stack, label).unwrap();
        prop_assert_eq!(t.to_string().parse::<ContainerTag>().unwrap(), t);
    }

    #[test]
    fn generated_instances_are_valid(seed: u64, stacks in 1usize..12, h in 1u32..8, cap in 5u32..9) {
        let cfg = ScenarioConfig { yard_cap: cap, ..ScenarioConfig::new(stacks, h).with_seed(seed) };
        let inst = generate_instance(&cfg).unwrap();
        prop_assert!(inst.validate().is_empty());
        prop_assert_eq!(inst, generate_instance(&cfg).unwrap());
    }

    #[test]
    fn t_test_antisymmetric_and_shift_invariant(
        a in prop::collection::vec(0.0f64..100.0, 3..25),
        noise in prop::collection::vec(-10.0f64..10.0, 25),
        shift in -50.0f64..50.0,
    ) {
        let b: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + e).collect();
        let s = PairedSample::new(a.clone(), b.clone()).unwrap();
        if let Ok(r) = paired_t_test(&s, 0.05) {
            let swapped = paired_t_test(&PairedSample::new(b.clone(), a.clone()).unwrap(), 0.05).unwrap();
            prop_assert!((r.t + swapped.t).abs() <= 1e-9 * r.t.abs().max(1.0));
            prop_assert!((r.p - swapped.p).abs() <= 1e-9);
            let moved = PairedSample::new(
                a.iter().map(|x| x + shift).collect(),
                b.iter().map(|x| x + shift).collect(),
            ).unwrap();
            let m = paired_t_test(&moved, 0.05).unwrap();
            prop_assert!((r.t - m.t).abs() <= 1e-6 * r.t.abs().max(1.0));
            prop_assert!((r.p - m.p).abs() <= 1e-6);
            prop_assert!((0.0..=1.0).contains(&r.p));
            prop_assert_eq!(r.significant, r.t.abs() > r.critical);
            if let (Ok(x), Ok(y)) = (pearson_r(&s), pearson_r(&moved)) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn p_value_decreases_in_t(df in 1usize..60, t1 in 0.0f64..20.0, dt in 0.0f64..5.0) {
        prop_assert!(two_tailed_p(t1 + dt, df) <= two_tailed_p(t1, df) + 1e-15);
        prop_assert!((two_tailed_p(-t1, df) - two_tailed_p(t1, df)).abs() < 1e-15);
    }
}

#[test]
fn distinct_seeds_give_distinct_instances() {
    let cfg = ScenarioConfig::new(10, 5);
    let mut seen = BTreeMap::new();
    for seed in 0..1000u64 {
        let json = generate_instance(&cfg.clone().with_seed(seed))
            .unwrap()
            .to_json();
        if let Some(prev) = seen.insert(json, seed) {
            panic!("seeds {prev} and {seed} collide");
        }
    }
}
