mod common;

use common::{permutations, random_case, replay, tag, worked_example, yard};
use quaydeck::model::{Chromosome, ShipRowPlan, ShipStack, TimingParams};
use quaydeck::sim::{evaluate, evaluate_with, CycleMode, SimError};

fn three_stack() -> (ShipRowPlan, quaydeck::model::YardState) {
    let plan = ShipRowPlan {
        max_height: 4,
        stacks: vec![
            ShipStack {
                stay: 0,
                unload: 2,
                load: vec![tag("1A")],
            },
            ShipStack {
                stay: 1,
                unload: 1,
                load: vec![tag("2A"), tag("2B")],
            },
            ShipStack {
                stay: 0,
                unload: 3,
                load: vec![tag("3A"), tag("3B")],
            },
        ],
    };
    // every tag free on top of its own stack: no rehandles for any order
    let y = yard(6, &[&["1A"], &["2B", "2A"], &["3B", "3A"]]);
    (plan, y)
}

#[test]
fn three_stacks_every_order() {
    let (plan, y) = three_stack();
    // 6 discharges + 5 loads = 11 moves; (singles, duals) replayed by hand
    let expected = [
        (vec![0, 1, 2], (5, 3)),
        (vec![0, 2, 1], (7, 2)),
        (vec![1, 0, 2], (5, 3)),
        (vec![1, 2, 0], (3, 4)),
        (vec![2, 0, 1], (5, 3)),
        (vec![2, 1, 0], (5, 3)),
    ];
    assert_eq!(expected.len(), permutations(3).len());
    for (seq, (singles, duals)) in expected {
        let chrom = Chromosome {
            unload_seq: seq.clone(),
            yard: y.clone(),
        };
        let (cost, _) = evaluate(&chrom, &plan, &TimingParams::default()).unwrap();
        let oracle = replay(&plan, &y, &seq, true).unwrap();
        assert_eq!(
            (cost.singles, cost.duals, cost.rehandles),
            (oracle.singles, oracle.duals, oracle.rehandles),
            "{seq:?}"
        );
        assert_eq!(cost.moves(), 11);
        assert_eq!((cost.singles, cost.duals), (singles, duals), "{seq:?}");
        assert_eq!(
            cost.total_seconds,
            singles as f64 * 90.0 + duals as f64 * 170.0
        );
    }
}

#[test]
fn worked_rehandle_example() {
    let inst = worked_example();
    assert!(inst.validate().is_empty());
    let per_order: Vec<u64> = permutations(4)
        .into_iter()
        .map(|seq| {
            let chrom = Chromosome {
                unload_seq: seq.clone(),
                yard: inst.yard.clone(),
            };
            let (cost, _) = evaluate(&chrom, &inst.plan, &TimingParams::default()).unwrap();
            assert_eq!(
                Some(cost.rehandles),
                replay(&inst.plan, &inst.yard, &seq, true).map(|c| c.rehandles)
            );
            cost.rehandles
        })
        .collect();
    assert_eq!(per_order.iter().min(), Some(&3));
    // order C, B, A, D
    let chrom = Chromosome {
        unload_seq: vec![2, 1, 0, 3],
        yard: inst.yard.clone(),
    };
    assert_eq!(
        evaluate(&chrom, &inst.plan, &TimingParams::default())
            .unwrap()
            .0
            .rehandles,
        3
    );
}

#[test]
fn random_cases_match_replay() {
    let timing = TimingParams::default();
    let mut infeasible = 0;
    for seed in 0..3000 {
        let (inst, seq) = random_case(seed, 5, 5);
        let chrom = Chromosome {
            unload_seq: seq.clone(),
            yard: inst.yard.clone(),
        };
        for (mode, dual) in [(CycleMode::Dual, true), (CycleMode::SingleOnly, false)] {
            let got = evaluate_with(&chrom, &inst.plan, &timing, mode);
            let want = replay(&inst.plan, &inst.yard, &seq, dual);
            match (got, want) {
                (Ok((cost, trace)), Some(c)) => {
                    assert_eq!(
                        (cost.singles, cost.duals, cost.rehandles),
                        (c.singles, c.duals, c.rehandles),
                        "seed {seed}"
                    );
                    assert_eq!(cost.total_seconds, c.seconds(90.0, 170.0, 60.0));
                    assert_eq!(
                        trace.events.len() as u64,
                        cost.singles + cost.duals + cost.rehandles
                    );
                    assert_eq!(
                        cost.moves(),
                        inst.plan.total_unloads() + inst.plan.total_loads()
                    );
                }
                (Err(SimError::NoCapacity { .. }), None) => infeasible += 1,
                (g, w) => panic!("seed {seed}: simulator {g:?} vs replay {w:?}"),
            }
        }
    }
    assert!(infeasible < 6000);
}
