//! Shared fixtures and a from-scratch replay of the crane rules, kept
//! independent of the library's simulator.

#![allow(dead_code)]

use quaydeck::model::{ContainerTag, Instance, ShipRowPlan, ShipStack, Slot, YardState};

pub fn tag(s: &str) -> ContainerTag {
    s.parse().unwrap()
}

pub fn yard(cap: u32, rows: &[&[&str]]) -> YardState {
    YardState {
        cap,
        stacks: rows
            .iter()
            .map(|r| r.iter().map(|s| s.parse::<Slot>().unwrap()).collect())
            .collect(),
    }
}

/// The worked rehandle example: four ship stacks A..D and four yard stacks.
pub fn worked_example() -> Instance {
    let stack = |i: u16, stay: u32, unload: u32, loads: u16| ShipStack {
        stay,
        unload,
        load: (1..=loads)
            .map(|k| ContainerTag::new(i, k).unwrap())
            .collect(),
    };
    Instance {
        plan: ShipRowPlan {
            max_height: 5,
            stacks: vec![
                stack(1, 2, 3, 2),
                stack(2, 0, 3, 4),
                stack(3, 2, 2, 1),
                stack(4, 2, 2, 3),
            ],
        },
        yard: yard(
            6,
            &[
                &["b", "b", "2A", "2B"],
                &["b", "2C", "4A"],
                &["b", "1A", "1B", "3A"],
                &["b", "b", "4C", "4B", "2D"],
            ],
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counts {
    pub singles: u64,
    pub duals: u64,
    pub rehandles: u64,
}

impl Counts {
    pub fn seconds(&self, a: f64, b: f64, g: f64) -> f64 {
        a * self.singles as f64 + b * self.duals as f64 + g * self.rehandles as f64
    }
}

fn retrieve(yard: &mut [Vec<Option<String>>], cap: usize, want: &str) -> Option<u64> {
    let src = yard
        .iter()
        .position(|s| s.iter().any(|x| x.as_deref() == Some(want)))?;
    let mut moved = 0;
    while yard[src].last()?.as_deref() != Some(want) {
        let blocker = yard[src].pop()?;
        let dest = (0..yard.len())
            .filter(|&i| i != src && yard[i].len() < cap)
            .min_by_key(|&i| (yard[i].len(), i.abs_diff(src), i))?;
        yard[dest].push(blocker);
        moved += 1;
    }
    yard[src].pop();
    Some(moved)
}

/// Replays `seq` (0-based) step by step. `None` when a blocker has nowhere
/// to go or a tag is missing.
pub fn replay(plan: &ShipRowPlan, y: &YardState, seq: &[usize], dual: bool) -> Option<Counts> {
    let cap = y.cap as usize;
    let mut yard: Vec<Vec<Option<String>>> = y
        .stacks
        .iter()
        .map(|s| s.iter().map(|x| x.tag().map(|t| t.to_string())).collect())
        .collect();
    let mut left: Vec<u32> = plan.stacks.iter().map(|s| s.unload).collect();
    let mut loaded = vec![0usize; plan.len()];
    let mut c = Counts {
        singles: 0,
        duals: 0,
        rehandles: 0,
    };

    // first stack in sequence order that still waits for loads
    let target = |loaded: &[usize]| {
        seq.iter()
            .copied()
            .find(|&s| loaded[s] < plan.stacks[s].load.len())
    };

    for (k, &s) in seq.iter().enumerate() {
        while left[s] > 0 {
            let pair = if dual && k > 0 {
                target(&loaded).filter(|&t| left[t] == 0)
            } else {
                None
            };
            left[s] -= 1;
            match pair {
                Some(t) => {
                    let name = plan.stacks[t].load[loaded[t]].to_string();
                    c.rehandles += retrieve(&mut yard, cap, &name)?;
                    loaded[t] += 1;
                    c.duals += 1;
                }
                None => c.singles += 1,
            }
        }
    }
    while let Some(t) = target(&loaded) {
        let name = plan.stacks[t].load[loaded[t]].to_string();
        c.rehandles += retrieve(&mut yard, cap, &name)?;
        loaded[t] += 1;
        c.singles += 1;
    }
    Some(c)
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Small random instance with foreign boxes mixed anywhere in the yard and
/// occasionally a yard too tight to take every blocker, plus a random
/// unloading order.
pub fn random_case(seed: u64, max_stacks: usize, max_h: u32) -> (Instance, Vec<usize>) {
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_stacks);
    let h = rng.gen_range(1..=max_h);
    let stacks: Vec<ShipStack> = (0..n)
        .map(|i| {
            let stay = rng.gen_range(0..=h.min(2));
            let free = h - stay;
            let loads = rng.gen_range(0..=free) as u16;
            ShipStack {
                stay,
                unload: rng.gen_range(0..=free),
                load: (1..=loads)
                    .map(|k| ContainerTag::new(i as u16 + 1, k).unwrap())
                    .collect(),
            }
        })
        .collect();
    let plan = ShipRowPlan {
        max_height: h,
        stacks,
    };
    let mut items: Vec<Slot> = plan.load_tags().map(Slot::Tag).collect();
    let cap = rng.gen_range(1..=5u32);
    let width = items.len().div_ceil(cap as usize).max(1) + rng.gen_range(0..=2);
    let foreign = rng.gen_range(0..=(width * cap as usize - items.len()).min(4));
    items.extend(std::iter::repeat_n(Slot::Foreign, foreign));
    items.shuffle(&mut rng);
    let mut yard = vec![Vec::new(); width];
    for it in items {
        let open: Vec<usize> = (0..width)
            .filter(|&i| yard[i].len() < cap as usize)
            .collect();
        yard[open[rng.gen_range(0..open.len())]].push(it);
    }
    let mut seq = plan.identity_sequence();
    seq.shuffle(&mut rng);
    (
        Instance {
            plan,
            yard: YardState { cap, stacks: yard },
        },
        seq,
    )
}
