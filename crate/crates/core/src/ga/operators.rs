//! Variation operators for both chromosome parts.
//!
//! The 1D part is a permutation of ship stacks. The 2D part is the dockyard
//! plan, handled as one row of outbound tags per yard stack sitting on that
//! stack's fixed base of foreign containers.

use std::collections::HashSet;
use std::hash::Hash;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::model::{ContainerTag, Slot, YardState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperatorError {
    #[error("no yard stack has room for dropped container {0}")]
    RepairOverflow(ContainerTag),
    #[error("parent yards differ in shape (stack count or cap)")]
    ParentMismatch,
    #[error("yard template cannot hold {tags} outbound containers (room for {room})")]
    InfeasibleTemplate { tags: usize, room: usize },
}

/// Two-point crossover with an explicit segment `[lo, hi)`.
///
/// Each child keeps its own parent outside the segment and receives the
/// other parent's genes inside it. Received genes already present outside
/// the segment are dropped, and the genes that went missing are appended in
/// the order they had in the child's own parent.
pub fn crossover_1d_at<T: Copy + Eq + Hash>(
    parent_a: &[T],
    parent_b: &[T],
    lo: usize,
    hi: usize,
) -> (Vec<T>, Vec<T>) {
    debug_assert_eq!(parent_a.len(), parent_b.len());
    let hi = hi.min(parent_a.len());
    let lo = lo.min(hi);
    (
        splice_1d(parent_a, parent_b, lo, hi),
        splice_1d(parent_b, parent_a, lo, hi),
    )
}

fn splice_1d<T: Copy + Eq + Hash>(own: &[T], donor: &[T], lo: usize, hi: usize) -> Vec<T> {
    let outside: HashSet<T> = own[..lo].iter().chain(&own[hi..]).copied().collect();
    let mut child = Vec::with_capacity(own.len());
    child.extend_from_slice(&own[..lo]);
    child.extend(donor[lo..hi].iter().filter(|g| !outside.contains(g)));
    child.extend_from_slice(&own[hi..]);
    let present: HashSet<T> = child.iter().copied().collect();
    child.extend(own[lo..hi].iter().filter(|g| !present.contains(g)));
    child
}

pub fn crossover_1d<T: Copy + Eq + Hash, R: Rng + ?Sized>(
    parent_a: &[T],
    parent_b: &[T],
    rng: &mut R,
) -> (Vec<T>, Vec<T>) {
    let n = parent_a.len();
    let mut x = rng.gen_range(0..=n);
    let mut y = rng.gen_range(0..=n);
    if x > y {
        std::mem::swap(&mut x, &mut y);
    }
    crossover_1d_at(parent_a, parent_b, x, y)
}

/// Swap mutation at fixed positions.
pub fn mutate_1d_at<T: Copy>(seq: &[T], i: usize, j: usize) -> Vec<T> {
    let mut out = seq.to_vec();
    out.swap(i, j);
    out
}

pub fn mutate_1d<T: Copy, R: Rng + ?Sized>(seq: &[T], rng: &mut R) -> Vec<T> {
    if seq.is_empty() {
        return Vec::new();
    }
    let i = rng.gen_range(0..seq.len());
    let j = rng.gen_range(0..seq.len());
    mutate_1d_at(seq, i, j)
}

/// Outbound tags of one yard, one row per stack, on top of a foreign base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct YardRows {
    pub cap: usize,
    pub base: Vec<usize>,
    pub rows: Vec<Vec<ContainerTag>>,
}

impl YardRows {
    /// Splits a yard into foreign base counts and tag rows. Foreign boxes
    /// interleaved with tags are counted into the base.
    pub fn from_yard(yard: &YardState) -> Self {
        let base = yard.foreign_counts();
        let rows = yard
            .stacks
            .iter()
            .map(|s| s.iter().filter_map(Slot::tag).collect())
            .collect();
        Self {
            cap: yard.cap as usize,
            base,
            rows,
        }
    }

    pub fn to_yard(&self) -> YardState {
        YardState {
            cap: self.cap as u32,
            stacks: self
                .base
                .iter()
                .zip(&self.rows)
                .map(|(&b, row)| {
                    std::iter::repeat_n(Slot::Foreign, b)
                        .chain(row.iter().map(|&t| Slot::Tag(t)))
                        .collect()
                })
                .collect(),
        }
    }

    fn height(&self, i: usize) -> usize {
        self.base[i] + self.rows[i].len()
    }

    /// Lowest stack with room, ties to the lower index.
    fn lowest_open(&self) -> Option<usize> {
        (0..self.rows.len())
            .filter(|&i| self.height(i) < self.cap)
            .min_by_key(|&i| (self.height(i), i))
    }

    fn flat(&self) -> impl Iterator<Item = ContainerTag> + '_ {
        self.rows.iter().flatten().copied()
    }
}

/// Substring cut for the 2D crossover: the segment runs in row-major order
/// from `start` (inclusive) to `end` (exclusive), as (row, column) pairs.
/// Rows strictly between the two are exchanged whole; the boundary rows are
/// split at their column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubstringCut {
    pub start: (usize, usize),
    pub end: (usize, usize),
}

fn splice_2d(
    own: &YardRows,
    donor: &YardRows,
    cut: SubstringCut,
) -> Result<YardRows, OperatorError> {
    let (r1, c1) = cut.start;
    let (r2, c2) = cut.end;
    // (tag, received from donor)
    let mut rows: Vec<Vec<(ContainerTag, bool)>> = Vec::with_capacity(own.rows.len());
    for (r, (mine, theirs)) in own.rows.iter().zip(&donor.rows).enumerate() {
        if r < r1 || r > r2 {
            rows.push(mine.iter().map(|&t| (t, false)).collect());
            continue;
        }
        let lo = if r == r1 { c1 } else { 0 };
        let hi = if r == r2 { c2 } else { usize::MAX };
        let clamp = |v: usize, len: usize| v.min(len);
        let mut row = Vec::new();
        row.extend(mine[..clamp(lo, mine.len())].iter().map(|&t| (t, false)));
        let (dlo, dhi) = (clamp(lo, theirs.len()), clamp(hi, theirs.len()));
        if dlo < dhi {
            row.extend(theirs[dlo..dhi].iter().map(|&t| (t, true)));
        }
        row.extend(mine[clamp(hi, mine.len())..].iter().map(|&t| (t, false)));
        rows.push(row);
    }

    let kept: HashSet<ContainerTag> = rows
        .iter()
        .flatten()
        .filter(|(_, received)| !received)
        .map(|(t, _)| *t)
        .collect();
    let mut child = YardRows {
        cap: own.cap,
        base: own.base.clone(),
        rows: rows
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .filter(|(t, received)| !received || !kept.contains(t))
                    .map(|(t, _)| t)
                    .collect()
            })
            .collect(),
    };

    let present: HashSet<ContainerTag> = child.flat().collect();
    let dropped: Vec<ContainerTag> = own.flat().filter(|t| !present.contains(t)).collect();
    for t in dropped {
        let i = child
            .lowest_open()
            .ok_or(OperatorError::RepairOverflow(t))?;
        child.rows[i].push(t);
    }
    Ok(child)
}

fn check_parents(a: &YardState, b: &YardState) -> Result<(), OperatorError> {
    if a.cap != b.cap || a.stacks.len() != b.stacks.len() {
        return Err(OperatorError::ParentMismatch);
    }
    Ok(())
}

/// 2D substring crossover with an explicit cut. Foreign bases stay with
/// their own parent; only outbound tags are exchanged.
pub fn crossover_2d_at(
    parent_a: &YardState,
    parent_b: &YardState,
    cut: SubstringCut,
) -> Result<(YardState, YardState), OperatorError> {
    check_parents(parent_a, parent_b)?;
    let a = YardRows::from_yard(parent_a);
    let b = YardRows::from_yard(parent_b);
    Ok((
        splice_2d(&a, &b, cut)?.to_yard(),
        splice_2d(&b, &a, cut)?.to_yard(),
    ))
}

pub fn crossover_2d<R: Rng + ?Sized>(
    parent_a: &YardState,
    parent_b: &YardState,
    rng: &mut R,
) -> Result<(YardState, YardState), OperatorError> {
    check_parents(parent_a, parent_b)?;
    let n = parent_a.stacks.len();
    if n == 0 {
        return Ok((parent_a.clone(), parent_b.clone()));
    }
    let width = |r: usize| {
        let count = |y: &YardState| y.stacks[r].iter().filter(|s| s.tag().is_some()).count();
        count(parent_a).max(count(parent_b))
    };
    let mut r1 = rng.gen_range(0..n);
    let mut r2 = rng.gen_range(0..n);
    if r1 > r2 {
        std::mem::swap(&mut r1, &mut r2);
    }
    let mut c1 = rng.gen_range(0..=width(r1));
    let mut c2 = rng.gen_range(0..=width(r2));
    if r1 == r2 && c1 > c2 {
        std::mem::swap(&mut c1, &mut c2);
    }
    crossover_2d_at(
        parent_a,
        parent_b,
        SubstringCut {
            start: (r1, c1),
            end: (r2, c2),
        },
    )
}

/// Swaps the tag at column `c1` of row `r1` with the one at column `c2` of
/// row `r2`. Columns count outbound tags only.
pub fn mutate_2d_at(yard: &YardState, a: (usize, usize), b: (usize, usize)) -> YardState {
    let mut out = yard.clone();
    let slot = |y: &YardState, (r, c): (usize, usize)| {
        y.stacks[r]
            .iter()
            .enumerate()
            .filter(|(_, s)| s.tag().is_some())
            .nth(c)
            .map(|(i, _)| i)
            .expect("column addresses an outbound tag")
    };
    let ia = slot(yard, a);
    let ib = slot(yard, b);
    let va = out.stacks[a.0][ia];
    let vb = out.stacks[b.0][ib];
    out.stacks[a.0][ia] = vb;
    out.stacks[b.0][ib] = va;
    out
}

pub fn mutate_2d<R: Rng + ?Sized>(yard: &YardState, rng: &mut R) -> YardState {
    let rows: Vec<(usize, usize)> = yard
        .stacks
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.iter().filter(|x| x.tag().is_some()).count()))
        .filter(|&(_, n)| n > 0)
        .collect();
    if rows.is_empty() {
        return yard.clone();
    }
    let (r1, n1) = rows[rng.gen_range(0..rows.len())];
    let (r2, n2) = rows[rng.gen_range(0..rows.len())];
    let c1 = rng.gen_range(0..n1);
    let c2 = rng.gen_range(0..n2);
    mutate_2d_at(yard, (r1, c1), (r2, c2))
}

/// Random dockyard plan: the template's outbound tags are shuffled and
/// dropped one by one onto uniformly chosen stacks with room. Foreign boxes
/// form each stack's base.
pub fn random_yard<R: Rng + ?Sized>(
    template: &YardState,
    rng: &mut R,
) -> Result<YardState, OperatorError> {
    let src = YardRows::from_yard(template);
    let mut tags: Vec<ContainerTag> = src.flat().collect();
    let room: usize = src.base.iter().map(|&b| src.cap.saturating_sub(b)).sum();
    if room < tags.len() {
        return Err(OperatorError::InfeasibleTemplate {
            tags: tags.len(),
            room,
        });
    }
    tags.shuffle(rng);
    let mut out = YardRows {
        cap: src.cap,
        base: src.base.clone(),
        rows: vec![Vec::new(); src.rows.len()],
    };
    let mut open: Vec<usize> = (0..out.rows.len())
        .filter(|&i| out.height(i) < out.cap)
        .collect();
    for t in tags {
        let k = rng.gen_range(0..open.len());
        let i = open[k];
        out.rows[i].push(t);
        if out.height(i) >= out.cap {
            open.swap_remove(k);
        }
    }
    Ok(out.to_yard())
}

/// Moves the tag at (row, column) to the top of `dest`.
pub fn relocate_tag(yard: &YardState, from: (usize, usize), dest: usize) -> YardState {
    let mut rows = YardRows::from_yard(yard);
    let t = rows.rows[from.0].remove(from.1);
    rows.rows[dest].push(t);
    rows.to_yard()
}
