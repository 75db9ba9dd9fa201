//! Domain types shared by the simulator, the optimizer and the harness.
//!
//! Ship stacks and yard stacks are stored bottom-up. Indices are 0-based in
//! memory; the serialized forms (tags, unloading sequences) are 1-based.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Identity of an outbound container: the ship stack it is loaded into and
/// its position in that stack's loading order. Renders as `"3A"` (stack 3,
/// first container loaded there).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContainerTag {
    ship_stack: u16,
    tier_label: u16,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid container tag {0:?}")]
pub struct TagParseError(pub String);

impl ContainerTag {
    /// Both coordinates are 1-based; zero is rejected.
    pub fn new(ship_stack: u16, tier_label: u16) -> Option<Self> {
        (ship_stack >= 1 && tier_label >= 1).then_some(Self {
            ship_stack,
            tier_label,
        })
    }

    pub fn ship_stack(&self) -> u16 {
        self.ship_stack
    }

    pub fn tier_label(&self) -> u16 {
        self.tier_label
    }

    /// 0-based index of the ship stack.
    pub fn stack_index(&self) -> usize {
        usize::from(self.ship_stack) - 1
    }
}

// Bijective base-26: A..Z, AA..AZ, BA..
fn label_letters(mut n: u32, out: &mut String) {
    let mut buf = Vec::new();
    while n > 0 {
        let rem = (n - 1) % 26;
        buf.push(b'A' + rem as u8);
        n = (n - 1) / 26;
    }
    buf.reverse();
    out.push_str(std::str::from_utf8(&buf).expect("ascii"));
}

impl fmt::Display for ContainerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = self.ship_stack.to_string();
        label_letters(u32::from(self.tier_label), &mut s);
        f.write_str(&s)
    }
}

impl FromStr for ContainerTag {
    type Err = TagParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || TagParseError(s.to_string());
        let split = s.find(|c: char| !c.is_ascii_digit()).ok_or_else(err)?;
        let (digits, letters) = s.split_at(split);
        if digits.is_empty() || letters.is_empty() {
            return Err(err());
        }
        let stack: u16 = digits.parse().map_err(|_| err())?;
        let mut label: u32 = 0;
        for c in letters.chars() {
            if !c.is_ascii_uppercase() {
                return Err(err());
            }
            label = label * 26 + (c as u32 - 'A' as u32 + 1);
            if label > u32::from(u16::MAX) {
                return Err(err());
            }
        }
        ContainerTag::new(stack, label as u16).ok_or_else(err)
    }
}

impl Serialize for ContainerTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ContainerTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One ship stack of the row being worked.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShipStack {
    /// Containers that remain aboard; they sit at the bottom and never move.
    pub stay: u32,
    /// Containers to discharge (`U_c`).
    pub unload: u32,
    /// Containers to load, bottom-up (`L_c`).
    pub load: Vec<ContainerTag>,
}

impl ShipStack {
    pub fn load_count(&self) -> usize {
        self.load.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShipRowPlan {
    pub max_height: u32,
    pub stacks: Vec<ShipStack>,
}

impl ShipRowPlan {
    pub fn len(&self) -> usize {
        self.stacks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stacks.is_empty()
    }

    pub fn total_unloads(&self) -> u64 {
        self.stacks.iter().map(|s| u64::from(s.unload)).sum()
    }

    pub fn total_loads(&self) -> u64 {
        self.stacks.iter().map(|s| s.load.len() as u64).sum()
    }

    /// All outbound tags, stack by stack, in loading order.
    pub fn load_tags(&self) -> impl Iterator<Item = ContainerTag> + '_ {
        self.stacks.iter().flat_map(|s| s.load.iter().copied())
    }

    pub fn identity_sequence(&self) -> Vec<usize> {
        (0..self.stacks.len()).collect()
    }
}

/// A yard slot: a container bound for another ship (`"b"`) or an outbound
/// container of this row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Foreign,
    Tag(ContainerTag),
}

impl Slot {
    pub fn tag(&self) -> Option<ContainerTag> {
        match self {
            Slot::Foreign => None,
            Slot::Tag(t) => Some(*t),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Foreign => f.write_str("b"),
            Slot::Tag(t) => t.fmt(f),
        }
    }
}

impl FromStr for Slot {
    type Err = TagParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "b" {
            Ok(Slot::Foreign)
        } else {
            s.parse().map(Slot::Tag)
        }
    }
}

impl Serialize for Slot {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Slot {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dockyard bay: a line of stacks where adjacent indices are physically
/// adjacent. Each stack is listed bottom-up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YardState {
    pub cap: u32,
    pub stacks: Vec<Vec<Slot>>,
}

impl YardState {
    pub fn heights(&self) -> Vec<usize> {
        self.stacks.iter().map(Vec::len).collect()
    }

    pub fn tags(&self) -> impl Iterator<Item = ContainerTag> + '_ {
        self.stacks.iter().flatten().filter_map(Slot::tag)
    }

    pub fn tag_count(&self) -> usize {
        self.tags().count()
    }

    pub fn find(&self, tag: ContainerTag) -> Option<(usize, usize)> {
        self.stacks.iter().enumerate().find_map(|(i, s)| {
            s.iter()
                .position(|slot| *slot == Slot::Tag(tag))
                .map(|p| (i, p))
        })
    }

    pub fn foreign_counts(&self) -> Vec<usize> {
        self.stacks
            .iter()
            .map(|s| s.iter().filter(|x| **x == Slot::Foreign).count())
            .collect()
    }

    /// Sorted multiset of outbound tags.
    pub fn sorted_tags(&self) -> Vec<ContainerTag> {
        let mut v: Vec<_> = self.tags().collect();
        v.sort_unstable();
        v
    }
}

/// Composite solution: the unloading order of ship stacks plus the dockyard
/// arrangement of the outbound containers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chromosome {
    /// 0-based ship stack indices.
    pub unload_seq: Vec<usize>,
    pub yard: YardState,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingParams {
    /// Seconds per single cycle.
    pub alpha: f64,
    /// Seconds per dual cycle.
    pub beta: f64,
    /// Seconds per yard rehandle.
    pub gamma: f64,
}

impl Default for TimingParams {
    fn default() -> Self {
        Self {
            alpha: 90.0,
            beta: 170.0,
            gamma: 60.0,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(ModelError::Timing { name, value: v });
            }
        }
        Ok(())
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            alpha: self.alpha * k,
            beta: self.beta * k,
            gamma: self.gamma * k,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("timing parameter {name} must be finite and positive, got {value}")]
    Timing { name: &'static str, value: f64 },
    #[error("unloading sequence is not a permutation of 1..={0}")]
    BadSequence(usize),
}

/// Counts and completion times produced by one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub singles: u64,
    pub duals: u64,
    pub rehandles: u64,
    pub total_seconds: f64,
    /// Unload completion time per ship stack (`TU_c`), indexed by stack;
    /// 0 for stacks with nothing to discharge.
    pub tu: Vec<f64>,
    /// Load completion time per ship stack (`TL_c`), indexed by stack.
    pub tl: Vec<f64>,
}

impl CostBreakdown {
    pub fn total_minutes(&self) -> f64 {
        self.total_seconds / 60.0
    }

    /// Crane time excluding yard rehandles.
    pub fn cycle_seconds(&self, timing: &TimingParams) -> f64 {
        timing.alpha * self.singles as f64 + timing.beta * self.duals as f64
    }

    pub fn moves(&self) -> u64 {
        self.singles + 2 * self.duals
    }
}

/// Checks `seq` is a permutation of `0..n`.
pub fn is_permutation(seq: &[usize], n: usize) -> bool {
    if seq.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &s in seq {
        if s >= n || seen[s] {
            return false;
        }
        seen[s] = true;
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Ship stack (0-based) would exceed the maximum height.
    ShipHeight {
        stack: usize,
        what: &'static str,
        height: u64,
        max: u32,
    },
    /// A load tag names a different ship stack than the one it is listed under.
    MisplacedTag {
        stack: usize,
        tag: ContainerTag,
    },
    DuplicatePlanTag(ContainerTag),
    DuplicateYardTag(ContainerTag),
    /// Yard holds a tag no load list asks for.
    UnknownTag(ContainerTag),
    /// A load tag is missing from the yard.
    MissingTag(ContainerTag),
    YardHeight {
        stack: usize,
        height: usize,
        cap: u32,
    },
    NoShipStacks,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::ShipHeight {
                stack,
                what,
                height,
                max,
            } => write!(
                f,
                "ship stack {}: stay + {what} = {height} exceeds max height {max}",
                stack + 1
            ),
            Violation::MisplacedTag { stack, tag } => {
                write!(
                    f,
                    "ship stack {}: load tag {tag} names another stack",
                    stack + 1
                )
            }
            Violation::DuplicatePlanTag(t) => write!(f, "duplicate tag {t} in loading plan"),
            Violation::DuplicateYardTag(t) => write!(f, "duplicate tag {t} in yard"),
            Violation::UnknownTag(t) => write!(f, "unknown tag {t} in yard"),
            Violation::MissingTag(t) => write!(f, "tag {t} missing from yard"),
            Violation::YardHeight { stack, height, cap } => write!(
                f,
                "yard stack {}: height cap exceeded ({height} > {cap})",
                stack + 1
            ),
            Violation::NoShipStacks => f.write_str("plan has no ship stacks"),
        }
    }
}

/// Lists every broken instance invariant. Empty means the pair is usable.
pub fn validate_instance(plan: &ShipRowPlan, yard: &YardState) -> Vec<Violation> {
    let mut out = Vec::new();
    if plan.stacks.is_empty() {
        out.push(Violation::NoShipStacks);
    }
    let mut plan_tags: BTreeMap<ContainerTag, usize> = BTreeMap::new();
    for (i, s) in plan.stacks.iter().enumerate() {
        let unload_h = u64::from(s.stay) + u64::from(s.unload);
        if unload_h > u64::from(plan.max_height) {
            out.push(Violation::ShipHeight {
                stack: i,
                what: "unload",
                height: unload_h,
                max: plan.max_height,
            });
        }
        let load_h = u64::from(s.stay) + s.load.len() as u64;
        if load_h > u64::from(plan.max_height) {
            out.push(Violation::ShipHeight {
                stack: i,
                what: "load",
                height: load_h,
                max: plan.max_height,
            });
        }
        for &t in &s.load {
            if t.stack_index() != i {
                out.push(Violation::MisplacedTag { stack: i, tag: t });
            }
            let n = plan_tags.entry(t).or_default();
            *n += 1;
            if *n == 2 {
                out.push(Violation::DuplicatePlanTag(t));
            }
        }
    }

    for (i, s) in yard.stacks.iter().enumerate() {
        if s.len() > yard.cap as usize {
            out.push(Violation::YardHeight {
                stack: i,
                height: s.len(),
                cap: yard.cap,
            });
        }
    }

    let mut seen = HashSet::new();
    for t in yard.tags() {
        if !seen.insert(t) {
            out.push(Violation::DuplicateYardTag(t));
        } else if !plan_tags.contains_key(&t) {
            out.push(Violation::UnknownTag(t));
        }
    }
    for t in plan_tags.keys() {
        if !seen.contains(t) {
            out.push(Violation::MissingTag(*t));
        }
    }
    out
}

/// A plan together with its dockyard template.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub plan: ShipRowPlan,
    pub yard: YardState,
}

impl Instance {
    pub fn validate(&self) -> Vec<Violation> {
        validate_instance(&self.plan, &self.yard)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}
