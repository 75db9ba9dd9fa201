//! Crane/yard simulator: replays an unloading sequence and dockyard
//! arrangement against a row plan and reports cycle and rehandle counts.
//!
//! Unloading runs stack by stack in sequence order. The first stack is
//! discharged with single cycles. Every later discharge is paired with a
//! load (a dual cycle) when the current loading stack is already empty of
//! inbound containers; otherwise it is a single cycle. Loading walks the
//! ship stacks in the same sequence order, one stack to completion before
//! the next. Loads left over once everything is discharged run as single
//! cycles. Each load retrieves its container from the yard, relocating any
//! blockers to the nearest lowest stack.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::model::{
    is_permutation, Chromosome, ContainerTag, CostBreakdown, ShipRowPlan, Slot, TimingParams,
    YardState,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("container {0} not found in yard")]
    NotFound(ContainerTag),
    #[error("no yard stack other than {} has spare capacity", .stack + 1)]
    NoCapacity { stack: usize },
    #[error("unloading sequence is not a permutation of the ship stacks")]
    BadSequence,
}

/// Whether discharges may be paired with loads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CycleMode {
    #[default]
    Dual,
    /// Every move is a single cycle: discharge everything, then load.
    SingleOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    SingleUnload,
    SingleLoad,
    Dual,
    Rehandle,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::SingleUnload => "single-unload",
            EventKind::SingleLoad => "single-load",
            EventKind::Dual => "dual",
            EventKind::Rehandle => "rehandle",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "single-unload" => EventKind::SingleUnload,
            "single-load" => EventKind::SingleLoad,
            "dual" => EventKind::Dual,
            "rehandle" => EventKind::Rehandle,
            _ => return None,
        })
    }
}

/// One crane cycle or yard relocation.
///
/// For `Dual`, `ship_stack` is the stack being discharged and `tag` the
/// container loaded in the same cycle (its own stack is `tag.ship_stack()`).
/// For `Rehandle`, `ship_stack` is the stack being served, `yard_stack` the
/// stack the blocker was lifted from and `tag` the blocker (none if foreign).
#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub kind: EventKind,
    pub ship_stack: usize,
    pub yard_stack: Option<usize>,
    pub tag: Option<ContainerTag>,
    /// Completion time in seconds.
    pub timestamp: f64,
}

impl SimEvent {
    /// Ship stacks discharged by this event.
    pub fn unloads_from(&self) -> Option<usize> {
        matches!(self.kind, EventKind::SingleUnload | EventKind::Dual).then_some(self.ship_stack)
    }

    /// Ship stack loaded by this event.
    pub fn loads_into(&self) -> Option<usize> {
        match self.kind {
            EventKind::SingleLoad | EventKind::Dual => self.tag.map(|t| t.stack_index()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub events: Vec<SimEvent>,
}

#[derive(Debug, Error)]
pub enum TraceCsvError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub const TRACE_CSV_HEADER: &str = "kind,ship_stack,yard_stack,tag,timestamp_s";

impl SimTrace {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")?;
        let mut line = String::new();
        for e in &self.events {
            line.clear();
            let _ = write!(line, "{},{},", e.kind.as_str(), e.ship_stack + 1);
            if let Some(y) = e.yard_stack {
                let _ = write!(line, "{}", y + 1);
            }
            line.push(',');
            if let Some(t) = e.tag {
                let _ = write!(line, "{t}");
            }
            let _ = write!(line, ",{}", e.timestamp);
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self, TraceCsvError> {
        let mut events = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            if i == 0 {
                if line.trim() != TRACE_CSV_HEADER {
                    return Err(TraceCsvError::Parse {
                        line: n,
                        msg: "unexpected header".into(),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let perr = |msg: &str| TraceCsvError::Parse {
                line: n,
                msg: msg.to_string(),
            };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 5 {
                return Err(perr("expected 5 columns"));
            }
            let kind = EventKind::parse(cols[0]).ok_or_else(|| perr("bad kind"))?;
            let ship_stack = cols[1]
                .parse::<usize>()
                .ok()
                .and_then(|v| v.checked_sub(1))
                .ok_or_else(|| perr("bad ship_stack"))?;
            let yard_stack = if cols[2].is_empty() {
                None
            } else {
                Some(
                    cols[2]
                        .parse::<usize>()
                        .ok()
                        .and_then(|v| v.checked_sub(1))
                        .ok_or_else(|| perr("bad yard_stack"))?,
                )
            };
            let tag = if cols[3].is_empty() {
                None
            } else {
                Some(cols[3].parse().map_err(|_| perr("bad tag"))?)
            };
            let timestamp = cols[4].parse().map_err(|_| perr("bad timestamp"))?;
            events.push(SimEvent {
                kind,
                ship_stack,
                yard_stack,
                tag,
                timestamp,
            });
        }
        Ok(Self { events })
    }
}

/// Stack-of-stacks storage the retrieval logic runs against.
pub(crate) trait Bay {
    type Item: Copy;
    fn stack_count(&self) -> usize;
    fn height(&self, i: usize) -> usize;
    fn cap(&self) -> usize;
    fn locate(&self, tag: ContainerTag) -> Option<(usize, usize)>;
    fn pop(&mut self, i: usize) -> Self::Item;
    fn push(&mut self, i: usize, item: Self::Item);
    fn item_tag(&self, item: Self::Item) -> Option<ContainerTag>;
}

impl Bay for YardState {
    type Item = Slot;

    fn stack_count(&self) -> usize {
        self.stacks.len()
    }

    fn height(&self, i: usize) -> usize {
        self.stacks[i].len()
    }

    fn cap(&self) -> usize {
        self.cap as usize
    }

    fn locate(&self, tag: ContainerTag) -> Option<(usize, usize)> {
        self.find(tag)
    }

    fn pop(&mut self, i: usize) -> Slot {
        self.stacks[i].pop().expect("pop from non-empty stack")
    }

    fn push(&mut self, i: usize, item: Slot) {
        self.stacks[i].push(item);
    }

    fn item_tag(&self, item: Slot) -> Option<ContainerTag> {
        item.tag()
    }
}

fn nearest_lowest<B: Bay>(bay: &B, source: usize) -> Result<usize, SimError> {
    let cap = bay.cap();
    let mut best: Option<(usize, usize, usize)> = None;
    for i in 0..bay.stack_count() {
        if i == source {
            continue;
        }
        let h = bay.height(i);
        if h >= cap {
            continue;
        }
        let key = (h, i.abs_diff(source), i);
        if best.is_none_or(|b| key < b) {
            best = Some(key);
        }
    }
    best.map(|(_, _, i)| i)
        .ok_or(SimError::NoCapacity { stack: source })
}

/// Relocation destination for a blocker lifted from `source`: the lowest
/// other stack with spare capacity, ties broken by distance to `source` and
/// then by lower index.
pub fn nearest_lowest_stack(yard: &YardState, source: usize) -> Result<usize, SimError> {
    nearest_lowest(yard, source)
}

/// Observer of blocker relocations: (yard stack lifted from, blocker tag).
type MoveSink<'a> = &'a mut dyn FnMut(usize, Option<ContainerTag>);

fn retrieve<B: Bay>(
    bay: &mut B,
    target: ContainerTag,
    on_move: MoveSink<'_>,
) -> Result<(u32, usize), SimError> {
    let (stack, pos) = bay.locate(target).ok_or(SimError::NotFound(target))?;
    let mut moved = 0;
    while bay.height(stack) > pos + 1 {
        let dest = nearest_lowest(bay, stack)?;
        let item = bay.pop(stack);
        bay.push(dest, item);
        on_move(stack, bay.item_tag(item));
        moved += 1;
    }
    bay.pop(stack);
    Ok((moved, stack))
}

/// Digs `target` out of the yard and removes it. Every container above it is
/// relocated, top-down, to [`nearest_lowest_stack`]; the count of such
/// relocations is returned.
pub fn calculate_rehandles(yard: &mut YardState, target: ContainerTag) -> Result<u32, SimError> {
    retrieve(yard, target, &mut |_, _| {}).map(|(n, _)| n)
}

/// Ship-side progress: what has been discharged and loaded so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShipState {
    unloaded: Vec<u32>,
    loaded: Vec<usize>,
    /// Position in the unloading sequence of the current loading stack.
    cursor: usize,
}

impl ShipState {
    pub fn new(plan: &ShipRowPlan) -> Self {
        Self {
            unloaded: vec![0; plan.len()],
            loaded: vec![0; plan.len()],
            cursor: 0,
        }
    }

    pub fn unloaded(&self, stack: usize) -> u32 {
        self.unloaded[stack]
    }

    pub fn loaded(&self, stack: usize) -> usize {
        self.loaded[stack]
    }

    pub fn is_unloaded(&self, plan: &ShipRowPlan, stack: usize) -> bool {
        self.unloaded[stack] >= plan.stacks[stack].unload
    }

    fn unload(&mut self, stack: usize) {
        self.unloaded[stack] += 1;
    }

    /// Current loading stack and the tag it takes next, if that stack may
    /// be loaded now.
    fn next_load(&mut self, plan: &ShipRowPlan, seq: &[usize]) -> Option<(usize, ContainerTag)> {
        while let Some(&c) = seq.get(self.cursor) {
            if self.loaded[c] < plan.stacks[c].load.len() {
                if !self.is_unloaded(plan, c) {
                    return None;
                }
                return Some((c, plan.stacks[c].load[self.loaded[c]]));
            }
            self.cursor += 1;
        }
        None
    }

    pub fn loads_pending(&self, plan: &ShipRowPlan) -> bool {
        plan.stacks
            .iter()
            .zip(&self.loaded)
            .any(|(s, &l)| l < s.load.len())
    }
}

/// Discharges the first stack of `seq` with single cycles. Stay-aboard
/// containers are left alone.
pub fn unload_first_stack(plan: &ShipRowPlan, seq: &[usize]) -> (ShipState, u32) {
    let mut state = ShipState::new(plan);
    let mut singles = 0;
    if let Some(&first) = seq.first() {
        for _ in 0..plan.stacks[first].unload {
            state.unload(first);
            singles += 1;
        }
    }
    (state, singles)
}

struct Loaded {
    stack: usize,
    tag: ContainerTag,
    yard_stack: usize,
    rehandles: u32,
}

fn load_next<B: Bay>(
    state: &mut ShipState,
    bay: &mut B,
    plan: &ShipRowPlan,
    seq: &[usize],
    on_move: &mut dyn FnMut(usize, usize, Option<ContainerTag>),
) -> Result<Option<Loaded>, SimError> {
    let Some((stack, tag)) = state.next_load(plan, seq) else {
        return Ok(None);
    };
    let (rehandles, yard_stack) = retrieve(bay, tag, &mut |from, t| on_move(stack, from, t))?;
    state.loaded[stack] += 1;
    Ok(Some(Loaded {
        stack,
        tag,
        yard_stack,
        rehandles,
    }))
}

/// Loads the next container of the current loading stack, if one is
/// eligible. Returns whether a container was loaded and the rehandles its
/// retrieval cost.
pub fn loading_operation(
    state: &mut ShipState,
    yard: &mut YardState,
    plan: &ShipRowPlan,
    seq: &[usize],
) -> Result<(bool, u32), SimError> {
    Ok(
        match load_next(state, yard, plan, seq, &mut |_, _, _| {})? {
            Some(l) => (true, l.rehandles),
            None => (false, 0),
        },
    )
}

/// Dense numbering of a plan's outbound tags.
#[derive(Debug, Clone)]
pub struct PlanIndex {
    tags: Vec<ContainerTag>,
    // [stack][tier_label - 1] -> id
    by_label: Vec<Vec<u32>>,
}

const NO_ID: u32 = u32::MAX;
const FOREIGN: u32 = u32::MAX;

impl PlanIndex {
    pub fn new(plan: &ShipRowPlan) -> Self {
        let mut tags = Vec::new();
        let mut by_label = vec![Vec::new(); plan.len()];
        for s in &plan.stacks {
            for &t in &s.load {
                let id = tags.len() as u32;
                tags.push(t);
                // misplaced tags are reported by validation; index them by
                // their own stack so lookups stay consistent
                let Some(row) = by_label.get_mut(t.stack_index()) else {
                    continue;
                };
                let l = usize::from(t.tier_label()) - 1;
                if row.len() <= l {
                    row.resize(l + 1, NO_ID);
                }
                row[l] = id;
            }
        }
        Self { tags, by_label }
    }

    pub fn id(&self, tag: ContainerTag) -> Option<u32> {
        let id = *self
            .by_label
            .get(tag.stack_index())?
            .get(usize::from(tag.tier_label()) - 1)?;
        (id != NO_ID).then_some(id)
    }

    pub fn tag(&self, id: u32) -> ContainerTag {
        self.tags[id as usize]
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// Flat fixed-stride copy of a yard used on the evaluation hot path.
struct WorkYard<'a> {
    index: &'a PlanIndex,
    stride: usize,
    cap: usize,
    heights: Vec<usize>,
    cells: Vec<u32>,
    loc: Vec<u32>,
}

impl<'a> WorkYard<'a> {
    fn new(index: &'a PlanIndex, yard: &YardState) -> Self {
        let cap = yard.cap as usize;
        let stride = yard.stacks.iter().map(Vec::len).max().unwrap_or(0).max(cap);
        let mut cells = vec![FOREIGN; stride * yard.stacks.len()];
        let mut heights = Vec::with_capacity(yard.stacks.len());
        let mut loc = vec![NO_ID; index.len()];
        for (i, s) in yard.stacks.iter().enumerate() {
            heights.push(s.len());
            for (j, slot) in s.iter().enumerate() {
                // unknown tags behave like foreign boxes
                let id = slot.tag().and_then(|t| index.id(t)).unwrap_or(FOREIGN);
                cells[i * stride + j] = id;
                if id != FOREIGN {
                    loc[id as usize] = i as u32;
                }
            }
        }
        Self {
            index,
            stride,
            cap,
            heights,
            cells,
            loc,
        }
    }
}

impl Bay for WorkYard<'_> {
    type Item = u32;

    fn stack_count(&self) -> usize {
        self.heights.len()
    }

    fn height(&self, i: usize) -> usize {
        self.heights[i]
    }

    fn cap(&self) -> usize {
        self.cap
    }

    fn locate(&self, tag: ContainerTag) -> Option<(usize, usize)> {
        let id = self.index.id(tag)?;
        let stack = *self.loc.get(id as usize)?;
        if stack == NO_ID {
            return None;
        }
        let stack = stack as usize;
        let base = stack * self.stride;
        self.cells[base..base + self.heights[stack]]
            .iter()
            .position(|&c| c == id)
            .map(|p| (stack, p))
    }

    fn pop(&mut self, i: usize) -> u32 {
        self.heights[i] -= 1;
        let id = self.cells[i * self.stride + self.heights[i]];
        if id != FOREIGN {
            self.loc[id as usize] = NO_ID;
        }
        id
    }

    fn push(&mut self, i: usize, item: u32) {
        self.cells[i * self.stride + self.heights[i]] = item;
        self.heights[i] += 1;
        if item != FOREIGN {
            self.loc[item as usize] = i as u32;
        }
    }

    fn item_tag(&self, item: u32) -> Option<ContainerTag> {
        (item != FOREIGN).then(|| self.index.tag(item))
    }
}

struct Clock {
    now: f64,
    timing: TimingParams,
    singles: u64,
    duals: u64,
    rehandles: u64,
    events: Option<Vec<SimEvent>>,
}

impl Clock {
    fn record(
        &mut self,
        kind: EventKind,
        ship_stack: usize,
        yard_stack: Option<usize>,
        tag: Option<ContainerTag>,
    ) {
        let dt = match kind {
            EventKind::SingleUnload | EventKind::SingleLoad => {
                self.singles += 1;
                self.timing.alpha
            }
            EventKind::Dual => {
                self.duals += 1;
                self.timing.beta
            }
            EventKind::Rehandle => {
                self.rehandles += 1;
                self.timing.gamma
            }
        };
        self.now += dt;
        if let Some(ev) = self.events.as_mut() {
            ev.push(SimEvent {
                kind,
                ship_stack,
                yard_stack,
                tag,
                timestamp: self.now,
            });
        }
    }
}

fn simulate<B: Bay>(
    plan: &ShipRowPlan,
    seq: &[usize],
    bay: &mut B,
    timing: TimingParams,
    mode: CycleMode,
    keep_trace: bool,
) -> Result<(CostBreakdown, SimTrace), SimError> {
    if !is_permutation(seq, plan.len()) {
        return Err(SimError::BadSequence);
    }
    let n = plan.len();
    let mut clock = Clock {
        now: 0.0,
        timing,
        singles: 0,
        duals: 0,
        rehandles: 0,
        events: keep_trace.then(Vec::new),
    };
    let mut tu = vec![0.0; n];
    let mut tl = vec![0.0; n];

    let (mut ship, first_singles) = unload_first_stack(plan, seq);
    if let Some(&first) = seq.first() {
        for _ in 0..first_singles {
            clock.record(EventKind::SingleUnload, first, None, None);
        }
        if first_singles > 0 {
            tu[first] = clock.now;
        }
    }

    let pair = mode == CycleMode::Dual;
    for &c in seq.iter().skip(1) {
        for _ in 0..plan.stacks[c].unload {
            // eligibility is decided before this discharge, so a stack is
            // never loaded in the cycle that empties it
            let loaded = if pair {
                load_next(&mut ship, bay, plan, seq, &mut |served, from, blocker| {
                    clock.record(EventKind::Rehandle, served, Some(from), blocker)
                })?
            } else {
                None
            };
            ship.unload(c);
            match loaded {
                Some(l) => {
                    clock.record(EventKind::Dual, c, Some(l.yard_stack), Some(l.tag));
                    tl[l.stack] = clock.now;
                }
                None => clock.record(EventKind::SingleUnload, c, None, None),
            }
        }
        if plan.stacks[c].unload > 0 {
            tu[c] = clock.now;
        }
    }

    while let Some(l) = load_next(&mut ship, bay, plan, seq, &mut |served, from, blocker| {
        clock.record(EventKind::Rehandle, served, Some(from), blocker)
    })? {
        clock.record(
            EventKind::SingleLoad,
            l.stack,
            Some(l.yard_stack),
            Some(l.tag),
        );
        tl[l.stack] = clock.now;
    }
    debug_assert!(!ship.loads_pending(plan));

    for (c, s) in plan.stacks.iter().enumerate() {
        if s.load.is_empty() {
            tl[c] = tu[c];
        }
    }

    let cost = CostBreakdown {
        singles: clock.singles,
        duals: clock.duals,
        rehandles: clock.rehandles,
        total_seconds: timing.alpha * clock.singles as f64
            + timing.beta * clock.duals as f64
            + timing.gamma * clock.rehandles as f64,
        tu,
        tl,
    };
    Ok((
        cost,
        SimTrace {
            events: clock.events.unwrap_or_default(),
        },
    ))
}

/// Evaluates a chromosome with dual cycling and returns the cost breakdown
/// together with the full event trace.
pub fn evaluate(
    chromosome: &Chromosome,
    plan: &ShipRowPlan,
    timing: &TimingParams,
) -> Result<(CostBreakdown, SimTrace), SimError> {
    evaluate_with(chromosome, plan, timing, CycleMode::Dual)
}

pub fn evaluate_with(
    chromosome: &Chromosome,
    plan: &ShipRowPlan,
    timing: &TimingParams,
    mode: CycleMode,
) -> Result<(CostBreakdown, SimTrace), SimError> {
    let index = PlanIndex::new(plan);
    let mut bay = WorkYard::new(&index, &chromosome.yard);
    simulate(plan, &chromosome.unload_seq, &mut bay, *timing, mode, true)
}

/// Reusable evaluator for one plan; skips trace collection.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    plan: &'a ShipRowPlan,
    index: PlanIndex,
    timing: TimingParams,
    mode: CycleMode,
}

impl<'a> Evaluator<'a> {
    pub fn new(plan: &'a ShipRowPlan, timing: TimingParams, mode: CycleMode) -> Self {
        Self {
            plan,
            index: PlanIndex::new(plan),
            timing,
            mode,
        }
    }

    pub fn plan(&self) -> &'a ShipRowPlan {
        self.plan
    }

    pub fn timing(&self) -> &TimingParams {
        &self.timing
    }

    pub fn mode(&self) -> CycleMode {
        self.mode
    }

    pub fn cost(&self, chromosome: &Chromosome) -> Result<CostBreakdown, SimError> {
        let mut bay = WorkYard::new(&self.index, &chromosome.yard);
        simulate(
            self.plan,
            &chromosome.unload_seq,
            &mut bay,
            self.timing,
            self.mode,
            false,
        )
        .map(|(c, _)| c)
    }

    pub fn trace(&self, chromosome: &Chromosome) -> Result<(CostBreakdown, SimTrace), SimError> {
        let mut bay = WorkYard::new(&self.index, &chromosome.yard);
        simulate(
            self.plan,
            &chromosome.unload_seq,
            &mut bay,
            self.timing,
            self.mode,
            true,
        )
    }
}
