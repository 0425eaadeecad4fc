//! Independent oracles for the head schedule.
//!
//! Nothing here looks at a tape. The tour recursion is expanded with an
//! explicit stack, in the style of an iterative Towers of Hanoi, so prefixes
//! of the infinite tour stream in memory proportional to the recursion depth.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{Rule, RuleId};

/// The first `n` carry-propagation distances of binary counting:
/// element t (1-based) is the number of trailing zero bits of t.
pub fn binary_carry_schedule(n: u64) -> Vec<u32> {
    (1..=n).map(|t| t.trailing_zeros()).collect()
}

/// Side of the head on which position 0 lies before a move.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flipped(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    fn step(self) -> i64 {
        match self {
            Side::Left => -1,
            Side::Right => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MoveKind {
    NegTour0,
    PosTour0Primed,
    PosTour0DoublePrimed,
    /// Singly primed pushback at the given recursion level (>= 1).
    PushbackPrimed(u32),
    /// Doubly primed pushback at the given recursion level (>= 1).
    PushbackDoublePrimed(u32),
}

impl MoveKind {
    /// The engine rule that performs this move.
    pub fn rule(self) -> Rule {
        match self {
            MoveKind::NegTour0 => Rule::R1,
            MoveKind::PosTour0Primed => Rule::R2,
            MoveKind::PosTour0DoublePrimed => Rule::R3,
            MoveKind::PushbackPrimed(_) => Rule::R4,
            MoveKind::PushbackDoublePrimed(_) => Rule::R5,
        }
    }

    /// Opportunity levels this move provides: a positive 0-tour serves as
    /// both a 0- and a 1-opportunity, a level-l pushback as an
    /// (l+1)-opportunity.
    pub fn opportunity_levels(self) -> &'static [u32] {
        const LEVELS: [u32; 66] = {
            let mut a = [0u32; 66];
            let mut i = 0;
            while i < 66 {
                a[i] = i as u32;
                i += 1;
            }
            a
        };
        match self {
            MoveKind::NegTour0 => &[],
            MoveKind::PosTour0Primed | MoveKind::PosTour0DoublePrimed => &LEVELS[0..2],
            MoveKind::PushbackPrimed(l) | MoveKind::PushbackDoublePrimed(l) => {
                let l = l as usize + 1;
                &LEVELS[l..l + 1]
            }
        }
    }

    pub fn is_tour0(self) -> bool {
        matches!(
            self,
            MoveKind::NegTour0 | MoveKind::PosTour0Primed | MoveKind::PosTour0DoublePrimed
        )
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveKind::NegTour0 => f.write_str("NegTour0"),
            MoveKind::PosTour0Primed => f.write_str("PosTour0Primed"),
            MoveKind::PosTour0DoublePrimed => f.write_str("PosTour0DoublePrimed"),
            MoveKind::PushbackPrimed(l) => write!(f, "PushbackPrimed({l})"),
            MoveKind::PushbackDoublePrimed(l) => write!(f, "PushbackDoublePrimed({l})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub side: Side,
}

impl Move {
    /// Rule and mirror flag the engine should report for this move.
    pub fn rule_id(self) -> RuleId {
        RuleId {
            rule: self.kind.rule(),
            mirrored: self.side == Side::Right,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TourVariant {
    Negative,
    PositivePrimed,
    PositiveDoublePrimed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TourSpec {
    pub order: u32,
    pub variant: TourVariant,
}

impl TourSpec {
    pub fn negative(order: u32) -> TourSpec {
        TourSpec {
            order,
            variant: TourVariant::Negative,
        }
    }

    pub fn primed(order: u32) -> TourSpec {
        TourSpec {
            order,
            variant: TourVariant::PositivePrimed,
        }
    }

    pub fn double_primed(order: u32) -> TourSpec {
        TourSpec {
            order,
            variant: TourVariant::PositiveDoublePrimed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opportunity {
    pub level: u32,
    /// 1-based index of the move providing it.
    pub move_index: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveTrace {
    pub moves: Vec<Move>,
}

impl MoveTrace {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn opportunities(&self) -> Vec<Opportunity> {
        self.moves
            .iter()
            .enumerate()
            .flat_map(|(i, m)| {
                m.kind
                    .opportunity_levels()
                    .iter()
                    .map(move |&level| Opportunity {
                        level,
                        move_index: i as u64 + 1,
                    })
            })
            .collect()
    }
}

impl FromIterator<Move> for MoveTrace {
    fn from_iter<T: IntoIterator<Item = Move>>(iter: T) -> Self {
        MoveTrace {
            moves: iter.into_iter().collect(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Frame {
    Tour(TourSpec),
    Pushback { level: u32, double: bool },
}

/// Streams the atomic moves of a tour expansion.
///
/// Recursion:
/// - tour(i+1,-)  = tour(i,-) tour'(i,+) tour(i,-)
/// - tour'(i+1,+) = tour''(i,+) pushback'(i+1) tour'(i,+) tour(i,-)
/// - tour''(i+1,+) = tour''(i,+) pushback''(i+1) tour'(i,+) tour(i,-)
///
/// The infinite tour is tour(0,-) followed by tour'(i,+) tour(i,-) for
/// i = 0, 1, 2, ...
#[derive(Clone, Debug)]
pub struct TourExpander {
    stack: Vec<Frame>,
    side: Side,
    /// Next outer stage of the infinite tour, if expanding it.
    next_stage: Option<u32>,
}

impl TourExpander {
    pub fn new(spec: TourSpec, start: Side) -> TourExpander {
        TourExpander {
            stack: vec![Frame::Tour(spec)],
            side: start,
            next_stage: None,
        }
    }

    /// The infinite tour, starting with position 0 right of the head.
    pub fn infinite() -> TourExpander {
        TourExpander {
            stack: vec![Frame::Tour(TourSpec::negative(0))],
            side: Side::Right,
            next_stage: Some(0),
        }
    }

    /// Current recursion depth of the explicit stack.
    pub fn depth(&self) -> usize {
        self.stack.len()
    }
}

impl Iterator for TourExpander {
    type Item = Move;

    fn next(&mut self) -> Option<Move> {
        loop {
            let frame = match self.stack.pop() {
                Some(f) => f,
                None => {
                    let i = self.next_stage?;
                    self.next_stage = Some(i + 1);
                    self.stack.push(Frame::Tour(TourSpec::negative(i)));
                    self.stack.push(Frame::Tour(TourSpec::primed(i)));
                    continue;
                }
            };
            let kind = match frame {
                Frame::Pushback {
                    level,
                    double: false,
                } => MoveKind::PushbackPrimed(level),
                Frame::Pushback {
                    level,
                    double: true,
                } => MoveKind::PushbackDoublePrimed(level),
                Frame::Tour(TourSpec { order: 0, variant }) => match variant {
                    TourVariant::Negative => MoveKind::NegTour0,
                    TourVariant::PositivePrimed => MoveKind::PosTour0Primed,
                    TourVariant::PositiveDoublePrimed => MoveKind::PosTour0DoublePrimed,
                },
                Frame::Tour(TourSpec { order, variant }) => {
                    let i = order - 1;
                    // Children are pushed last-first.
                    self.stack.push(Frame::Tour(TourSpec::negative(i)));
                    match variant {
                        TourVariant::Negative => {
                            self.stack.push(Frame::Tour(TourSpec::primed(i)));
                        }
                        TourVariant::PositivePrimed | TourVariant::PositiveDoublePrimed => {
                            self.stack.push(Frame::Tour(TourSpec::primed(i)));
                            self.stack.push(Frame::Pushback {
                                level: order,
                                double: variant == TourVariant::PositiveDoublePrimed,
                            });
                            self.stack.push(Frame::Tour(TourSpec::double_primed(i)));
                            continue;
                        }
                    }
                    self.stack.push(Frame::Tour(TourSpec::negative(i)));
                    continue;
                }
            };
            let mv = Move {
                kind,
                side: self.side,
            };
            // Every 0-tour carries the head across position 0.
            if kind.is_tour0() {
                self.side = self.side.flipped();
            }
            return Some(mv);
        }
    }
}

/// The infinite tour viewed as a sequence of i-tours, with pushbacks above
/// level i dropped: the variant of each of the first `n` i-tours.
pub fn tour_variants_at_order(i: u32, n: usize) -> Vec<TourVariant> {
    let mut out = Vec::with_capacity(n);
    // The stages below i compose to tour(i,-).
    let mut stack = vec![TourSpec::negative(i)];
    let mut stage = i;
    while out.len() < n {
        let Some(spec) = stack.pop() else {
            stack.push(TourSpec::negative(stage));
            stack.push(TourSpec::primed(stage));
            stage += 1;
            continue;
        };
        if spec.order == i {
            out.push(spec.variant);
            continue;
        }
        let j = spec.order - 1;
        stack.push(TourSpec::negative(j));
        stack.push(TourSpec::primed(j));
        stack.push(match spec.variant {
            TourVariant::Negative => TourSpec::negative(j),
            _ => TourSpec::double_primed(j),
        });
    }
    out
}

pub fn tour_moves(spec: TourSpec, start: Side) -> MoveTrace {
    TourExpander::new(spec, start).collect()
}

/// First `n` moves of the infinite tour.
pub fn tour_infinity(n: usize) -> MoveTrace {
    TourExpander::infinite().take(n).collect()
}

/// Closed-form move count: (5/4)3^i - i/2 - 1/4 for negative tours and
/// (5/4)3^i + i/2 - 1/4 for both positive varieties.
pub fn tour_length(spec: TourSpec) -> u128 {
    let i = spec.order as u128;
    let pow = 3u128.pow(spec.order);
    match spec.variant {
        TourVariant::Negative => (5 * pow - 2 * i - 1) / 4,
        _ => (5 * pow + 2 * i - 1) / 4,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Head,
    Position(u64),
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Head => f.write_str("*"),
            Slot::Position(p) => write!(f, "{p}"),
        }
    }
}

/// Explicit permutation of position numbers around a head mark, starting
/// from `* 0 1 2 ...`. Index i corresponds to tape offset i.
#[derive(Clone, Debug)]
pub struct PermutationSim {
    slots: Vec<Slot>,
    head: usize,
    moves: u64,
}

impl Default for PermutationSim {
    fn default() -> Self {
        PermutationSim::new()
    }
}

impl PermutationSim {
    pub fn new() -> PermutationSim {
        PermutationSim {
            slots: vec![Slot::Head],
            head: 0,
            moves: 0,
        }
    }

    pub fn moves_applied(&self) -> u64 {
        self.moves
    }

    pub fn head(&self) -> usize {
        self.head
    }

    /// Slot at index `i`; indices past the end hold untouched positions.
    pub fn slot(&self, i: usize) -> Slot {
        self.slots
            .get(i)
            .copied()
            .unwrap_or_else(|| Slot::Position(i as u64 - 1))
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    fn at(&mut self, rel: i64) -> Result<usize, String> {
        let i = self.head as i64 + rel;
        if i < 0 {
            return Err(format!("move reaches left of the origin (index {i})"));
        }
        let i = i as usize;
        while self.slots.len() <= i {
            let p = self.slots.len() as u64 - 1;
            self.slots.push(Slot::Position(p));
        }
        Ok(i)
    }

    /// Applies one atomic move. Fails if position 0 is not where the move
    /// says it is.
    pub fn apply(&mut self, mv: Move) -> Result<(), String> {
        let dir = mv.side.step();
        let zero = self.at(dir)?;
        if self.slots[zero] != Slot::Position(0) {
            return Err(format!(
                "move {} expects position 0 at index {zero}, found {}",
                self.moves + 1,
                self.slots[zero]
            ));
        }
        match mv.kind {
            MoveKind::NegTour0 => {
                self.slots.swap(self.head, zero);
                self.head = zero;
            }
            MoveKind::PosTour0Primed | MoveKind::PosTour0DoublePrimed => {
                let other = self.at(-dir)?;
                self.slots.swap(zero, other);
            }
            MoveKind::PushbackPrimed(_) | MoveKind::PushbackDoublePrimed(_) => {
                let near = self.at(-dir)?;
                let far = self.at(-2 * dir)?;
                self.slots.swap(near, far);
            }
        }
        self.moves += 1;
        Ok(())
    }

    /// Touched slots followed by three untouched positions and `...`.
    pub fn render(&self) -> String {
        let mut tokens: Vec<String> = self.slots.iter().map(Slot::to_string).collect();
        for i in self.slots.len()..self.slots.len() + 3 {
            tokens.push(self.slot(i).to_string());
        }
        tokens.push("...".into());
        tokens.join(" ")
    }
}

/// Applies the first `n` moves of the infinite tour to `* 0 1 2 ...`.
pub fn simulate_permutation(n: usize) -> Result<PermutationSim, String> {
    let mut sim = PermutationSim::new();
    for mv in TourExpander::infinite().take(n) {
        sim.apply(mv)?;
    }
    Ok(sim)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacingReport {
    pub moves: u64,
    pub max_zero_gap: u64,
    pub highest_level: u32,
    pub violations: Vec<String>,
}

impl SpacingReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Streaming check of opportunity spacing:
/// 1. a 0-opportunity at least every three moves;
/// 2. every 0-opportunity is also a 1-opportunity;
/// 3. for 2 <= l <= `max_level`, exactly two (l-1)-opportunities before the
///    first l-opportunity and at most four between consecutive ones.
#[derive(Clone, Debug)]
pub struct SpacingChecker {
    max_level: u32,
    report: SpacingReport,
    last_zero: u64,
    /// Per level l: (l-1)-opportunities since the last l-opportunity.
    since: Vec<u32>,
    seen: Vec<bool>,
}

const MAX_VIOLATIONS: usize = 32;

impl SpacingChecker {
    pub fn new(max_level: u32) -> SpacingChecker {
        SpacingChecker {
            max_level,
            report: SpacingReport::default(),
            last_zero: 0,
            since: vec![0; max_level as usize + 2],
            seen: vec![false; max_level as usize + 2],
        }
    }

    fn violation(&mut self, msg: String) {
        if self.report.violations.len() < MAX_VIOLATIONS {
            self.report.violations.push(msg);
        }
    }

    pub fn observe(&mut self, kind: MoveKind) {
        self.report.moves += 1;
        let idx = self.report.moves;
        let levels = kind.opportunity_levels();
        let has = |l: u32| levels.contains(&l);
        if has(0) != has(1) {
            self.violation(format!(
                "move {idx}: 0- and 1-opportunities do not coincide"
            ));
        }
        if has(0) {
            self.report.max_zero_gap = self.report.max_zero_gap.max(idx - self.last_zero);
            self.last_zero = idx;
        } else if idx - self.last_zero > 3 {
            self.violation(format!(
                "move {idx}: {} moves without a 0-opportunity",
                idx - self.last_zero
            ));
            self.last_zero = idx;
        }
        for &l in levels {
            self.report.highest_level = self.report.highest_level.max(l);
            if l > self.max_level {
                continue;
            }
            let l = l as usize;
            if l >= 2 {
                let count = self.since[l];
                if !self.seen[l] && count != 2 {
                    self.violation(format!(
                        "move {idx}: {count} level-{} opportunities before the first level-{l}",
                        l - 1
                    ));
                } else if self.seen[l] && count > 4 {
                    self.violation(format!(
                        "move {idx}: {count} level-{} opportunities between level-{l} opportunities",
                        l - 1
                    ));
                }
                self.seen[l] = true;
                self.since[l] = 0;
            }
            if l < self.max_level as usize {
                self.since[l + 1] += 1;
            }
        }
    }

    pub fn finish(mut self) -> SpacingReport {
        if self.report.highest_level < self.max_level {
            let msg = format!(
                "trace too short: highest opportunity level {} < {}",
                self.report.highest_level, self.max_level
            );
            self.violation(msg);
        }
        self.report
    }
}

pub fn check_opportunity_spacing(trace: &MoveTrace, max_level: u32) -> SpacingReport {
    let mut checker = SpacingChecker::new(max_level);
    for m in &trace.moves {
        checker.observe(m.kind);
    }
    checker.finish()
}
