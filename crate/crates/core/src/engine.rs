//! The single-state rewrite engine.
//!
//! Each step looks at the head mark and a few neighbors, picks one of five
//! rule schemes (or its mirror image), permutes squares, moves primes and
//! arrows, and performs at most one propagation per track. The rule choice
//! depends only on arrows and primes, so head motion is identical for every
//! command stream.
//!
//! Naming follows the rule table with position 0 to the left of the head:
//!
//! ```text
//!  R1:       b <* c'       =>  >* b c
//!  R2:      >b <* c        =>  c' >* <b      inject into b, then b -> c
//!  R3:    a <b <* c        =>  a c'' >* <b   inject into b, then b -> a
//!  R4:       b <* c'' <d   =>  b <* >d c'    d -> c
//!  R5:       b <* c'' >d e =>  b <* >d c'' e d -> e
//! ```
//!
//! When the head arrow points right, the mirror image applies.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::command::{Command, CommandKind, SignResponse};
use crate::error::{Error, Result};
use crate::tape::{check_params, Arrow, Control, Primes, Tape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Single-prime message: negative 0-tour.
    R1,
    /// No message, position 0 points at the head: singly primed positive 0-tour.
    R2,
    /// No message, position 0 points away: doubly primed positive 0-tour.
    R3,
    /// Double-prime message, far square points at the head: singly primed pushback.
    R4,
    /// Double-prime message, far square points away: doubly primed pushback.
    R5,
}

impl Rule {
    pub fn number(self) -> u8 {
        match self {
            Rule::R1 => 1,
            Rule::R2 => 2,
            Rule::R3 => 3,
            Rule::R4 => 4,
            Rule::R5 => 5,
        }
    }

    pub fn injects(self) -> bool {
        matches!(self, Rule::R2 | Rule::R3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleId {
    pub rule: Rule,
    /// Set when position 0 lies to the right of the head.
    pub mirrored: bool,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}", self.rule.number())?;
        if self.mirrored {
            f.write_str(", mirrored")?;
        }
        Ok(())
    }
}

/// Control-track squares within three of the head. This is everything rule
/// selection may look at; digits and ghost positions are not reachable.
#[derive(Clone, Copy, Debug)]
pub struct Neighborhood {
    head_offset: i64,
    squares: [Control; 7],
}

impl Neighborhood {
    pub fn of(tape: &Tape) -> Neighborhood {
        let h = tape.head_offset();
        let mut squares = [tape.control_at(h); 7];
        for (i, sq) in squares.iter_mut().enumerate() {
            *sq = tape.control_at(h + i as i64 - 3);
        }
        Neighborhood {
            head_offset: h,
            squares,
        }
    }

    fn at(&self, rel: i64) -> Control {
        self.squares[(rel + 3) as usize]
    }
}

/// Picks the rule for the next step.
pub fn match_rule(n: &Neighborhood) -> Result<RuleId> {
    let fail = |reason: &str| Error::NoRuleMatches {
        offset: n.head_offset,
        reason: reason.to_string(),
    };
    let head = n.at(0);
    if !head.head {
        return Err(fail("no head mark at the head offset"));
    }
    if head.primes != Primes::NONE {
        return Err(fail("head mark carries primes"));
    }
    let dir = head.arrow.step();
    let b = n.at(dir);
    let c = n.at(-dir);
    if b.head || c.head {
        return Err(fail("adjacent head marks"));
    }
    let rule = match c.primes.count() {
        1 => Rule::R1,
        0 if b.arrow.step() == -dir => Rule::R2,
        0 => Rule::R3,
        _ => {
            let d = n.at(-2 * dir);
            if d.head {
                return Err(fail("head mark beyond a double-primed square"));
            }
            if d.arrow.step() == dir {
                Rule::R4
            } else {
                Rule::R5
            }
        }
    };
    Ok(RuleId {
        rule,
        mirrored: head.arrow == Arrow::Right,
    })
}

/// One signed digit together with its underline, on a single track.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrackDigit {
    pub digit: i32,
    pub underlined: bool,
}

impl TrackDigit {
    pub fn new(digit: i32, underlined: bool) -> TrackDigit {
        TrackDigit { digit, underlined }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarryDirection {
    Carry,
    Borrow,
}

/// Carry or borrow from one position into the next, with underline upkeep.
///
/// `from` sits at position i and `to` at position i+1.
pub fn propagate(from: &mut TrackDigit, to: &mut TrackDigit, radix: u32) -> Option<CarryDirection> {
    let r = radix as i32;
    let direction = if 2 * from.digit > r {
        from.digit -= r;
        to.digit += 1;
        CarryDirection::Carry
    } else if 2 * from.digit < -r {
        from.digit += r;
        to.digit -= 1;
        CarryDirection::Borrow
    } else {
        return None;
    };
    let to_before = to.digit
        - if direction == CarryDirection::Carry {
            1
        } else {
            -1
        };
    if to.digit == 0 && !to.underlined {
        from.underlined = false;
    }
    if to_before == 0 && !from.underlined {
        from.underlined = true;
    }
    Some(direction)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CarryEvent {
    pub track: usize,
    pub direction: CarryDirection,
}

/// Where this step propagated, as offsets after the step. `level` is the
/// radix position receiving the carry, known only with the ghost track.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationSite {
    pub from: i64,
    pub to: i64,
    pub level: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    /// 1-based index of this step.
    pub step: u64,
    pub rule: RuleId,
    /// True exactly on positive 0-tours (R2, R3), the 0-opportunities.
    pub injected: bool,
    /// Head displacement: -1, 0 or +1.
    pub head_shift: i8,
    /// Mutation consumed per track; empty unless `injected`.
    pub consumed: Vec<Option<CommandKind>>,
    /// Sign answers per track; empty unless `injected`.
    pub responses: Vec<Option<SignResponse>>,
    pub propagation: Option<PropagationSite>,
    pub carry_events: Vec<CarryEvent>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EngineConfig {
    pub k: usize,
    pub radix: u32,
    pub ghost: bool,
}

impl EngineConfig {
    pub fn new(k: usize, radix: u32) -> EngineConfig {
        EngineConfig {
            k,
            radix,
            ghost: false,
        }
    }

    pub fn with_ghost(mut self) -> EngineConfig {
        self.ghost = true;
        self
    }
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig::new(1, 4)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub steps: u64,
    pub injections: u64,
    pub max_abs_digit: u32,
    /// Highest ghost position touched by a rule, or, without the ghost
    /// track, the width of the non-blank region.
    pub max_involved_position: u64,
    /// Longest run of steps ending in an injection, counted from step 0.
    pub max_injection_gap: u64,
    pub last_injection_step: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum QueryTiming {
    BeforeMutation,
    AfterMutation,
}

#[derive(Clone, Copy, Debug, Default)]
struct PendingSlot {
    mutation: Option<CommandKind>,
    query: Option<QueryTiming>,
}

/// The raw k-track machine: tape plus per-track sign bits and one pending
/// mutation slot per track.
#[derive(Clone, Debug)]
pub struct Machine {
    tape: Tape,
    sign_bits: Vec<SignResponse>,
    pending: Vec<PendingSlot>,
    step_count: u64,
    stats: Stats,
}

impl Machine {
    pub fn new(config: EngineConfig) -> Result<Machine> {
        check_params(config.k, config.radix)?;
        let tape = if config.ghost {
            Tape::with_ghost(config.k, config.radix)?
        } else {
            Tape::new(config.k, config.radix)?
        };
        Ok(Machine {
            tape,
            sign_bits: vec![SignResponse::Zero; config.k],
            pending: vec![PendingSlot::default(); config.k],
            step_count: 0,
            stats: Stats::default(),
        })
    }

    pub fn k(&self) -> usize {
        self.tape.k()
    }

    pub fn radix(&self) -> u32 {
        self.tape.radix()
    }

    pub fn tape(&self) -> &Tape {
        &self.tape
    }

    #[doc(hidden)]
    pub fn tape_mut(&mut self) -> &mut Tape {
        &mut self.tape
    }

    pub fn sign_bits(&self) -> &[SignResponse] {
        &self.sign_bits
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// True if the track has an unconsumed mutation.
    pub fn has_pending_mutation(&self, track: usize) -> bool {
        self.pending[track].mutation.is_some()
    }

    pub fn next_rule(&self) -> Result<RuleId> {
        match_rule(&Neighborhood::of(&self.tape))
    }

    /// Queues a command for the next injection.
    ///
    /// A track holds one mutation and one sign query at a time. A second
    /// query is merged into the first unless a mutation arrived between
    /// them, in which case it is refused like a second mutation.
    pub fn submit(&mut self, c: Command) -> Result<()> {
        let track = c.track(self.k())?;
        let slot = &mut self.pending[track];
        match c.kind {
            CommandKind::Sign => match (slot.query, slot.mutation) {
                (None, None) => slot.query = Some(QueryTiming::BeforeMutation),
                (None, Some(_)) => slot.query = Some(QueryTiming::AfterMutation),
                (Some(QueryTiming::BeforeMutation), Some(_)) => {
                    return Err(Error::QueueFull { counter: c.counter })
                }
                (Some(_), _) => {}
            },
            kind => {
                if slot.mutation.is_some() {
                    return Err(Error::QueueFull { counter: c.counter });
                }
                slot.mutation = Some(kind);
            }
        }
        Ok(())
    }

    /// Executes one rewrite step.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let id = self.next_rule()?;
        let dir = if id.mirrored { 1 } else { -1 };
        let h_off = self.tape.head_offset();
        self.tape.ensure(h_off - 3);
        self.tape.ensure(h_off + 3);
        let h = self.tape.head_index() as i64;
        let idx = |rel: i64| (h + rel) as usize;
        // Arrows pointing along / against the direction of position 0.
        let along = Arrow::from_step(dir);
        let against = Arrow::from_step(-dir);

        let mut outcome = StepOutcome {
            step: self.step_count + 1,
            rule: id,
            injected: id.rule.injects(),
            head_shift: 0,
            consumed: Vec::new(),
            responses: Vec::new(),
            propagation: None,
            carry_events: Vec::new(),
        };

        // (from, to) storage indices of the propagation, if any.
        let mut site = None;
        // Squares read or written, relative to the old head.
        let touched: Vec<i64> = match id.rule {
            Rule::R1 => {
                self.tape.control_mut(idx(-dir)).primes = Primes::NONE;
                self.tape.swap(idx(0), idx(dir));
                self.tape.control_mut(idx(dir)).arrow = against;
                outcome.head_shift = dir as i8;
                vec![-dir, 0, dir]
            }
            Rule::R2 | Rule::R3 => {
                self.tape.swap(idx(dir), idx(-dir));
                let (primes, to) = if id.rule == Rule::R2 {
                    (Primes::ONE, dir)
                } else {
                    (Primes::TWO, 2 * dir)
                };
                self.tape.control_mut(idx(dir)).primes = primes;
                self.tape.control_mut(idx(-dir)).arrow = along;
                self.tape.control_mut(idx(0)).arrow = against;
                self.inject(idx(-dir), &mut outcome);
                site = Some((idx(-dir), idx(to)));
                if id.rule == Rule::R2 {
                    vec![-dir, dir]
                } else {
                    vec![-dir, dir, 2 * dir]
                }
            }
            Rule::R4 | Rule::R5 => {
                self.tape.swap(idx(-dir), idx(-2 * dir));
                let to = if id.rule == Rule::R4 {
                    self.tape.control_mut(idx(-dir)).arrow = against;
                    self.tape.control_mut(idx(-2 * dir)).primes = Primes::ONE;
                    -2 * dir
                } else {
                    -3 * dir
                };
                site = Some((idx(-dir), idx(to)));
                if id.rule == Rule::R4 {
                    vec![-dir, -2 * dir]
                } else {
                    vec![-dir, -2 * dir, -3 * dir]
                }
            }
        };

        if let Some((from, to)) = site {
            for track in 0..self.k() {
                let mut a = TrackDigit::new(
                    self.tape.digit(from, track),
                    self.tape.underline(from, track),
                );
                let mut b =
                    TrackDigit::new(self.tape.digit(to, track), self.tape.underline(to, track));
                if let Some(direction) = propagate(&mut a, &mut b, self.radix()) {
                    self.tape.set_digit(from, track, a.digit);
                    self.tape.set_underline(from, track, a.underlined);
                    self.tape.set_digit(to, track, b.digit);
                    self.tape.set_underline(to, track, b.underlined);
                    outcome.carry_events.push(CarryEvent { track, direction });
                }
            }
            outcome.propagation = Some(PropagationSite {
                from: self.tape.offset_of(from),
                to: self.tape.offset_of(to),
                level: self.tape.ghost_of(to),
            });
        }

        self.step_count += 1;
        self.update_stats(&outcome, h, &touched);
        Ok(outcome)
    }

    fn inject(&mut self, b: usize, outcome: &mut StepOutcome) {
        let k = self.k();
        outcome.consumed = vec![None; k];
        outcome.responses = vec![None; k];
        for track in 0..k {
            let slot = std::mem::take(&mut self.pending[track]);
            let delta = match slot.mutation {
                Some(CommandKind::Inc) => 1,
                Some(CommandKind::Dec) => -1,
                _ => 0,
            };
            let before = self.sign_bits[track];
            let digit = self.tape.digit(b, track) + delta;
            self.tape.set_digit(b, track, digit);
            let after = if digit == 0 && !self.tape.underline(b, track) {
                SignResponse::Zero
            } else if before == SignResponse::Zero {
                if delta > 0 {
                    SignResponse::Positive
                } else {
                    SignResponse::Negative
                }
            } else {
                before
            };
            self.sign_bits[track] = after;
            outcome.consumed[track] = slot.mutation;
            outcome.responses[track] = slot.query.map(|q| match q {
                QueryTiming::BeforeMutation => before,
                QueryTiming::AfterMutation => after,
            });
        }
    }

    fn update_stats(&mut self, outcome: &StepOutcome, old_head: i64, touched: &[i64]) {
        let s = &mut self.stats;
        s.steps = self.step_count;
        if outcome.injected {
            s.injections += 1;
            s.max_injection_gap = s
                .max_injection_gap
                .max(self.step_count - s.last_injection_step);
            s.last_injection_step = self.step_count;
        }
        for &rel in touched {
            let i = (old_head + rel) as usize;
            for track in 0..self.tape.k() {
                s.max_abs_digit = s
                    .max_abs_digit
                    .max(self.tape.digit(i, track).unsigned_abs());
            }
            if let Some(p) = self.tape.ghost_of(i) {
                s.max_involved_position = s.max_involved_position.max(p);
            }
        }
        if !self.tape.ghost_enabled() {
            let (lo, hi) = self.tape.nonblank_extent();
            s.max_involved_position = s.max_involved_position.max((hi - lo) as u64);
        }
    }

    /// Runs `n_steps` steps, topping up pending slots from `feed` before
    /// each one, and hands every outcome to `observe`.
    pub fn run_with<I, F>(
        &mut self,
        feed: &mut Feeder<I>,
        n_steps: u64,
        mut observe: F,
    ) -> Result<()>
    where
        I: Iterator<Item = Command>,
        F: FnMut(&Machine, &StepOutcome),
    {
        for _ in 0..n_steps {
            feed.fill(self)?;
            let outcome = self.step()?;
            observe(self, &outcome);
        }
        Ok(())
    }

    /// Like [`Machine::run_with`], collecting the outcomes.
    pub fn run<I>(&mut self, feed: &mut Feeder<I>, n_steps: u64) -> Result<Vec<StepOutcome>>
    where
        I: Iterator<Item = Command>,
    {
        let mut trace = Vec::with_capacity(n_steps.min(1 << 20) as usize);
        self.run_with(feed, n_steps, |_, o| trace.push(o.clone()))?;
        Ok(trace)
    }
}

/// Pulls commands from a source into a machine as slots free up. A command
/// the machine refuses is held back and offered again before the next step.
#[derive(Clone, Debug)]
pub struct Feeder<I> {
    source: I,
    held: Option<Command>,
    submitted: u64,
}

impl<I: Iterator<Item = Command>> Feeder<I> {
    pub fn new(source: I) -> Feeder<I> {
        Feeder {
            source,
            held: None,
            submitted: 0,
        }
    }

    /// Commands accepted by the machine so far.
    pub fn submitted(&self) -> u64 {
        self.submitted
    }

    pub fn fill(&mut self, m: &mut Machine) -> Result<()> {
        loop {
            let Some(c) = self.held.take().or_else(|| self.source.next()) else {
                return Ok(());
            };
            match m.submit(c) {
                Ok(()) => self.submitted += 1,
                Err(Error::QueueFull { .. }) => {
                    self.held = Some(c);
                    return Ok(());
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::RenderWindow;

    fn rule(n: u8, mirrored: bool) -> RuleId {
        let rule = match n {
            1 => Rule::R1,
            2 => Rule::R2,
            3 => Rule::R3,
            4 => Rule::R4,
            _ => Rule::R5,
        };
        RuleId { rule, mirrored }
    }

    #[test]
    fn first_rule_is_mirrored_r1() {
        let t = Tape::new(1, 4).unwrap();
        assert_eq!(match_rule(&Neighborhood::of(&t)).unwrap(), rule(1, true));
    }

    #[test]
    fn matches_rules_from_rendered_configurations() {
        let t = Tape::parse_rendered("<0 <0 >0 <1 <* >0 >0 >0", 4).unwrap();
        assert_eq!(match_rule(&Neighborhood::of(&t)).unwrap(), rule(3, false));
        let t = Tape::parse_rendered("<0 <0 >0 >0'' >* <2 >0 >0", 4).unwrap();
        assert_eq!(match_rule(&Neighborhood::of(&t)).unwrap(), rule(4, true));
        let t = Tape::parse_rendered("<0 >0' >* <1 >0", 4).unwrap();
        assert_eq!(match_rule(&Neighborhood::of(&t)).unwrap(), rule(1, true));
        let t = Tape::parse_rendered(">0 <* >0 >0", 4).unwrap();
        assert_eq!(match_rule(&Neighborhood::of(&t)).unwrap(), rule(2, false));
        let t = Tape::parse_rendered(">0 <* >0'' >0 >0", 4).unwrap();
        assert_eq!(match_rule(&Neighborhood::of(&t)).unwrap(), rule(5, false));
    }

    #[test]
    fn corrupted_configurations_match_nothing() {
        let mut t = Tape::new(1, 4).unwrap();
        let h = t.head_index();
        t.control_mut(h).primes = Primes::ONE;
        assert!(matches!(
            match_rule(&Neighborhood::of(&t)),
            Err(Error::NoRuleMatches { .. })
        ));
    }

    #[test]
    fn six_step_trace() {
        let expected = [
            ("<0 <0 >0 <* >0 >0 >0 >0", 1),
            ("<0 <0 >0' >* <1 >0 >0 >0", 2),
            ("<0 <0 >0 <1 <* >0 >0 >0", 1),
            ("<0 <0 >0 >0'' >* <2 >0 >0", 3),
            ("<0 <0 >0' <0 >* <2 >0 >0", 4),
            ("<0 <0 >0' _>-1 <* <1' >0 >0", 2),
        ];
        // The displayed lines start two squares left of the original head.
        let window = |text: &str| RenderWindow::new(-2, -2 + text.split(' ').count() as i64 - 1);
        let mut m = Machine::new(EngineConfig::new(1, 4)).unwrap();
        let mut feed = Feeder::new(std::iter::repeat(Command::inc(1)));
        for (text, n) in expected {
            feed.fill(&mut m).unwrap();
            let o = m.step().unwrap();
            assert_eq!(o.rule.rule.number(), n);
            assert_eq!(m.tape().render(window(text)), text);
        }
    }

    #[test]
    fn idle_machine_stays_zero() {
        let mut m = Machine::new(EngineConfig::new(1, 4).with_ghost()).unwrap();
        for _ in 0..10 {
            let o = m.step().unwrap();
            assert!(o.carry_events.is_empty());
        }
        let (lo, hi) = m.tape().extent();
        for off in lo..=hi {
            let c = m.tape().cell_at(off);
            assert!(c.digits().iter().all(|&d| d == 0));
            assert!(c.underlines.iter().all(|&u| !u));
        }
    }

    #[test]
    fn propagate_carry_adds_underline() {
        let mut from = TrackDigit::new(3, false);
        let mut to = TrackDigit::new(0, false);
        assert_eq!(
            propagate(&mut from, &mut to, 4),
            Some(CarryDirection::Carry)
        );
        assert_eq!(from, TrackDigit::new(-1, true));
        assert_eq!(to, TrackDigit::new(1, false));
    }

    #[test]
    fn propagate_small_digit_is_noop() {
        for to in [-3, 0, 2] {
            let mut a = TrackDigit::new(2, false);
            let mut b = TrackDigit::new(to, true);
            assert_eq!(propagate(&mut a, &mut b, 4), None);
            assert_eq!(
                (a, b),
                (TrackDigit::new(2, false), TrackDigit::new(to, true))
            );
        }
    }

    #[test]
    fn propagate_borrow_into_underlined_keeps_underlines() {
        let mut from = TrackDigit::new(-3, true);
        let mut to = TrackDigit::new(1, true);
        assert_eq!(
            propagate(&mut from, &mut to, 4),
            Some(CarryDirection::Borrow)
        );
        assert_eq!(from, TrackDigit::new(1, true));
        assert_eq!(to, TrackDigit::new(0, true));
    }

    #[test]
    fn propagate_borrow_onto_leading_digit_drops_underline() {
        let mut from = TrackDigit::new(-3, true);
        let mut to = TrackDigit::new(1, false);
        assert_eq!(
            propagate(&mut from, &mut to, 4),
            Some(CarryDirection::Borrow)
        );
        assert_eq!(from, TrackDigit::new(1, false));
        assert_eq!(to, TrackDigit::new(0, false));
    }

    #[test]
    fn odd_radix_thresholds() {
        // r = 5: carry above 2.5, borrow below -2.5.
        let mut a = TrackDigit::new(3, false);
        let mut b = TrackDigit::new(0, false);
        assert_eq!(propagate(&mut a, &mut b, 5), Some(CarryDirection::Carry));
        assert_eq!(a.digit, -2);
        let mut a = TrackDigit::new(-2, false);
        assert_eq!(propagate(&mut a, &mut b, 5), None);
    }

    #[test]
    fn inject_sets_sign() {
        let mut m = Machine::new(EngineConfig::new(1, 4)).unwrap();
        m.submit(Command::inc(1)).unwrap();
        m.step().unwrap();
        let o = m.step().unwrap();
        assert!(o.injected);
        assert_eq!(o.consumed, vec![Some(CommandKind::Inc)]);
        assert_eq!(m.sign_bits(), &[SignResponse::Positive]);
        m.submit(Command::dec(1)).unwrap();
        m.submit(Command::sign(1)).unwrap();
        let o = loop {
            let o = m.step().unwrap();
            if o.injected {
                break o;
            }
        };
        assert_eq!(o.responses, vec![Some(SignResponse::Zero)]);
        assert_eq!(m.sign_bits(), &[SignResponse::Zero]);
    }

    #[test]
    fn query_before_mutation_sees_old_sign() {
        let mut m = Machine::new(EngineConfig::new(1, 4)).unwrap();
        m.submit(Command::sign(1)).unwrap();
        m.submit(Command::dec(1)).unwrap();
        // A later query would need the post-mutation value: refused.
        assert_eq!(
            m.submit(Command::sign(1)).unwrap_err(),
            Error::QueueFull { counter: 1 }
        );
        m.step().unwrap();
        let o = m.step().unwrap();
        assert_eq!(o.responses, vec![Some(SignResponse::Zero)]);
        assert_eq!(m.sign_bits(), &[SignResponse::Negative]);
    }

    #[test]
    fn submit_admission() {
        let mut m = Machine::new(EngineConfig::new(2, 4)).unwrap();
        m.submit(Command::inc(1)).unwrap();
        assert_eq!(
            m.submit(Command::inc(1)).unwrap_err(),
            Error::QueueFull { counter: 1 }
        );
        m.submit(Command::inc(2)).unwrap();
        m.submit(Command::sign(1)).unwrap();
        m.submit(Command::sign(1)).unwrap();
        assert!(matches!(
            m.submit(Command::nop(3)),
            Err(Error::CounterOutOfRange { .. })
        ));
        for _ in 0..3 {
            m.step().unwrap();
        }
        m.submit(Command::inc(1)).unwrap();
    }

    #[test]
    fn injections_come_at_most_three_steps_apart() {
        let mut m = Machine::new(EngineConfig::new(1, 4)).unwrap();
        let mut feed = Feeder::new(std::iter::repeat(Command::inc(1)));
        m.run(&mut feed, 10_000).unwrap();
        assert!(m.stats().max_injection_gap <= 3);
        assert_eq!(m.stats().max_abs_digit, 3);
    }
}
