//! Step-by-step invariant checking against independent oracles.
//!
//! [`EngineChecker`] watches a raw machine: move kinds against the tour
//! expansion, ghost positions against the permutation simulator, values and
//! signs against [`OracleCounter`], underlines against a brute-force
//! significance recomputation, digit bounds, injection spacing and carry
//! frequency. [`verify_raw`] and [`verify_rt`] drive whole runs.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::command::{Command, CommandKind, OracleCounter, SignResponse};
use crate::engine::{CarryDirection, EngineConfig, Machine, Stats, StepOutcome};
use crate::error::{Error, Result};
use crate::multicounter::{RealTimeMachine, DEFAULT_DELAY};
use crate::schedule::{PermutationSim, Slot, TourExpander};
use crate::tape::{Arrow, Primes, Tape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    DigitBound,
    SignBits,
    Response,
    CarryFrequency,
    ValueConservation,
    Underline,
    InjectionGap,
    MoveEquivalence,
    PropagationLevel,
    Permutation,
    ArrowAdjacency,
    Delay,
    PhaseInvariant,
    Wrapper,
    Engine,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub step: u64,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {:?}: {}", self.step, self.kind, self.detail)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Value, underline and arrow-adjacency checks every this many steps
    /// (0 disables them).
    pub deep_every: u64,
    /// Ghost-vs-permutation comparison every this many steps (0 disables).
    pub permutation_every: u64,
    /// Test hook: after this step, bump one digit next to the head.
    pub corrupt_at: Option<u64>,
    /// Stop after this many violations.
    pub max_violations: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            deep_every: 1,
            permutation_every: 1000,
            corrupt_at: None,
            max_violations: 20,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub steps: u64,
    pub violations: Vec<Violation>,
    pub stats: Stats,
    /// Largest of (max involved position) - ceil(log3 n) over all steps n.
    pub max_space_slack: i64,
    /// Carry/borrow events checked for spacing.
    pub carry_events: u64,
    pub deep_checks: u64,
    pub permutation_checks: u64,
    pub responses_checked: u64,
    pub phase_checks: u64,
    /// Delay (in steps) between each query and its answer.
    pub delay_histogram: BTreeMap<u64, u64>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// ceil(log3 n) for n >= 1.
pub fn ceil_log3(n: u64) -> u32 {
    let mut p: u128 = 1;
    let mut e = 0;
    while p < n as u128 {
        p *= 3;
        e += 1;
    }
    e
}

#[derive(Clone, Copy, Debug, Default)]
struct LevelTally {
    opportunities: u64,
    last_carry: Option<u64>,
    last_borrow: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default)]
struct Shadow {
    mutation_seen: bool,
    query_before: Option<bool>,
}

pub struct EngineChecker {
    cfg: VerifyConfig,
    radix: u32,
    expander: TourExpander,
    perm: PermutationSim,
    perm_ok: bool,
    oracle: OracleCounter,
    shadows: Option<Vec<Shadow>>,
    tallies: Vec<Vec<LevelTally>>,
    last_injection: u64,
    report: Report,
}

impl EngineChecker {
    /// `track_queries` enables checking sign answers; the caller must then
    /// report every accepted submission through [`EngineChecker::note_submitted`].
    pub fn new(
        k: usize,
        radix: u32,
        cfg: VerifyConfig,
        track_queries: bool,
    ) -> Result<EngineChecker> {
        Ok(EngineChecker {
            cfg,
            radix,
            expander: TourExpander::infinite(),
            perm: PermutationSim::new(),
            perm_ok: true,
            oracle: OracleCounter::new(k)?,
            shadows: track_queries.then(|| vec![Shadow::default(); k]),
            tallies: vec![Vec::new(); k],
            last_injection: 0,
            report: Report {
                max_space_slack: i64::MIN,
                ..Report::default()
            },
        })
    }

    pub fn report(&self) -> &Report {
        &self.report
    }

    pub fn into_report(self) -> Report {
        self.report
    }

    pub fn oracle(&self) -> &OracleCounter {
        &self.oracle
    }

    pub fn saturated(&self) -> bool {
        self.report.violations.len() >= self.cfg.max_violations
    }

    pub fn violation(&mut self, step: u64, kind: ViolationKind, detail: String) {
        if !self.saturated() {
            self.report
                .violations
                .push(Violation { step, kind, detail });
        }
    }

    pub fn note_submitted(&mut self, c: Command) {
        if let Some(shadows) = self.shadows.as_mut() {
            let s = &mut shadows[c.counter - 1];
            if c.kind == CommandKind::Sign {
                if s.query_before.is_none() {
                    s.query_before = Some(!s.mutation_seen);
                }
            } else {
                s.mutation_seen = true;
            }
        }
    }

    pub fn observe(&mut self, m: &Machine, o: &StepOutcome) {
        let step = o.step;
        self.report.steps = step;

        let expected = self.expander.next().expect("the infinite tour never ends");
        if o.rule != expected.rule_id() {
            self.violation(
                step,
                ViolationKind::MoveEquivalence,
                format!(
                    "engine applied {} but the tour expects {} ({:?})",
                    o.rule, expected.kind, expected.side
                ),
            );
        }
        if self.perm_ok {
            if let Err(e) = self.perm.apply(expected) {
                self.perm_ok = false;
                self.violation(step, ViolationKind::Permutation, e);
            }
        }

        if o.injected {
            if step - self.last_injection > 3 || (self.last_injection == 0 && step > 2) {
                self.violation(
                    step,
                    ViolationKind::InjectionGap,
                    format!("injection gap {}", step - self.last_injection),
                );
            }
            self.last_injection = step;
        } else if step - self.last_injection >= 3 {
            self.violation(
                step,
                ViolationKind::InjectionGap,
                "three steps without injection".into(),
            );
        }

        self.check_digits_near_head(m.tape(), step);
        self.check_consumption(m, o);
        self.check_carries(o, expected.kind.opportunity_levels().last().copied());

        let involved = m.stats().max_involved_position as i64;
        let slack = involved - ceil_log3(step) as i64;
        self.report.max_space_slack = self.report.max_space_slack.max(slack);

        let corrupt = self.cfg.corrupt_at == Some(step);
        if corrupt || (self.cfg.deep_every > 0 && step.is_multiple_of(self.cfg.deep_every)) {
            self.deep_check(m.tape(), step);
        }
        if self.perm_ok && self.cfg.permutation_every > 0 && step.is_multiple_of(self.cfg.permutation_every)
        {
            self.check_permutation(m.tape(), step);
        }
        self.report.stats = m.stats();
    }

    fn check_digits_near_head(&mut self, tape: &Tape, step: u64) {
        let h = tape.head_offset();
        let bound = self.radix as i32 - 1;
        for off in h - 4..=h + 4 {
            for t in 0..tape.k() {
                let d = tape.digit_at(off, t);
                if d.abs() > bound {
                    self.violation(
                        step,
                        ViolationKind::DigitBound,
                        format!("digit {d} on track {} at offset {off}", t + 1),
                    );
                }
            }
        }
    }

    fn check_consumption(&mut self, m: &Machine, o: &StepOutcome) {
        let step = o.step;
        for t in 0..self.oracle.k() {
            if o.injected {
                let before = self.oracle.values()[t].clone();
                if let Some(kind) = o.consumed[t] {
                    self.oracle
                        .apply(Command::new(t + 1, kind))
                        .expect("track index is in range");
                }
                if let Some(shadows) = self.shadows.as_mut() {
                    let s = std::mem::take(&mut shadows[t]);
                    match (s.query_before, o.responses[t]) {
                        (None, None) => {}
                        (Some(before_mutation), Some(got)) => {
                            let want = if before_mutation {
                                SignResponse::of(&before)
                            } else {
                                SignResponse::of(&self.oracle.values()[t])
                            };
                            self.report.responses_checked += 1;
                            if got != want {
                                self.violation(
                                    step,
                                    ViolationKind::Response,
                                    format!("track {}: answered {got}, oracle says {want}", t + 1),
                                );
                            }
                        }
                        (want, got) => self.violation(
                            step,
                            ViolationKind::Response,
                            format!(
                                "track {}: query expected {:?}, answer {:?}",
                                t + 1,
                                want.is_some(),
                                got
                            ),
                        ),
                    }
                }
            }
            let want = SignResponse::of(&self.oracle.values()[t]);
            if m.sign_bits()[t] != want {
                self.violation(
                    step,
                    ViolationKind::SignBits,
                    format!(
                        "track {}: sign bit {}, oracle {want}",
                        t + 1,
                        m.sign_bits()[t]
                    ),
                );
            }
        }
    }

    fn check_carries(&mut self, o: &StepOutcome, level: Option<u32>) {
        let Some(site) = o.propagation else { return };
        let Some(level) = level else {
            self.violation(
                o.step,
                ViolationKind::PropagationLevel,
                "propagation on a negative 0-tour".into(),
            );
            return;
        };
        if let Some(ghost_level) = site.level {
            if ghost_level != level as u64 {
                self.violation(
                    o.step,
                    ViolationKind::PropagationLevel,
                    format!("propagated into position {ghost_level}, schedule says {level}"),
                );
            }
        }
        let l = level as usize;
        for t in 0..self.tallies.len() {
            if self.tallies[t].len() <= l {
                self.tallies[t].resize(l + 1, LevelTally::default());
            }
            self.tallies[t][l].opportunities += 1;
        }
        for ev in &o.carry_events {
            self.report.carry_events += 1;
            let tally = &mut self.tallies[ev.track][l];
            let n = tally.opportunities;
            let last = match ev.direction {
                CarryDirection::Carry => &mut tally.last_carry,
                CarryDirection::Borrow => &mut tally.last_borrow,
            };
            let previous = last.replace(n);
            if let Some(p) = previous {
                // Odd radices leave a carried digit one unit short of the
                // opposite threshold, so the spacing only holds for even r.
                if self.radix.is_multiple_of(2) && n - p < 4 {
                    self.violation(
                        o.step,
                        ViolationKind::CarryFrequency,
                        format!(
                            "track {}: {:?} at {level}-opportunities {p} and {n}",
                            ev.track + 1,
                            ev.direction
                        ),
                    );
                }
            }
        }
    }

    fn deep_check(&mut self, tape: &Tape, step: u64) {
        if !tape.ghost_enabled() {
            return;
        }
        self.report.deep_checks += 1;
        let (lo, hi) = tape.nonblank_extent();
        for t in 0..tape.k() {
            let digits = tape.ghost_digits(t).expect("ghost enabled");
            let value = tape.represented_value(t).expect("ghost enabled");
            if value != self.oracle.values()[t] {
                self.violation(
                    step,
                    ViolationKind::ValueConservation,
                    format!(
                        "track {}: tape holds {value}, oracle {}",
                        t + 1,
                        self.oracle.values()[t]
                    ),
                );
            }
            let lead = digits.iter().rposition(|&d| d != 0);
            for off in lo..=hi {
                let Some(p) = tape.ghost_at(off) else {
                    continue;
                };
                let want = matches!(lead, Some(l) if (p as usize) < l);
                if tape.underline_at(off, t) != want {
                    self.violation(
                        step,
                        ViolationKind::Underline,
                        format!("track {}: position {p} underline should be {want}", t + 1),
                    );
                }
            }
        }
        self.check_arrow_adjacency(tape, step, lo, hi);
    }

    fn check_arrow_adjacency(&mut self, tape: &Tape, step: u64, lo: i64, hi: i64) {
        let h = tape.head_offset();
        let sides = [(Arrow::Right, 1i64), (Arrow::Left, -1i64)];
        for (outward, dir) in sides {
            let mut inner = h + dir;
            while (lo..=hi).contains(&(inner + dir)) {
                let a = tape.control_at(inner);
                let b = tape.control_at(inner + dir);
                if a.arrow == outward && a.primes == Primes::NONE && b.primes == Primes::NONE {
                    if let (Some(pa), Some(pb)) = (tape.ghost_at(inner), tape.ghost_at(inner + dir))
                    {
                        if pb != pa + 1 {
                            self.violation(
                                step,
                                ViolationKind::ArrowAdjacency,
                                format!(
                                    "positions {pa} and {pb} at offsets {inner} and {}",
                                    inner + dir
                                ),
                            );
                        }
                    }
                }
                inner += dir;
            }
        }
    }

    fn check_permutation(&mut self, tape: &Tape, step: u64) {
        if !tape.ghost_enabled() {
            return;
        }
        self.report.permutation_checks += 1;
        let (_, hi) = tape.extent();
        let len = (self.perm.slots().len() as i64).max(hi + 1);
        for off in 0..len {
            let want = self.perm.slot(off as usize);
            let got = if off == tape.head_offset() {
                Slot::Head
            } else {
                match tape.ghost_at(off) {
                    Some(p) => Slot::Position(p),
                    None => {
                        self.violation(
                            step,
                            ViolationKind::Permutation,
                            format!("offset {off} has no position"),
                        );
                        return;
                    }
                }
            };
            if got != want {
                self.violation(
                    step,
                    ViolationKind::Permutation,
                    format!("offset {off}: tape has {got}, permutation has {want}"),
                );
                return;
            }
        }
    }
}

/// Runs a raw machine with the ghost track on `source` for `steps` steps
/// under full checking.
pub fn verify_raw<I>(
    config: EngineConfig,
    source: I,
    steps: u64,
    cfg: VerifyConfig,
) -> Result<Report>
where
    I: IntoIterator<Item = Command>,
{
    let mut m = Machine::new(config.with_ghost())?;
    let mut checker = EngineChecker::new(config.k, config.radix, cfg, true)?;
    let mut source = source.into_iter();
    let mut held: Option<Command> = None;
    for _ in 0..steps {
        while let Some(c) = held.take().or_else(|| source.next()) {
            match m.submit(c) {
                Ok(()) => checker.note_submitted(c),
                Err(Error::QueueFull { .. }) => {
                    held = Some(c);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        let o = match m.step() {
            Ok(o) => o,
            Err(e) => {
                let step = m.step_count() + 1;
                checker.violation(step, ViolationKind::Engine, e.to_string());
                break;
            }
        };
        if cfg.corrupt_at == Some(o.step) {
            let off = m.tape().head_offset() + 1;
            let d = m.tape().digit_at(off, 0);
            m.tape_mut().corrupt_digit(off, 0, d + 1);
        }
        checker.observe(&m, &o);
        if checker.saturated() {
            break;
        }
    }
    Ok(checker.into_report())
}

/// Runs the delay-1 machine on a per-step stream, checking every answer
/// against the oracle, the one-step delay, the phase invariant at every
/// phase boundary, and the inner machine with [`EngineChecker`].
pub fn verify_rt<I>(
    k: usize,
    radix: u32,
    stream: I,
    steps: u64,
    cfg: VerifyConfig,
) -> Result<Report>
where
    I: IntoIterator<Item = Option<Command>>,
{
    let mut m =
        RealTimeMachine::with_config(EngineConfig::new(k, radix).with_ghost(), DEFAULT_DELAY)?;
    let mut checker = EngineChecker::new(k, radix, cfg, false)?;
    let mut oracle = OracleCounter::new(k)?;
    let mut pending: Option<(u64, SignResponse)> = None;
    let mut delays: BTreeMap<u64, u64> = BTreeMap::new();
    let mut answered = 0;
    let mut phase_checks = 0;
    let mut source = stream.into_iter();
    for step in 1..=steps {
        let cmd = source.next().flatten();
        let mut query = None;
        if let Some(c) = cmd {
            if let Some(answer) = oracle.apply(c)? {
                query = Some((step, answer));
            }
        }
        let r = match m.step_detailed(cmd) {
            Ok(r) => r,
            Err(e) => {
                checker.violation(step, ViolationKind::Wrapper, e.to_string());
                break;
            }
        };
        match (pending.take(), r.response) {
            (None, None) => {}
            (Some((asked, want)), Some(got)) => {
                answered += 1;
                *delays.entry(step - asked).or_default() += 1;
                if got != want {
                    checker.violation(
                        step,
                        ViolationKind::Response,
                        format!("answered {got}, oracle says {want}"),
                    );
                }
            }
            (Some((asked, _)), None) => checker.violation(
                step,
                ViolationKind::Delay,
                format!("query from step {asked} unanswered"),
            ),
            (None, Some(_)) => {
                checker.violation(step, ViolationKind::Delay, "answer without a query".into())
            }
        }
        pending = query;
        checker.observe(m.inner(), &r.inner);
        if m.at_phase_boundary() {
            phase_checks += 1;
            if let Err(e) = m.check_phase_bounds() {
                checker.violation(step, ViolationKind::PhaseInvariant, e.to_string());
            }
            for counter in 1..=k {
                let got: BigInt = m.represented_count(counter)?;
                let want = oracle.value(counter)?;
                if &got != want {
                    checker.violation(
                        step,
                        ViolationKind::PhaseInvariant,
                        format!("counter {counter}: c0 + c1*2kd gives {got}, oracle {want}"),
                    );
                }
            }
        }
        if checker.saturated() {
            break;
        }
    }
    let mut report = checker.into_report();
    report.responses_checked = answered;
    report.phase_checks = phase_checks;
    report.delay_histogram = delays;
    Ok(report)
}
