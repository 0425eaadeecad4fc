//! Delay-1 wrapper around the raw machine.
//!
//! Time is cut into phases of 2kd steps. Each counter c is kept as a
//! finite-control remainder c0 and the count c1 stored on the tape, with
//! |c| = c0 + c1 * 2kd. At every phase boundary a counter whose c0 is
//! large moves one unit of 2kd into c1, one whose c0 is small moves one unit
//! back out, and the sign of c1 is refreshed by one interrogation. Commands
//! themselves only touch c0 and the sign, so each is answered on the next
//! step.

use num_bigint::{BigInt, Sign};
use serde::{Deserialize, Serialize};

use crate::command::{Command, CommandKind, SignResponse};
use crate::engine::{EngineConfig, Machine, StepOutcome};
use crate::error::{Error, Result};

/// Injection-spacing bound of the raw machine.
pub const DEFAULT_DELAY: u64 = 3;

/// Finite-control state of one counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterControl {
    /// Remainder of |c|; kept non-negative by flipping the sign instead.
    pub c0: u64,
    pub sign: SignResponse,
    /// Last known sign of c1, from the inner machine.
    pub c1_sign: SignResponse,
    pub c1_zero_at_phase_start: bool,
    /// Inner mutation scheduled this phase and not yet consumed.
    pub pending_inner: Option<CommandKind>,
    /// Inner mutation chosen at the start of this phase, if any.
    pub scheduled: Option<CommandKind>,
    pub awaiting_interrogation: bool,
}

impl Default for CounterControl {
    fn default() -> Self {
        CounterControl {
            c0: 0,
            sign: SignResponse::Zero,
            c1_sign: SignResponse::Zero,
            c1_zero_at_phase_start: true,
            pending_inner: None,
            scheduled: None,
            awaiting_interrogation: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RtStep {
    /// Step index, 1-based.
    pub step: u64,
    /// Answer to the sign query submitted on the previous step.
    pub response: Option<SignResponse>,
    pub inner: StepOutcome,
    /// True if this step began a new phase.
    pub phase_start: bool,
}

#[derive(Clone, Debug)]
pub struct RealTimeMachine {
    inner: Machine,
    counters: Vec<CounterControl>,
    d: u64,
    phase_len: u64,
    phase_pos: u64,
    steps: u64,
    outbox: Option<SignResponse>,
    submitted: Option<Command>,
}

impl RealTimeMachine {
    pub fn new(k: usize, radix: u32) -> Result<RealTimeMachine> {
        RealTimeMachine::with_config(EngineConfig::new(k, radix), DEFAULT_DELAY)
    }

    /// `d` other than the inner injection bound is only useful for testing
    /// the wrapper's own bookkeeping.
    pub fn with_config(config: EngineConfig, d: u64) -> Result<RealTimeMachine> {
        let inner = Machine::new(config)?;
        if d == 0 {
            return Err(Error::WrapperInvariant(
                "delay bound must be positive".into(),
            ));
        }
        Ok(RealTimeMachine {
            counters: vec![CounterControl::default(); config.k],
            phase_len: 2 * config.k as u64 * d,
            d,
            inner,
            phase_pos: 0,
            steps: 0,
            outbox: None,
            submitted: None,
        })
    }

    pub fn k(&self) -> usize {
        self.inner.k()
    }

    pub fn radix(&self) -> u32 {
        self.inner.radix()
    }

    pub fn delay_bound(&self) -> u64 {
        self.d
    }

    pub fn phase_len(&self) -> u64 {
        self.phase_len
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// True when the next step starts a phase.
    pub fn at_phase_boundary(&self) -> bool {
        self.phase_pos == 0
    }

    pub fn inner(&self) -> &Machine {
        &self.inner
    }

    pub fn counters(&self) -> &[CounterControl] {
        &self.counters
    }

    pub fn counter(&self, counter: usize) -> Result<&CounterControl> {
        let t = Command::sign(counter).track(self.k())?;
        Ok(&self.counters[t])
    }

    /// Queues the command for the next [`RealTimeMachine::tick`].
    pub fn submit(&mut self, c: Command) -> Result<()> {
        c.track(self.k())?;
        if self.submitted.is_some() {
            return Err(Error::CommandAlreadySubmitted);
        }
        self.submitted = Some(c);
        Ok(())
    }

    /// Runs one step with whatever was submitted.
    pub fn tick(&mut self) -> Result<RtStep> {
        let cmd = self.submitted.take();
        self.step_detailed(cmd)
    }

    /// One step: absorb `cmd`, advance the inner machine, and return the
    /// answer to the previous step's query.
    pub fn step(&mut self, cmd: Option<Command>) -> Result<Option<SignResponse>> {
        Ok(self.step_detailed(cmd)?.response)
    }

    pub fn step_detailed(&mut self, cmd: Option<Command>) -> Result<RtStep> {
        if let Some(c) = cmd {
            c.track(self.k())?;
        }
        let phase_start = self.phase_pos == 0;
        if phase_start {
            self.begin_phase()?;
        }
        let answer = match cmd {
            Some(c) => self.absorb(c)?,
            None => None,
        };
        let inner = self.inner.step()?;
        for (t, consumed) in inner.consumed.iter().enumerate() {
            if consumed.is_some() {
                self.counters[t].pending_inner = None;
            }
        }
        for (t, resp) in inner.responses.iter().enumerate() {
            if let Some(s) = *resp {
                if s == SignResponse::Negative {
                    return Err(Error::WrapperInvariant(format!(
                        "inner count of counter {} went negative",
                        t + 1
                    )));
                }
                let ctl = &mut self.counters[t];
                ctl.c1_sign = s;
                ctl.awaiting_interrogation = false;
            }
        }
        self.phase_pos = (self.phase_pos + 1) % self.phase_len;
        self.steps += 1;
        let response = std::mem::replace(&mut self.outbox, answer);
        Ok(RtStep {
            step: self.steps,
            response,
            inner,
            phase_start,
        })
    }

    fn begin_phase(&mut self) -> Result<()> {
        let unit = self.phase_len;
        for t in 0..self.k() {
            let ctl = self.counters[t];
            if ctl.pending_inner.is_some() || ctl.awaiting_interrogation {
                return Err(Error::WrapperInvariant(format!(
                    "counter {}: inner work of the previous phase not finished",
                    t + 1
                )));
            }
            let c1_zero = ctl.c1_sign == SignResponse::Zero;
            let scheduled = if ctl.c0 > 3 * unit {
                Some(CommandKind::Inc)
            } else if ctl.c0 < 2 * unit && !c1_zero {
                Some(CommandKind::Dec)
            } else {
                None
            };
            if let Some(kind) = scheduled {
                self.inner.submit(Command::new(t + 1, kind))?;
            }
            self.inner.submit(Command::sign(t + 1))?;
            let ctl = &mut self.counters[t];
            match scheduled {
                Some(CommandKind::Inc) => ctl.c0 -= unit,
                Some(CommandKind::Dec) => ctl.c0 += unit,
                _ => {}
            }
            ctl.c1_zero_at_phase_start = c1_zero;
            ctl.scheduled = scheduled;
            ctl.pending_inner = scheduled;
            ctl.awaiting_interrogation = true;
        }
        Ok(())
    }

    fn absorb(&mut self, c: Command) -> Result<Option<SignResponse>> {
        let t = c.track(self.k())?;
        let ctl = &mut self.counters[t];
        let toward = match c.kind {
            CommandKind::Inc => SignResponse::Positive,
            CommandKind::Dec => SignResponse::Negative,
            CommandKind::Nop => return Ok(None),
            CommandKind::Sign => {
                let zero = ctl.c0 == 0 && ctl.c1_zero_at_phase_start && ctl.scheduled.is_none();
                if zero != (ctl.sign == SignResponse::Zero) {
                    return Err(Error::WrapperInvariant(format!(
                        "counter {}: zero test disagrees with the sign bit",
                        c.counter
                    )));
                }
                return Ok(Some(ctl.sign));
            }
        };
        if ctl.sign == SignResponse::Zero {
            ctl.sign = toward;
            ctl.c0 = 1;
        } else if ctl.sign == toward {
            ctl.c0 += 1;
        } else {
            if ctl.c0 == 0 {
                return Err(Error::WrapperInvariant(format!(
                    "counter {}: remainder exhausted while the tape count is nonzero",
                    c.counter
                )));
            }
            ctl.c0 -= 1;
            if ctl.c0 == 0 {
                if !ctl.c1_zero_at_phase_start || ctl.scheduled.is_some() {
                    return Err(Error::WrapperInvariant(format!(
                        "counter {}: remainder reached zero while the tape count is nonzero",
                        c.counter
                    )));
                }
                ctl.sign = SignResponse::Zero;
            }
        }
        Ok(None)
    }

    /// Count rebuilt from the remainder and the tape, sign * (c0 + c1 * 2kd).
    /// Needs the ghost track on the inner machine.
    pub fn represented_count(&self, counter: usize) -> Result<BigInt> {
        let t = Command::sign(counter).track(self.k())?;
        let ctl = &self.counters[t];
        let c1 = self.inner.tape().represented_value(t)?;
        let magnitude = BigInt::from(ctl.c0) + c1 * BigInt::from(self.phase_len);
        Ok(match ctl.sign {
            SignResponse::Negative => -magnitude,
            _ => magnitude,
        })
    }

    /// Checks the between-phase bounds on c0 against the tape count. Only
    /// meaningful at a phase boundary, with the ghost track enabled.
    pub fn check_phase_bounds(&self) -> Result<()> {
        let unit = self.phase_len;
        for t in 0..self.k() {
            let ctl = &self.counters[t];
            let c1 = self.inner.tape().represented_value(t)?;
            // unit = 2kd: c1 > 0 needs 2kd <= c0 <= 8kd, c1 = 0 needs c0 <= 8kd.
            let ok = match c1.sign() {
                Sign::Plus => (unit..=4 * unit).contains(&ctl.c0),
                Sign::NoSign => ctl.c0 <= 4 * unit,
                Sign::Minus => false,
            };
            if !ok {
                return Err(Error::WrapperInvariant(format!(
                    "counter {}: c0 = {} out of bounds for c1 = {c1}",
                    t + 1,
                    ctl.c0
                )));
            }
        }
        Ok(())
    }
}

/// A response tagged with the step of its command and the step it arrived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedResponse {
    pub command_step: u64,
    pub response_step: u64,
    pub counter: usize,
    pub response: SignResponse,
}

/// Runs `n` steps of a per-step command stream, pairing each answer with the
/// step its query was issued in.
pub fn rt_run<I>(m: &mut RealTimeMachine, stream: I, n: u64) -> Result<Vec<TimedResponse>>
where
    I: IntoIterator<Item = Option<Command>>,
{
    let mut out = Vec::new();
    let mut last_query: Option<(u64, usize)> = None;
    let mut source = stream.into_iter();
    for _ in 0..n {
        let cmd = source.next().flatten();
        let r = m.step_detailed(cmd)?;
        match (r.response, last_query) {
            (Some(response), Some((command_step, counter))) => out.push(TimedResponse {
                command_step,
                response_step: r.step,
                counter,
                response,
            }),
            (None, None) => {}
            _ => {
                return Err(Error::WrapperInvariant(format!(
                    "step {}: response does not match the previous step's query",
                    r.step
                )))
            }
        }
        last_query = cmd
            .filter(|c| c.kind == CommandKind::Sign)
            .map(|c| (r.step, c.counter));
    }
    Ok(out)
}
