//! Real-time simulation of k independent counters on one sequential tape.
//!
//! A single-state machine rewrites a tape of signed radix digits using five
//! local rule schemes. Head motion is the same for every command stream,
//! every counter sees an increment/decrement opportunity at least once every
//! three steps, and zero is detectable from the square next to the head.
//!
//! Modules:
//! - [`command`]: commands, responses and the reference counter.
//! - [`tape`]: squares, rendering and parsing, the ghost position track.
//! - [`engine`]: rule selection and stepping.
//! - [`schedule`]: independent oracles for the head schedule.
//! - [`multicounter`]: the delay-1 wrapper.
//! - [`golden`]: reference configurations of the all-increment run.
//! - [`streams`]: seeded command sources.
//! - [`verify`] and [`batch`]: invariant checking over seeded streams.

pub mod batch;
pub mod command;
pub mod engine;
pub mod error;
pub mod golden;
pub mod multicounter;
pub mod schedule;
pub mod streams;
pub mod tape;
pub mod verify;

pub use command::{parse_commands, Command, CommandKind, OracleCounter, SignResponse};
pub use engine::{
    match_rule, propagate, CarryDirection, CarryEvent, EngineConfig, Feeder, Machine, Neighborhood,
    Rule, RuleId, Stats, StepOutcome, TrackDigit,
};
pub use error::{Error, Result};
pub use multicounter::{rt_run, CounterControl, RealTimeMachine, RtStep, TimedResponse};
pub use tape::{Arrow, Base, Cell, Primes, RenderWindow, Tape};
