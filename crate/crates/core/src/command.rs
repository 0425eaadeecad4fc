//! Counter commands, sign responses, and the arbitrary-precision reference
//! counter every other component is checked against.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Inc,
    Dec,
    Sign,
    /// Do nothing. Lets a k-counter command be viewed as a k-tuple.
    Nop,
}

impl CommandKind {
    pub fn is_mutation(self) -> bool {
        !matches!(self, CommandKind::Sign)
    }

    pub fn keyword(self) -> &'static str {
        match self {
            CommandKind::Inc => "inc",
            CommandKind::Dec => "dec",
            CommandKind::Sign => "sign",
            CommandKind::Nop => "nop",
        }
    }
}

impl FromStr for CommandKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "inc" => Ok(CommandKind::Inc),
            "dec" => Ok(CommandKind::Dec),
            "sign" => Ok(CommandKind::Sign),
            "nop" => Ok(CommandKind::Nop),
            other => Err(format!("unknown command keyword `{other}`")),
        }
    }
}

/// A command addressed to one counter. Counters are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Command {
    pub counter: usize,
    pub kind: CommandKind,
}

impl Command {
    pub fn new(counter: usize, kind: CommandKind) -> Self {
        Command { counter, kind }
    }

    pub fn inc(counter: usize) -> Self {
        Command::new(counter, CommandKind::Inc)
    }

    pub fn dec(counter: usize) -> Self {
        Command::new(counter, CommandKind::Dec)
    }

    pub fn sign(counter: usize) -> Self {
        Command::new(counter, CommandKind::Sign)
    }

    pub fn nop(counter: usize) -> Self {
        Command::new(counter, CommandKind::Nop)
    }

    /// Zero-based track index, after checking the counter against `k`.
    pub fn track(&self, k: usize) -> Result<usize> {
        if self.counter == 0 || self.counter > k {
            return Err(Error::CounterOutOfRange {
                counter: self.counter,
                k,
            });
        }
        Ok(self.counter - 1)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind.keyword(), self.counter)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignResponse {
    Negative,
    Zero,
    Positive,
}

impl SignResponse {
    pub fn of<T: Signed>(value: &T) -> Self {
        if value.is_zero() {
            SignResponse::Zero
        } else if value.is_positive() {
            SignResponse::Positive
        } else {
            SignResponse::Negative
        }
    }

    pub fn negate(self) -> Self {
        match self {
            SignResponse::Negative => SignResponse::Positive,
            SignResponse::Zero => SignResponse::Zero,
            SignResponse::Positive => SignResponse::Negative,
        }
    }
}

impl fmt::Display for SignResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignResponse::Negative => "negative",
            SignResponse::Zero => "zero",
            SignResponse::Positive => "positive",
        })
    }
}

/// k unbounded integer counters, updated by definition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCounter {
    values: Vec<BigInt>,
}

impl OracleCounter {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidTrackCount);
        }
        Ok(OracleCounter {
            values: vec![BigInt::zero(); k],
        })
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[BigInt] {
        &self.values
    }

    pub fn value(&self, counter: usize) -> Result<&BigInt> {
        let track = Command::sign(counter).track(self.k())?;
        Ok(&self.values[track])
    }

    pub fn sign_of(&self, counter: usize) -> Result<SignResponse> {
        self.value(counter).map(SignResponse::of)
    }

    pub fn apply(&mut self, c: Command) -> Result<Option<SignResponse>> {
        let track = c.track(self.k())?;
        let value = &mut self.values[track];
        match c.kind {
            CommandKind::Inc => *value += BigInt::one(),
            CommandKind::Dec => *value -= BigInt::one(),
            CommandKind::Nop => {}
            CommandKind::Sign => return Ok(Some(SignResponse::of(value))),
        }
        Ok(None)
    }
}

/// Parses the line-oriented command format: `inc 1`, `dec 2`, `sign 1`,
/// `nop 1`. `#` starts a comment line and blank lines are skipped.
pub fn parse_commands(text: &str) -> Result<Vec<Command>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::CommandParse {
            line: idx + 1,
            message,
        };
        let mut words = line.split_whitespace();
        let kind: CommandKind = words.next().unwrap_or_default().parse().map_err(bad)?;
        let counter = match words.next() {
            Some(w) => w
                .parse::<usize>()
                .map_err(|e| bad(format!("bad counter index `{w}`: {e}")))?,
            None => return Err(bad("missing counter index".into())),
        };
        if counter == 0 {
            return Err(bad("counter indices start at 1".into()));
        }
        if let Some(extra) = words.next() {
            return Err(bad(format!("unexpected trailing token `{extra}`")));
        }
        out.push(Command::new(counter, kind));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_oracle_is_zero() {
        assert_eq!(OracleCounter::new(1).unwrap().values(), &[BigInt::zero()]);
        assert_eq!(OracleCounter::new(3).unwrap().values().len(), 3);
        assert!(OracleCounter::new(3)
            .unwrap()
            .values()
            .iter()
            .all(Zero::is_zero));
        assert!(matches!(
            OracleCounter::new(0),
            Err(Error::InvalidTrackCount)
        ));
    }

    #[test]
    fn oracle_counts_by_definition() {
        let mut o = OracleCounter::new(2).unwrap();
        for _ in 0..5 {
            assert_eq!(o.apply(Command::inc(1)).unwrap(), None);
        }
        assert_eq!(o.values(), &[BigInt::from(5), BigInt::zero()]);
    }

    #[test]
    fn oracle_signs() {
        let mut o = OracleCounter::new(1).unwrap();
        assert_eq!(o.apply(Command::sign(1)).unwrap(), Some(SignResponse::Zero));
        o.apply(Command::inc(1)).unwrap();
        o.apply(Command::inc(1)).unwrap();
        o.apply(Command::dec(1)).unwrap();
        assert_eq!(
            o.apply(Command::sign(1)).unwrap(),
            Some(SignResponse::Positive)
        );

        let mut o = OracleCounter::new(1).unwrap();
        o.apply(Command::dec(1)).unwrap();
        assert_eq!(
            o.apply(Command::sign(1)).unwrap(),
            Some(SignResponse::Negative)
        );
    }

    #[test]
    fn oracle_rejects_bad_index() {
        let mut o = OracleCounter::new(2).unwrap();
        assert!(matches!(
            o.apply(Command::inc(3)),
            Err(Error::CounterOutOfRange { counter: 3, k: 2 })
        ));
        assert!(o.apply(Command::inc(0)).is_err());
    }

    #[test]
    fn parses_command_text() {
        let text = "# header\ninc 1\n\n  dec 2\nsign 1\nnop 1\n";
        let cmds = parse_commands(text).unwrap();
        assert_eq!(
            cmds,
            vec![
                Command::inc(1),
                Command::dec(2),
                Command::sign(1),
                Command::nop(1)
            ]
        );
        let shown: Vec<String> = cmds.iter().map(|c| c.to_string()).collect();
        assert_eq!(shown, ["inc 1", "dec 2", "sign 1", "nop 1"]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_commands("inc 1\nfrob 2\n").unwrap_err();
        assert!(matches!(err, Error::CommandParse { line: 2, .. }));
        let err = parse_commands("inc\n").unwrap_err();
        assert!(matches!(err, Error::CommandParse { line: 1, .. }));
        let err = parse_commands("\n\ninc 0\n").unwrap_err();
        assert!(matches!(err, Error::CommandParse { line: 3, .. }));
        let err = parse_commands("inc 1 2\n").unwrap_err();
        assert!(matches!(err, Error::CommandParse { line: 1, .. }));
    }
}
