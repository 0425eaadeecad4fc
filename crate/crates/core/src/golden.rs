//! Reference configurations of the all-increment run with one counter and
//! radix 4, and helpers to reproduce and compare them.

use crate::command::Command;
use crate::engine::{EngineConfig, Feeder, Machine};
use crate::error::Result;
use crate::tape::{RenderWindow, Tape};

/// First six transitions, rendered over offsets -2..=5, with the rule
/// number of each.
pub const SIX_STEP_TRACE: [(&str, u8); 6] = [
    ("<0 <0 >0 <* >0 >0 >0 >0", 1),
    ("<0 <0 >0' >* <1 >0 >0 >0", 2),
    ("<0 <0 >0 <1 <* >0 >0 >0", 1),
    ("<0 <0 >0 >0'' >* <2 >0 >0", 3),
    ("<0 <0 >0' <0 >* <2 >0 >0", 4),
    ("<0 <0 >0' _>-1 <* <1' >0 >0", 2),
];

pub const SIX_STEP_WINDOW: RenderWindow = RenderWindow { left: -2, right: 5 };

pub const GOLDEN_STEPS: u64 = 2_980_000;
pub const GOLDEN_COMMANDS: u64 = 1_191_993;

/// Configuration after [`GOLDEN_STEPS`] steps, from nine squares left of
/// the head to ten squares right of it.
pub const GOLDEN_CONFIGURATION: &str = "<0 <0 >0' >0' _>0 >1'' _>0' _>2 _>-1'' >* \
     _<1 _>1' _<0 _<2'' _>-1 _<1 <0' <0' >0 >0";

/// Squares left and right of the head in [`GOLDEN_CONFIGURATION`].
pub const GOLDEN_SPAN: (i64, i64) = (9, 10);

/// Radix-4 digits of the golden count, most significant first.
pub const GOLDEN_DIGITS: [i32; 11] = [1, 0, 2, 1, -1, 0, 0, 1, -1, 2, 1];

pub struct AllIncRun {
    pub machine: Machine,
    /// Increments consumed by injections.
    pub commands: u64,
}

impl AllIncRun {
    pub fn rendered(&self) -> String {
        render_around_head(self.machine.tape())
    }
}

/// Runs the all-increment stream on counter 1.
pub fn run_all_inc(radix: u32, steps: u64, ghost: bool) -> Result<AllIncRun> {
    let mut config = EngineConfig::new(1, radix);
    if ghost {
        config = config.with_ghost();
    }
    let mut machine = Machine::new(config)?;
    let mut feed = Feeder::new(std::iter::repeat(Command::inc(1)));
    machine.run_with(&mut feed, steps, |_, _| {})?;
    let commands = machine.stats().injections;
    Ok(AllIncRun { machine, commands })
}

pub fn render_around_head(tape: &Tape) -> String {
    let h = tape.head_offset();
    tape.render(RenderWindow::new(h - GOLDEN_SPAN.0, h + GOLDEN_SPAN.1))
}

/// Token-by-token comparison. `None` if equal, else one line per
/// differing token.
pub fn diff(expected: &str, actual: &str) -> Option<String> {
    if expected == actual {
        return None;
    }
    let e: Vec<&str> = expected.split_whitespace().collect();
    let a: Vec<&str> = actual.split_whitespace().collect();
    let mut lines = Vec::new();
    for i in 0..e.len().max(a.len()) {
        let x = e.get(i).copied().unwrap_or("(none)");
        let y = a.get(i).copied().unwrap_or("(none)");
        if x != y {
            lines.push(format!("token {i}: expected {x}, got {y}"));
        }
    }
    if lines.is_empty() {
        lines.push("whitespace differs".into());
    }
    Some(lines.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_string_parses() {
        let t = Tape::parse_rendered(GOLDEN_CONFIGURATION, 4).unwrap();
        assert_eq!(render_around_head(&t), GOLDEN_CONFIGURATION);
    }

    #[test]
    fn golden_digits_read_back() {
        let v = GOLDEN_DIGITS
            .iter()
            .fold(0i64, |acc, &d| acc * 4 + d as i64);
        assert_eq!(v as u64, GOLDEN_COMMANDS);
    }

    #[test]
    fn diff_reports_tokens() {
        assert_eq!(diff("a b c", "a b c"), None);
        let d = diff("a b c", "a x c").unwrap();
        assert_eq!(d, "token 1: expected b, got x");
        assert!(diff("a b", "a b c").unwrap().contains("(none)"));
    }

    #[test]
    fn six_steps_render() {
        let mut m = Machine::new(EngineConfig::new(1, 4)).unwrap();
        let mut feed = Feeder::new(std::iter::repeat(Command::inc(1)));
        for (text, rule) in SIX_STEP_TRACE {
            feed.fill(&mut m).unwrap();
            let o = m.step().unwrap();
            assert_eq!(o.rule.rule.number(), rule);
            assert_eq!(m.tape().render(SIX_STEP_WINDOW), text);
        }
    }
}
