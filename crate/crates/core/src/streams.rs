//! Seeded command sources for tests, benches and the CLI.
//!
//! Random streams switch between drift regimes (all increments, all
//! decrements, balanced, biased) in segments of random length, so counts
//! both grow large and cross zero repeatedly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::command::{Command, CommandKind};

/// (P(inc), P(dec)) per regime; the remainder is `nop`.
const REGIMES: [(f64, f64); 6] = [
    (1.0, 0.0),
    (0.0, 1.0),
    (0.5, 0.5),
    (0.7, 0.25),
    (0.25, 0.7),
    (0.4, 0.4),
];

const MAX_SEGMENT: u32 = 4096;

#[derive(Clone, Debug)]
struct RegimeState {
    rng: ChaCha8Rng,
    regime: (f64, f64),
    left: u32,
}

impl RegimeState {
    fn new(seed: u64) -> RegimeState {
        RegimeState {
            rng: ChaCha8Rng::seed_from_u64(seed),
            regime: REGIMES[0],
            left: 0,
        }
    }

    fn mutation(&mut self) -> CommandKind {
        if self.left == 0 {
            self.regime = REGIMES[self.rng.gen_range(0..REGIMES.len())];
            self.left = self.rng.gen_range(1..=MAX_SEGMENT);
        }
        self.left -= 1;
        let x: f64 = self.rng.gen();
        let (inc, dec) = self.regime;
        if x < inc {
            CommandKind::Inc
        } else if x < inc + dec {
            CommandKind::Dec
        } else {
            CommandKind::Nop
        }
    }
}

/// Endless stream for the raw machine: mutations visit tracks round-robin,
/// and a sign query for a random track follows a mutation with probability
/// `p_sign`.
#[derive(Clone, Debug)]
pub struct RandomCommands {
    state: RegimeState,
    k: usize,
    next_track: usize,
    p_sign: f64,
    queued: Option<Command>,
}

impl RandomCommands {
    pub fn new(k: usize, seed: u64) -> RandomCommands {
        RandomCommands {
            state: RegimeState::new(seed),
            k,
            next_track: 0,
            p_sign: 0.2,
            queued: None,
        }
    }

    pub fn with_sign_probability(mut self, p: f64) -> RandomCommands {
        self.p_sign = p;
        self
    }
}

impl Iterator for RandomCommands {
    type Item = Command;

    fn next(&mut self) -> Option<Command> {
        if let Some(c) = self.queued.take() {
            return Some(c);
        }
        let kind = self.state.mutation();
        let c = Command::new(self.next_track + 1, kind);
        self.next_track = (self.next_track + 1) % self.k;
        if self.state.rng.gen_bool(self.p_sign) {
            let t = self.state.rng.gen_range(1..=self.k);
            self.queued = Some(Command::sign(t));
        }
        Some(c)
    }
}

/// Endless per-step stream for the delay-1 machine: each step carries a
/// command for a uniformly random counter, or nothing with probability
/// `p_idle`.
#[derive(Clone, Debug)]
pub struct RandomRtCommands {
    state: RegimeState,
    k: usize,
    p_sign: f64,
    p_idle: f64,
}

impl RandomRtCommands {
    pub fn new(k: usize, seed: u64) -> RandomRtCommands {
        RandomRtCommands {
            state: RegimeState::new(seed),
            k,
            p_sign: 0.25,
            p_idle: 0.05,
        }
    }

    pub fn with_probabilities(mut self, p_sign: f64, p_idle: f64) -> RandomRtCommands {
        self.p_sign = p_sign;
        self.p_idle = p_idle;
        self
    }
}

impl Iterator for RandomRtCommands {
    type Item = Option<Command>;

    fn next(&mut self) -> Option<Option<Command>> {
        let rng = &mut self.state.rng;
        if rng.gen_bool(self.p_idle) {
            return Some(None);
        }
        let counter = rng.gen_range(1..=self.k);
        if rng.gen_bool(self.p_sign) {
            return Some(Some(Command::sign(counter)));
        }
        Some(Some(Command::new(counter, self.state.mutation())))
    }
}

/// Every command increments counter 1.
pub fn all_inc() -> std::iter::Repeat<Command> {
    std::iter::repeat(Command::inc(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a: Vec<Command> = RandomCommands::new(3, 7).take(500).collect();
        let b: Vec<Command> = RandomCommands::new(3, 7).take(500).collect();
        let c: Vec<Command> = RandomCommands::new(3, 8).take(500).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mutations_go_round_robin() {
        let tracks: Vec<usize> = RandomCommands::new(3, 1)
            .filter(|c| c.kind.is_mutation())
            .take(9)
            .map(|c| c.counter)
            .collect();
        assert_eq!(tracks, vec![1, 2, 3, 1, 2, 3, 1, 2, 3]);
    }

    #[test]
    fn rt_stream_stays_in_range() {
        for c in RandomRtCommands::new(4, 3).take(10_000).flatten() {
            assert!((1..=4).contains(&c.counter));
        }
    }
}
