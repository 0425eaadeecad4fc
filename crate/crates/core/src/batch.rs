//! Independent runs over many seeds. With the `parallel` feature the seeds
//! are spread over the rayon pool; without it they run one after another.
//! Each run owns its machines, so results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::command::Command;
use crate::engine::{EngineConfig, Feeder, Machine, RuleId};
use crate::error::Result;
use crate::streams::{RandomCommands, RandomRtCommands};
use crate::verify::{verify_raw, verify_rt, Report, VerifyConfig};

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

pub fn map_seeds<T, F>(seeds: &[u64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        seeds.par_iter().map(|&s| f(s)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seeds_sequential(seeds, f)
    }
}

pub fn map_seeds_sequential<T, F>(seeds: &[u64], f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    seeds.iter().map(|&s| f(s)).collect()
}

pub fn verify_raw_seeds(
    config: EngineConfig,
    steps: u64,
    seeds: &[u64],
    cfg: VerifyConfig,
) -> Result<Vec<Report>> {
    map_seeds(seeds, |seed| {
        verify_raw(config, RandomCommands::new(config.k, seed), steps, cfg)
    })
    .into_iter()
    .collect()
}

pub fn verify_rt_seeds(
    k: usize,
    radix: u32,
    steps: u64,
    seeds: &[u64],
    cfg: VerifyConfig,
) -> Result<Vec<Report>> {
    map_seeds(seeds, |seed| {
        verify_rt(k, radix, RandomRtCommands::new(k, seed), steps, cfg)
    })
    .into_iter()
    .collect()
}

/// Per-step (rule, head displacement) of one run.
pub type MotionTrace = Vec<(RuleId, i8)>;

pub fn motion_trace<I>(config: EngineConfig, source: I, steps: u64) -> Result<MotionTrace>
where
    I: Iterator<Item = Command>,
{
    let mut m = Machine::new(config)?;
    let mut feed = Feeder::new(source);
    let mut trace = Vec::with_capacity(steps as usize);
    m.run_with(&mut feed, steps, |_, o| trace.push((o.rule, o.head_shift)))?;
    Ok(trace)
}

/// Motion traces for random streams with the given seeds.
pub fn motion_traces(config: EngineConfig, steps: u64, seeds: &[u64]) -> Result<Vec<MotionTrace>> {
    map_seeds(seeds, |seed| {
        motion_trace(config, RandomCommands::new(config.k, seed), steps)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let seeds = [1, 2, 3, 4];
        let f =
            |s: u64| motion_trace(EngineConfig::new(2, 4), RandomCommands::new(2, s), 500).unwrap();
        assert_eq!(map_seeds(&seeds, f), map_seeds_sequential(&seeds, f));
    }

    #[test]
    fn motion_ignores_commands() {
        let traces = motion_traces(EngineConfig::new(2, 4), 2000, &[5, 6, 7]).unwrap();
        let idle = motion_trace(EngineConfig::new(2, 4), std::iter::empty(), 2000).unwrap();
        for t in &traces {
            assert_eq!(t, &idle);
        }
    }
}
