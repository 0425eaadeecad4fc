use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rtcount::golden::{self, GOLDEN_COMMANDS, GOLDEN_CONFIGURATION, GOLDEN_STEPS};
use rtcount::schedule::{
    binary_carry_schedule, simulate_permutation, SpacingChecker, TourExpander,
};
use rtcount::streams::{all_inc, RandomCommands, RandomRtCommands};
use rtcount::verify::{verify_raw, verify_rt, Report, VerifyConfig};
use rtcount::{
    batch, parse_commands, Command, EngineConfig, Feeder, Machine, RealTimeMachine, RenderWindow,
    Stats, StepOutcome, Tape,
};
use serde_json::json;

/// `println!` that exits quietly when stdout is closed early (`| head`).
macro_rules! outln {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("writing to stdout: {e}");
        }
    }};
}

mod exit {
    pub const INPUT: u8 = 2;
    pub const CHECK_FAILED: u8 = 3;
}

/// Failure that maps to its own exit status.
#[derive(Debug)]
struct Exit(u8);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit status {}", self.0)
    }
}

impl std::error::Error for Exit {}

#[derive(Parser)]
#[command(
    name = "rtcount",
    version,
    about = "Real-time k-counter simulation on one tape"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the machine and print a trace and/or statistics.
    Run(RunArgs),
    /// Reproduce the 2,980,000-step all-increment configuration.
    Golden(GoldenArgs),
    /// Print schedule oracles: carry schedule, tour moves, permutations.
    Schedule(ScheduleArgs),
    /// Check a run against the oracles; nonzero exit on any violation.
    Verify(VerifyArgs),
    /// Run the raw machine and print statistics only.
    Stats(SourceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    AllInc,
    Idle,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Raw,
    Delay1,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Clone)]
struct SourceArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    radix: u32,
    #[arg(long, default_value_t = 100)]
    steps: u64,
    /// Builtin command source; ignored when --commands is given.
    #[arg(long, value_enum, default_value = "all-inc")]
    preset: Preset,
    /// Command file: one `inc|dec|sign|nop <counter>` per line.
    #[arg(long)]
    commands: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Track true position numbers (enables value readout).
    #[arg(long)]
    ghost: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "raw")]
    mode: Mode,
    /// Print the tape after every step.
    #[arg(long)]
    trace: bool,
    /// Render this many squares either side of the head instead of the
    /// whole non-blank region.
    #[arg(long)]
    window: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct GoldenArgs {
    #[arg(long, default_value_t = 4)]
    radix: u32,
    /// Compare against this configuration instead of the stored one.
    #[arg(long)]
    expected: Option<String>,
}

#[derive(Args)]
struct ScheduleArgs {
    /// First N entries of the binary carry schedule.
    #[arg(long)]
    carry: Option<u64>,
    /// First N moves of the infinite tour, with opportunity levels.
    #[arg(long)]
    moves: Option<usize>,
    /// Position permutation after N moves.
    #[arg(long)]
    permute: Option<usize>,
    /// Check opportunity spacing over N moves.
    #[arg(long)]
    spacing: Option<usize>,
    #[arg(long, default_value_t = 10)]
    max_level: u32,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "raw")]
    mode: Mode,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    radix: u32,
    #[arg(long, default_value_t = 100_000)]
    steps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of consecutive seeds, run in parallel.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Command file instead of a random stream.
    #[arg(long)]
    commands: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    deep_every: u64,
    #[arg(long, default_value_t = 1000)]
    permutation_every: u64,
    /// Test hook: corrupt one digit after this step.
    #[arg(long, hide = true)]
    corrupt_at: Option<u64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Golden(a) => cmd_golden(a),
        Cmd::Schedule(a) => cmd_schedule(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::Stats(a) => cmd_run(RunArgs {
            source: a,
            mode: Mode::Raw,
            trace: false,
            window: None,
            format: Format::Text,
            stats: true,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(Exit(code)) = e.downcast_ref::<Exit>() {
                return ExitCode::from(*code);
            }
            eprintln!("error: {e:#}");
            let input = e.chain().any(|c| {
                c.downcast_ref::<std::io::Error>().is_some()
                    || matches!(
                        c.downcast_ref::<rtcount::Error>(),
                        Some(
                            rtcount::Error::CommandParse { .. }
                                | rtcount::Error::CounterOutOfRange { .. }
                        )
                    )
            });
            ExitCode::from(if input { exit::INPUT } else { 1 })
        }
    }
}

fn read_commands(path: &PathBuf) -> Result<Vec<Command>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_commands(&text).with_context(|| format!("parsing {}", path.display()))
}

fn raw_source(a: &SourceArgs) -> Result<Box<dyn Iterator<Item = Command>>> {
    Ok(match (&a.commands, a.preset) {
        (Some(path), _) => {
            let cmds = read_commands(path)?;
            check_counters(&cmds, a.k)?;
            Box::new(cmds.into_iter())
        }
        (None, Preset::AllInc) => Box::new(all_inc()),
        (None, Preset::Idle) => Box::new(std::iter::empty()),
        (None, Preset::Random) => Box::new(RandomCommands::new(a.k, a.seed)),
    })
}

fn rt_source(a: &SourceArgs) -> Result<Box<dyn Iterator<Item = Option<Command>>>> {
    Ok(match (&a.commands, a.preset) {
        (Some(path), _) => {
            let cmds = read_commands(path)?;
            check_counters(&cmds, a.k)?;
            Box::new(cmds.into_iter().map(Some))
        }
        (None, Preset::AllInc) => Box::new(all_inc().map(Some)),
        (None, Preset::Idle) => Box::new(std::iter::empty()),
        (None, Preset::Random) => Box::new(RandomRtCommands::new(a.k, a.seed)),
    })
}

fn check_counters(cmds: &[Command], k: usize) -> Result<()> {
    for c in cmds {
        c.track(k)?;
    }
    Ok(())
}

fn window(tape: &Tape, radius: Option<u64>) -> RenderWindow {
    match radius {
        Some(r) => RenderWindow::around_head(tape, r),
        None => {
            let (lo, hi) = tape.nonblank_extent();
            RenderWindow::new(lo.min(-1) - 1, (hi + 2).max(5))
        }
    }
}

fn print_step(format: Format, tape: &Tape, o: &StepOutcome, radius: Option<u64>) {
    let rendered = tape.render(window(tape, radius));
    match format {
        Format::Text => outln!("{rendered} (by rule {})", o.rule.rule.number()),
        Format::Json => outln!(
            "{}",
            json!({
                "step": o.step,
                "rule": o.rule.rule.number(),
                "mirrored": o.rule.mirrored,
                "injected": o.injected,
                "window": rendered,
            })
        ),
    }
}

fn print_stats(format: Format, s: &Stats, extra: serde_json::Value) {
    match format {
        Format::Text => {
            outln!("steps: {}", s.steps);
            outln!("injections: {}", s.injections);
            outln!("max |digit|: {}", s.max_abs_digit);
            outln!("max involved position: {}", s.max_involved_position);
            outln!("max injection gap: {}", s.max_injection_gap);
            if let Some(obj) = extra.as_object() {
                for (k, v) in obj {
                    outln!(
                        "{k}: {}",
                        v.as_str().map_or_else(|| v.to_string(), str::to_string)
                    );
                }
            }
        }
        Format::Json => {
            let mut v = serde_json::to_value(s).expect("stats serialize");
            if let (Some(obj), Some(more)) = (v.as_object_mut(), extra.as_object()) {
                obj.extend(more.clone());
            }
            outln!("{v}");
        }
    }
}

fn values(tape: &Tape) -> serde_json::Value {
    if !tape.ghost_enabled() {
        return json!({});
    }
    let vals: Vec<String> = (0..tape.k())
        .map(|t| {
            tape.represented_value(t)
                .expect("ghost enabled")
                .to_string()
        })
        .collect();
    json!({ "values": vals.join(" ") })
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let src = &a.source;
    let mut config = EngineConfig::new(src.k, src.radix);
    if src.ghost {
        config = config.with_ghost();
    }
    match a.mode {
        Mode::Raw => {
            let mut m = Machine::new(config)?;
            let mut feed = Feeder::new(raw_source(src)?);
            if src.steps == 0 {
                outln!("{}", m.tape().render(window(m.tape(), a.window)));
            }
            m.run_with(&mut feed, src.steps, |m, o| {
                if a.trace {
                    print_step(a.format, m.tape(), o, a.window);
                }
            })?;
            if a.stats {
                print_stats(a.format, &m.stats(), values(m.tape()));
            } else if !a.trace && src.steps > 0 {
                outln!("{}", m.tape().render(window(m.tape(), a.window)));
            }
        }
        Mode::Delay1 => {
            let mut m = RealTimeMachine::with_config(config, rtcount::multicounter::DEFAULT_DELAY)?;
            let mut source = rt_source(src)?;
            if src.steps == 0 {
                outln!(
                    "{}",
                    m.inner().tape().render(window(m.inner().tape(), a.window))
                );
            }
            let mut last: Option<Command> = None;
            for _ in 0..src.steps {
                let cmd = source.next().flatten();
                let r = m.step_detailed(cmd)?;
                if a.trace {
                    print_step(a.format, m.inner().tape(), &r.inner, a.window);
                }
                if let (Some(resp), Some(q)) = (r.response, last) {
                    match a.format {
                        Format::Text => outln!("step {}: {q} -> {resp}", r.step),
                        Format::Json => outln!(
                            "{}",
                            json!({"step": r.step, "query": q.to_string(), "response": resp})
                        ),
                    }
                }
                last = cmd;
            }
            if a.stats {
                let mut extra = values(m.inner().tape());
                let c0: Vec<String> = m.counters().iter().map(|c| c.c0.to_string()).collect();
                extra["phase length"] = json!(m.phase_len());
                extra["c0"] = json!(c0.join(" "));
                print_stats(a.format, &m.inner().stats(), extra);
            }
        }
    }
    Ok(())
}

fn cmd_golden(a: GoldenArgs) -> Result<()> {
    let run = golden::run_all_inc(a.radix, GOLDEN_STEPS, true)?;
    let got = run.rendered();
    let expected = a.expected.as_deref().unwrap_or(GOLDEN_CONFIGURATION);
    let value = run.machine.tape().represented_value(0)?;
    let mut ok = true;
    if let Some(d) = golden::diff(expected, &got) {
        ok = false;
        outln!("configuration differs after {GOLDEN_STEPS} steps:");
        outln!("{d}");
        outln!("expected: {expected}");
        outln!("actual:   {got}");
    }
    if run.commands != GOLDEN_COMMANDS || value != GOLDEN_COMMANDS.into() {
        ok = false;
        outln!(
            "commands {}, value {value}, expected {GOLDEN_COMMANDS}",
            run.commands
        );
    }
    if ok {
        outln!("PASS: {got}");
        outln!("{} commands, value {value}", run.commands);
        Ok(())
    } else {
        outln!("FAIL");
        Err(Exit(exit::CHECK_FAILED).into())
    }
}

fn cmd_schedule(a: ScheduleArgs) -> Result<()> {
    if let Some(n) = a.carry {
        let s: Vec<String> = binary_carry_schedule(n)
            .iter()
            .map(u32::to_string)
            .collect();
        outln!("{}", s.join(" "));
    }
    if let Some(n) = a.moves {
        for (i, mv) in TourExpander::infinite().take(n).enumerate() {
            let levels: Vec<String> = mv
                .kind
                .opportunity_levels()
                .iter()
                .map(u32::to_string)
                .collect();
            let side = format!("{:?}", mv.side).to_lowercase();
            if levels.is_empty() {
                outln!("{} {} {side}", i + 1, mv.kind);
            } else {
                outln!(
                    "{} {} {side} opportunity {}",
                    i + 1,
                    mv.kind,
                    levels.join(",")
                );
            }
        }
    }
    if let Some(n) = a.permute {
        let sim = simulate_permutation(n).map_err(anyhow::Error::msg)?;
        outln!("{}", sim.render());
    }
    if let Some(n) = a.spacing {
        let mut checker = SpacingChecker::new(a.max_level);
        for mv in TourExpander::infinite().take(n) {
            checker.observe(mv.kind);
        }
        let r = checker.finish();
        outln!(
            "{} moves, max 0-opportunity gap {}, highest level {}",
            r.moves,
            r.max_zero_gap,
            r.highest_level
        );
        for v in &r.violations {
            outln!("violation: {v}");
        }
        if !r.ok() {
            return Err(Exit(exit::CHECK_FAILED).into());
        }
    }
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<()> {
    let cfg = VerifyConfig {
        deep_every: a.deep_every,
        permutation_every: a.permutation_every,
        corrupt_at: a.corrupt_at,
        ..VerifyConfig::default()
    };
    let config = EngineConfig::new(a.k, a.radix);
    let reports: Vec<(u64, Report)> = match &a.commands {
        Some(path) => {
            let cmds = read_commands(path)?;
            check_counters(&cmds, a.k)?;
            let r = match a.mode {
                Mode::Raw => verify_raw(config, cmds, a.steps, cfg)?,
                Mode::Delay1 => verify_rt(a.k, a.radix, cmds.into_iter().map(Some), a.steps, cfg)?,
            };
            vec![(a.seed, r)]
        }
        None => {
            let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
            let rs = match a.mode {
                Mode::Raw => batch::verify_raw_seeds(config, a.steps, &seeds, cfg)?,
                Mode::Delay1 => batch::verify_rt_seeds(a.k, a.radix, a.steps, &seeds, cfg)?,
            };
            seeds.into_iter().zip(rs).collect()
        }
    };
    let mut failed = false;
    for (seed, r) in &reports {
        failed |= !r.ok();
        match a.format {
            Format::Json => outln!("{}", json!({"seed": seed, "report": r})),
            Format::Text => {
                outln!(
                    "seed {seed}: {} steps, {} violations, {} answers checked, {} carries checked",
                    r.steps,
                    r.violations.len(),
                    r.responses_checked,
                    r.carry_events
                );
                if a.mode == Mode::Delay1 {
                    let hist: Vec<String> = r
                        .delay_histogram
                        .iter()
                        .map(|(d, n)| format!("{d}: {n}"))
                        .collect();
                    outln!("  delay histogram: {{{}}}", hist.join(", "));
                    outln!("  phase boundaries checked: {}", r.phase_checks);
                }
                for v in &r.violations {
                    outln!("  violation at {v}");
                }
            }
        }
    }
    if failed {
        Err(Exit(exit::CHECK_FAILED).into())
    } else {
        Ok(())
    }
}
