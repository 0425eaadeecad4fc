use std::io::Write;
use std::process::{Command, Output};

use rtcount::Tape;

fn rtcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rtcount"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn six_step_trace() {
    let o = rtcount(&["run", "--steps", "6", "--trace"]);
    assert!(o.status.success());
    let want = "\
<0 <0 >0 <* >0 >0 >0 >0 (by rule 1)
<0 <0 >0' >* <1 >0 >0 >0 (by rule 2)
<0 <0 >0 <1 <* >0 >0 >0 (by rule 1)
<0 <0 >0 >0'' >* <2 >0 >0 (by rule 3)
<0 <0 >0' <0 >* <2 >0 >0 (by rule 4)
<0 <0 >0' _>-1 <* <1' >0 >0 (by rule 2)
";
    assert_eq!(stdout(&o), want);
}

#[test]
fn zero_steps_prints_initial_tape() {
    let o = rtcount(&["run", "--k", "2", "--steps", "0"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("<(0|0)' >* >(0|0)"), "{}", stdout(&o));
}

#[test]
fn stats_count_injections() {
    let o = rtcount(&["stats", "--steps", "2980000"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("injections: 1191993"));
    assert!(stdout(&o).contains("max |digit|: 3"));
}

#[test]
fn golden_pass_and_fail() {
    let o = rtcount(&["golden"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("PASS"));

    let o = rtcount(&["golden", "--radix", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL"));

    let perturbed = rtcount::golden::GOLDEN_CONFIGURATION.replacen(">1''", ">1'", 1);
    let o = rtcount(&["golden", "--expected", &perturbed]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn schedule_outputs() {
    let o = rtcount(&["schedule", "--carry", "8"]);
    assert_eq!(stdout(&o).trim(), "0 1 0 2 0 1 0 3");

    let o = rtcount(&["schedule", "--moves", "5"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "1 NegTour0 right");
    assert_eq!(lines[4], "5 PushbackPrimed(1) right opportunity 2");

    let o = rtcount(&["schedule", "--permute", "5"]);
    assert_eq!(stdout(&o).trim(), "2 1 * 0 3 4 5 ...");
}

#[test]
fn verify_clean_and_corrupted() {
    let o = rtcount(&["verify", "--steps", "3000", "--seeds", "2"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 violations"));

    let o = rtcount(&["verify", "--steps", "3000", "--corrupt-at", "50"]);
    assert_eq!(o.status.code(), Some(3));
    let first = stdout(&o)
        .lines()
        .find(|l| l.contains("violation at"))
        .unwrap()
        .to_string();
    assert!(first.contains("step 50"), "{first}");
}

#[test]
fn delay_one_histogram() {
    let o = rtcount(&["verify", "--mode", "delay1", "--k", "2", "--steps", "5000"]);
    assert!(o.status.success());
    let line = stdout(&o)
        .lines()
        .find(|l| l.contains("delay histogram"))
        .unwrap()
        .to_string();
    assert!(line.trim().starts_with("delay histogram: {1: "), "{line}");
}

#[test]
fn bad_command_file_reports_line() {
    let mut f = std::env::temp_dir();
    f.push(format!("rtcount-bad-{}.txt", std::process::id()));
    std::fs::File::create(&f)
        .unwrap()
        .write_all(b"inc 1\nbogus\n")
        .unwrap();
    let o = rtcount(&["run", "--commands", f.to_str().unwrap(), "--steps", "5"]);
    std::fs::remove_file(&f).ok();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn json_trace_round_trips() {
    let o = rtcount(&["run", "--steps", "40", "--trace", "--format", "json"]);
    assert!(o.status.success());
    let mut n = 0;
    for line in stdout(&o).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        n += 1;
        assert_eq!(v["step"], n);
        let window = v["window"].as_str().unwrap();
        let tape = Tape::parse_rendered(window, 4).unwrap();
        let (lo, hi) = tape.extent();
        assert_eq!(
            tape.render(rtcount::RenderWindow::new(lo, hi))
                .split(' ')
                .count() as i64,
            hi - lo + 1
        );
        assert!(window.contains('*'));
    }
    assert_eq!(n, 40);
}
