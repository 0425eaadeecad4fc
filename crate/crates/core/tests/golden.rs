use num_bigint::BigInt;
use rtcount::golden::{
    diff, render_around_head, run_all_inc, GOLDEN_COMMANDS, GOLDEN_CONFIGURATION, GOLDEN_DIGITS,
    GOLDEN_STEPS,
};
use rtcount::{SignResponse, Tape};

#[test]
fn big_all_inc_run_matches_golden() {
    let run = run_all_inc(4, GOLDEN_STEPS, true).unwrap();
    assert_eq!(run.commands, GOLDEN_COMMANDS);
    let got = run.rendered();
    if let Some(d) = diff(GOLDEN_CONFIGURATION, &got) {
        panic!("golden mismatch:\n{d}\nfull: {got}");
    }
    let tape = run.machine.tape();
    assert_eq!(
        tape.represented_value(0).unwrap(),
        BigInt::from(GOLDEN_COMMANDS)
    );
    let mut digits = tape.ghost_digits(0).unwrap();
    while digits.last() == Some(&0) {
        digits.pop();
    }
    digits.reverse();
    assert_eq!(digits, GOLDEN_DIGITS);
    assert_eq!(run.machine.sign_bits(), &[SignResponse::Positive]);
    assert_eq!(run.machine.stats().max_abs_digit, 3);

    let parsed = Tape::parse_rendered(GOLDEN_CONFIGURATION, 4).unwrap();
    assert!(parsed.same_configuration(tape));
}

#[test]
fn perturbed_golden_is_rejected() {
    let run = run_all_inc(4, GOLDEN_STEPS, false).unwrap();
    let perturbed = GOLDEN_CONFIGURATION.replacen(">1''", ">1'", 1);
    let d = diff(&perturbed, &run.rendered()).expect("one prime off must differ");
    assert_eq!(d.lines().count(), 1);
}

#[test]
fn radix_five_does_not_reproduce_radix_four_golden() {
    let run = run_all_inc(5, GOLDEN_STEPS, false).unwrap();
    assert!(diff(
        GOLDEN_CONFIGURATION,
        &render_around_head(run.machine.tape())
    )
    .is_some());
}
