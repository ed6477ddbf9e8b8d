use std::path::PathBuf;
use std::process::{Command, Output};

use binohedge_cli::report::{ConvergeReport, DigitalReport, InvarianceReport, PriceReport};

fn golden(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn scenario(name: &str, json: &str) -> String {
    let dir = std::env::temp_dir().join(format!("binohedge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_binohedge")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn failure(args: &[&str]) -> (i32, String) {
    let out = run(args);
    (out.status.code().unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn price_two_step_call() {
    let text = stdout(&["price", "--scenario", &golden("two_step_call.json"), "--json"]);
    let r: PriceReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.numeraire, 9.986666667);
    assert_eq!(r.nominal, 9.233234714);
    let human = stdout(&["price", "--scenario", &golden("two_step_call.json"), "--verify"]);
    assert!(human.contains("exact_rational 749/75"), "{human}");
}

#[test]
fn price_of_zero_claim() {
    let s = scenario(
        "zero.json",
        r#"{"s0": 1, "u": 0.1, "d": -0.1, "r": 0.01, "steps": 4, "payoff": {"kind": "constant", "value": 0}}"#,
    );
    let r: PriceReport = serde_json::from_str(&stdout(&["price", "--scenario", &s, "--json"])).unwrap();
    assert_eq!((r.numeraire, r.nominal), (0.0, 0.0));
}

#[test]
fn path_dependent_price_verifies() {
    let s = scenario(
        "asian.json",
        r#"{"s0": 1, "u": 0.1, "d": -0.1, "r": 0.01, "steps": 8,
            "payoff": {"kind": "asian_arithmetic", "strike": 1}}"#,
    );
    let r: PriceReport = serde_json::from_str(&stdout(&["price", "--scenario", &s, "--json", "--verify"])).unwrap();
    assert_eq!(r.method, "path_enumeration");
    assert!(r.verify.unwrap().delta < 1e-12);
}

#[test]
fn exit_codes_and_messages() {
    let off = scenario(
        "off.json",
        r#"{"s0": 100, "u": 0.2, "d": -0.1, "r": 0.04, "steps": 2, "payoff": {"kind": "digital_at", "strike": 107}}"#,
    );
    let (code, msg) = failure(&["price", "--scenario", &off]);
    assert_eq!(code, 3);
    assert!(msg.contains("StrikeOffLattice"), "{msg}");

    let (code, msg) = failure(&["invariance", "--scenario", &off]);
    assert_eq!(code, 3);
    assert!(msg.contains("StrikeOffLattice"), "{msg}");

    let both = scenario("both.json", r#"{"s0": 1, "u": 0.1, "d": -0.1, "r": 0, "steps": 1, "sigma": 0.2}"#);
    let (code, msg) = failure(&["price", "--scenario", &both]);
    assert_eq!(code, 2);
    assert!(msg.contains("`sigma`"), "{msg}");

    let bad = scenario("bad.json", r#"{"s0": 1, "u": 0.1, "d": -0.1, "r": 0, "steps": 1, "payof": {}}"#);
    let (code, msg) = failure(&["price", "--scenario", &bad]);
    assert_eq!(code, 2);
    assert!(msg.contains("`payof`"), "{msg}");

    let arbitrage = scenario(
        "arb.json",
        r#"{"s0": 1, "u": 0.1, "d": -0.1, "r": 0.2, "steps": 1, "payoff": {"kind": "underlying"}}"#,
    );
    assert_eq!(failure(&["price", "--scenario", &arbitrage]).0, 3);

    let long = scenario(
        "long.json",
        r#"{"s0": 1, "u": 0.1, "d": -0.1, "r": 0, "steps": 26, "payoff": {"kind": "lookback"}}"#,
    );
    let (code, msg) = failure(&["price", "--scenario", &long]);
    assert_eq!(code, 3);
    assert!(msg.contains("EnumerationCapExceeded"), "{msg}");

    assert_eq!(failure(&["price"]).0, 2);
    assert_eq!(failure(&["price", "--scenario", &golden("two_step_call.json"), "--json", "--csv"]).0, 2);
}

#[test]
fn hedge_ledgers() {
    let csv = stdout(&["hedge", "--scenario", &golden("three_step.json"), "--csv"]);
    let wealth: Vec<f64> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    let q = 7.0 / 15.0;
    let expected = [q * (1.0 - q) * (1.0 - q), q * (1.0 - q), q, 1.0];
    for (w, e) in wealth.iter().zip(expected) {
        assert!((w - e).abs() < 1e-9, "{w} vs {e}");
    }
    assert_eq!(wealth.len(), 4);

    let one = scenario("one.json", r#"{"s0": 1, "u": 0.1, "d": -0.1, "r": 0, "steps": 1}"#);
    let csv = stdout(&["hedge", "--scenario", &one, "--trajectory", "1", "--csv"]);
    assert_eq!(csv, "time,instrument,shares,wealth\n0,AD_up,1,0.5\n1,,0,1\n");

    let (code, msg) = failure(&["hedge", "--scenario", &one, "--trajectory", "01"]);
    assert_eq!(code, 2);
    assert!(msg.contains("expected 1"), "{msg}");
    assert_eq!(failure(&["hedge", "--scenario", &one, "--trajectory", "2"]).0, 2);
}

#[test]
fn digital_table() {
    let text = stdout(&["digital", "--scenario", &golden("two_step_call.json"), "--json", "--verify"]);
    let r: DigitalReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.rows.len(), 3);
    let exact: Vec<&str> = r.rows.iter().map(|row| row.exact.as_deref().unwrap()).collect();
    assert_eq!(exact, ["64/225", "112/225", "49/225"]);
    for row in &r.rows {
        assert_eq!(row.from_ad, Some(row.price));
        assert_eq!(row.walk, row.price);
    }
}

const FIVE_STEP: &str = r#"{"s0": 1, "u": 0.25, "d": -0.2, "r": 0.01, "steps": 5, "recombining_strict": true,
    "payoff": {"kind": "digital_at", "strike": 1.25}}"#;

fn invariance(s: &str, extra: &[&str]) -> InvarianceReport {
    let mut args = vec!["invariance", "--scenario", s, "--json"];
    args.extend_from_slice(extra);
    serde_json::from_str(&stdout(&args)).unwrap()
}

#[test]
fn invariance_rows() {
    let s = scenario("five.json", FIVE_STEP);
    let r = invariance(&s, &["--counterexample"]);
    assert_eq!(r.rows.len(), 6);
    assert!(r.rows.iter().all(|row| row.sum == 1.0));
    let c = r.counterexample.unwrap();
    assert_eq!((c.bond_value, c.terminal_mass), (1.0, 6.0));

    let interval = scenario(
        "interval.json",
        r#"{"s0": 1, "u": 0.25, "d": -0.2, "r": 0.01, "steps": 5, "recombining_strict": true,
            "payoff": {"kind": "digital_interval", "k1": 0.8, "k2": 1.953125}}"#,
    );
    let r = invariance(&interval, &[]);
    assert_eq!(r.strikes.len(), 3);
    assert!(r.rows.iter().all(|row| (row.sum - 3.0).abs() < 1e-10));

    let r = invariance(&s, &["--strikes", ""]);
    assert!(r.strikes.is_empty());
    assert!(r.rows.iter().all(|row| row.sum == 0.0));

    let grid = stdout(&["invariance", "--scenario", &s, "--grid"]);
    assert!(grid.starts_with("t,state,price,value\n"));
    assert_eq!(grid.lines().count(), 1 + (1..=6).sum::<usize>());
}

fn converge(extra: &[&str]) -> (ConvergeReport, String) {
    let mut args = vec!["converge", "--json"];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert!(out.status.success());
    (
        serde_json::from_str(&String::from_utf8(out.stdout).unwrap()).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn converge_defaults() {
    let (r, warnings) = converge(&[]);
    assert!(warnings.is_empty());
    assert_eq!(r.rows.iter().map(|row| row.n).collect::<Vec<_>>(), [64, 256, 1024]);
    assert!((r.slope_approx.unwrap() - 0.14).abs() < 0.05 * 0.14);
    // exact-variance slope over dt = 1/64, 1/256, 1/1024, computed at 50 digits
    assert!((r.slope_exact.unwrap() - 0.0532926045079039).abs() < 1e-9);
    assert!(r.sensitivity.relative_error < 1e-3);
}

#[test]
fn converge_cancelled_drift_and_single_count() {
    let s = scenario(
        "cancel.json",
        r#"{"s0": 100, "mu": -0.04, "sigma": 0.2, "r": 0.04, "horizon": 1, "dt": 0.01}"#,
    );
    let (r, _) = converge(&["--scenario", &s]);
    assert!(r.slope_approx.unwrap().abs() < 1e-9);

    let (r, warnings) = converge(&["--steps", "128"]);
    assert_eq!(r.rows.len(), 1);
    assert_eq!((r.slope_exact, r.slope_approx), (None, None));
    assert!(warnings.contains("slope omitted"), "{warnings}");

    let lattice = golden("two_step_call.json");
    assert_eq!(failure(&["converge", "--scenario", &lattice]).0, 2);
}

#[test]
fn outputs_are_deterministic() {
    let three = golden("three_step.json");
    for args in [
        vec!["walk", "--scenario", &three, "--csv", "--seed", "9"],
        vec!["converge", "--csv"],
        vec!["digital", "--scenario", &three],
        vec!["invariance", "--scenario", &three, "--strikes", "129.6,97.2"],
    ] {
        assert_eq!(stdout(&args), stdout(&args));
    }
}

type RoundTrip = fn(&str) -> String;

#[test]
fn json_reports_round_trip() {
    let three = golden("three_step.json");
    let cases: [(Vec<&str>, RoundTrip); 3] = [
        (vec!["digital", "--scenario", &three, "--json"], |t| {
            serde_json::to_string_pretty(&serde_json::from_str::<DigitalReport>(t).unwrap()).unwrap()
        }),
        (vec!["invariance", "--scenario", &three, "--strikes", "129.6", "--json", "--counterexample"], |t| {
            serde_json::to_string_pretty(&serde_json::from_str::<InvarianceReport>(t).unwrap()).unwrap()
        }),
        (vec!["converge", "--json"], |t| {
            serde_json::to_string_pretty(&serde_json::from_str::<ConvergeReport>(t).unwrap()).unwrap()
        }),
    ];
    for (args, round_trip) in cases {
        let text = stdout(&args);
        assert_eq!(round_trip(&text), text.trim_end(), "{args:?}");
    }
}
