//! End-to-end runs of the `phasecons` binary against the fixtures.
//!
//! Set `PHASECONS_BLESS=1` to rewrite the golden files after an intended
//! change of output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn phasecons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phasecons"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("binary runs")
}

/// (golden file, arguments)
const GOLDEN_CASES: &[(&str, &[&str])] = &[
    ("constbeta05_psi2.json", &["check", "consistency", "--model", "constbeta05_psi2.json"]),
    ("constbeta0_offset.json", &["check", "consistency", "--model", "constbeta0_offset.json"]),
    ("constbetam1_psi03.json", &["check", "consistency", "--model", "constbetam1_psi03.json"]),
    ("general_half_psi2.json", &["check", "consistency", "--model", "general_half_psi2.json"]),
    ("general_s2.json", &["check", "consistency", "--model", "general_s2.json", "--orders", "6"]),
    ("custom_cored.json", &["check", "consistency", "--model", "custom_cored.json"]),
    ("cm_ml.json", &["check", "cm", "--expr", "mlf(0.5, 0.7, 0.4; -x^0.7)", "--order", "8"]),
    ("cm_fail.json", &["check", "cm", "--expr", "x^2*exp(-x)", "--order", "4", "--grid", "0.1:10:12:log"]),
    (
        "invert_constbeta05.csv",
        &["invert", "--model", "constbeta05_psi2.json", "--grid", "0.05:1:20:linear"],
    ),
    (
        "moments_general_half.csv",
        &["moments", "--model", "general_half_psi2.json", "--mu-list", "-0.5,0,0.5,1,2", "--at", "0.6,1.5"],
    ),
];

#[test]
fn golden_reports_are_reproduced_byte_for_byte() {
    let bless = std::env::var_os("PHASECONS_BLESS").is_some();
    for (golden, args) in GOLDEN_CASES {
        let first = phasecons(args);
        assert!(first.status.success(), "{golden}: {}", String::from_utf8_lossy(&first.stderr));
        let second = phasecons(args);
        assert_eq!(first.stdout, second.stdout, "{golden}: two runs differ");
        let path = fixtures().join("golden").join(golden);
        if bless {
            std::fs::write(&path, &first.stdout).unwrap();
            continue;
        }
        let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(first.stdout == want, "{golden}: output differs from the golden file");
    }
}

#[test]
fn out_flag_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let args = ["check", "consistency", "--model", "constbeta05_psi2.json"];
    let direct = phasecons(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap();
    with_out.extend(["--out", out_str]);
    let written = phasecons(&with_out);
    assert!(written.status.success());
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), direct.stdout);
}

#[test]
fn report_has_the_documented_layout() {
    let out = phasecons(&["check", "consistency", "--model", "constbeta05_psi2.json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort();
    assert_eq!(keys, ["caveats", "config", "necessary", "sufficient", "timings", "verdict", "version"]);
    assert_eq!(v["verdict"], "consistent");
    assert_eq!(v["timings"]["recorded"], false);

    let out = phasecons(&["check", "consistency", "--model", "general_s2.json", "--orders", "6"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "inconsistent");
    assert_eq!(v["necessary"]["witness"]["type"], "radial");
}

#[test]
fn eval_ml_prints_the_reciprocal_gamma_at_zero_order() {
    let out = phasecons(&["eval", "ml", "--lam", "0", "--p", "0.7", "--b", "0.4", "--z", "-3"]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    // 1/Γ(0.4)
    assert!((v - 0.450_824_199_194_411_2).abs() < 1e-13, "{v}");
}

#[test]
fn eval_operators() {
    let out = phasecons(&["eval", "frd", "--expr", "x", "--mu", "0.5", "--x", "1"]);
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    // D^{1/2} x = x^{1/2}/Γ(3/2)
    assert!((v - 1.0 / 0.886_226_925_452_758).abs() < 1e-10, "{v}");
    let out = phasecons(&["eval", "rli", "--expr", "1", "--lambda", "2", "--x", "3"]);
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 4.5).abs() < 1e-10, "{v}");
}

#[test]
fn input_errors_exit_2_without_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"radial\": {\"kind\": \"constant\", ").unwrap();
    let out = dir.path().join("report.json");
    let r = phasecons(&["check", "consistency", "--model", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(!out.exists());
    assert!(!r.stderr.is_empty());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);

    std::fs::write(&bad, r#"{"radial": {"kind": "constant", "beta": 0.5, "extra": 1}, "potential": "psi"}"#).unwrap();
    let r = phasecons(&["check", "consistency", "--model", bad.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(r.stdout.is_empty());

    let r = phasecons(&["check", "consistency", "--model", "does-not-exist.json"]);
    assert_eq!(r.status.code(), Some(2));
    let r = phasecons(&["eval", "ml", "--lam", "1", "--p", "-1", "--b", "1", "--z", "0.5"]);
    assert_eq!(r.status.code(), Some(2));
    let r = phasecons(&["check", "consistency", "--model", "constbeta05_psi2.json", "--grid", "1:0:3"]);
    assert_eq!(r.status.code(), Some(2));
    let r = phasecons(&["check", "consistency", "--model", "constbeta05_psi2.json", "--format", "csv"]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_3() {
    let r = phasecons(&["check", "cm", "--expr", "exp(-x)", "--order", "40"]);
    assert_eq!(r.status.code(), Some(3), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(r.stdout.is_empty());
}

#[test]
fn help_exits_cleanly() {
    let r = phasecons(&["--help"]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stdout).contains("consistency") || !r.stdout.is_empty());
}
