//! Golden-file runs of the binary, one small instance per subcommand.
//!
//! Set `FLUXON_BLESS=1` to regenerate `tests/golden/`. Repeated runs must be
//! byte-identical; comparison with the stored files is structural with a
//! 1e-9 relative tolerance on numbers, since dense linear algebra may pick
//! different SIMD kernels on another machine.

mod common;

use std::fs;
use std::process::Command;

use common::{check_golden, run_in, BIN, GOLDEN_CASES};

fn case(name: &str) {
    let (_, args, table) = GOLDEN_CASES.iter().find(|c| c.0 == name).expect("known case");
    if let Err(e) = check_golden(name, args, *table) {
        panic!("{e}");
    }
}

#[test]
fn sweep_alpha() {
    case("sweep_alpha");
}

#[test]
fn scaling() {
    case("scaling");
}

#[test]
fn screening() {
    case("screening");
}

#[test]
fn two_fluxon() {
    case("two_fluxon");
}

#[test]
fn hole_test() {
    case("hole_test");
}

#[test]
fn force() {
    case("force");
}

#[test]
fn casimir_ratio() {
    case("casimir_ratio");
}

#[test]
fn pair_regime() {
    case("pair_regime");
}

#[test]
fn force_prints_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["force", "--n3", "1e19", "--a", "1e-4", "--xi", "1"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let line = text.lines().find(|l| l.starts_with("force_per_length = ")).unwrap();
    let v: f64 = line.trim_start_matches("force_per_length = ").parse().unwrap();
    assert!((v / 2.40e-5 - 1.0).abs() < 5e-3, "{v}");
}

#[test]
fn json_and_csv_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep-alpha", "--natural", "--R", "10", "--n2", "0.3", "--alphas", "0:0.5:0.1"];
    let csv = String::from_utf8(run_in(dir.path(), &args).stdout).unwrap();
    let mut with_json = args.to_vec();
    with_json.push("--json");
    let doc: serde_json::Value =
        serde_json::from_slice(&run_in(dir.path(), &with_json).stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), lines.len());
    for (row, line) in rows.iter().zip(lines) {
        let (a, d) = line.split_once(',').unwrap();
        assert_eq!(row["alpha"].as_f64().unwrap(), a.parse::<f64>().unwrap());
        assert_eq!(row["delta_e"].as_f64().unwrap(), d.parse::<f64>().unwrap());
    }
}

#[test]
fn config_file_supplies_options_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# force run\nn3 = 1e19\na = 2e-4\nxi = 1\n").unwrap();
    let from_file = run_in(dir.path(), &["force", "--config", "run.cfg"]);
    assert!(from_file.status.success(), "{}", String::from_utf8_lossy(&from_file.stderr));
    let overridden = run_in(dir.path(), &["force", "--config", "run.cfg", "--a", "1e-4"]);
    let direct = run_in(dir.path(), &["force", "--n3", "1e19", "--a", "1e-4", "--xi", "1"]);
    assert_eq!(overridden.stdout, direct.stdout);
    assert_ne!(from_file.stdout, direct.stdout);

    fs::write(dir.path().join("bad.cfg"), "n3 = 1e19\nfoo = 3\n").unwrap();
    let bad = run_in(dir.path(), &["force", "--config", "bad.cfg", "--a", "1e-4"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("foo"));
}

#[test]
fn failures_leave_no_output_and_set_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["screening", "--n3", "1e25", "--r-max", "2", "--out", "p.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("r_max"));
    assert!(!dir.path().join("p.csv").exists());
    assert!(!dir.path().join("p.json").exists());

    let o = run_in(dir.path(), &["sweep-alpha", "--R", "-3", "--n2", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--R"));

    let o = run_in(dir.path(), &["two-fluxon", "--L", "16", "--separations", "1:8:1"]);
    assert_eq!(o.status.code(), Some(1));
    let leftovers = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 0);
}

#[test]
fn svg_plot_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["two-fluxon", "--L", "16", "--separations", "1:4:1", "--out", "w.csv", "--svg", "w.svg"],
    );
    assert!(o.status.success());
    let svg = fs::read_to_string(dir.path().join("w.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep-alpha", "--natural", "--R", "10", "--n2", "0.3", "--alphas", "0:1:0.25"];
    let one = Command::new(BIN).args(args).env("FLUXON_THREADS", "1").output().unwrap();
    let four = Command::new(BIN).args(args).env("FLUXON_THREADS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(BIN).args(args).env("FLUXON_THREADS", "many").current_dir(dir.path()).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
