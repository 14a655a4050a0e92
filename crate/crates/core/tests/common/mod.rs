#![allow(dead_code)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// `K_ν(x) = ∫₀^∞ e^{-x cosh t} cosh(νt) dt` by composite Simpson.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    // integrand is below e^{-x cosh t} < 1e-300 once x cosh t > 700
    let t_max: f64 = (700.0 / x).acosh().max(1.0) + 1.0;
    let n = 20_000;
    let h = t_max / n as f64;
    let f = |t: f64| (-x * t.cosh()).exp() * (nu * t).cosh();
    let mut s = f(0.0) + f(t_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

/// Writes one verdict line straight to stderr so it survives output capture.
pub fn report(id: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "[acceptance] {id} {verdict}: {detail}");
}

pub const BIN: &str = env!("CARGO_BIN_EXE_fluxon");

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("FLUXON_THREADS")
        .output()
        .expect("binary runs")
}

pub fn same_text(expected: &str, actual: &str) -> Result<(), String> {
    let (e, a): (Vec<&str>, Vec<&str>) = (expected.lines().collect(), actual.lines().collect());
    if e.len() != a.len() {
        return Err(format!("{} lines expected, {} found", e.len(), a.len()));
    }
    for (i, (le, la)) in e.iter().zip(&a).enumerate() {
        let split = |s: &str| -> Vec<String> {
            s.split(|c: char| matches!(c, ',' | ' ' | ':' | '[' | ']' | '{' | '}' | '"' | '='))
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect()
        };
        let (te, ta) = (split(le), split(la));
        if te.len() != ta.len() {
            return Err(format!("line {}: `{le}` vs `{la}`", i + 1));
        }
        for (x, y) in te.iter().zip(&ta) {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(u), Ok(v)) => {
                    let tol = 1e-9 * u.abs().max(v.abs()).max(1e-300);
                    if (u - v).abs() > tol && !(u.is_nan() && v.is_nan()) {
                        return Err(format!("line {}: {u} vs {v}", i + 1));
                    }
                }
                _ if x == y => {}
                _ => return Err(format!("line {}: `{x}` vs `{y}`", i + 1)),
            }
        }
    }
    Ok(())
}

/// Runs `args` twice with `--out <name>.csv` (or `.json`), checks the runs
/// agree byte for byte and match the stored golden files. `FLUXON_BLESS`
/// rewrites the stored files instead.
pub fn check_golden(name: &str, args: &[&str], table: bool) -> Result<(), String> {
    let ext = if table { "csv" } else { "json" };
    let out = format!("{name}.{ext}");
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", &out]);

    let produce = || -> Result<Vec<(String, String)>, String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let o = run_in(dir.path(), &full);
        if !o.status.success() {
            return Err(format!("{name}: {}", String::from_utf8_lossy(&o.stderr)));
        }
        let read = |f: &str| fs::read_to_string(dir.path().join(f)).map_err(|e| format!("{f}: {e}"));
        let mut files = vec![(out.clone(), read(&out)?)];
        if table {
            let j = format!("{name}.json");
            files.push((j.clone(), read(&j)?));
        }
        files.push((format!("{name}.stdout"), String::from_utf8_lossy(&o.stdout).into_owned()));
        Ok(files)
    };
    let first = produce()?;
    if first != produce()? {
        return Err(format!("{name}: repeated runs differ"));
    }

    let bless = std::env::var_os("FLUXON_BLESS").is_some();
    for (file, text) in &first {
        let path = golden_dir().join(file);
        if bless {
            fs::create_dir_all(golden_dir()).map_err(|e| e.to_string())?;
            fs::write(&path, text).map_err(|e| e.to_string())?;
            continue;
        }
        let expected = fs::read_to_string(&path)
            .map_err(|_| format!("missing golden file {}", path.display()))?;
        same_text(&expected, text).map_err(|e| format!("{file}: {e}"))?;
    }
    Ok(())
}

/// One small instance per subcommand: (name, arguments, writes a table).
pub const GOLDEN_CASES: &[(&str, &[&str], bool)] = &[
    ("sweep_alpha", &["sweep-alpha", "--natural", "--R", "10", "--n2", "0.3", "--alphas", "0:1:0.1"], true),
    ("scaling", &["scaling", "--natural", "--n2", "0.3", "--radii", "5,10,20"], true),
    ("screening", &["screening", "--n3", "1e25", "--alpha0", "0.5"], true),
    ("two_fluxon", &["two-fluxon", "--L", "16", "--separations", "1:4:1"], true),
    ("hole_test", &["hole-test", "--L", "16", "--radius", "3"], false),
    ("force", &["force", "--n3", "1e19", "--a", "1e-4", "--xi", "1"], false),
    ("casimir_ratio", &["casimir-ratio", "--a", "1e-4"], false),
    ("pair_regime", &["pair-regime", "--alphas", "0:0.5:0.25"], true),
];
