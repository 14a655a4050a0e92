//! Command-line front end.
//!
//! Each subcommand produces an optional table (CSV, fixed header) and a
//! summary. With `--out PATH` the table goes to `PATH` and the JSON
//! document (summary plus rows) to `PATH` with a `.json` extension;
//! without it the table, or the JSON document under `--json`, goes to
//! standard output. Files are written through a temporary file and renamed
//! into place, after every computation has finished.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::analytic::{
    casimir_ratio, force_per_length, insertion_log_coefficient, pair_regime,
    superconductor_force_estimate,
};
use crate::error::{Error, Result};
use crate::lattice::{
    build_lattice, common_closed_shell, disk_hole, hole_invariance_check, immersed_contrast,
    interaction_curve, spectrum, Fluxon, InteractionConfig, PositionReport,
};
use crate::partial_wave::{canonical_filling, insertion_energy_numeric};
use crate::screening::{
    consistency_check, screening_length_closed_form, solve_profile, tail_decay_length, Grid,
    ScreeningParams,
};
use crate::units::{
    fold_alpha, from_natural, linear_fit, PhysicalParams, QuantityKind, UnitSystem, ANGSTROM,
    BOHR_RADIUS, ELECTRON_CHARGE, ELECTRON_MASS,
};

#[derive(Debug, Parser)]
#[command(name = "fluxon", version, about = "Forces between magnetic fluxons in a charged medium")]
struct Cli {
    /// File of `key = value` lines supplying the subcommand's options.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Spectral inputs and outputs in hbar = m = a0 = 1 units.
    #[arg(long, global = true)]
    natural: bool,
    /// Table destination; the JSON summary goes next to it.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the JSON document instead of the table.
    #[arg(long, global = true)]
    json: bool,
    /// Write a line plot of the table.
    #[arg(long, global = true, value_name = "PATH")]
    svg: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Insertion energy against flux at fixed radius and particle number.
    SweepAlpha(SweepAlphaArgs),
    /// Insertion energy against disk radius at fixed flux and density.
    Scaling(ScalingArgs),
    /// Screening profile of a fluxon and its length scales.
    Screening(ScreeningArgs),
    /// Lattice interaction energy of a fluxon pair against separation.
    TwoFluxon(TwoFluxonArgs),
    /// Energy of a fluxon moved around inside a hole, with an immersed contrast.
    HoleTest(HoleTestArgs),
    /// Force per unit length between two fluxons.
    Force(ForceArgs),
    /// Ratio of the fluxon force to the Casimir force.
    CasimirRatio(CasimirArgs),
    /// Attraction or repulsion over a grid of flux pairs.
    PairRegime(PairRegimeArgs),
}

#[derive(Debug, Args)]
struct SweepAlphaArgs {
    /// Disk radius (cm, or a0 with --natural).
    #[arg(long = "R")]
    radius: f64,
    /// Areal density (cm⁻², or a0⁻² with --natural).
    #[arg(long)]
    n2: f64,
    /// `start:stop:step` or a comma list.
    #[arg(long, default_value = "0:1:0.05")]
    alphas: String,
    /// Particle number; default is a closed shell near n2·πR².
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long)]
    n2: f64,
    /// Radii, `start:stop:step` or a comma list.
    #[arg(long, default_value = "20,40,80,160")]
    radii: String,
}

#[derive(Debug, Args)]
struct ScreeningArgs {
    /// Bulk electron density, cm⁻³.
    #[arg(long)]
    n3: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha0: f64,
    /// Inner radius in decay lengths.
    #[arg(long, default_value_t = 1e-3)]
    r_min: f64,
    /// Outer radius in decay lengths.
    #[arg(long, default_value_t = 15.0)]
    r_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Debug, Args)]
struct TwoFluxonArgs {
    #[arg(long = "L", default_value_t = 60)]
    size: usize,
    #[arg(long, default_value_t = 0.5)]
    alpha1: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha2: f64,
    #[arg(long, default_value_t = 0.25)]
    filling: f64,
    /// Default `4:L/4:1`.
    #[arg(long)]
    separations: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    hopping: f64,
}

#[derive(Debug, Args)]
struct HoleTestArgs {
    #[arg(long = "L", default_value_t = 24)]
    size: usize,
    #[arg(long, default_value_t = 4.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    /// Plaquettes inside the hole, `x,y;x,y;...`.
    #[arg(long)]
    positions: Option<String>,
    /// Plaquettes in the medium, `x,y;x,y;...`.
    #[arg(long)]
    contrast: Option<String>,
    #[arg(long)]
    filling: Option<f64>,
    /// Particle number; default is a closed shell near the filling.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
struct ForceArgs {
    /// Bulk density (cm⁻³, or a0⁻³ with --natural).
    #[arg(long)]
    n3: f64,
    /// Separation (cm, or a0 with --natural).
    #[arg(long)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    xi: f64,
}

#[derive(Debug, Args)]
struct CasimirArgs {
    /// Separation, cm.
    #[arg(long)]
    a: f64,
    /// Bulk density, cm⁻³; default one per Bohr volume.
    #[arg(long)]
    n3: Option<f64>,
}

#[derive(Debug, Args)]
struct PairRegimeArgs {
    /// Values used for both fluxes, `start:stop:step` or a comma list.
    #[arg(long, default_value = "0:0.5:0.05")]
    alphas: String,
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match parse(&args) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
        Err(ParseFailure::Other(e)) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

enum ParseFailure {
    Clap(clap::Error),
    Other(Error),
}

fn command() -> clap::Command {
    Cli::command()
        .args_override_self(true)
        .mut_subcommands(|s| s.args_override_self(true).allow_negative_numbers(true))
}

fn parse(args: &[OsString]) -> std::result::Result<Cli, ParseFailure> {
    let args = splice_config(args).map_err(ParseFailure::Other)?;
    let matches = command().try_get_matches_from(args).map_err(ParseFailure::Clap)?;
    Cli::from_arg_matches(&matches).map_err(ParseFailure::Clap)
}

/// Inserts the config file's options right after the subcommand name so
/// that options given on the command line override them.
fn splice_config(args: &[OsString]) -> Result<Vec<OsString>> {
    let mut config = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            let path = args
                .get(i + 1)
                .ok_or_else(|| Error::domain("--config needs a file name"))?;
            config = Some(PathBuf::from(path));
            break;
        } else if let Some(p) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(p));
            break;
        }
        i += 1;
    }
    let Some(path) = config else {
        return Ok(args.to_vec());
    };

    let cmd = command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let Some(pos) = args
        .iter()
        .position(|a| names.iter().any(|n| a.to_string_lossy() == n.as_str()))
    else {
        // no subcommand: let clap report it
        return Ok(args.to_vec());
    };
    let sub_name = args[pos].to_string_lossy().to_string();
    let sub = cmd.find_subcommand(&sub_name).expect("name taken from the command");

    let text = fs::read_to_string(&path)
        .map_err(|e| Error::domain(format!("cannot read config {}: {e}", path.display())))?;
    let mut injected = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::domain(format!("config line {}: expected `key = value`", lineno + 1))
        })?;
        let (key, value) = (key.trim(), value.trim());
        let arg = sub
            .get_arguments()
            .chain(cmd.get_arguments())
            .find(|a| a.get_long() == Some(key) && key != "config")
            .ok_or_else(|| {
                Error::domain(format!("unknown config key `{key}` for `{sub_name}`"))
            })?;
        let takes_value = arg.get_num_args().map_or(true, |n| n.takes_values());
        if takes_value {
            injected.push(OsString::from(format!("--{key}")));
            injected.push(OsString::from(value));
        } else {
            match value {
                "true" => injected.push(OsString::from(format!("--{key}"))),
                "false" => {}
                other => {
                    return Err(Error::domain(format!(
                        "config key `{key}` takes true or false, got `{other}`"
                    )))
                }
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("FLUXON_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::domain(format!("FLUXON_THREADS = `{raw}` is not a thread count")))?;
    if n > 0 {
        // a pool built earlier in the same process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<()> {
    let report = match &cli.command {
        Command::SweepAlpha(a) => sweep_alpha(a, cli.natural)?,
        Command::Scaling(a) => scaling(a, cli.natural)?,
        Command::Screening(a) => {
            if cli.natural {
                return Err(Error::domain("--natural does not apply to screening"));
            }
            screening(a)?
        }
        Command::TwoFluxon(a) => two_fluxon(a)?,
        Command::HoleTest(a) => hole_test(a)?,
        Command::Force(a) => force(a, cli.natural)?,
        Command::CasimirRatio(a) => {
            if cli.natural {
                return Err(Error::domain("--natural does not apply to casimir-ratio"));
            }
            casimir(a)?
        }
        Command::PairRegime(a) => pair_regimes(a)?,
    };
    emit(&report, cli)
}

#[derive(Debug, Clone)]
enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }

    fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Columns plotted by `--svg`.
    plot: Option<(usize, usize)>,
}

impl Table {
    fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (h, c) in self.header.iter().zip(row) {
                        m.insert((*h).to_string(), c.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

struct Report {
    table: Option<Table>,
    summary: Map<String, Value>,
}

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-4, 1e15)`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

fn emit(report: &Report, cli: &Cli) -> Result<()> {
    let mut doc = Map::new();
    doc.insert("summary".into(), Value::Object(report.summary.clone()));
    if let Some(t) = &report.table {
        doc.insert("rows".into(), t.json_rows());
    }
    let json_text = serde_json::to_string_pretty(&Value::Object(doc))
        .map_err(|e| Error::numeric(format!("JSON encoding failed: {e}")))?
        + "\n";

    let mut files: Vec<(PathBuf, String)> = Vec::new();
    if let Some(out) = &cli.out {
        let is_json = out.extension().is_some_and(|e| e == "json");
        match &report.table {
            Some(t) if !is_json => {
                files.push((out.clone(), t.csv()));
                files.push((out.with_extension("json"), json_text.clone()));
            }
            _ => files.push((out.clone(), json_text.clone())),
        }
    }
    if let Some(svg) = &cli.svg {
        let t = report
            .table
            .as_ref()
            .filter(|t| t.plot.is_some())
            .ok_or_else(|| Error::domain("--svg: this subcommand has nothing to plot"))?;
        files.push((svg.clone(), svg_plot(t)));
    }
    for (path, text) in &files {
        write_atomic(path, text)?;
    }

    let stdout = if cli.json {
        json_text
    } else if let (Some(t), None) = (&report.table, &cli.out) {
        t.csv()
    } else {
        summary_text(&report.summary)
    };
    let mut handle = std::io::stdout().lock();
    handle.write_all(stdout.as_bytes())?;
    handle.flush()?;
    Ok(())
}

fn summary_text(summary: &Map<String, Value>) -> String {
    let mut s = String::new();
    for (k, v) in summary {
        let shown = match v {
            Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), format_number),
            Value::String(t) => t.clone(),
            other => other.to_string(),
        };
        let _ = writeln!(s, "{k} = {shown}");
    }
    s
}

fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn svg_plot(table: &Table) -> String {
    let (cx, cy) = table.plot.expect("checked by caller");
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| Some((r[cx].as_f64()?, r[cy].as_f64()?)))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (w, h, m) = (640.0, 400.0, 50.0);
    let span = |v: &mut dyn Iterator<Item = f64>| {
        let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 0.5, lo + 0.5)
        }
    };
    let (x0, x1) = span(&mut pts.iter().map(|p| p.0));
    let (y0, y1) = span(&mut pts.iter().map(|p| p.1));
    let sx = |x: f64| m + (x - x0) / (x1 - x0) * (w - 2.0 * m);
    let sy = |y: f64| h - m - (y - y0) / (y1 - y0) * (h - 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<path d=\"M{m} {m}V{}H{}\" fill=\"none\" stroke=\"black\"/>",
        h - m,
        w - m
    );
    let line: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>",
        line.join(" ")
    );
    let label = |t: &str, x: f64, y: f64, anchor: &str| {
        format!("<text x=\"{x}\" y=\"{y}\" font-size=\"12\" text-anchor=\"{anchor}\">{t}</text>\n")
    };
    s.push_str(&label(table.header[cx], w / 2.0, h - 10.0, "middle"));
    s.push_str(&label(table.header[cy], 10.0, 20.0, "start"));
    s.push_str(&label(&format_number(x0), m, h - m + 15.0, "middle"));
    s.push_str(&label(&format_number(x1), w - m, h - m + 15.0, "middle"));
    s.push_str(&label(&format_number(y0), m - 5.0, h - m, "end"));
    s.push_str(&label(&format_number(y1), m - 5.0, m, "end"));
    s.push_str("</svg>\n");
    s
}

/// `start:stop:step` (inclusive within half a step) or `a,b,c`.
pub fn parse_values(spec: &str, name: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::domain(format!("--{name} `{spec}`: {what}"));
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (start, stop, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if !(step > 0.0) || !step.is_finite() {
            return Err(bad("step must be positive"));
        }
        if !(stop >= start) || !start.is_finite() || !stop.is_finite() {
            return Err(bad("stop must not be below start"));
        }
        let count = ((stop - start) / step + 0.5).floor() as usize + 1;
        if count > 100_000 {
            return Err(bad("more than 100000 points"));
        }
        // snap to the decimals written in the input so 3·0.1 prints as 0.3
        let decimals = |t: &str| {
            let t = t.trim();
            if t.contains(['e', 'E']) {
                None
            } else {
                Some(t.split_once('.').map_or(0, |(_, f)| f.len()))
            }
        };
        let snap = match (decimals(parts[0]), decimals(parts[2])) {
            (Some(a), Some(b)) => Some(a.max(b)),
            _ => None,
        };
        (0..count)
            .map(|i| {
                let v = start + i as f64 * step;
                snap.map_or(v, |d| format!("{v:.d$}").parse().unwrap_or(v))
            })
            .collect()
    } else {
        spec.split(',').map(parse).collect::<Result<Vec<_>>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("no finite values"));
    }
    Ok(values)
}

fn parse_counts(spec: &str, name: &str) -> Result<Vec<usize>> {
    parse_values(spec, name)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::domain(format!("--{name}: {v} is not a non-negative integer")))
            }
        })
        .collect()
}

fn parse_plaquettes(spec: &str, name: &str) -> Result<Vec<(usize, usize)>> {
    spec.split(';')
        .map(|p| {
            let xy = parse_counts(p, name)?;
            match xy[..] {
                [x, y] => Ok((x, y)),
                _ => Err(Error::domain(format!("--{name}: `{p}` is not `x,y`"))),
            }
        })
        .collect()
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("--{name} must be positive and finite, got {v}")))
    }
}

/// Disk problem in natural units plus the scale back to CGS energies.
struct DiskUnits {
    radius_scale: f64,
    n2: f64,
    energy_scale: f64,
    system: UnitSystem,
}

fn disk_units(n2: f64, natural: bool) -> Result<DiskUnits> {
    positive("n2", n2)?;
    if natural {
        return Ok(DiskUnits {
            radius_scale: 1.0,
            n2,
            energy_scale: 1.0,
            system: UnitSystem::Natural,
        });
    }
    // length unit a0 = n2^{-1/2}, so the natural density is one
    let a0 = n2.powf(-0.5);
    let params = PhysicalParams::new(ELECTRON_MASS, ELECTRON_CHARGE, n2, n2.powf(1.5), a0, UnitSystem::Cgs)?;
    Ok(DiskUnits {
        radius_scale: 1.0 / a0,
        n2: 1.0,
        energy_scale: from_natural(&params, 1.0, QuantityKind::Energy)?,
        system: UnitSystem::Cgs,
    })
}

fn system_name(s: UnitSystem) -> &'static str {
    match s {
        UnitSystem::Cgs => "cgs",
        UnitSystem::Natural => "natural",
    }
}

fn lookup(alphas: &[f64], values: &[f64], target: f64) -> Option<f64> {
    alphas
        .iter()
        .position(|a| (a - target).abs() < 1e-9)
        .map(|i| values[i])
}

fn sweep_alpha(args: &SweepAlphaArgs, natural: bool) -> Result<Report> {
    positive("R", args.radius)?;
    let units = disk_units(args.n2, natural)?;
    let alphas = parse_values(&args.alphas, "alphas")?;
    let radius = args.radius * units.radius_scale;
    let n = match args.n {
        Some(0) => return Err(Error::domain("--n must be positive")),
        Some(n) => n,
        None => {
            let mut distinct: Vec<f64> = Vec::new();
            for &a in &alphas {
                let w = crate::units::wrap_alpha(a)?;
                if w != 0.0 && !distinct.iter().any(|d| (d - w).abs() < 1e-12) {
                    distinct.push(w);
                }
            }
            canonical_filling(radius, units.n2, &distinct)?
        }
    };
    let delta: Vec<f64> = alphas
        .par_iter()
        .map(|&a| insertion_energy_numeric(a, radius, n).map(|e| e * units.energy_scale))
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Map::new();
    summary.insert("units".into(), json!(system_name(units.system)));
    summary.insert("radius".into(), num(args.radius));
    summary.insert("n2".into(), num(args.n2));
    summary.insert("particles".into(), json!(n));

    let small: Vec<(f64, f64)> = alphas
        .iter()
        .zip(&delta)
        .filter(|(a, _)| **a > 0.0 && **a <= 0.2 + 1e-12)
        .map(|(a, d)| (*a, *d))
        .collect();
    if small.len() >= 2 {
        let ratios: Vec<f64> = small.iter().map(|(a, d)| d / (a * a)).collect();
        let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let xs: Vec<f64> = small.iter().map(|(a, _)| a * a).collect();
        let ys: Vec<f64> = small.iter().map(|(_, d)| *d).collect();
        let fit = linear_fit(&xs, &ys)?;
        summary.insert("quadratic_coefficient".into(), num(fit.slope));
        summary.insert("quadratic_r_squared".into(), num(fit.r_squared));
        summary.insert("quadratic_ratio_spread".into(), num(hi / lo - 1.0));
    }
    let mut reflection: Option<f64> = None;
    let mut periodicity: Option<f64> = None;
    for (&a, &d) in alphas.iter().zip(&delta) {
        if let Some(r) = lookup(&alphas, &delta, 1.0 - a) {
            reflection = Some(reflection.unwrap_or(0.0).max((d - r).abs()));
        }
        if let Some(p) = lookup(&alphas, &delta, a + 1.0) {
            periodicity = Some(periodicity.unwrap_or(0.0).max((d - p).abs()));
        }
    }
    if let Some(r) = reflection {
        summary.insert("reflection_max_deviation".into(), num(r));
    }
    if let Some(p) = periodicity {
        summary.insert("periodicity_max_deviation".into(), num(p));
    }

    let rows = alphas
        .iter()
        .zip(&delta)
        .map(|(&a, &d)| vec![Cell::Num(a), Cell::Num(d)])
        .collect();
    Ok(Report {
        table: Some(Table {
            header: vec!["alpha", "delta_e"],
            rows,
            plot: Some((0, 1)),
        }),
        summary,
    })
}

fn scaling(args: &ScalingArgs, natural: bool) -> Result<Report> {
    let units = disk_units(args.n2, natural)?;
    let radii = parse_values(&args.radii, "radii")?;
    for &r in &radii {
        positive("radii", r)?;
    }
    if radii.len() < 2 {
        return Err(Error::domain("--radii needs at least two values"));
    }
    fold_alpha(args.alpha)?;
    let points: Vec<(usize, f64)> = radii
        .par_iter()
        .map(|&r| {
            let rn = r * units.radius_scale;
            let n = canonical_filling(rn, units.n2, &[args.alpha])?;
            Ok((n, insertion_energy_numeric(args.alpha, rn, n)? * units.energy_scale))
        })
        .collect::<Result<Vec<_>>>()?;
    let ln_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let de: Vec<f64> = points.iter().map(|p| p.1).collect();
    let fit = linear_fit(&ln_r, &de)?;
    let analytic =
        insertion_log_coefficient(args.alpha, &PhysicalParams::natural(units.n2)?) * units.energy_scale;

    let mut summary = Map::new();
    summary.insert("units".into(), json!(system_name(units.system)));
    summary.insert("alpha".into(), num(args.alpha));
    summary.insert("n2".into(), num(args.n2));
    summary.insert("log_slope".into(), num(fit.slope));
    summary.insert("log_intercept".into(), num(fit.intercept));
    summary.insert("r_squared".into(), num(fit.r_squared));
    summary.insert("analytic_log_coefficient".into(), num(analytic));
    summary.insert("slope_over_analytic".into(), num(fit.slope / analytic));

    let rows = radii
        .iter()
        .zip(&points)
        .map(|(&r, &(n, d))| vec![Cell::Num(r), Cell::Int(n as i64), Cell::Num(d)])
        .collect();
    Ok(Report {
        table: Some(Table {
            header: vec!["r", "particles", "delta_e"],
            rows,
            plot: Some((0, 2)),
        }),
        summary,
    })
}

fn screening(args: &ScreeningArgs) -> Result<Report> {
    positive("n3", args.n3)?;
    positive("r-min", args.r_min)?;
    positive("r-max", args.r_max)?;
    positive("tol", args.tol)?;
    if !args.alpha0.is_finite() {
        return Err(Error::domain(format!("--alpha0 must be finite, got {}", args.alpha0)));
    }
    let electrons = PhysicalParams::electrons(args.n3)?;
    let grid = Grid {
        r_min: args.r_min,
        r_max: args.r_max,
        tolerance: args.tol,
    };
    let params = ScreeningParams::new(
        args.alpha0,
        args.n3,
        electrons.charge,
        electrons.mass,
        UnitSystem::Cgs,
        grid,
    )?;
    let profile = solve_profile(&params)?;
    let closed = screening_length_closed_form(args.n3, &electrons)?;
    let report = consistency_check(&profile);

    let mut summary = Map::new();
    summary.insert("n3".into(), num(args.n3));
    summary.insert("alpha0".into(), num(args.alpha0));
    summary.insert("decay_length_cm".into(), num(params.decay_length()));
    summary.insert("lambda_closed_cm".into(), num(closed.value()));
    summary.insert("lambda_closed_angstrom".into(), num(closed.value() / ANGSTROM));
    summary.insert("lambda_rounded_angstrom".into(), num(closed.rounded_estimate / ANGSTROM));
    summary.insert(
        "rounded_over_closed".into(),
        num(closed.rounded_estimate / closed.value()),
    );
    summary.insert("lambda_fit_cm".into(), profile.lambda_fit.map_or(Value::Null, num));
    summary.insert(
        "tail_decay_length_cm".into(),
        tail_decay_length(&profile).ok().map_or(Value::Null, num),
    );
    summary.insert("grid_points".into(), json!(profile.radii.len()));
    summary.insert(
        "consistency".into(),
        serde_json::to_value(&report).map_err(|e| Error::numeric(e.to_string()))?,
    );

    let rows = (0..profile.radii.len())
        .map(|i| {
            vec![
                Cell::Num(profile.radii[i]),
                Cell::Num(profile.alpha_of_r[i]),
                Cell::Num(profile.b_induced[i]),
            ]
        })
        .collect();
    Ok(Report {
        table: Some(Table {
            header: vec!["r_cm", "alpha", "b_gauss"],
            rows,
            plot: Some((0, 1)),
        }),
        summary,
    })
}

fn two_fluxon(args: &TwoFluxonArgs) -> Result<Report> {
    if args.size < 8 {
        return Err(Error::domain(format!("--L must be at least 8, got {}", args.size)));
    }
    positive("hopping", args.hopping)?;
    positive("filling", args.filling)?;
    let separations = match &args.separations {
        Some(s) => parse_counts(s, "separations")?,
        None => (4..=args.size / 4).collect(),
    };
    let config = InteractionConfig {
        size: args.size,
        alpha_pair: (args.alpha1, args.alpha2),
        separations,
        filling: args.filling,
        hopping: args.hopping,
    };
    let curve = interaction_curve(&config)?;
    let t = args.hopping;

    let mut summary = Map::new();
    summary.insert("L".into(), json!(curve.size));
    summary.insert("alpha1".into(), num(args.alpha1));
    summary.insert("alpha2".into(), num(args.alpha2));
    summary.insert("particles".into(), json!(curve.particles));
    summary.insert("active_sites".into(), json!(curve.active_sites));
    summary.insert("filling".into(), num(curve.density2d));
    summary.insert("slope_t_units".into(), num(curve.fit.slope / t));
    summary.insert("intercept_t_units".into(), num(curve.fit.intercept / t));
    summary.insert("r_squared".into(), num(curve.fit.r_squared));
    summary.insert("xi".into(), num(curve.xi_estimate));
    summary.insert("poor_fit".into(), json!(curve.poor_fit));
    summary.insert("increasing".into(), json!(curve.is_increasing()));
    summary.insert("decreasing".into(), json!(curve.is_decreasing()));

    let rows = (0..curve.separations.len())
        .map(|i| {
            vec![
                Cell::Int(curve.separations[i] as i64),
                Cell::Num(curve.energies[i] / t),
                Cell::Num(curve.w[i] / t),
            ]
        })
        .collect();
    Ok(Report {
        table: Some(Table {
            header: vec!["a_lattice", "energy_t_units", "w_t_units"],
            rows,
            plot: Some((0, 2)),
        }),
        summary,
    })
}

fn position_json(r: &PositionReport) -> Value {
    json!({
        "positions": r.positions.iter().map(|p| json!([p.0, p.1])).collect::<Vec<_>>(),
        "energies_t_units": r.energies.iter().map(|&e| num(e)).collect::<Vec<_>>(),
        "max_difference_t_units": num(r.max_difference),
        "threshold_t_units": num(r.threshold),
        "passed": r.passed,
    })
}

fn hole_test(args: &HoleTestArgs) -> Result<Report> {
    if args.size < 8 {
        return Err(Error::domain(format!("--L must be at least 8, got {}", args.size)));
    }
    positive("radius", args.radius)?;
    let c = (args.size - 1) / 2;
    let inside = match &args.positions {
        Some(s) => parse_plaquettes(s, "positions")?,
        None => vec![(c, c), (c - 1, c), (c, c - 1)],
    };
    let outside = match &args.contrast {
        Some(s) => parse_plaquettes(s, "contrast")?,
        // not related by a lattice symmetry
        None => vec![(1, c), (2, 3), (args.size - 4, c + 1)],
    };
    let holes = disk_hole(args.size, args.radius);
    let n = match args.n {
        Some(n) => n,
        None => {
            let filling = args.filling.unwrap_or(crate::lattice::DEFAULT_FILLING);
            positive("filling", filling)?;
            let spectra = inside
                .iter()
                .chain(&outside)
                .map(|&(x, y)| {
                    let m = build_lattice(args.size, args.size, 1.0, &holes, &[Fluxon::new(x, y, args.alpha)])?;
                    spectrum(&m)
                })
                .collect::<Result<Vec<_>>>()?;
            let active = spectra[0].len();
            common_closed_shell(&spectra, (filling * active as f64).round() as usize, 1.0)?
        }
    };
    let invariance = hole_invariance_check(args.size, args.radius, &inside, args.alpha, n)?;
    let contrast = immersed_contrast(args.size, args.radius, &outside, args.alpha, n)?;

    let mut summary = Map::new();
    summary.insert("L".into(), json!(args.size));
    summary.insert("hole_radius".into(), num(args.radius));
    summary.insert("alpha".into(), num(args.alpha));
    summary.insert("particles".into(), json!(n));
    summary.insert("inside_hole".into(), position_json(&invariance));
    summary.insert("immersed".into(), position_json(&contrast));
    Ok(Report { table: None, summary })
}

fn force(args: &ForceArgs, natural: bool) -> Result<Report> {
    positive("n3", args.n3)?;
    positive("a", args.a)?;
    if !args.xi.is_finite() {
        return Err(Error::domain(format!("--xi must be finite, got {}", args.xi)));
    }
    let params = if natural {
        PhysicalParams::natural(args.n3)?
    } else {
        PhysicalParams::electrons(args.n3)?
    };
    let f = force_per_length(args.a, args.xi, args.n3, &params)?;
    let sc = superconductor_force_estimate(args.a, args.n3, &params)?;
    let mut summary = Map::new();
    summary.insert("units".into(), json!(system_name(params.system)));
    summary.insert("n3".into(), num(args.n3));
    summary.insert("a".into(), num(args.a));
    summary.insert("xi".into(), num(args.xi));
    summary.insert("force_per_length".into(), num(f));
    summary.insert("superconductor_estimate".into(), num(sc));
    Ok(Report { table: None, summary })
}

fn casimir(args: &CasimirArgs) -> Result<Report> {
    positive("a", args.a)?;
    let n3 = args.n3.unwrap_or(BOHR_RADIUS.powi(-3));
    positive("n3", n3)?;
    let params = PhysicalParams::electrons(n3)?;
    let r = casimir_ratio(args.a, n3, &params)?;
    let mut summary = Map::new();
    summary.insert("a_cm".into(), num(args.a));
    summary.insert("n3".into(), num(n3));
    summary.insert("rho".into(), num(r.rho));
    summary.insert("estimate".into(), num(r.estimate));
    summary.insert("rho_over_estimate".into(), num(r.rho / r.estimate));
    Ok(Report { table: None, summary })
}

fn pair_regimes(args: &PairRegimeArgs) -> Result<Report> {
    let alphas = parse_values(&args.alphas, "alphas")?;
    let mut rows = Vec::new();
    let mut counts = [0usize; 3];
    for &a1 in &alphas {
        for &a2 in &alphas {
            let p = pair_regime(a1, a2)?;
            counts[p.regime as usize] += 1;
            rows.push(vec![
                Cell::Num(a1),
                Cell::Num(a2),
                Cell::Num(p.overlap_energy_coeff),
                Cell::Num(p.separated_energy_coeff),
                Cell::Text(p.regime.as_str().into()),
                Cell::Text(p.sum_rule.as_str().into()),
            ]);
        }
    }
    let mut summary = Map::new();
    summary.insert("pairs".into(), json!(rows.len()));
    summary.insert("attractive".into(), json!(counts[0]));
    summary.insert("repulsive".into(), json!(counts[1]));
    summary.insert("marginal".into(), json!(counts[2]));
    Ok(Report {
        table: Some(Table {
            header: vec!["alpha1", "alpha2", "overlap", "separated", "regime", "sum_rule"],
            rows,
            plot: None,
        }),
        summary,
    })
}
