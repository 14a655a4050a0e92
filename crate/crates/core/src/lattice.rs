//! Tight-binding square lattice threaded by fluxons through Peierls phases.
//!
//! Sites are `(x, y)` with `0 <= x < width`, `0 <= y < height`; plaquette
//! `(px, py)` has corners `(px..=px+1, py..=py+1)`. A fluxon of strength
//! `α` adds `2πα` along a branch-cut string of vertical links running from
//! its plaquette to the boundary, so the counter-clockwise phase sum around
//! the plaquette is `2πα`.

use std::f64::consts::{PI, TAU};

use faer::{c64, Mat, Side};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::units::{linear_fit, neumaier_sum, FitResult};

pub const DENSE_SITE_CAP: usize = 4096;
/// Closed-shell guard, in units of the hopping.
pub const MIN_GAP: f64 = 1e-8;
pub const DEFAULT_FILLING: f64 = 0.25;
const REAL_PHASE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CutDirection {
    PositiveX,
    NegativeX,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fluxon {
    pub plaquette: (usize, usize),
    pub alpha: f64,
    pub cut: CutDirection,
}

impl Fluxon {
    pub fn new(px: usize, py: usize, alpha: f64) -> Self {
        Self {
            plaquette: (px, py),
            alpha,
            cut: CutDirection::PositiveX,
        }
    }

    pub fn with_cut(mut self, cut: CutDirection) -> Self {
        self.cut = cut;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    pub width: usize,
    pub height: usize,
    pub hopping: f64,
    /// Phase of `(x, y) → (x+1, y)`, indexed `y * (width - 1) + x`.
    phase_x: Vec<f64>,
    /// Phase of `(x, y) → (x, y+1)`, indexed `y * width + x`.
    phase_y: Vec<f64>,
    /// `true` for removed sites.
    pub hole_mask: Vec<bool>,
    pub fluxons: Vec<Fluxon>,
}

pub fn build_lattice(
    width: usize,
    height: usize,
    hopping: f64,
    holes: &[(usize, usize)],
    fluxons: &[Fluxon],
) -> Result<LatticeModel> {
    if width < 2 || height < 2 {
        return Err(Error::domain(format!(
            "lattice must be at least 2x2, got {width}x{height}"
        )));
    }
    ensure_positive("hopping", hopping)?;
    let mut hole_mask = vec![false; width * height];
    for &(x, y) in holes {
        if x >= width || y >= height {
            return Err(Error::domain(format!("hole site ({x}, {y}) outside the lattice")));
        }
        hole_mask[y * width + x] = true;
    }
    let phase_x = vec![0.0; (width - 1) * height];
    let mut phase_y = vec![0.0; width * (height - 1)];
    for f in fluxons {
        let (px, py) = f.plaquette;
        if px + 1 >= width || py + 1 >= height {
            return Err(Error::domain(format!(
                "fluxon plaquette ({px}, {py}) outside the {}x{} plaquette grid",
                width - 1,
                height - 1
            )));
        }
        ensure_finite("alpha", f.alpha)?;
        let (columns, sign) = match f.cut {
            CutDirection::PositiveX => (px + 1..width, 1.0),
            CutDirection::NegativeX => (0..px + 1, -1.0),
        };
        for x in columns {
            phase_y[py * width + x] += sign * TAU * f.alpha;
        }
    }
    Ok(LatticeModel {
        width,
        height,
        hopping,
        phase_x,
        phase_y,
        hole_mask,
        fluxons: fluxons.to_vec(),
    })
}

impl LatticeModel {
    pub fn is_active(&self, x: usize, y: usize) -> bool {
        !self.hole_mask[y * self.width + x]
    }

    pub fn active_sites(&self) -> usize {
        self.hole_mask.iter().filter(|&&h| !h).count()
    }

    /// Directed phase of the link between nearest neighbours `from → to`.
    pub fn link_phase(&self, from: (usize, usize), to: (usize, usize)) -> Result<f64> {
        let (w, h) = (self.width, self.height);
        if from.0 >= w || from.1 >= h || to.0 >= w || to.1 >= h {
            return Err(Error::domain(format!("link {from:?} → {to:?} leaves the lattice")));
        }
        let (x0, y0, x1, y1) = (from.0, from.1, to.0, to.1);
        if y0 == y1 && x1 == x0 + 1 {
            Ok(self.phase_x[y0 * (w - 1) + x0])
        } else if y0 == y1 && x0 == x1 + 1 {
            Ok(-self.phase_x[y0 * (w - 1) + x1])
        } else if x0 == x1 && y1 == y0 + 1 {
            Ok(self.phase_y[y0 * w + x0])
        } else if x0 == x1 && y0 == y1 + 1 {
            Ok(-self.phase_y[y1 * w + x0])
        } else {
            Err(Error::domain(format!("{from:?} and {to:?} are not nearest neighbours")))
        }
    }

    /// Counter-clockwise phase sum around plaquette `(px, py)`.
    pub fn plaquette_phase(&self, px: usize, py: usize) -> Result<f64> {
        loop_phase(self, &rectangle_loop((px, py), (px + 1, py + 1))?)
    }

    /// Whether every link phase is 0 or π modulo 2π.
    pub fn is_real_gauge(&self) -> bool {
        self.phase_x
            .iter()
            .chain(&self.phase_y)
            .all(|&p| real_sign(p).is_some())
    }

    fn active_index(&self) -> (Vec<Option<usize>>, usize) {
        let mut index = vec![None; self.width * self.height];
        let mut n = 0;
        for (i, slot) in index.iter_mut().enumerate() {
            if !self.hole_mask[i] {
                *slot = Some(n);
                n += 1;
            }
        }
        (index, n)
    }

    /// Active links `(i, j, phase(i → j))` with `i`, `j` active indices.
    fn links(&self) -> (Vec<(usize, usize, f64)>, usize) {
        let (index, n) = self.active_index();
        let (w, h) = (self.width, self.height);
        let mut links = Vec::with_capacity(2 * n);
        for y in 0..h {
            for x in 0..w {
                let Some(i) = index[y * w + x] else { continue };
                if x + 1 < w {
                    if let Some(j) = index[y * w + x + 1] {
                        links.push((i, j, self.phase_x[y * (w - 1) + x]));
                    }
                }
                if y + 1 < h {
                    if let Some(j) = index[(y + 1) * w + x] {
                        links.push((i, j, self.phase_y[y * w + x]));
                    }
                }
            }
        }
        (links, n)
    }

    fn check_size(&self, n: usize) -> Result<()> {
        if n > DENSE_SITE_CAP {
            return Err(Error::Precondition(format!(
                "{n} active sites exceed the dense solver cap of {DENSE_SITE_CAP}"
            )));
        }
        if n == 0 {
            return Err(Error::domain("lattice has no active sites"));
        }
        Ok(())
    }

    fn real_hamiltonian(&self) -> Option<(Mat<f64>, usize)> {
        let (links, n) = self.links();
        let mut hm = Mat::<f64>::zeros(n, n);
        for &(i, j, p) in &links {
            let v = -self.hopping * real_sign(p)?;
            hm[(i, j)] = v;
            hm[(j, i)] = v;
        }
        Some((hm, n))
    }

    fn complex_hamiltonian(&self) -> (Mat<c64>, usize) {
        let (links, n) = self.links();
        let mut hm = Mat::<c64>::zeros(n, n);
        for &(i, j, p) in &links {
            let v = c64::new(-self.hopping * p.cos(), -self.hopping * p.sin());
            hm[(i, j)] = v;
            hm[(j, i)] = v.conj();
        }
        (hm, n)
    }
}

/// `cos p` when `p` is within tolerance of a multiple of π.
fn real_sign(p: f64) -> Option<f64> {
    let r = p.rem_euclid(TAU);
    if r < REAL_PHASE_TOL || TAU - r < REAL_PHASE_TOL {
        Some(1.0)
    } else if (r - PI).abs() < REAL_PHASE_TOL {
        Some(-1.0)
    } else {
        None
    }
}

/// Eigenvalues of the hopping Hamiltonian on the active sites, ascending.
/// Phases of only 0 and π are diagonalized in real arithmetic.
pub fn spectrum(model: &LatticeModel) -> Result<Vec<f64>> {
    let n = model.active_sites();
    model.check_size(n)?;
    let evd = |e| Error::numeric(format!("dense eigensolver failed: {e:?}"));
    if let Some((hm, _)) = model.real_hamiltonian() {
        return hm.self_adjoint_eigenvalues(Side::Lower).map_err(evd);
    }
    let (hm, _) = model.complex_hamiltonian();
    hm.self_adjoint_eigenvalues(Side::Lower).map_err(evd)
}

/// Eigenvalues and eigenvectors (as columns, one `Vec` per state) in the
/// real gauge.
pub fn real_eigenstates(model: &LatticeModel) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = model.active_sites();
    model.check_size(n)?;
    let (hm, _) = model.real_hamiltonian().ok_or_else(|| {
        Error::Precondition("link phases are not all 0 or π; no real gauge".into())
    })?;
    let evd = hm
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numeric(format!("dense eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let values = (0..n).map(|i| s[i]).collect();
    let vectors = (0..n).map(|k| (0..n).map(|i| u[(i, k)]).collect()).collect();
    Ok((values, vectors))
}

/// Sum of the `n` lowest eigenvalues of an ascending spectrum, refusing
/// fillings that split a degenerate shell.
pub fn filled_energy_from(eigenvalues: &[f64], n: usize, hopping: f64) -> Result<f64> {
    if n > eigenvalues.len() {
        return Err(Error::domain(format!(
            "N = {n} exceeds {} active sites",
            eigenvalues.len()
        )));
    }
    let gap = fermi_gap(eigenvalues, n);
    let threshold = MIN_GAP * hopping;
    if gap <= threshold {
        return Err(Error::Degenerate { n, gap, threshold });
    }
    Ok(neumaier_sum(eigenvalues[..n].iter().copied()))
}

pub fn filled_energy(model: &LatticeModel, n: usize) -> Result<f64> {
    filled_energy_from(&spectrum(model)?, n, model.hopping)
}

/// `e[n] - e[n-1]`; infinite for an empty or completely filled spectrum.
pub fn fermi_gap(eigenvalues: &[f64], n: usize) -> f64 {
    if n == 0 || n >= eigenvalues.len() {
        f64::INFINITY
    } else {
        eigenvalues[n] - eigenvalues[n - 1]
    }
}

/// Particle number closest to `target` (ties to the smaller) at which
/// every spectrum has a gap above the guard.
pub fn common_closed_shell(spectra: &[Vec<f64>], target: usize, hopping: f64) -> Result<usize> {
    let len = spectra.iter().map(Vec::len).min().unwrap_or(0);
    let ok = |n: usize| spectra.iter().all(|s| fermi_gap(s, n) > MIN_GAP * hopping);
    for d in 0..=len {
        for n in [target.checked_sub(d), Some(target + d)].into_iter().flatten() {
            if n >= 1 && n <= len && ok(n) {
                return Ok(n);
            }
        }
    }
    Err(Error::Degenerate {
        n: target,
        gap: 0.0,
        threshold: MIN_GAP * hopping,
    })
}

/// Counter-clockwise boundary sites of the rectangle with corners `lo`
/// and `hi`.
pub fn rectangle_loop(lo: (usize, usize), hi: (usize, usize)) -> Result<Vec<(usize, usize)>> {
    if hi.0 <= lo.0 || hi.1 <= lo.1 {
        return Err(Error::domain(format!("degenerate rectangle {lo:?}..{hi:?}")));
    }
    let mut sites = Vec::new();
    sites.extend((lo.0..hi.0).map(|x| (x, lo.1)));
    sites.extend((lo.1..hi.1).map(|y| (hi.0, y)));
    sites.extend((lo.0 + 1..=hi.0).rev().map(|x| (x, hi.1)));
    sites.extend((lo.1 + 1..=hi.1).rev().map(|y| (lo.0, y)));
    Ok(sites)
}

/// Directed phase sum around a closed site loop (the last site links back
/// to the first).
pub fn loop_phase(model: &LatticeModel, sites: &[(usize, usize)]) -> Result<f64> {
    if sites.len() < 2 {
        return Err(Error::domain("a loop needs at least two sites"));
    }
    let mut total = 0.0;
    for (k, &s) in sites.iter().enumerate() {
        total += model.link_phase(s, sites[(k + 1) % sites.len()])?;
    }
    Ok(total)
}

/// Product of the hopping signs around a loop in the real gauge.
pub fn sign_product(model: &LatticeModel, sites: &[(usize, usize)]) -> Result<f64> {
    if !model.is_real_gauge() {
        return Err(Error::Precondition("link phases are not all 0 or π".into()));
    }
    let mut product = 1.0;
    for (k, &s) in sites.iter().enumerate() {
        let p = model.link_phase(s, sites[(k + 1) % sites.len()])?;
        product *= real_sign(p).expect("real gauge checked");
    }
    Ok(product)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionConfig {
    pub size: usize,
    pub alpha_pair: (f64, f64),
    pub separations: Vec<usize>,
    pub filling: f64,
    pub hopping: f64,
}

impl InteractionConfig {
    /// Separations `4..=L/4` at the default filling and unit hopping.
    pub fn standard(size: usize, alpha_pair: (f64, f64)) -> Self {
        Self {
            size,
            alpha_pair,
            separations: (4..=size / 4).collect(),
            filling: DEFAULT_FILLING,
            hopping: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionCurve {
    pub size: usize,
    pub alpha_pair: (f64, f64),
    pub separations: Vec<usize>,
    pub energies: Vec<f64>,
    /// `energies - reference_energy`.
    pub w: Vec<f64>,
    pub reference_energy: f64,
    pub particles: usize,
    pub active_sites: usize,
    /// `particles / active_sites`.
    pub density2d: f64,
    /// Fit of `w` against `ln a`.
    pub fit: FitResult,
    pub xi_estimate: f64,
    pub poor_fit: bool,
}

impl InteractionCurve {
    pub fn is_increasing(&self) -> bool {
        self.w.windows(2).all(|p| p[1] > p[0])
    }

    pub fn is_decreasing(&self) -> bool {
        self.w.windows(2).all(|p| p[1] < p[0])
    }
}

/// Plaquettes of a pair at separation `a` placed symmetrically about the
/// centre of an `L×L` lattice along one row.
pub fn pair_plaquettes(size: usize, a: usize) -> ((usize, usize), (usize, usize)) {
    let centre = (size - 1) / 2;
    let left = centre - a / 2;
    ((left, centre), (left + a, centre))
}

pub fn pair_model(size: usize, hopping: f64, alpha_pair: (f64, f64), a: usize) -> Result<LatticeModel> {
    let (p1, p2) = pair_plaquettes(size, a);
    let fluxons = [
        Fluxon::new(p1.0, p1.1, alpha_pair.0).with_cut(CutDirection::NegativeX),
        Fluxon::new(p2.0, p2.1, alpha_pair.1),
    ];
    build_lattice(size, size, hopping, &[], &fluxons)
}

pub fn interaction_curve(config: &InteractionConfig) -> Result<InteractionCurve> {
    let size = config.size;
    let seps = &config.separations;
    if seps.len() < 2 {
        return Err(Error::Precondition("need at least two separations".into()));
    }
    if seps.windows(2).any(|w| w[1] <= w[0]) || seps[0] == 0 {
        return Err(Error::Precondition(
            "separations must be positive and strictly increasing".into(),
        ));
    }
    let a_max = *seps.last().expect("non-empty");
    if a_max > size / 4 {
        return Err(Error::Precondition(format!(
            "separation {a_max} exceeds L/4 = {}",
            size / 4
        )));
    }
    if !(config.filling > 0.0 && config.filling < 1.0) {
        return Err(Error::domain(format!(
            "filling = {} must lie in (0, 1)",
            config.filling
        )));
    }
    ensure_positive("hopping", config.hopping)?;

    let models = seps
        .iter()
        .map(|&a| pair_model(size, config.hopping, config.alpha_pair, a))
        .collect::<Result<Vec<_>>>()?;
    let active = models[0].active_sites();
    models[0].check_size(active)?;
    let spectra = models
        .par_iter()
        .map(spectrum)
        .collect::<Result<Vec<_>>>()?;

    let target = (config.filling * active as f64).round() as usize;
    let particles = common_closed_shell(&spectra, target, config.hopping)?;
    let energies = spectra
        .iter()
        .map(|s| filled_energy_from(s, particles, config.hopping))
        .collect::<Result<Vec<_>>>()?;
    let reference_energy = energies[0];
    let w: Vec<f64> = energies.iter().map(|e| e - reference_energy).collect();
    let ln_a: Vec<f64> = seps.iter().map(|&a| (a as f64).ln()).collect();
    let fit = linear_fit(&ln_a, &w)?;
    let density2d = particles as f64 / active as f64;
    // W = ξ (π/16) n₂ (ħ²/m) ln a with ħ²/m = 2t a₀² on the lattice
    let xi_estimate = 8.0 * fit.slope / (PI * config.hopping * density2d);

    Ok(InteractionCurve {
        size,
        alpha_pair: config.alpha_pair,
        separations: seps.clone(),
        energies,
        w,
        reference_energy,
        particles,
        active_sites: active,
        density2d,
        poor_fit: fit.r_squared < 0.9,
        fit,
        xi_estimate,
    })
}

/// Sites within `radius` of the centre of an `L×L` lattice.
pub fn disk_hole(size: usize, radius: f64) -> Vec<(usize, usize)> {
    let c = 0.5 * (size as f64 - 1.0);
    let mut sites = Vec::new();
    for y in 0..size {
        for x in 0..size {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            if dx.hypot(dy) <= radius {
                sites.push((x, y));
            }
        }
    }
    sites
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionReport {
    pub positions: Vec<(usize, usize)>,
    pub energies: Vec<f64>,
    pub particles: usize,
    pub max_difference: f64,
    pub threshold: f64,
    pub passed: bool,
}

pub const HOLE_INVARIANCE_TOLERANCE: f64 = 1e-9;

fn position_energies(
    size: usize,
    holes: &[(usize, usize)],
    alpha: f64,
    positions: &[(usize, usize)],
    n: usize,
) -> Result<(Vec<f64>, f64)> {
    let models = positions
        .iter()
        .map(|&(px, py)| build_lattice(size, size, 1.0, holes, &[Fluxon::new(px, py, alpha)]))
        .collect::<Result<Vec<_>>>()?;
    let energies = models
        .par_iter()
        .map(|m| filled_energy(m, n))
        .collect::<Result<Vec<_>>>()?;
    let max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((energies, max - min))
}

fn corners(p: (usize, usize)) -> [(usize, usize); 4] {
    let (px, py) = p;
    [(px, py), (px + 1, py), (px, py + 1), (px + 1, py + 1)]
}

/// Filled-sea energy with the fluxon at each plaquette strictly inside a
/// central disk hole; gauge equivalence makes them equal. Unit hopping.
pub fn hole_invariance_check(
    size: usize,
    hole_radius: f64,
    positions: &[(usize, usize)],
    alpha: f64,
    n: usize,
) -> Result<PositionReport> {
    let holes = disk_hole(size, hole_radius);
    validate_positions(size, positions)?;
    for &p in positions {
        if corners(p).iter().any(|c| !holes.contains(c)) {
            return Err(Error::Precondition(format!(
                "plaquette {p:?} touches an active site; it is not inside the hole"
            )));
        }
    }
    let (energies, diff) = position_energies(size, &holes, alpha, positions, n)?;
    Ok(PositionReport {
        positions: positions.to_vec(),
        energies,
        particles: n,
        max_difference: diff,
        threshold: HOLE_INVARIANCE_TOLERANCE,
        passed: diff <= HOLE_INVARIANCE_TOLERANCE,
    })
}

/// Same measurement with the fluxon immersed in the medium outside the
/// hole; `passed` here means a position dependence above `1e-6`.
pub fn immersed_contrast(
    size: usize,
    hole_radius: f64,
    positions: &[(usize, usize)],
    alpha: f64,
    n: usize,
) -> Result<PositionReport> {
    let holes = disk_hole(size, hole_radius);
    validate_positions(size, positions)?;
    for &p in positions {
        if corners(p).iter().any(|c| holes.contains(c)) {
            return Err(Error::Precondition(format!(
                "plaquette {p:?} touches the hole; it is not immersed"
            )));
        }
    }
    let (energies, diff) = position_energies(size, &holes, alpha, positions, n)?;
    Ok(PositionReport {
        positions: positions.to_vec(),
        energies,
        particles: n,
        max_difference: diff,
        threshold: 1e-6,
        passed: diff > 1e-6,
    })
}

fn validate_positions(size: usize, positions: &[(usize, usize)]) -> Result<()> {
    if positions.len() < 2 {
        return Err(Error::Precondition("need at least two positions".into()));
    }
    if let Some(p) = positions.iter().find(|p| p.0 + 1 >= size || p.1 + 1 >= size) {
        return Err(Error::domain(format!("plaquette {p:?} outside the lattice")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopCrossings {
    /// Loop is the square ring at this distance outside the plaquette.
    pub ring: usize,
    pub sign_product: f64,
    /// Links where the cut-compensated eigenvector changes sign.
    pub crossings: usize,
    pub odd: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullLineReport {
    pub plaquette: (usize, usize),
    pub state: usize,
    pub energy: f64,
    pub loops: Vec<LoopCrossings>,
}

impl NullLineReport {
    /// The exact part: every enclosing loop has sign product −1.
    pub fn invariant_holds(&self) -> bool {
        self.loops.iter().all(|l| l.sign_product == -1.0)
    }
}

/// Sign products and eigenvector sign changes on concentric loops around
/// the single fluxon of a real-gauge model.
pub fn null_line_diagnostic(model: &LatticeModel, state: usize) -> Result<NullLineReport> {
    if model.fluxons.len() != 1 {
        return Err(Error::Precondition(format!(
            "expected one fluxon, found {}",
            model.fluxons.len()
        )));
    }
    if !model.is_real_gauge() {
        return Err(Error::Precondition("link phases are not all 0 or π".into()));
    }
    let (values, vectors) = real_eigenstates(model)?;
    if state >= values.len() {
        return Err(Error::domain(format!(
            "state {state} out of range for {} states",
            values.len()
        )));
    }
    let (index, _) = model.active_index();
    let psi = &vectors[state];
    let (px, py) = model.fluxons[0].plaquette;
    let mut loops = Vec::new();
    for ring in 0.. {
        if ring > px || ring > py || px + 1 + ring >= model.width || py + 1 + ring >= model.height {
            break;
        }
        let sites = rectangle_loop((px - ring, py - ring), (px + 1 + ring, py + 1 + ring))?;
        let product = sign_product(model, &sites)?;
        let mut crossings = 0;
        for (k, &s) in sites.iter().enumerate() {
            let t = sites[(k + 1) % sites.len()];
            let (Some(i), Some(j)) = (index[s.1 * model.width + s.0], index[t.1 * model.width + t.0])
            else {
                continue;
            };
            let sigma = real_sign(model.link_phase(s, t)?).expect("real gauge checked");
            if psi[i] * sigma * psi[j] < 0.0 {
                crossings += 1;
            }
        }
        loops.push(LoopCrossings {
            ring,
            sign_product: product,
            crossings,
            odd: crossings % 2 == 1,
        });
    }
    Ok(NullLineReport {
        plaquette: (px, py),
        state,
        energy: values[state],
        loops,
    })
}
