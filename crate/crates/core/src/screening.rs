//! Screening of a fluxon by the circulating currents of the background.
//!
//! With `x = r/λ`, `λ = c·sqrt(m/(e² n))`, the enclosed unscreened flux
//! fraction `α(x)` and the scaled induced field `b = e λ² B/(ħ c)` obey
//!
//! ```text
//! dα/dx = -x·b          (enclosed induced flux subtracts)
//! db/dx = -α/x          (Ampère with J = ħ α n/(m r))
//! ```
//!
//! which combine to `α'' - α'/x - α = 0`. The physical branch decays as
//! `e^{-x}`; the other grows as `e^{x}`, so the system is integrated inward
//! from `x_max`, where the decaying branch dominates, and normalized at the
//! core through `α(0⁺) = α₀`.

use serde::Serialize;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::units::{
    linear_fit, PhysicalParams, UnitSystem, ANGSTROM, HBAR, SPEED_OF_LIGHT,
};

/// Radial window and local tolerance, with radii in units of the decay
/// length `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub r_min: f64,
    pub r_max: f64,
    pub tolerance: f64,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            r_min: 1e-3,
            r_max: 15.0,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScreeningParams {
    pub alpha0: f64,
    pub density3d: f64,
    pub charge: f64,
    pub mass: f64,
    /// `Natural` sets `ħ = c = 1`; densities, charge and mass stay explicit.
    pub system: UnitSystem,
    pub grid: Grid,
}

impl ScreeningParams {
    /// Electrons at density `n3` (cm⁻³) in CGS, default grid.
    pub fn electrons(alpha0: f64, n3: f64) -> Result<Self> {
        let p = PhysicalParams::electrons(n3)?;
        Self::new(alpha0, n3, p.charge, p.mass, UnitSystem::Cgs, Grid::default())
    }

    pub fn new(
        alpha0: f64,
        density3d: f64,
        charge: f64,
        mass: f64,
        system: UnitSystem,
        grid: Grid,
    ) -> Result<Self> {
        ensure_finite("alpha0", alpha0)?;
        ensure_positive("density3d", density3d)?;
        ensure_positive("charge", charge)?;
        ensure_positive("mass", mass)?;
        ensure_positive("r_min", grid.r_min)?;
        ensure_positive("tolerance", grid.tolerance)?;
        if !(grid.r_max > grid.r_min) {
            return Err(Error::domain(format!(
                "r_max = {} must exceed r_min = {}",
                grid.r_max, grid.r_min
            )));
        }
        Ok(Self {
            alpha0,
            density3d,
            charge,
            mass,
            system,
            grid,
        })
    }

    fn hbar(&self) -> f64 {
        match self.system {
            UnitSystem::Cgs => HBAR,
            UnitSystem::Natural => 1.0,
        }
    }

    fn c(&self) -> f64 {
        match self.system {
            UnitSystem::Cgs => SPEED_OF_LIGHT,
            UnitSystem::Natural => 1.0,
        }
    }

    /// E-folding length `λ = c·sqrt(m/(e² n))`.
    pub fn decay_length(&self) -> f64 {
        self.c() * (self.mass / (self.charge * self.charge * self.density3d)).sqrt()
    }

    /// Field unit `ħ c/(e λ²)` that turns the scaled field `b` into gauss.
    fn field_unit(&self) -> f64 {
        let l = self.decay_length();
        self.hbar() * self.c() / (self.charge * l * l)
    }
}

/// Azimuthal particle current density `ħ α n/(m r)`; multiply by the
/// charge for the electric current.
pub fn current_density(r: f64, alpha_r: f64, params: &ScreeningParams) -> Result<f64> {
    ensure_positive("r", r)?;
    ensure_finite("alpha_r", alpha_r)?;
    Ok(params.hbar() * alpha_r * params.density3d / (params.mass * r))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningProfile {
    pub alpha0: f64,
    /// cm (or natural length), increasing.
    pub radii: Vec<f64>,
    /// Enclosed unscreened flux fraction α(r).
    pub alpha_of_r: Vec<f64>,
    /// dα/dr, used for Hermite interpolation.
    pub alpha_slope: Vec<f64>,
    /// Induced field, gauss.
    pub b_induced: Vec<f64>,
    /// Enclosed induced flux in units of the flux quantum.
    pub induced_flux: Vec<f64>,
    /// Plain exponential tail fit of α, see [`extract_lambda`].
    pub lambda_fit: Option<f64>,
    /// Step-approximation screening length `2λ`.
    pub lambda_closed: f64,
}

impl ScreeningProfile {
    /// Builds a profile from samples and fills in `lambda_fit`.
    pub fn from_samples(
        alpha0: f64,
        lambda_closed: f64,
        radii: Vec<f64>,
        alpha_of_r: Vec<f64>,
        alpha_slope: Vec<f64>,
        b_induced: Vec<f64>,
        induced_flux: Vec<f64>,
    ) -> Result<Self> {
        let n = radii.len();
        if n < 2
            || [alpha_of_r.len(), alpha_slope.len(), b_induced.len(), induced_flux.len()]
                .iter()
                .any(|&m| m != n)
        {
            return Err(Error::domain("profile columns must share a length of at least 2"));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("profile radii must increase strictly"));
        }
        let mut profile = Self {
            alpha0,
            radii,
            alpha_of_r,
            alpha_slope,
            b_induced,
            induced_flux,
            lambda_fit: None,
            lambda_closed,
        };
        profile.lambda_fit = extract_lambda(&profile).ok();
        Ok(profile)
    }

    /// Nominal e-folding length, `lambda_closed / 2`.
    pub fn decay_scale(&self) -> f64 {
        0.5 * self.lambda_closed
    }

    pub fn r_max(&self) -> f64 {
        *self.radii.last().expect("non-empty profile")
    }

    /// Cubic Hermite interpolation of α at `r`.
    pub fn alpha_at(&self, r: f64) -> Option<f64> {
        let i = self.bracket(r)?;
        let (r0, r1) = (self.radii[i], self.radii[i + 1]);
        let h = r1 - r0;
        let t = (r - r0) / h;
        let (y0, y1) = (self.alpha_of_r[i], self.alpha_of_r[i + 1]);
        let (d0, d1) = (self.alpha_slope[i] * h, self.alpha_slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Some(
            (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * d0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * d1,
        )
    }

    /// Linear interpolation of the enclosed induced flux at `r`.
    pub fn induced_flux_at(&self, r: f64) -> Option<f64> {
        let i = self.bracket(r)?;
        let t = (r - self.radii[i]) / (self.radii[i + 1] - self.radii[i]);
        Some(self.induced_flux[i] + t * (self.induced_flux[i + 1] - self.induced_flux[i]))
    }

    fn bracket(&self, r: f64) -> Option<usize> {
        let n = self.radii.len();
        if !(r >= self.radii[0] && r <= self.radii[n - 1]) {
            return None;
        }
        let i = self.radii.partition_point(|&x| x <= r);
        Some(i.saturating_sub(1).min(n - 2))
    }

    /// The part of the profile with `r <= r_max`.
    pub fn truncated(&self, r_max: f64) -> Result<Self> {
        let n = self.radii.partition_point(|&x| x <= r_max);
        let take = |v: &Vec<f64>| v[..n].to_vec();
        Self::from_samples(
            self.alpha0,
            self.lambda_closed,
            take(&self.radii),
            take(&self.alpha_of_r),
            take(&self.alpha_slope),
            take(&self.b_induced),
            take(&self.induced_flux),
        )
    }
}

/// Integrates the screening equations and returns the profile on the
/// solver's own mesh.
pub fn solve_profile(params: &ScreeningParams) -> Result<ScreeningProfile> {
    let grid = params.grid;
    if grid.r_min > 1e-3 * (1.0 + 1e-12) {
        return Err(Error::domain(format!(
            "r_min = {}λ must not exceed 1e-3λ",
            grid.r_min
        )));
    }
    if grid.r_max < 15.0 * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "r_max = {}λ must be at least 15λ",
            grid.r_max
        )));
    }
    let mesh = integrate_inward(grid.r_min, grid.r_max, grid.tolerance)?;

    // core: b ≈ b_m + A ln(x_m/x) below x_m, so ∫₀^{x_m} x b dx = x_m²(b_m/2 + A/4)
    let first = mesh[0];
    let core_flux = first.x * first.x * (0.5 * first.b + 0.25 * first.alpha);
    let amplitude = first.alpha + core_flux;
    let scale = params.alpha0 / amplitude;

    let lambda = params.decay_length();
    let field_unit = params.field_unit();
    let n = mesh.len();
    let mut radii = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut slope = Vec::with_capacity(n);
    let mut field = Vec::with_capacity(n);
    let mut flux = Vec::with_capacity(n);

    // enclosed flux by trapezoid on the solver steps with Hermite end
    // corrections, using f = x b, f' = b - α and f'' = x b - α/x from the ODE
    let mut phi = core_flux;
    for (i, p) in mesh.iter().enumerate() {
        if i > 0 {
            let q = &mesh[i - 1];
            let h = p.x - q.x;
            let (f0, f1) = (q.x * q.b, p.x * p.b);
            let (g0, g1) = (q.b - q.alpha, p.b - p.alpha);
            let (k0, k1) = (q.x * q.b - q.alpha / q.x, p.x * p.b - p.alpha / p.x);
            phi += 0.5 * h * (f0 + f1) + h * h / 10.0 * (g0 - g1) + h * h * h / 120.0 * (k0 + k1);
        }
        radii.push(p.x * lambda);
        alpha.push(scale * p.alpha);
        slope.push(-scale * p.x * p.b / lambda);
        field.push(scale * p.b * field_unit);
        flux.push(scale * phi);
    }

    if params.alpha0 != 0.0 {
        let last = n - 1;
        let drift = (alpha[last] + flux[last] - params.alpha0).abs() / params.alpha0.abs();
        if drift > 1e-3 {
            return Err(Error::Accuracy(format!(
                "flux conservation drift {drift:e} at r_max exceeds 0.1%"
            )));
        }
    }

    ScreeningProfile::from_samples(
        params.alpha0,
        2.0 * lambda,
        radii,
        alpha,
        slope,
        field,
        flux,
    )
}

#[derive(Debug, Clone, Copy)]
struct MeshPoint {
    x: f64,
    alpha: f64,
    b: f64,
}

fn rhs(x: f64, y: [f64; 2]) -> [f64; 2] {
    [-x * y[1], -y[0] / x]
}

/// `α'/α` of the decaying branch from its large-`x` Riccati expansion
/// `-1 + Σ c_n x^{-n}`, truncated at the smallest term.
fn decaying_log_derivative(x: f64) -> f64 {
    let mut c = vec![0.5];
    let mut sum = -1.0 + 0.5 / x;
    let mut last = (0.5 / x).abs();
    for m in 2..200usize {
        let conv: f64 = (1..m).map(|i| c[i - 1] * c[m - i - 1]).sum();
        let cm = 0.5 * (conv - m as f64 * c[m - 2]);
        let term = cm / x.powi(m as i32);
        if term.abs() >= last || term.abs() < 1e-18 {
            break;
        }
        sum += term;
        last = term.abs();
        c.push(cm);
    }
    sum
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn integrate_inward(x_min: f64, x_max: f64, tol: f64) -> Result<Vec<MeshPoint>> {
    let w = decaying_log_derivative(x_max);
    let mut x = x_max;
    let mut y = [1.0, -w / x_max];
    let mut h = -0.01;
    let mut out = vec![MeshPoint { x, alpha: y[0], b: y[1] }];
    let mut steps = 0usize;

    while x > x_min {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::numeric("screening integration exceeded 10⁶ steps"));
        }
        if x + h < x_min {
            h = x_min - x;
        }
        let mut k = [[0.0; 2]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s][j] * kj[0];
                ys[1] += h * A[s][j] * kj[1];
            }
            k[s] = rhs(x + C[s] * h, ys);
        }
        let y_new = [
            y[0] + h * (0..6).map(|j| A[6][j] * k[j][0]).sum::<f64>(),
            y[1] + h * (0..6).map(|j| A[6][j] * k[j][1]).sum::<f64>(),
        ];
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let e = h * (0..7).map(|j| ERR[j] * k[j][i]).sum::<f64>();
            let sc = tol * y[i].abs().max(y_new[i].abs()) + 1e-300;
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            return Err(Error::numeric(format!("non-finite error estimate at x = {x}")));
        }
        if err <= 1.0 {
            x = if (x + h - x_min).abs() <= 1e-15 * x_min { x_min } else { x + h };
            y = y_new;
            out.push(MeshPoint { x, alpha: y[0], b: y[1] });
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h.abs() < 1e-14 * x.abs().max(x_min) {
            return Err(Error::numeric(format!("step size underflow at x = {x}")));
        }
    }
    out.reverse();
    Ok(out)
}

fn tail_samples(profile: &ScreeningProfile) -> Result<(Vec<f64>, Vec<f64>)> {
    let lambda = profile.decay_scale();
    let (lo, hi) = (5.0 * lambda, 10.0 * lambda);
    if profile.radii[0] > lo || profile.r_max() < hi {
        return Err(Error::Fit(format!(
            "profile [{}, {}] does not cover the tail window [{lo}, {hi}]",
            profile.radii[0],
            profile.r_max()
        )));
    }
    const SAMPLES: usize = 101;
    let mut rs = Vec::with_capacity(SAMPLES);
    let mut alphas = Vec::with_capacity(SAMPLES);
    for i in 0..SAMPLES {
        let r = lo + (hi - lo) * i as f64 / (SAMPLES - 1) as f64;
        let a = profile.alpha_at(r).expect("inside profile");
        if !(a > 0.0) {
            return Err(Error::Fit(format!(
                "non-positive alpha {a} at r = {r} in the tail window"
            )));
        }
        rs.push(r);
        alphas.push(a);
    }
    Ok((rs, alphas))
}

/// `-1/slope` of `ln α` against `r` over `[5λ, 10λ]`, `λ = lambda_closed/2`.
///
/// The `sqrt(r)` prefactor of the decaying solution biases this plain fit
/// upward by about 7%; [`tail_decay_length`] removes it.
pub fn extract_lambda(profile: &ScreeningProfile) -> Result<f64> {
    let (rs, alphas) = tail_samples(profile)?;
    let ys: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let fit = linear_fit(&rs, &ys)?;
    if !(fit.slope < 0.0) {
        return Err(Error::Fit(format!("tail is not decaying (slope {})", fit.slope)));
    }
    Ok(-1.0 / fit.slope)
}

/// Decay length from `ln(α/sqrt(r))` against `r` over `[5λ, 10λ]`.
pub fn tail_decay_length(profile: &ScreeningProfile) -> Result<f64> {
    let (rs, alphas) = tail_samples(profile)?;
    let ys: Vec<f64> = rs.iter().zip(&alphas).map(|(r, a)| (a / r.sqrt()).ln()).collect();
    let fit = linear_fit(&rs, &ys)?;
    if !(fit.slope < 0.0) {
        return Err(Error::Fit(format!("tail is not decaying (slope {})", fit.slope)));
    }
    Ok(-1.0 / fit.slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormLength {
    /// `(2/α_em)·a_B·(a_B⁻³/n)^{1/2}` with the carrier's coupling and Bohr
    /// radius.
    pub bohr_form: f64,
    /// `2c·sqrt(m/(e² n))`.
    pub plasma_form: f64,
    /// Rounded figure `150 Å·(10²⁵/n)^{1/2}` for comparison.
    pub rounded_estimate: f64,
}

impl ClosedFormLength {
    pub fn value(&self) -> f64 {
        self.plasma_form
    }
}

/// Step-approximation screening length in cm.
pub fn screening_length_closed_form(n3: f64, params: &PhysicalParams) -> Result<ClosedFormLength> {
    ensure_positive("n3", n3)?;
    if params.system != UnitSystem::Cgs {
        return Err(Error::domain("closed-form screening length needs CGS parameters"));
    }
    let (m, e) = (params.mass, params.charge);
    let coupling = e * e / (HBAR * SPEED_OF_LIGHT);
    let bohr = HBAR * HBAR / (m * e * e);
    let bohr_form = 2.0 / coupling * bohr * (bohr.powi(-3) / n3).sqrt();
    let plasma_form = 2.0 * SPEED_OF_LIGHT * (m / (e * e * n3)).sqrt();
    let diff = ((bohr_form - plasma_form) / plasma_form).abs();
    if diff > 1e-10 {
        return Err(Error::Accuracy(format!(
            "closed-form screening length forms disagree by {diff:e}"
        )));
    }
    Ok(ClosedFormLength {
        bohr_form,
        plasma_form,
        rounded_estimate: 150.0 * ANGSTROM * (1e25 / n3).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub lambda_closed: f64,
    /// Prefactor-corrected tail decay length, when the tail is available.
    pub decay_length: Option<f64>,
    /// `lambda_closed / (2·decay_length)`.
    pub step_ratio: Option<f64>,
    pub step_ratio_ok: bool,
    /// Induced flux at `10λ` as a fraction of `α₀`.
    pub cancellation: Option<f64>,
    pub cancellation_ok: bool,
    pub messages: Vec<String>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.step_ratio_ok && self.cancellation_ok
    }
}

pub const STEP_RATIO_TOLERANCE: f64 = 0.05;
pub const MIN_CANCELLATION: f64 = 0.99;

/// Checks `λ_closed = 2λ` against the tail and that the induced flux at
/// `10λ` cancels at least 99% of the bare flux. Never fails; problems are
/// listed in the report.
pub fn consistency_check(profile: &ScreeningProfile) -> ConsistencyReport {
    let mut messages = Vec::new();
    let decay_length = match tail_decay_length(profile) {
        Ok(l) => Some(l),
        Err(e) => {
            messages.push(format!("tail decay length unavailable: {e}"));
            None
        }
    };
    let step_ratio = decay_length.map(|l| profile.lambda_closed / (2.0 * l));
    let step_ratio_ok = match step_ratio {
        Some(r) if (r - 1.0).abs() <= STEP_RATIO_TOLERANCE => true,
        Some(r) => {
            messages.push(format!("lambda_closed / 2λ = {r} is outside 1 ± {STEP_RATIO_TOLERANCE}"));
            false
        }
        None => false,
    };

    let r10 = 10.0 * profile.decay_scale();
    let cancellation = if profile.alpha0 == 0.0 {
        messages.push("alpha0 = 0: nothing to cancel".into());
        None
    } else {
        profile.induced_flux_at(r10).map(|f| f / profile.alpha0)
    };
    let cancellation_ok = match cancellation {
        Some(c) if c >= MIN_CANCELLATION => true,
        Some(c) => {
            messages.push(format!("induced flux at 10λ cancels only {:.4}%", 100.0 * c));
            false
        }
        None => {
            if profile.r_max() < r10 {
                messages.push(format!(
                    "profile ends at r = {} before 10λ = {r10}",
                    profile.r_max()
                ));
            }
            false
        }
    };

    ConsistencyReport {
        lambda_closed: profile.lambda_closed,
        decay_length,
        step_ratio,
        step_ratio_ok,
        cancellation,
        cancellation_ok,
        messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{PhysicalParams, MICRON};

    fn natural(alpha0: f64) -> ScreeningParams {
        ScreeningParams::new(alpha0, 1.0, 1.0, 1.0, UnitSystem::Natural, Grid::default()).unwrap()
    }

    #[test]
    fn current_examples() {
        let p = natural(0.5);
        assert_eq!(current_density(2.0, 0.0, &p).unwrap(), 0.0);
        assert_eq!(current_density(2.0, 0.5, &p).unwrap(), 0.25);
        let j1 = current_density(1.0, 0.3, &p).unwrap();
        let j2 = current_density(2.0, 0.3, &p).unwrap();
        assert_eq!(j1, 2.0 * j2);
        assert!(current_density(0.0, 0.3, &p).is_err());
    }

    #[test]
    fn riccati_expansion() {
        // K1'/K1-based: α = x K1(x) has α'/α = -x K0/(x K1) = -K0/K1
        let w = decaying_log_derivative(15.0);
        let expected = -0.968_230_971_699_335; // -K0(15)/K1(15)
        assert!((w - expected).abs() < 1e-12, "{w} vs {expected}");
    }

    #[test]
    fn zero_flux_profile_vanishes() {
        let p = solve_profile(&natural(0.0)).unwrap();
        assert!(p.alpha_of_r.iter().all(|&a| a == 0.0));
        assert!(p.b_induced.iter().all(|&b| b == 0.0));
        assert!(p.lambda_fit.is_none());
    }

    #[test]
    fn grid_precondition() {
        let mut q = natural(0.5);
        q.grid.r_max = 2.0;
        assert!(matches!(solve_profile(&q), Err(Error::Domain(_))));
        q.grid = Grid { r_min: 0.1, ..Grid::default() };
        assert!(matches!(solve_profile(&q), Err(Error::Domain(_))));
    }

    #[test]
    fn synthetic_exponential() {
        let radii: Vec<f64> = (0..=400).map(|i| 0.1 * i as f64).collect();
        let alpha: Vec<f64> = radii.iter().map(|r| (-r / 3.0).exp()).collect();
        let slope: Vec<f64> = alpha.iter().map(|a| -a / 3.0).collect();
        let zeros = vec![0.0; radii.len()];
        let p = ScreeningProfile::from_samples(1.0, 6.0, radii.clone(), alpha, slope, zeros.clone(), zeros.clone()).unwrap();
        assert!((extract_lambda(&p).unwrap() - 3.0).abs() < 1e-10);

        let scaled: Vec<f64> = radii.iter().map(|r| 10.0 * (-r / 3.0).exp()).collect();
        let sslope: Vec<f64> = scaled.iter().map(|a| -a / 3.0).collect();
        let q = ScreeningProfile::from_samples(10.0, 6.0, radii, scaled, sslope, zeros.clone(), zeros).unwrap();
        assert!((extract_lambda(&q).unwrap() - extract_lambda(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn negative_tail_is_a_fit_error() {
        let radii: Vec<f64> = (0..=400).map(|i| 0.1 * i as f64).collect();
        let alpha: Vec<f64> = radii.iter().map(|r| 1.0 - r / 20.0).collect();
        let slope = vec![-0.05; radii.len()];
        let zeros = vec![0.0; radii.len()];
        let p = ScreeningProfile::from_samples(1.0, 6.0, radii, alpha, slope, zeros.clone(), zeros).unwrap();
        assert!(matches!(extract_lambda(&p), Err(Error::Fit(_))));
    }

    #[test]
    fn closed_form_values() {
        let e = PhysicalParams::electrons(1e25).unwrap();
        let l = screening_length_closed_form(1e25, &e).unwrap();
        assert!(((l.value() / ANGSTROM - 119.1) / 119.1).abs() < 5e-3, "{}", l.value() / ANGSTROM);
        assert!((l.rounded_estimate / ANGSTROM - 150.0).abs() < 1e-9);
        let metal = screening_length_closed_form(3e22, &e).unwrap().value() / MICRON;
        assert!((0.18..=0.28).contains(&metal), "{metal}");
        let a = screening_length_closed_form(4e20, &e).unwrap().value();
        let b = screening_length_closed_form(1e20, &e).unwrap().value();
        assert!((b / a - 2.0).abs() < 1e-14);
        assert!(screening_length_closed_form(0.0, &e).is_err());
    }

    #[test]
    fn closed_form_with_tabulated_constants() {
        use crate::units::{BOHR_RADIUS, FINE_STRUCTURE};
        let e = PhysicalParams::electrons(1e25).unwrap();
        for n3 in [1e14, 1e19, 1e25] {
            let l = screening_length_closed_form(n3, &e).unwrap();
            let tabulated = 2.0 / FINE_STRUCTURE * BOHR_RADIUS * (BOHR_RADIUS.powi(-3) / n3).sqrt();
            assert!((l.bohr_form / tabulated - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn closed_form_matches_decay_length() {
        let p = ScreeningParams::electrons(0.5, 1e22).unwrap();
        let e = PhysicalParams::electrons(1e22).unwrap();
        let l = screening_length_closed_form(1e22, &e).unwrap().value();
        assert!((l / (2.0 * p.decay_length()) - 1.0).abs() < 1e-14);
    }
}
