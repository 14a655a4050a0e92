//! Closed-form energy, force and ratio laws.
//!
//! Every entry point folds the flux fraction first, so results are
//! invariant under `alpha -> alpha + n` and `alpha -> -alpha` by
//! construction. Energies are per layer of the charged medium; the
//! per-unit-length forms take the bulk density explicitly.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::units::{fold_alpha, PhysicalParams, UnitSystem, BOHR_RADIUS, FINE_STRUCTURE};

/// Prefactor of the condensate energy `alpha² φ0² ln(R/R0)`.
pub const LG_PREFACTOR: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxonSpec {
    /// cm
    pub position: [f64; 2],
    /// Flux in units of the flux quantum.
    pub alpha: f64,
}

impl FluxonSpec {
    pub fn new(position: [f64; 2], alpha: f64) -> Result<Self> {
        ensure_finite("position.x", position[0])?;
        ensure_finite("position.y", position[1])?;
        ensure_finite("alpha", alpha)?;
        Ok(Self { position, alpha })
    }

    pub fn folded_alpha(&self) -> f64 {
        fold_alpha(self.alpha).expect("alpha validated at construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Attractive,
    Repulsive,
    Marginal,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Attractive => "attractive",
            Regime::Repulsive => "repulsive",
            Regime::Marginal => "marginal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRegime {
    pub regime: Regime,
    /// `fold(alpha1 + alpha2)²`
    pub overlap_energy_coeff: f64,
    /// `fold(alpha1)² + fold(alpha2)²`
    pub separated_energy_coeff: f64,
    /// Coarser rule on the folded fluxes: attractive when
    /// `fold(alpha1) + fold(alpha2) > 1/2`.
    pub sum_rule: Regime,
}

/// Energy shift of the `l = ±|l|` level pair at frozen radius `r`.
pub fn pair_shift(alpha: f64, r: f64, params: &PhysicalParams) -> Result<f64> {
    let a = fold_alpha(alpha)?;
    ensure_positive("r", r)?;
    let hbar = params.hbar();
    Ok(hbar * hbar * a * a / (2.0 * params.mass * r * r))
}

/// Energy needed to thread one fluxon through the center of a disk of
/// radius `radius`, per layer.
pub fn insertion_energy(alpha: f64, radius: f64, params: &PhysicalParams) -> Result<f64> {
    let a = fold_alpha(alpha)?;
    log_cutoff(radius, params.spacing, "R")?;
    Ok(insertion_log_coefficient(a, params) * (radius / params.spacing).ln())
}

/// Coefficient `c` of `c·ln(R/a0)` in [`insertion_energy`].
pub fn insertion_log_coefficient(alpha: f64, params: &PhysicalParams) -> f64 {
    let a = fold_alpha(alpha).unwrap_or(f64::NAN);
    let hbar = params.hbar();
    (PI / 2.0) * a * a * params.density2d * hbar * hbar / (2.0 * params.mass)
}

/// Two semi-fluxons at separation `a`, per layer.
pub fn two_fluxon_energy(a: f64, xi: f64, params: &PhysicalParams) -> Result<f64> {
    ensure_finite("xi", xi)?;
    log_cutoff(a, params.spacing, "a")?;
    let hbar = params.hbar();
    Ok(xi * (PI / 16.0) * params.density2d * hbar * hbar / params.mass * (a / params.spacing).ln())
}

/// Attractive force per unit fluxon length between two semi-fluxons
/// (dyne/cm in CGS).
pub fn force_per_length(a: f64, xi: f64, n3: f64, params: &PhysicalParams) -> Result<f64> {
    ensure_positive("a", a)?;
    ensure_positive("n3", n3)?;
    ensure_finite("xi", xi)?;
    let hbar = params.hbar();
    Ok(xi * (PI / 16.0) * n3 * hbar * hbar / params.mass / a)
}

/// Force per unit length from the rougher superconductor estimate
/// `W/length ≈ n ħ²/(2m) ln(r/r0)`, i.e. `n ħ²/(2 m a)`.
///
/// Its prefactor differs from [`force_per_length`] by `8/π`; both are
/// reported side by side.
pub fn superconductor_force_estimate(a: f64, n3: f64, params: &PhysicalParams) -> Result<f64> {
    ensure_positive("a", a)?;
    ensure_positive("n3", n3)?;
    let hbar = params.hbar();
    Ok(n3 * hbar * hbar / (2.0 * params.mass) / a)
}

pub fn pair_regime(alpha1: f64, alpha2: f64) -> Result<PairRegime> {
    let a1 = fold_alpha(alpha1)?;
    let a2 = fold_alpha(alpha2)?;
    let overlap = fold_alpha(alpha1 + alpha2)?.powi(2);
    let separated = a1 * a1 + a2 * a2;
    Ok(PairRegime {
        regime: compare(overlap, separated),
        overlap_energy_coeff: overlap,
        separated_energy_coeff: separated,
        sum_rule: compare(0.5, a1 + a2),
    })
}

/// Attractive when `cheaper < dearer`, with a relative slack for ties.
fn compare(cheaper: f64, dearer: f64) -> Regime {
    let tol = 1e-12 * cheaper.abs().max(dearer.abs()).max(f64::MIN_POSITIVE);
    if (cheaper - dearer).abs() <= tol {
        Regime::Marginal
    } else if cheaper < dearer {
        Regime::Attractive
    } else {
        Regime::Repulsive
    }
}

/// Extra condensate energy of an improperly quantized fluxon.
pub fn lg_condensate_energy(alpha: f64, radius: f64, core_radius: f64, phi0: f64) -> Result<f64> {
    let a = fold_alpha(alpha)?;
    ensure_positive("R0", core_radius)?;
    ensure_finite("phi0", phi0)?;
    if !(radius > core_radius) {
        return Err(Error::domain(format!(
            "R = {radius} must exceed R0 = {core_radius}"
        )));
    }
    Ok(LG_PREFACTOR * a * a * phi0 * phi0 * (radius / core_radius).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CasimirRatio {
    /// `force_per_length(a, 1, n3) / (ħ c / a³)`
    pub rho: f64,
    /// Order-of-magnitude form `alpha_em · a² / a_Bohr²`, valid for
    /// `n3 = a_Bohr^{-3}`.
    pub estimate: f64,
}

pub fn casimir_ratio(a: f64, n3: f64, params: &PhysicalParams) -> Result<CasimirRatio> {
    ensure_positive("a", a)?;
    ensure_positive("n3", n3)?;
    if params.system != UnitSystem::Cgs {
        return Err(Error::domain("casimir ratio needs CGS parameters"));
    }
    let c = params.speed_of_light()?;
    let hbar = params.hbar();
    let topological = force_per_length(a, 1.0, n3, params)?;
    let casimir = hbar * c / a.powi(3);
    Ok(CasimirRatio {
        rho: topological / casimir,
        estimate: FINE_STRUCTURE * (a / BOHR_RADIUS).powi(2),
    })
}

fn log_cutoff(length: f64, spacing: f64, name: &str) -> Result<()> {
    ensure_finite(name, length)?;
    if length > spacing {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} = {length} must exceed the spacing a0 = {spacing}"
        )))
    }
}
