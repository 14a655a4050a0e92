//! Physical constants, unit conversion, flux folding and least-squares fits.
//!
//! Gaussian CGS is the external unit system. Spectral work runs in natural
//! units where `hbar = m = a0 = 1`, with `a0` the inter-particle spacing of
//! the [`PhysicalParams`] in use.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// CODATA-2018 constants in Gaussian CGS units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalConstants {
    /// erg·s
    pub hbar: f64,
    /// g
    pub electron_mass: f64,
    /// esu
    pub electron_charge: f64,
    /// cm/s
    pub speed_of_light: f64,
    /// cm
    pub bohr_radius: f64,
    pub fine_structure: f64,
    /// gauss·cm², single-charge convention `2π ħ c / e`
    pub flux_quantum: f64,
}

pub const HBAR: f64 = 1.054_571_817e-27;
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-28;
pub const ELECTRON_CHARGE: f64 = 4.803_204_712_570_263e-10;
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e10;
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-9;
pub const FINE_STRUCTURE: f64 = 7.297_352_569_3e-3;

/// One ångström in cm.
pub const ANGSTROM: f64 = 1e-8;
/// One micron in cm.
pub const MICRON: f64 = 1e-4;

impl PhysicalConstants {
    pub fn codata2018() -> Self {
        Self {
            hbar: HBAR,
            electron_mass: ELECTRON_MASS,
            electron_charge: ELECTRON_CHARGE,
            speed_of_light: SPEED_OF_LIGHT,
            bohr_radius: BOHR_RADIUS,
            fine_structure: FINE_STRUCTURE,
            flux_quantum: flux_quantum(ELECTRON_CHARGE),
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

/// Flux quantum `2π ħ c / q` for a carrier of charge `q` (esu).
///
/// Pass `2e` for Cooper pairs.
pub fn flux_quantum(charge: f64) -> f64 {
    2.0 * PI * HBAR * SPEED_OF_LIGHT / charge
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnitSystem {
    /// Gaussian CGS.
    Cgs,
    /// `hbar = m = a0 = 1`.
    Natural,
}

/// Properties of the charged background.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    pub mass: f64,
    pub charge: f64,
    /// Per-layer density `n2`.
    pub density2d: f64,
    /// Bulk density `n`.
    pub density3d: f64,
    /// Typical inter-particle distance `a0`.
    pub spacing: f64,
    pub system: UnitSystem,
}

impl PhysicalParams {
    pub fn new(
        mass: f64,
        charge: f64,
        density2d: f64,
        density3d: f64,
        spacing: f64,
        system: UnitSystem,
    ) -> Result<Self> {
        ensure_positive("mass", mass)?;
        ensure_positive("charge", charge)?;
        ensure_positive("density2d", density2d)?;
        ensure_positive("density3d", density3d)?;
        ensure_positive("spacing", spacing)?;
        Ok(Self {
            mass,
            charge,
            density2d,
            density3d,
            spacing,
            system,
        })
    }

    /// Electrons at bulk density `n3`, with `a0 = n3^{-1/3}` and
    /// `n2 = a0^{-2}`.
    pub fn electrons(n3: f64) -> Result<Self> {
        ensure_positive("n3", n3)?;
        let spacing = n3.powf(-1.0 / 3.0);
        Self::new(
            ELECTRON_MASS,
            ELECTRON_CHARGE,
            spacing.powi(-2),
            n3,
            spacing,
            UnitSystem::Cgs,
        )
    }

    /// Natural-unit parameter set with the given per-layer density.
    ///
    /// The layer thickness is one spacing, so `density3d = density2d`.
    pub fn natural(density2d: f64) -> Result<Self> {
        Self::new(1.0, 1.0, density2d, density2d, 1.0, UnitSystem::Natural)
    }

    pub fn hbar(&self) -> f64 {
        match self.system {
            UnitSystem::Cgs => HBAR,
            UnitSystem::Natural => 1.0,
        }
    }

    pub fn speed_of_light(&self) -> Result<f64> {
        match self.system {
            UnitSystem::Cgs => Ok(SPEED_OF_LIGHT),
            UnitSystem::Natural => Err(Error::domain(
                "speed of light is not fixed by natural units (hbar = m = a0 = 1)",
            )),
        }
    }

    /// `n2 · a0²`, which is of order one for a consistent parameter set.
    pub fn density_consistency(&self) -> f64 {
        self.density2d * self.spacing * self.spacing
    }
}

/// Quantity kinds that can be moved between CGS and natural units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantityKind {
    Length,
    Energy,
    ForcePerLength,
    MagneticField,
}

impl FromStr for QuantityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length" => Ok(Self::Length),
            "energy" => Ok(Self::Energy),
            "force-per-length" => Ok(Self::ForcePerLength),
            "magnetic-field" => Ok(Self::MagneticField),
            other => Err(Error::domain(format!("unknown quantity kind `{other}`"))),
        }
    }
}

impl fmt::Display for QuantityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Length => "length",
            Self::Energy => "energy",
            Self::ForcePerLength => "force-per-length",
            Self::MagneticField => "magnetic-field",
        };
        f.write_str(s)
    }
}

/// Size of one natural unit of `kind`, expressed in CGS.
fn natural_scale(params: &PhysicalParams, kind: QuantityKind) -> Result<f64> {
    if params.system != UnitSystem::Cgs {
        return Err(Error::domain("unit conversion needs CGS parameters"));
    }
    let a0 = params.spacing;
    let energy = HBAR * HBAR / (params.mass * a0 * a0);
    Ok(match kind {
        QuantityKind::Length => a0,
        QuantityKind::Energy => energy,
        QuantityKind::ForcePerLength => energy / (a0 * a0),
        QuantityKind::MagneticField => HBAR * SPEED_OF_LIGHT / (params.charge * a0 * a0),
    })
}

pub fn to_natural(params: &PhysicalParams, quantity: f64, kind: QuantityKind) -> Result<f64> {
    Ok(quantity / natural_scale(params, kind)?)
}

pub fn from_natural(params: &PhysicalParams, quantity: f64, kind: QuantityKind) -> Result<f64> {
    Ok(quantity * natural_scale(params, kind)?)
}

/// Reduces a flux fraction to `[0, 1/2]`.
///
/// Integer shifts are gauge artifacts and `alpha -> -alpha` is time
/// reversal, so only the distance to the nearest integer matters.
/// Half-integer flux maps to exactly `1/2`.
pub fn fold_alpha(alpha: f64) -> Result<f64> {
    ensure_finite("alpha", alpha)?;
    let frac = alpha - alpha.floor();
    Ok(frac.min(1.0 - frac))
}

/// Reduces a flux fraction to `[0, 1)` using periodicity only.
pub fn wrap_alpha(alpha: f64) -> Result<f64> {
    ensure_finite("alpha", alpha)?;
    let frac = alpha - alpha.floor();
    // alpha slightly below an integer can round to 1.0
    Ok(if frac >= 1.0 { 0.0 } else { frac })
}

/// Ordinary least-squares line through a point set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub residual_max: f64,
}

impl FitResult {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::Fit(format!(
            "length mismatch: {} x values, {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::Fit("need at least two points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite data".into()));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let scale = xs.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    if sxx <= (f64::EPSILON * scale).powi(2) * n {
        return Err(Error::Fit("degenerate x values (all equal)".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let mut ss_res = 0.0;
    let mut residual_max: f64 = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (slope * x + intercept);
        ss_res += r * r;
        residual_max = residual_max.max(r.abs());
    }
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        residual_max,
    })
}

/// Compensated summation.
pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
