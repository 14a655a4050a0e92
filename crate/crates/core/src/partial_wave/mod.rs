//! Exact single-fluxon spectrum of a charged particle on a Dirichlet disk.
//!
//! A fluxon `alpha` at the center shifts every angular momentum channel to
//! Bessel order `|l + alpha|`; the levels are `j_{nu,k}² / (2 R²)` in
//! natural units (`hbar = m = a0 = 1`). Filling the lowest `N` levels with
//! spinless fermions and subtracting the zero-flux filling gives the
//! insertion energy of the fluxon.

pub mod bessel;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure_positive, Error, Result};
use crate::units::{neumaier_sum, wrap_alpha};

pub use bessel::{bessel_j, bessel_zero, bessel_zeros};

/// Relative position of the Fermi level that must stay clear of both
/// cutoffs.
pub const GUARD_FRACTION: f64 = 0.8;
/// Minimum gap at the Fermi level for an unambiguous filling.
pub const MIN_SHELL_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub l: i64,
    pub k: u32,
    pub nu: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskSpectrum {
    pub alpha: f64,
    pub radius: f64,
    pub levels: Vec<Level>,
    pub l_max: u32,
    pub k_max: u32,
    /// Every level not in `levels` lies strictly above this energy.
    pub completeness_bound: f64,
}

/// Bessel order of channel `l` threaded by flux `alpha` (in `[0, 1)`).
pub fn effective_order(l: i64, alpha: f64) -> f64 {
    (l as f64 + alpha).abs()
}

/// All levels with `|l| <= l_max` and `1 <= k <= k_max`.
pub fn disk_spectrum(alpha: f64, radius: f64, l_max: u32, k_max: u32) -> Result<DiskSpectrum> {
    ensure_positive("R", radius)?;
    let a = wrap_alpha(alpha)?;
    if k_max == 0 {
        return Err(Error::Cutoff("k_max must be at least 1".into()));
    }
    if l_max as f64 + 1.0 > bessel::MAX_ORDER {
        return Err(Error::Cutoff(format!(
            "l_max = {l_max} needs Bessel orders beyond {}",
            bessel::MAX_ORDER
        )));
    }
    let l_max_i = l_max as i64;
    let scale = 1.0 / (2.0 * radius * radius);

    let channels: Vec<(Vec<Level>, f64)> = (-l_max_i..=l_max_i)
        .into_par_iter()
        .map(|l| {
            let nu = effective_order(l, a);
            let zeros = bessel_zeros(nu, k_max as usize)?;
            let top = zeros.last().map(|z| z * z * scale).unwrap_or(f64::INFINITY);
            let levels = zeros
                .iter()
                .enumerate()
                .map(|(i, z)| Level {
                    l,
                    k: i as u32 + 1,
                    nu,
                    energy: z * z * scale,
                })
                .collect();
            Ok((levels, top))
        })
        .collect::<Result<_>>()?;

    // channels beyond l_max have order at least l_max + 1 - a, and
    // j_{nu,1} > nu
    let outer = (l_max as f64 + 1.0 - a).powi(2) * scale;
    let completeness_bound = channels.iter().map(|(_, top)| *top).fold(outer, f64::min);
    let mut levels: Vec<Level> = channels.into_iter().flat_map(|(lv, _)| lv).collect();
    levels.sort_by(level_order);

    Ok(DiskSpectrum {
        alpha,
        radius,
        levels,
        l_max,
        k_max,
        completeness_bound,
    })
}

fn level_order(a: &Level, b: &Level) -> Ordering {
    a.energy
        .total_cmp(&b.energy)
        .then(a.l.abs().cmp(&b.l.abs()))
        .then(a.l.cmp(&b.l))
        .then(a.k.cmp(&b.k))
}

/// Cutoffs that leave the Fermi level of an `n`-particle filling well
/// inside the computed spectrum.
pub fn cutoffs_for_filling(n: usize) -> (u32, u32) {
    // semiclassical Fermi circle: l_F = k_F R = 2 sqrt(N)
    let l_f = 2.0 * (n as f64).sqrt();
    let l_max = (1.3 * l_f).ceil() as u32 + 3;
    let k_max = (1.3 * (l_f / std::f64::consts::PI + 1.0)).ceil() as u32 + 3;
    (l_max, k_max)
}

/// Sum of the `n` lowest levels, one spinless fermion per level.
pub fn fill_states(spectrum: &DiskSpectrum, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("particle count must be positive"));
    }
    if n > spectrum.levels.len() {
        return Err(Error::Cutoff(format!(
            "N = {n} exceeds the {} computed levels",
            spectrum.levels.len()
        )));
    }
    let fermi = &spectrum.levels[n - 1];
    let l_limit = GUARD_FRACTION * spectrum.l_max as f64;
    let k_limit = GUARD_FRACTION * spectrum.k_max as f64;
    if fermi.l.unsigned_abs() as f64 > l_limit || fermi.k as f64 > k_limit {
        return Err(Error::Cutoff(format!(
            "Fermi level (l = {}, k = {}) is within 20% of the cutoffs (l_max = {}, k_max = {})",
            fermi.l, fermi.k, spectrum.l_max, spectrum.k_max
        )));
    }
    if fermi.energy >= spectrum.completeness_bound {
        return Err(Error::Cutoff(format!(
            "Fermi energy {} reaches the truncation bound {}",
            fermi.energy, spectrum.completeness_bound
        )));
    }
    Ok(neumaier_sum(spectrum.levels[..n].iter().map(|lv| lv.energy)))
}

/// Gap between level `n` and level `n - 1` (0 when `n` is at either end).
pub fn shell_gap(spectrum: &DiskSpectrum, n: usize) -> f64 {
    if n == 0 || n >= spectrum.levels.len() {
        return 0.0;
    }
    spectrum.levels[n].energy - spectrum.levels[n - 1].energy
}

/// Particle count nearest to `target` at which every spectrum has a gap
/// above [`MIN_SHELL_GAP`].
pub fn closed_shell_filling(spectra: &[&DiskSpectrum], target: usize) -> Result<usize> {
    let len = spectra.iter().map(|s| s.levels.len()).min().unwrap_or(0);
    if target == 0 || target >= len {
        return Err(Error::Cutoff(format!(
            "target filling {target} outside the {len} computed levels"
        )));
    }
    let ok = |n: usize| spectra.iter().all(|s| shell_gap(s, n) > MIN_SHELL_GAP);
    for offset in 0..len {
        for n in [target + offset, target.wrapping_sub(offset)] {
            if n >= 1 && n < len && ok(n) {
                return Ok(n);
            }
        }
    }
    Err(Error::Cutoff("no closed shell found".into()))
}

/// Ground-state energy cost of threading flux `alpha` through the disk
/// center at fixed particle number `n`.
pub fn insertion_energy_numeric(alpha: f64, radius: f64, n: usize) -> Result<f64> {
    let (l_max, k_max) = cutoffs_for_filling(n);
    let with_flux = disk_spectrum(alpha, radius, l_max, k_max)?;
    let without = disk_spectrum(0.0, radius, l_max, k_max)?;
    Ok(fill_states(&with_flux, n)? - fill_states(&without, n)?)
}

/// Closed-shell particle count near `n2 · π R²` that is unambiguous for the
/// zero-flux spectrum and for every flux in `alphas`.
pub fn canonical_filling(radius: f64, n2: f64, alphas: &[f64]) -> Result<usize> {
    ensure_positive("n2", n2)?;
    let target = (n2 * std::f64::consts::PI * radius * radius).round().max(1.0) as usize;
    let (l_max, k_max) = cutoffs_for_filling(target + target / 10 + 8);
    let mut spectra = vec![disk_spectrum(0.0, radius, l_max, k_max)?];
    for &a in alphas {
        spectra.push(disk_spectrum(a, radius, l_max, k_max)?);
    }
    let refs: Vec<&DiskSpectrum> = spectra.iter().collect();
    closed_shell_filling(&refs, target)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders() {
        assert_eq!(effective_order(0, 0.3), 0.3);
        assert!((effective_order(-1, 0.3) - 0.7).abs() < 1e-15);
        assert_eq!(effective_order(2, 0.0), 2.0);
        assert_eq!(effective_order(-3, 0.5), 2.5);
    }

    #[test]
    fn zero_flux_ground_level() {
        let s = disk_spectrum(0.0, 3.0, 6, 6).unwrap();
        let g = s.levels[0];
        assert_eq!((g.l, g.k), (0, 1));
        let j01 = 2.404_825_557_695_773;
        assert!((g.energy - j01 * j01 / 18.0).abs() < 1e-13);
        // ±l degeneracy
        for lv in s.levels.iter().filter(|lv| lv.l > 0) {
            let twin = s.levels.iter().find(|o| o.l == -lv.l && o.k == lv.k).unwrap();
            assert_eq!(twin.energy, lv.energy);
        }
    }

    #[test]
    fn half_flux_pairs_are_degenerate() {
        let s = disk_spectrum(0.5, 2.0, 8, 5).unwrap();
        for lv in s.levels.iter().filter(|lv| lv.l >= 0 && lv.l < 8) {
            let twin = s.levels.iter().find(|o| o.l == -lv.l - 1 && o.k == lv.k).unwrap();
            assert_eq!(twin.energy, lv.energy);
        }
    }

    #[test]
    fn three_lowest_at_zero_flux() {
        // j01 = 2.405 < j11 = 3.832 < j21 = 5.136 < j02 = 5.520
        let s = disk_spectrum(0.0, 1.0, 6, 4).unwrap();
        let e01 = s.levels.iter().find(|lv| lv.l == 0 && lv.k == 1).unwrap().energy;
        let e11 = s.levels.iter().find(|lv| lv.l == 1 && lv.k == 1).unwrap().energy;
        assert_eq!(s.levels[1].l, -1);
        assert_eq!(s.levels[2].l, 1);
        let three = neumaier_sum(s.levels[..3].iter().map(|l| l.energy));
        assert!((three - (e01 + 2.0 * e11)).abs() < 1e-14);
    }

    #[test]
    fn cutoff_guard() {
        let s = disk_spectrum(0.0, 1.0, 3, 3).unwrap();
        assert!(matches!(fill_states(&s, 1), Ok(_)));
        assert!(matches!(fill_states(&s, 20), Err(Error::Cutoff(_))));
        assert!(matches!(fill_states(&s, 1000), Err(Error::Cutoff(_))));
        assert!(fill_states(&s, 0).is_err());
        assert!(disk_spectrum(0.0, 1.0, 250, 3).is_err());
        assert!(disk_spectrum(0.0, -1.0, 3, 3).is_err());
    }

    #[test]
    fn closed_shell_avoids_split_pairs() {
        let s0 = disk_spectrum(0.0, 10.0, 30, 12).unwrap();
        let s5 = disk_spectrum(0.5, 10.0, 30, 12).unwrap();
        let n = closed_shell_filling(&[&s0, &s5], 40).unwrap();
        assert!(shell_gap(&s0, n) > MIN_SHELL_GAP);
        assert!(shell_gap(&s5, n) > MIN_SHELL_GAP);
    }

    #[test]
    fn trivial_flux_values() {
        assert_eq!(insertion_energy_numeric(0.0, 10.0, 20).unwrap(), 0.0);
        assert!(insertion_energy_numeric(1.0, 10.0, 20).unwrap().abs() < 1e-10);
        assert!(insertion_energy_numeric(0.3, 10.0, 20).unwrap() > 0.0);
    }
}
