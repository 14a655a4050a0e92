use std::f64::consts::TAU;

use fluxon::lattice::{
    build_lattice, filled_energy_from, loop_phase, pair_model, rectangle_loop, spectrum,
    CutDirection, Fluxon,
};
use fluxon::partial_wave::{
    bessel_zero, canonical_filling, disk_spectrum, fill_states, insertion_energy_numeric,
};
use fluxon::units::{fold_alpha, linear_fit, wrap_alpha};
use proptest::prelude::*;

const R: f64 = 12.0;
const N2: f64 = 0.3;

fn disk_filling() -> usize {
    canonical_filling(R, N2, &[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]).unwrap()
}

#[test]
fn disk_periodicity_and_reflection() {
    let n = disk_filling();
    for i in 1..=9 {
        let a = i as f64 / 10.0;
        let base = insertion_energy_numeric(a, R, n).unwrap();
        let shifted = insertion_energy_numeric(a + 1.0, R, n).unwrap();
        let reflected = insertion_energy_numeric(1.0 - a, R, n).unwrap();
        assert!((base - shifted).abs() < 1e-9, "α = {a}: {base} vs {shifted}");
        assert!((base - reflected).abs() < 1e-9, "α = {a}: {base} vs {reflected}");
        assert!(base > 0.0);
    }
    assert_eq!(insertion_energy_numeric(0.0, R, n).unwrap(), 0.0);
    assert!(insertion_energy_numeric(1.0, R, n).unwrap().abs() < 1e-10);
}

#[test]
fn disk_nu_multisets() {
    let nus = |a: f64| {
        let s = disk_spectrum(a, 5.0, 20, 3).unwrap();
        // the l window is asymmetric in ν near the cutoff; compare ν < 15
        let mut v: Vec<f64> = s.levels.iter().filter(|l| l.nu < 15.0).map(|l| l.nu).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let base = nus(0.3);
    for other in [nus(1.3), nus(-0.3)] {
        assert_eq!(base.len(), other.len());
        for (x, y) in base.iter().zip(&other) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn fill_is_monotone_in_n() {
    let s = disk_spectrum(0.37, 10.0, 30, 12).unwrap();
    let mut last = 0.0;
    for n in 1..=60 {
        let e = fill_states(&s, n).unwrap();
        assert!(e > last);
        last = e;
    }
}

#[test]
fn frozen_radius_pair_sum() {
    for (l, k) in [(3u32, 1usize), (8, 2), (20, 1)] {
        let lf = l as f64;
        let j0 = bessel_zero(lf, k).unwrap();
        let alphas = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4];
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for a in alphas {
            let plus = bessel_zero(lf + a, k).unwrap();
            let minus = bessel_zero(lf - a, k).unwrap();
            let s = plus * plus + minus * minus - 2.0 * j0 * j0;
            assert!(s > 0.0, "(l, k) = ({l}, {k}), α = {a}: {s}");
            xs.push(a * a);
            ys.push(s);
        }
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!(fit.r_squared > 0.95, "(l, k) = ({l}, {k}): r² = {}", fit.r_squared);
    }
}

fn lattice_energy(alpha: f64, plaquette: (usize, usize), cut: CutDirection, n: usize) -> f64 {
    let f = Fluxon::new(plaquette.0, plaquette.1, alpha).with_cut(cut);
    let m = build_lattice(9, 8, 1.0, &[], &[f]).unwrap();
    filled_energy_from(&spectrum(&m).unwrap(), n, 1.0).unwrap_or(f64::NAN)
}

#[test]
fn lattice_fully_filled_is_traceless() {
    let m = build_lattice(7, 6, 1.0, &[(2, 2)], &[Fluxon::new(3, 3, 0.3)]).unwrap();
    let e = spectrum(&m).unwrap();
    assert!(filled_energy_from(&e, e.len(), 1.0).unwrap().abs() < 1e-10);
}

#[test]
fn merged_semi_fluxons_approach_zero_flux() {
    let size = 16;
    let zero = spectrum(&build_lattice(size, size, 1.0, &[], &[]).unwrap()).unwrap();
    let merged = spectrum(&pair_model(size, 1.0, (0.5, 0.5), 1).unwrap()).unwrap();
    let n = fluxon::lattice::common_closed_shell(&[zero.clone(), merged.clone()], 64, 1.0).unwrap();
    let d = filled_energy_from(&merged, n, 1.0).unwrap() - filled_energy_from(&zero, n, 1.0).unwrap();
    assert!(d.abs() < 0.05, "{d}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fold_is_idempotent_and_symmetric(a in -50.0f64..50.0) {
        let f = fold_alpha(a).unwrap();
        prop_assert!((0.0..=0.5).contains(&f));
        prop_assert!((fold_alpha(f).unwrap() - f).abs() < 1e-12);
        prop_assert!((fold_alpha(-a).unwrap() - f).abs() < 1e-9);
        prop_assert!((fold_alpha(a + 3.0).unwrap() - f).abs() < 1e-9);
        let w = wrap_alpha(a).unwrap();
        prop_assert!((0.0..1.0).contains(&w));
    }

    #[test]
    fn lattice_gauge_periodicity_reflection(
        alpha in 0.01f64..0.99,
        px in 1usize..7,
        py in 1usize..6,
    ) {
        // pick a closed shell for the +x gauge at α, then compare
        let f = Fluxon::new(px, py, alpha);
        let e = spectrum(&build_lattice(9, 8, 1.0, &[], &[f]).unwrap()).unwrap();
        let n = fluxon::lattice::common_closed_shell(&[e], 18, 1.0).unwrap();
        let base = lattice_energy(alpha, (px, py), CutDirection::PositiveX, n);
        let other_cut = lattice_energy(alpha, (px, py), CutDirection::NegativeX, n);
        let shifted = lattice_energy(alpha + 1.0, (px, py), CutDirection::PositiveX, n);
        let reversed = lattice_energy(-alpha, (px, py), CutDirection::PositiveX, n);
        let reflected = lattice_energy(1.0 - alpha, (px, py), CutDirection::PositiveX, n);
        prop_assert!((base - other_cut).abs() < 1e-10);
        prop_assert!((base - shifted).abs() < 1e-10);
        prop_assert!((base - reversed).abs() < 1e-10);
        prop_assert!((base - reflected).abs() < 1e-10);
    }

    #[test]
    fn lattice_cut_direction_leaves_every_eigenvalue(
        alpha in -2.0f64..2.0,
        px in 0usize..8,
        py in 0usize..7,
    ) {
        let a = spectrum(&build_lattice(9, 8, 1.0, &[], &[Fluxon::new(px, py, alpha)]).unwrap()).unwrap();
        let f = Fluxon::new(px, py, alpha).with_cut(CutDirection::NegativeX);
        let b = spectrum(&build_lattice(9, 8, 1.0, &[], &[f]).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn discrete_stokes(
        alphas in proptest::collection::vec(-1.0f64..1.0, 3),
        plaquettes in proptest::collection::vec((0usize..8, 0usize..7), 3),
        lo in (0usize..4, 0usize..4),
        size in (1usize..5, 1usize..4),
    ) {
        let fluxons: Vec<Fluxon> = alphas
            .iter()
            .zip(&plaquettes)
            .enumerate()
            .map(|(i, (&a, &(px, py)))| {
                let cut = if i % 2 == 0 { CutDirection::PositiveX } else { CutDirection::NegativeX };
                Fluxon::new(px, py, a).with_cut(cut)
            })
            .collect();
        let m = build_lattice(9, 8, 1.0, &[], &fluxons).unwrap();
        let hi = (lo.0 + size.0, lo.1 + size.1);
        let enclosed: f64 = fluxons
            .iter()
            .filter(|f| {
                let (px, py) = f.plaquette;
                px >= lo.0 && px < hi.0 && py >= lo.1 && py < hi.1
            })
            .map(|f| f.alpha)
            .sum();
        let phase = loop_phase(&m, &rectangle_loop(lo, hi).unwrap()).unwrap();
        let diff = (phase - TAU * enclosed).rem_euclid(TAU);
        prop_assert!(diff < 1e-10 || TAU - diff < 1e-10, "phase {} vs enclosed {}", phase, enclosed);
    }
}
