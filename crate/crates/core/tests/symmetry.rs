use std::f64::consts::PI;

use proptest::prelude::*;

use fluxonium::circuit::{FluxBias, SingleModeParams, TwoModeParams};
use fluxonium::nanowire::{two_mode_from_topology, CircuitTopology};
use fluxonium::spectra::{LabeledSpectrum, SpectrumModel};

fn devices() -> [SingleModeParams; 3] {
    [SingleModeParams::device1(), SingleModeParams::device2(), SingleModeParams::device3()]
}

fn levels(p: SingleModeParams, phi: f64, k: usize) -> Vec<f64> {
    SpectrumModel::single(p).solve(FluxBias::new(phi).unwrap(), k).unwrap().energies
}

/// Splits states into two classes through their strong charge couplings and
/// returns the largest charge or phase element inside a class. At a parity
/// symmetric bias both operators are odd, so that maximum must vanish.
fn same_parity_leak(s: &LabeledSpectrum) -> f64 {
    let k = s.len();
    let mut colour: Vec<Option<bool>> = vec![None; k];
    for root in 0..k {
        if colour[root].is_some() {
            continue;
        }
        colour[root] = Some(false);
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..k {
                if j != i && s.dipole_n(i, j).max(s.dipole_phi(i, j)) > 1e-6 {
                    let want = !colour[i].unwrap();
                    match colour[j] {
                        None => {
                            colour[j] = Some(want);
                            stack.push(j);
                        }
                        Some(c) => assert_eq!(c, want, "coupling graph is not bipartite"),
                    }
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            if i != j && colour[i] == colour[j] {
                worst = worst.max(s.dipole_n(i, j)).max(s.dipole_phi(i, j));
            }
        }
    }
    worst
}

#[test]
fn parity_forbidden_dipoles_vanish_at_symmetric_bias() {
    for p in devices() {
        for phi in [0.0, PI] {
            let s = SpectrumModel::single(p).solve(FluxBias::new(phi).unwrap(), 8).unwrap();
            let leak = same_parity_leak(&s);
            assert!(leak < 1e-10, "{p:?} φ={phi}: {leak:e}");
        }
    }
}

#[test]
fn parity_is_broken_away_from_symmetric_bias() {
    // sanity check on the classifier: off symmetry, g0 couples to everything
    let s = SpectrumModel::single(SingleModeParams::device1()).solve(FluxBias::from_pi(-0.38), 6).unwrap();
    assert!((1..6).all(|j| s.dipole_phi(0, j) > 1e-6));
}

#[test]
fn offset_charge_drops_out_of_two_mode_spectra() {
    let p = two_mode_from_topology(&CircuitTopology::device1(), 10.95).unwrap();
    for q in [[0.3, 0.7]] {
        let shifted = TwoModeParams { q_offset: q, ..p };
        // the gauge shift is exact only once the basis has converged
        for frac in [-0.5, 0.3] {
            let flux = FluxBias::from_pi(frac);
            let a = SpectrumModel::TwoMode { params: p, dims: (50, 16) }.solve(flux, 5).unwrap();
            let b = SpectrumModel::TwoMode { params: shifted, dims: (50, 16) }.solve(flux, 5).unwrap();
            for (x, y) in a.energies.iter().zip(&b.energies) {
                assert!((x - y).abs() < 1e-9, "q={q:?}: {x} {y}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectra_are_two_pi_periodic(dev in 0usize..3, phi in -PI..PI, turns in -2i32..=2) {
        let p = devices()[dev];
        let a = levels(p, phi, 6);
        let b = levels(p, phi + 2.0 * PI * turns as f64, 6);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{x} {y}");
        }
    }

    #[test]
    fn spectra_are_mirror_symmetric(dev in 0usize..3, phi in -PI..PI) {
        let p = devices()[dev];
        let a = levels(p, phi, 6);
        let b = levels(p, -phi, 6);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9, "{x} {y}");
        }
    }

    #[test]
    fn random_circuits_keep_mirror_symmetry(e_c in 0.3..2.5f64, e_l in 0.2..2.0f64, e_j in 1.0..12.0f64, phi in 0.0..PI) {
        let p = SingleModeParams::new(e_c, e_l, e_j).unwrap();
        let a = levels(p, phi, 4);
        let b = levels(p, -phi, 4);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "{x} {y}");
        }
    }
}
