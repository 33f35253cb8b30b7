//! Reference solvers used only by tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Eighth-order central stencil for the second derivative.
const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

/// Position-grid fluxonium: H = −4·E_C·∂² + ½·E_L·φ² − E_J·cos(φ + φ_ext)
/// on `points` nodes over [−8π, 8π] with hard walls. Returns the lowest
/// `levels` eigenvalues by Sturm bisection on the banded matrix.
pub fn grid_levels(e_c: f64, e_l: f64, e_j: f64, phi_ext: f64, points: usize, levels: usize) -> Vec<f64> {
    let span = 8.0 * PI;
    let h = 2.0 * span / (points - 1) as f64;
    let diag: Vec<f64> = (0..points)
        .map(|i| {
            let x = -span + i as f64 * h;
            -4.0 * e_c * D2[0] / (h * h) + 0.5 * e_l * x * x - e_j * (x + phi_ext).cos()
        })
        .collect();
    let off: Vec<f64> = (1..5).map(|k| -4.0 * e_c * D2[k] / (h * h)).collect();
    let vmin = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 * e_c * 10.0 / (h * h);
    (0..levels)
        .map(|k| {
            let mut lo = vmin;
            let mut hi = vmin.abs() + 10.0;
            while count_below(&diag, &off, hi) <= k {
                hi = 2.0 * hi.abs() + 1.0;
            }
            while hi - lo > 1e-11 * hi.abs().max(1.0) {
                let mid = 0.5 * (lo + hi);
                if count_below(&diag, &off, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Number of eigenvalues below `sigma` from the inertia of a banded LDLᵀ.
fn count_below(diag: &[f64], off: &[f64], sigma: f64) -> usize {
    let n = diag.len();
    let b = off.len();
    // l[i][k] = L(i, i-1-k)
    let mut l = vec![[0.0f64; 4]; n];
    let mut d = vec![0.0f64; n];
    let mut negatives = 0;
    for i in 0..n {
        for k in (0..b).rev() {
            if i < k + 1 {
                continue;
            }
            let j = i - 1 - k;
            let mut v = off[k];
            for m in 1..b {
                // column c = j - m must be within the band of both rows
                if j < m || i - (j - m) > b {
                    continue;
                }
                let c = j - m;
                v -= l[i][i - c - 1] * l[j][j - c - 1] * d[c];
            }
            l[i][k] = v / d[j];
        }
        let mut di = diag[i] - sigma;
        for k in 0..b.min(i) {
            let j = i - 1 - k;
            di -= l[i][k] * l[i][k] * d[j];
        }
        if di == 0.0 {
            di = -1e-300;
        }
        if di < 0.0 {
            negatives += 1;
        }
        d[i] = di;
    }
    negatives
}

#[test]
fn grid_oracle_reproduces_harmonic_ladder() {
    let (ec, el) = (0.89f64, 1.37f64);
    let w = (8.0 * ec * el).sqrt();
    let e = grid_levels(ec, el, 0.0, 0.0, 2048, 6);
    for (i, v) in e.iter().enumerate() {
        assert!((v - w * (i as f64 + 0.5)).abs() < 1e-7, "level {i}: {v}");
    }
}
