use std::f64::consts::PI;

use num_complex::Complex64;

use super::drive::DrivePlan;
use super::levels::{CollapseOp, LevelSystem};
use super::lindblad::{rk4, DensityState};
use crate::error::{domain, Result};
use crate::linalg::CMatrix;
use crate::units::GHZ;

/// Population of `target` averaged over the second half of a lab-frame run
/// of length `horizon`, starting from the lowest level. Every tone couples
/// every pair through Ω·cos(ωt)·n̂, with no rotating-wave approximation and
/// no tone assignment. Meant as a slow cross-check of the rotating-frame
/// steady states on small level sets.
pub fn lab_frame_population(
    sys: &LevelSystem,
    plan: &DrivePlan,
    collapse: &[CollapseOp],
    target: &str,
    horizon: f64,
    dt: f64,
) -> Result<f64> {
    plan.validate()?;
    if !(dt > 0.0) || !(horizon > dt) {
        return Err(domain("need 0 < dt < horizon"));
    }
    let t = sys.index_of(target)?;
    let d = sys.dim();
    let w = 2.0 * PI * GHZ;
    // Interaction picture w.r.t. the bare energies: n_ab picks up e^{i(E_a−E_b)t}.
    let base: Vec<(usize, usize, Complex64, f64)> = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .map(|(a, b)| (a, b, sys.charge[(a, b)], w * (sys.energies[a] - sys.energies[b])))
        .filter(|x| x.2.norm() > 0.0)
        .collect();
    let tones: Vec<(f64, f64)> = plan.tones.iter().map(|x| (w * x.amplitude, w * x.frequency)).collect();
    let h_at = |time: f64| {
        let drive: f64 = tones.iter().map(|&(amp, om)| amp * (om * time).cos()).sum();
        let mut h = CMatrix::zeros(d, d);
        for &(a, b, n, e) in &base {
            h[(a, b)] = n * drive * Complex64::from_polar(1.0, e * time);
        }
        h
    };
    let steps = (horizon / dt).round() as usize;
    let half = steps / 2;
    let mut rho = DensityState::pure(d, 0).rho;
    rk4(&mut rho, 0.0, dt, half, collapse, h_at);
    let mut acc = 0.0;
    for k in half..steps {
        rk4(&mut rho, k as f64 * dt, dt, 1, collapse, h_at);
        acc += rho[(t, t)].re;
    }
    Ok(acc / (steps - half) as f64)
}
