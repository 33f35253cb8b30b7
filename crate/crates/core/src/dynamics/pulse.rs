use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::drive::{assign_tones, stark_shifts, two_photon_element, DrivePlan, DriveTone};
use super::levels::{CollapseOp, LevelSystem};
use super::lindblad::{liouvillian, rk4, DensityState};
use crate::error::{domain, Error, Result};
use crate::exec::Execution;
use crate::linalg::CMatrix;
use crate::units::GHZ;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Gaussian width, s.
    pub sigma: f64,
    #[serde(rename = "carrier_GHz")]
    pub carrier: f64,
    /// Rotation angle; π inverts the target pair.
    #[serde(default = "default_area")]
    pub area: f64,
    /// Half-length of the pulse window in units of σ.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    pub target: String,
}

fn default_area() -> f64 {
    PI
}

fn default_truncation() -> f64 {
    4.0
}

impl PulseSpec {
    pub fn pi(target: &str, carrier: f64, sigma: f64) -> Self {
        PulseSpec { sigma, carrier, area: PI, truncation: 4.0, target: target.to_owned() }
    }

    pub fn duration(&self) -> f64 {
        2.0 * self.truncation * self.sigma
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(domain("pulse sigma must be positive"));
        }
        if !(self.carrier > 0.0) || !(self.truncation > 0.0) || !self.area.is_finite() {
            return Err(domain("pulse carrier and truncation must be positive"));
        }
        Ok(())
    }

    fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.truncation * self.sigma) / self.sigma;
        (-0.5 * x * x).exp()
    }

    /// ∫ s(t)^k dt over the window, Simpson rule.
    fn envelope_integral(&self, k: i32) -> f64 {
        let n = 4000;
        let h = self.duration() / n as f64;
        let f = |i: usize| self.envelope(i as f64 * h).powi(k);
        let inner: f64 = (1..n).map(|i| if i % 2 == 1 { 4.0 * f(i) } else { 2.0 * f(i) }).sum();
        h / 3.0 * (f(0) + inner + f(n))
    }
}

/// Outcome of fitting A·e^{−t/T1} + C to a relaxation trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DecayFit {
    Decay { t1: f64, amplitude: f64, offset: f64, rms: f64, fit_from: f64 },
    NoDecay { level: f64 },
    Failed { reason: String },
}

impl DecayFit {
    pub fn t1(&self) -> Option<f64> {
        match self {
            DecayFit::Decay { t1, .. } => Some(*t1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PulseT1Result {
    pub wait: Vec<f64>,
    /// Readout-level population after each wait.
    pub population: Vec<f64>,
    pub prepared: DensityState,
    pub fit: DecayFit,
}

pub const TRACE_CSV_HEADER: &str = "t_wait_s,population";

impl PulseT1Result {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_CSV_HEADER}")?;
        for (t, p) in self.wait.iter().zip(&self.population) {
            writeln!(w, "{t},{p}")?;
        }
        Ok(())
    }
}

/// Applies the pulses in order, starting from the lowest level, and returns
/// the state at the end of the last pulse. Integration runs in the frame of
/// the bare energies with RWA couplings; two-photon pulses use the folded
/// coupling and their Stark shifts.
pub fn apply_pulses(sys: &LevelSystem, pulses: &[PulseSpec], collapse: &[CollapseOp], rho0: &DensityState) -> Result<DensityState> {
    let d = sys.dim();
    let w = 2.0 * PI * GHZ;
    let mut rho = rho0.rho.clone();
    let mut t0 = 0.0;
    for (k, p) in pulses.iter().enumerate() {
        p.validate()?;
        let plan = DrivePlan::new(vec![DriveTone::new(p.carrier, 0.0, Some(&p.target))?]);
        let a = assign_tones(sys, &plan)?[0];
        let (lo, up) = (a.lower, a.upper);
        let delta = w * a.detuning(sys, &plan);
        let (coupling, stark, power) = if a.photons == 1 {
            let n = sys.charge[(up, lo)];
            if n.norm() == 0.0 {
                return Err(Error::Plan(format!("pulse {k} drives a forbidden transition {}", p.target)));
            }
            let amp = p.area / (w * n.norm() * p.envelope_integral(1));
            (n * (0.5 * amp), vec![0.0; d], 1)
        } else {
            let g = two_photon_element(sys, lo, up, p.carrier);
            if g.norm() == 0.0 {
                return Err(Error::Plan(format!("pulse {k} drives a forbidden transition {}", p.target)));
            }
            let amp2 = p.area / (w * 2.0 * g.norm() * p.envelope_integral(2));
            let s = stark_shifts(sys, 1.0, p.carrier).into_iter().map(|x| x * amp2).collect();
            (g * amp2, s, 2)
        };
        let steps = ((p.duration() / (p.sigma / 100.0)).ceil() as usize).max(1);
        let dt = p.duration() / steps as f64;
        let start = t0;
        rk4(&mut rho, 0.0, dt, steps, collapse, |t| {
            let s = p.envelope(t).powi(power);
            let mut h = CMatrix::zeros(d, d);
            for (i, sk) in stark.iter().enumerate() {
                h[(i, i)] = Complex64::new(w * s * sk, 0.0);
            }
            let v = coupling * (w * s) * Complex64::from_polar(1.0, -delta * (start + t));
            h[(up, lo)] = v;
            h[(lo, up)] = v.conj();
            h
        });
        t0 += p.duration();
    }
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(DensityState { rho })
}

/// Three-pulse style T1 protocol: prepare with `pulses`, let the system relax
/// for each wait time and record the population of `readout`.
pub fn pulse_sequence_t1(
    sys: &LevelSystem,
    pulses: &[PulseSpec],
    collapse: &[CollapseOp],
    readout: &str,
    wait_grid: &[f64],
    fit_from: Option<f64>,
    exec: Execution,
) -> Result<PulseT1Result> {
    if wait_grid.is_empty() || wait_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(domain("wait grid must be non-empty and non-negative"));
    }
    let r = sys.index_of(readout)?;
    let d = sys.dim();
    let prepared = apply_pulses(sys, pulses, collapse, &DensityState::pure(d, 0))?;
    let free = liouvillian(&CMatrix::zeros(d, d), collapse)?;
    let v0 = prepared.to_vec();
    let population = exec.map(wait_grid, |&t| {
        let v = (&free * Complex64::new(t, 0.0)).exp() * &v0;
        v[r + r * d].re
    });
    let fit = fit_exponential(wait_grid, &population, fit_from);
    Ok(PulseT1Result { wait: wait_grid.to_vec(), population, prepared, fit })
}

/// Fits A·e^{−t/T1} + C by golden-section search on ln T1 with A and C
/// solved in closed form. Without `fit_from`, points earlier than three times
/// the trace maximum are skipped so that the fast feeding transient is gone.
/// A trace whose second half is flat reports no decay.
pub fn fit_exponential(t: &[f64], y: &[f64], fit_from: Option<f64>) -> DecayFit {
    if t.len() != y.len() || t.len() < 3 {
        return DecayFit::Failed { reason: "need at least three samples".into() };
    }
    let tail: Vec<f64> = t.iter().zip(y).filter(|(ti, _)| **ti >= 0.5 * (t[0] + t[t.len() - 1])).map(|(_, v)| *v).collect();
    let spread = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    };
    let (lo, hi) = spread(&tail);
    if hi - lo < 1e-9 {
        return DecayFit::NoDecay { level: 0.5 * (hi + lo) };
    }
    let start = fit_from.unwrap_or_else(|| {
        let top = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = y.iter().position(|&v| v >= top - 1e-9 * top.abs()).unwrap_or(0);
        3.0 * t[first]
    });
    let pts: Vec<(f64, f64)> = t.iter().zip(y).filter(|(ti, _)| **ti >= start).map(|(a, b)| (*a, *b)).collect();
    if pts.len() < 3 {
        return DecayFit::Failed { reason: format!("fewer than three samples after t = {start:e} s") };
    }
    let t0 = pts[0].0;
    let span = pts.last().unwrap().0 - t0;
    if span <= 0.0 {
        return DecayFit::Failed { reason: "zero time span".into() };
    }
    let linear = |tau: f64| -> (f64, f64, f64) {
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        let n = pts.len() as f64;
        for &(ti, yi) in &pts {
            let x = (-(ti - t0) / tau).exp();
            sx += x;
            sy += yi;
            sxx += x * x;
            sxy += x * yi;
        }
        let det = n * sxx - sx * sx;
        let a = (n * sxy - sx * sy) / det;
        let c = (sy - a * sx) / n;
        let sse = pts.iter().map(|&(ti, yi)| (yi - a * (-(ti - t0) / tau).exp() - c).powi(2)).sum();
        (a, c, sse)
    };
    let (mut a, mut b) = ((span * 1e-3).ln(), (span * 1e3).ln());
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = linear(x1.exp()).2;
    let mut f2 = linear(x2.exp()).2;
    for _ in 0..200 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = linear(x1.exp()).2;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = linear(x2.exp()).2;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    let tau = (0.5 * (a + b)).exp();
    let (amp, off, sse) = linear(tau);
    if tau > span * 999.0 || tau < span * 1.001e-3 {
        return DecayFit::Failed { reason: format!("decay time {tau:e} s at the edge of the search range") };
    }
    if amp <= 0.0 {
        return DecayFit::Failed { reason: "trace rises instead of decaying".into() };
    }
    DecayFit::Decay {
        t1: tau,
        amplitude: amp * (t0 / tau).exp(),
        offset: off,
        rms: (sse / pts.len() as f64).sqrt(),
        fit_from: start,
    }
}
