//! Inductive, capacitive and Purcell relaxation of the fluxon transition,
//! T1 versus flux, and quality-factor fits to measured lifetimes.

use serde::{Deserialize, Serialize};

use crate::circuit::{FluxBias, ResonatorParams, SingleModeParams};
use crate::error::{domain, Error, Result};
use crate::exec::Execution;
use crate::spectra::{LabeledSpectrum, SpectrumModel};
use crate::units;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    #[serde(rename = "Q_L")]
    pub q_l: f64,
    #[serde(rename = "Q_C")]
    pub q_c: f64,
    #[serde(rename = "temperature_K")]
    pub temperature: f64,
}

impl Default for LossModel {
    fn default() -> Self {
        LossModel { q_l: 39_000.0, q_c: 15_100.0, temperature: 0.020 }
    }
}

impl LossModel {
    pub fn new(q_l: f64, q_c: f64, temperature: f64) -> Result<Self> {
        let m = LossModel { q_l, q_c, temperature };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_l > 0.0 && self.q_c > 0.0) {
            return Err(domain("quality factors must be positive"));
        }
        if !(self.temperature >= 0.0) {
            return Err(domain("temperature must be non-negative"));
        }
        Ok(())
    }
}

/// Per-channel rates in s⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateResult {
    pub gamma_ind: f64,
    pub gamma_cap: f64,
    pub gamma_purcell: f64,
    pub t1_total: f64,
}

impl RateResult {
    pub fn new(gamma_ind: f64, gamma_cap: f64, gamma_purcell: f64) -> Self {
        let total = gamma_ind + gamma_cap + gamma_purcell;
        RateResult { gamma_ind, gamma_cap, gamma_purcell, t1_total: 1.0 / total }
    }

    pub fn total_rate(&self) -> f64 {
        self.gamma_ind + self.gamma_cap + self.gamma_purcell
    }

    pub fn t1_ind(&self) -> f64 {
        1.0 / self.gamma_ind
    }

    pub fn t1_cap(&self) -> f64 {
        1.0 / self.gamma_cap
    }

    pub fn t1_purcell(&self) -> f64 {
        1.0 / self.gamma_purcell
    }
}

/// coth(hf/2k_BT) + 1, equal to 2 at T = 0.
pub fn thermal_factor(freq_ghz: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        return 2.0;
    }
    let x = freq_ghz / (2.0 * units::thermal_energy_ghz(temperature));
    // coth x = 1 + 2/(e^{2x} − 1), accurate for both small and large x
    2.0 + 2.0 / (2.0 * x).exp_m1()
}

fn check_frequency(omega_q: f64) -> Result<()> {
    if !(omega_q > 0.0) {
        return Err(domain(format!("qubit frequency must be positive, got {omega_q}")));
    }
    Ok(())
}

/// Γ_ind = (E_L/ħQ_L)·(coth(hf/2k_BT) + 1)·|⟨g₋₁|φ̂|g₀⟩|².
pub fn gamma_inductive(e_l: f64, omega_q: f64, mat_elem_sq: f64, m: &LossModel) -> Result<f64> {
    check_frequency(omega_q)?;
    m.validate()?;
    Ok(units::angular(e_l) / m.q_l * thermal_factor(omega_q, m.temperature) * mat_elem_sq)
}

/// Γ_cap = (ħω_q²/8E_C·Q_C)·(coth(hf/2k_BT) + 1)·|⟨g₋₁|φ̂|g₀⟩|².
pub fn gamma_capacitive(e_c: f64, omega_q: f64, mat_elem_sq: f64, m: &LossModel) -> Result<f64> {
    check_frequency(omega_q)?;
    m.validate()?;
    Ok(units::angular(omega_q * omega_q / (8.0 * e_c)) / m.q_c * thermal_factor(omega_q, m.temperature) * mat_elem_sq)
}

/// (g/Δ)²·κ with κ in angular units.
pub fn gamma_purcell(g: f64, delta: f64, kappa: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::Resonant);
    }
    Ok((g / delta).powi(2) * units::angular(kappa))
}

/// Frequency (GHz) where Γ_cap = Γ_ind: √(8·E_C·E_L·Q_C/Q_L).
pub fn crossover_frequency(e_c: f64, e_l: f64, m: &LossModel) -> f64 {
    (8.0 * e_c * e_l * m.q_c / m.q_l).sqrt()
}

/// Equivalent series resistance ω·L/Q_L of the lossy inductor, ohms.
pub fn series_resistance(freq_ghz: f64, inductance: f64, q_l: f64) -> f64 {
    units::angular(freq_ghz) * inductance / q_l
}

/// All three channels for a transition at `omega_q` with phase and charge
/// matrix elements |⟨φ̂⟩|², |⟨n̂⟩|². The resonator couples through g·⟨n̂⟩.
pub fn rates(
    p: &SingleModeParams,
    omega_q: f64,
    phase_sq: f64,
    charge_sq: f64,
    m: &LossModel,
    resonator: Option<&ResonatorParams>,
) -> Result<RateResult> {
    let gi = gamma_inductive(p.e_l, omega_q, phase_sq, m)?;
    let gc = gamma_capacitive(p.e_c, omega_q, phase_sq, m)?;
    let gp = match resonator {
        Some(r) => gamma_purcell(r.g * charge_sq.sqrt(), omega_q - r.omega_r, r.kappa())?,
        None => 0.0,
    };
    Ok(RateResult::new(gi, gc, gp))
}

/// The fluxon transition of a labeled spectrum: ground states of the two
/// lowest-lying wells. Returns (upper index, lower index).
pub fn fluxon_pair(s: &LabeledSpectrum) -> Option<(usize, usize)> {
    let lower = (0..s.len()).find(|&i| s.labels[i].ladder_rank == 0)?;
    let well = s.labels[lower].well_index;
    let upper = (0..s.len()).find(|&i| s.labels[i].ladder_rank == 0 && s.labels[i].well_index != well)?;
    Some((upper, lower))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T1Point {
    pub phi_ext: f64,
    /// Fluxon transition frequency, GHz.
    pub freq: f64,
    /// |⟨φ̂⟩|² of the fluxon pair.
    pub mat_elem_sq: f64,
    /// |⟨n̂⟩|² of the fluxon pair.
    pub charge_elem_sq: f64,
    pub rates: RateResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct T1Curve {
    pub points: Vec<T1Point>,
    /// Flux values that were skipped and why.
    pub skipped: Vec<(f64, String)>,
}

pub const T1_CSV_HEADER: &str = "phi_ext_rad,freq_GHz,t1_total_s,t1_ind_s,t1_cap_s,t1_purcell_s";

impl T1Curve {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{T1_CSV_HEADER}")?;
        for p in &self.points {
            let r = &p.rates;
            writeln!(
                w,
                "{:.12},{:.12},{:.9e},{:.9e},{:.9e},{:.9e}",
                p.phi_ext,
                p.freq,
                r.t1_total,
                r.t1_ind(),
                r.t1_cap(),
                r.t1_purcell()
            )?;
        }
        Ok(())
    }

    /// Point with the longest total T1.
    pub fn peak(&self) -> Option<&T1Point> {
        self.points.iter().max_by(|a, b| a.rates.t1_total.total_cmp(&b.rates.t1_total))
    }
}

/// Fluxon frequency, |⟨φ̂⟩|² and |⟨n̂⟩|² at one flux point.
pub fn fluxon_transition(p: &SingleModeParams, phi_ext: f64, dim: usize) -> Result<(f64, f64, f64)> {
    let s = SpectrumModel::Single { params: *p, dim }.solve(FluxBias::new(phi_ext)?, 8)?;
    let (hi, lo) = fluxon_pair(&s).ok_or_else(|| Error::Numerical("no fluxon transition among the lowest 8 levels".into()))?;
    let freq = s.energies[hi] - s.energies[lo];
    Ok((freq, s.dipole_phi(hi, lo).powi(2), s.dipole_n(hi, lo).powi(2)))
}

pub fn t1_curve(
    p: &SingleModeParams,
    m: &LossModel,
    flux_grid: &[f64],
    resonator: Option<&ResonatorParams>,
    dim: usize,
    exec: Execution,
) -> Result<T1Curve> {
    p.validate()?;
    m.validate()?;
    let results = exec.map(flux_grid, |&phi| {
        let (freq, me, ne) = fluxon_transition(p, phi, dim)?;
        let rates = rates(p, freq, me, ne, m, resonator)?;
        Ok::<_, Error>(T1Point { phi_ext: phi, freq, mat_elem_sq: me, charge_elem_sq: ne, rates })
    });
    let mut curve = T1Curve { points: Vec::new(), skipped: Vec::new() };
    for (r, &phi) in results.into_iter().zip(flux_grid) {
        match r {
            Ok(pt) => curve.points.push(pt),
            Err(e) => curve.skipped.push((phi, e.to_string())),
        }
    }
    Ok(curve)
}

/// A measured lifetime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct T1Sample {
    #[serde(rename = "freq_GHz")]
    pub freq: f64,
    #[serde(rename = "t1_s")]
    pub t1: f64,
    #[serde(rename = "sigma_t1_s", default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QFitReport {
    pub model: LossModel,
    /// log(T1_meas) − log(T1_model) per input point, in input order.
    pub residuals: Vec<f64>,
    /// Covariance of (ln Q_L, ln Q_C).
    pub covariance: [[f64; 2]; 2],
    pub iterations: usize,
    /// Data lie on one side of the crossover, so one Q is poorly constrained.
    pub degenerate: bool,
}

/// Fluxon |⟨φ̂⟩|² as a function of frequency, tabulated on flux ∈ [−π, 0]
/// where the fluxon frequency rises monotonically.
#[derive(Debug, Clone)]
pub struct MatrixElementTable {
    freq: Vec<f64>,
    log_me: Vec<f64>,
}

impl MatrixElementTable {
    pub fn build(p: &SingleModeParams, points: usize, dim: usize, exec: Execution) -> Result<Self> {
        if points < 2 {
            return Err(domain("matrix-element table needs at least 2 points"));
        }
        let grid: Vec<f64> = (0..points).map(|i| -std::f64::consts::PI * (1.0 - i as f64 / (points - 1) as f64)).collect();
        let rows = exec.map(&grid, |&phi| fluxon_transition(p, phi, dim));
        let mut pairs = Vec::with_capacity(points);
        for r in rows {
            let (f, me, _) = r?;
            pairs.push((f, me.max(f64::MIN_POSITIVE).ln()));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        Ok(MatrixElementTable { freq: pairs.iter().map(|p| p.0).collect(), log_me: pairs.iter().map(|p| p.1).collect() })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.freq[0], *self.freq.last().expect("non-empty"))
    }

    pub fn at(&self, freq: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(freq >= lo && freq <= hi) {
            return Err(domain(format!("frequency {freq} GHz outside tabulated fluxon range [{lo:.4}, {hi:.4}]")));
        }
        let j = self.freq.partition_point(|&f| f < freq).clamp(1, self.freq.len() - 1);
        let t = (freq - self.freq[j - 1]) / (self.freq[j] - self.freq[j - 1]);
        Ok((self.log_me[j - 1] + t * (self.log_me[j] - self.log_me[j - 1])).exp())
    }
}

/// Least squares on log T1 over (ln Q_L, ln Q_C) at fixed temperature,
/// solved by Levenberg–Marquardt with the analytic Jacobian.
pub fn fit_quality_factors(
    data: &[T1Sample],
    p: &SingleModeParams,
    m0: &LossModel,
    table: &MatrixElementTable,
) -> Result<QFitReport> {
    if data.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 lifetimes, got {}", data.len())));
    }
    m0.validate()?;
    // Γ = a/Q_L + b/Q_C with Q-independent a, b per point
    let unit = LossModel { q_l: 1.0, q_c: 1.0, temperature: m0.temperature };
    let mut a = Vec::with_capacity(data.len());
    let mut b = Vec::with_capacity(data.len());
    let mut w = Vec::with_capacity(data.len());
    for d in data {
        if !(d.t1 > 0.0) {
            return Err(Error::Fit(format!("non-positive T1 {}", d.t1)));
        }
        let me = table.at(d.freq)?;
        a.push(gamma_inductive(p.e_l, d.freq, me, &unit)?);
        b.push(gamma_capacitive(p.e_c, d.freq, me, &unit)?);
        // σ(ln T1) ≈ σ_T1/T1
        w.push(match d.sigma {
            Some(s) if s > 0.0 => d.t1 / s,
            _ => 1.0,
        });
    }
    let residuals = |x: [f64; 2]| -> Vec<f64> {
        data.iter()
            .enumerate()
            .map(|(i, d)| w[i] * (d.t1.ln() + (a[i] * (-x[0]).exp() + b[i] * (-x[1]).exp()).ln()))
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut x = [m0.q_l.ln(), m0.q_c.ln()];
    let mut r = residuals(x);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut jtj = [[0.0; 2]; 2];
    for it in 0..500 {
        iterations = it + 1;
        // dr/dx_k = −w·(coefficient_k·e^{−x_k})/Γ
        let mut jtr = [0.0; 2];
        jtj = [[0.0; 2]; 2];
        for i in 0..data.len() {
            let ga = a[i] * (-x[0]).exp();
            let gb = b[i] * (-x[1]).exp();
            let g = ga + gb;
            let row = [-w[i] * ga / g, -w[i] * gb / g];
            for k in 0..2 {
                jtr[k] += row[k] * r[i];
                for l in 0..2 {
                    jtj[k][l] += row[k] * row[l];
                }
            }
        }
        let mut improved = false;
        while lambda < 1e12 {
            let m00 = jtj[0][0] * (1.0 + lambda);
            let m11 = jtj[1][1] * (1.0 + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let dx = [-(m11 * jtr[0] - jtj[0][1] * jtr[1]) / det, -(m00 * jtr[1] - jtj[1][0] * jtr[0]) / det];
            let trial = [x[0] + dx[0], x[1] + dx[1]];
            let rt = residuals(trial);
            let ct = cost(&rt);
            if ct <= c {
                let step = dx[0].abs().max(dx[1].abs());
                x = trial;
                r = rt;
                let gain = c - ct;
                c = ct;
                lambda = (lambda * 0.3).max(1e-12);
                improved = step > 1e-12 && gain > 1e-30 * c.max(1e-300);
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }

    let n = data.len() as f64;
    let s2 = if data.len() > 2 { c / (n - 2.0) } else { 0.0 };
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    let covariance = if det.abs() > 0.0 {
        [[s2 * jtj[1][1] / det, -s2 * jtj[0][1] / det], [-s2 * jtj[1][0] / det, s2 * jtj[0][0] / det]]
    } else {
        [[f64::INFINITY; 2]; 2]
    };
    let model = LossModel { q_l: x[0].exp(), q_c: x[1].exp(), temperature: m0.temperature };
    let fx = crossover_frequency(p.e_c, p.e_l, &model);
    let below = data.iter().filter(|d| d.freq < fx).count();
    let degenerate = below == 0 || below == data.len();
    let residuals = r.iter().zip(&w).map(|(ri, wi)| ri / wi).collect();
    Ok(QFitReport { model, residuals, covariance, iterations, degenerate })
}
