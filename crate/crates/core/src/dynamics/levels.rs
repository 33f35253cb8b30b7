use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::SingleModeParams;
use crate::error::{domain, Result};
use crate::linalg::CMatrix;
use crate::loss::{gamma_capacitive, gamma_inductive, LossModel};
use crate::spectra::LabeledSpectrum;
use crate::units;

/// Retained eigenlevels with their charge and phase matrix elements.
#[derive(Debug, Clone)]
pub struct LevelSystem {
    pub energies: Vec<f64>,
    pub labels: Vec<String>,
    pub charge: CMatrix,
    pub phase: CMatrix,
}

impl LevelSystem {
    pub fn new(energies: Vec<f64>, labels: Vec<String>, charge: CMatrix, phase: CMatrix) -> Result<Self> {
        let d = energies.len();
        if d < 2 {
            return Err(domain("need at least two levels"));
        }
        if labels.len() != d || charge.shape() != (d, d) || phase.shape() != (d, d) {
            return Err(domain("level data dimensions disagree"));
        }
        Ok(LevelSystem { energies, labels, charge, phase })
    }

    /// The lowest `count` labeled states.
    pub fn from_spectrum(s: &LabeledSpectrum, count: usize) -> Result<Self> {
        if count < 2 || count > s.len() {
            return Err(domain(format!("level count {count} outside 2..={}", s.len())));
        }
        Self::new(
            s.energies[..count].to_vec(),
            s.labels[..count].iter().map(|l| l.to_string()).collect(),
            s.charge_elements.view((0, 0), (count, count)).into_owned(),
            s.phase_elements.view((0, 0), (count, count)).into_owned(),
        )
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| domain(format!("level {label} is not among the retained levels {:?}", self.labels)))
    }

    /// Resolves "a->b" into level indices.
    pub fn pair(&self, spec: &str) -> Result<(usize, usize)> {
        let (a, b) = spec.split_once("->").ok_or_else(|| domain(format!("transition {spec:?} is not of the form a->b")))?;
        Ok((self.index_of(a.trim())?, self.index_of(b.trim())?))
    }

    pub fn gap(&self, a: usize, b: usize) -> f64 {
        self.energies[b] - self.energies[a]
    }

    /// Keeps only the listed levels, in the given order.
    pub fn subset(&self, keep: &[usize]) -> Result<Self> {
        let pick = |m: &CMatrix| CMatrix::from_fn(keep.len(), keep.len(), |i, j| m[(keep[i], keep[j])]);
        Self::new(
            keep.iter().map(|&i| self.energies[i]).collect(),
            keep.iter().map(|&i| self.labels[i].clone()).collect(),
            pick(&self.charge),
            pick(&self.phase),
        )
    }
}

/// Incoherent jump |to⟩⟨from| at `rate` (s⁻¹).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapseOp {
    pub from_index: usize,
    pub to_index: usize,
    pub rate: f64,
}

impl CollapseOp {
    pub fn new(from_index: usize, to_index: usize, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) {
            return Err(domain("collapse rate must be non-negative"));
        }
        if from_index == to_index {
            return Err(domain("collapse operator must connect two different levels"));
        }
        Ok(CollapseOp { from_index, to_index, rate })
    }

    pub fn operator(&self, dim: usize) -> CMatrix {
        let mut c = CMatrix::zeros(dim, dim);
        c[(self.to_index, self.from_index)] = Complex64::new(1.0, 0.0);
        c
    }
}

/// Inductive plus capacitive relaxation for every downward pair, using that
/// pair's |⟨i|φ̂|j⟩|². With `thermal`, each channel gets an upward partner at
/// the detailed-balance rate e^{−hf/k_BT}.
pub fn collapse_from_loss(sys: &LevelSystem, p: &SingleModeParams, m: &LossModel, thermal: bool) -> Result<Vec<CollapseOp>> {
    let d = sys.dim();
    let mut out = Vec::new();
    for hi in 0..d {
        for lo in 0..d {
            let f = sys.energies[hi] - sys.energies[lo];
            if f <= 0.0 {
                continue;
            }
            let me = sys.phase[(hi, lo)].norm_sqr();
            let rate = gamma_inductive(p.e_l, f, me, m)? + gamma_capacitive(p.e_c, f, me, m)?;
            out.push(CollapseOp::new(hi, lo, rate)?);
            if thermal && m.temperature > 0.0 {
                let boltzmann = (-f / units::thermal_energy_ghz(m.temperature)).exp();
                if boltzmann > 0.0 {
                    out.push(CollapseOp::new(lo, hi, rate * boltzmann)?);
                }
            }
        }
    }
    Ok(out)
}

/// Sum of outgoing channel rates of `level`.
pub fn total_decay_rate(collapse: &[CollapseOp], level: usize) -> f64 {
    collapse.iter().filter(|c| c.from_index == level).map(|c| c.rate).sum()
}
