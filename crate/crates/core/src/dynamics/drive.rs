use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::levels::LevelSystem;
use crate::error::{domain, Error, Result};
use crate::linalg::CMatrix;

/// Intermediate-level denominators smaller than this (GHz) are dropped from
/// the second-order sums instead of blowing up.
pub const RESONANCE_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveTone {
    #[serde(rename = "freq_GHz")]
    pub frequency: f64,
    #[serde(rename = "amp_GHz")]
    pub amplitude: f64,
    /// Transition the tone is assigned to, e.g. "g0->f0".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

impl DriveTone {
    pub fn new(frequency: f64, amplitude: f64, target: Option<&str>) -> Result<Self> {
        let t = DriveTone { frequency, amplitude, target: target.map(str::to_owned) };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) || !self.frequency.is_finite() {
            return Err(domain("tone frequency must be positive"));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(domain("tone amplitude must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    #[default]
    MultiRotating,
    Lab,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivePlan {
    pub tones: Vec<DriveTone>,
    #[serde(default = "default_level_count")]
    pub level_count: usize,
    #[serde(default)]
    pub frame: Frame,
}

fn default_level_count() -> usize {
    8
}

impl DrivePlan {
    pub fn new(tones: Vec<DriveTone>) -> Self {
        DrivePlan { tones, level_count: default_level_count(), frame: Frame::MultiRotating }
    }

    pub fn validate(&self) -> Result<()> {
        if self.level_count < 2 {
            return Err(domain("level_count must be at least 2"));
        }
        self.tones.iter().try_for_each(DriveTone::validate)
    }
}

/// A tone resolved against a level system: it drives `lower -> upper` with
/// `photons` quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub tone: usize,
    pub lower: usize,
    pub upper: usize,
    pub photons: u32,
}

impl Assignment {
    /// photons·ω − (E_upper − E_lower), GHz.
    pub fn detuning(&self, sys: &LevelSystem, plan: &DrivePlan) -> f64 {
        self.photons as f64 * plan.tones[self.tone].frequency - sys.gap(self.lower, self.upper)
    }
}

/// Resolves each tone to a level pair. Without a target, the tone is given to
/// the pair whose gap lies closest to an integer multiple (1 or 2) of ω,
/// preferring strong charge coupling among one-photon candidates.
pub fn assign_tones(sys: &LevelSystem, plan: &DrivePlan) -> Result<Vec<Assignment>> {
    plan.validate()?;
    let mut out: Vec<Assignment> = Vec::with_capacity(plan.tones.len());
    for (k, tone) in plan.tones.iter().enumerate() {
        let (a, b) = match &tone.target {
            Some(t) => sys.pair(t)?,
            None => infer_pair(sys, tone.frequency)?,
        };
        if a == b {
            return Err(Error::Plan(format!("tone {k} targets a level onto itself")));
        }
        let (lower, upper) = if sys.energies[a] <= sys.energies[b] { (a, b) } else { (b, a) };
        let photons = (sys.gap(lower, upper) / tone.frequency).round();
        if !(1.0..=2.0).contains(&photons) {
            return Err(Error::Plan(format!(
                "tone {k} at {:.4} GHz would need {photons} photons for {}->{}; only one- and two-photon tones are supported",
                tone.frequency, sys.labels[lower], sys.labels[upper]
            )));
        }
        if let Some(prev) = out.iter().find(|p| (p.lower, p.upper) == (lower, upper)) {
            return Err(Error::Plan(format!(
                "tones {} and {k} both drive {}->{}",
                prev.tone, sys.labels[lower], sys.labels[upper]
            )));
        }
        out.push(Assignment { tone: k, lower, upper, photons: photons as u32 });
    }
    Ok(out)
}

fn infer_pair(sys: &LevelSystem, freq: f64) -> Result<(usize, usize)> {
    let d = sys.dim();
    let mut best: Option<(f64, usize, usize)> = None;
    for a in 0..d {
        for b in a + 1..d {
            let gap = sys.gap(a, b).abs();
            for p in 1..=2 {
                let miss = (gap - p as f64 * freq).abs();
                if best.map_or(true, |(m, _, _)| miss < m) {
                    best = Some((miss, a, b));
                }
            }
        }
    }
    best.map(|(_, a, b)| (a, b)).ok_or_else(|| Error::Plan("no level pair to assign".into()))
}

/// Frame energy of every level. Each connected component of the assignment
/// graph is anchored at its lowest level; unassigned levels sit in their own
/// frame. Returns the cycle as an error if two paths disagree.
pub fn frame_energies(sys: &LevelSystem, plan: &DrivePlan, assign: &[Assignment]) -> Result<Vec<f64>> {
    let d = sys.dim();
    let mut theta: Vec<Option<f64>> = vec![None; d];
    let mut via: Vec<Option<usize>> = vec![None; d];
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| sys.energies[a].total_cmp(&sys.energies[b]));
    for &root in &order {
        if theta[root].is_some() {
            continue;
        }
        theta[root] = Some(sys.energies[root]);
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for e in assign.iter().filter(|e| e.lower == a || e.upper == a) {
                let step = e.photons as f64 * plan.tones[e.tone].frequency;
                let (b, tb) = if e.lower == a {
                    (e.upper, theta[a].unwrap() + step)
                } else {
                    (e.lower, theta[a].unwrap() - step)
                };
                match theta[b] {
                    None => {
                        theta[b] = Some(tb);
                        via[b] = Some(a);
                        queue.push_back(b);
                    }
                    Some(existing) if (existing - tb).abs() > 1e-9 && via[a] != Some(b) => {
                        return Err(Error::Plan(format!(
                            "loop-inconsistent tone assignment around cycle {} (mismatch {:.3e} GHz)",
                            cycle_names(sys, &via, a, b),
                            existing - tb
                        )));
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(theta.into_iter().map(Option::unwrap).collect())
}

fn cycle_names(sys: &LevelSystem, via: &[Option<usize>], a: usize, b: usize) -> String {
    let path = |mut k: usize| {
        let mut p = vec![k];
        while let Some(up) = via[k] {
            p.push(up);
            k = up;
        }
        p
    };
    let pa = path(a);
    let pb = path(b);
    let common = pa.iter().find(|k| pb.contains(k)).copied().unwrap_or(a);
    let mut names: Vec<&str> = pa.iter().take_while(|&&k| k != common).map(|&k| sys.labels[k].as_str()).collect();
    names.push(&sys.labels[common]);
    let back: Vec<&str> = pb.iter().take_while(|&&k| k != common).map(|&k| sys.labels[k].as_str()).collect();
    names.extend(back.into_iter().rev());
    names.push(&sys.labels[a]);
    names.join(" -> ")
}

/// Second-order two-photon matrix element ⟨b|V|a⟩ per unit Ω², GHz⁻¹·GHz².
pub fn two_photon_element(sys: &LevelSystem, a: usize, b: usize, freq: f64) -> Complex64 {
    let n = &sys.charge;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..sys.dim() {
        let d1 = sys.energies[a] + freq - sys.energies[m];
        let d2 = sys.energies[b] - freq - sys.energies[m];
        let mut w = 0.0;
        if d1.abs() > RESONANCE_GUARD {
            w += 1.0 / d1;
        }
        if d2.abs() > RESONANCE_GUARD {
            w += 1.0 / d2;
        }
        acc += n[(b, m)] * n[(m, a)] * w;
    }
    acc / 8.0
}

/// AC Stark shift of every level from a tone of amplitude Ω at ω, including
/// the counter-rotating path.
pub fn stark_shifts(sys: &LevelSystem, amplitude: f64, freq: f64) -> Vec<f64> {
    let d = sys.dim();
    (0..d)
        .map(|k| {
            (0..d)
                .filter(|&m| m != k)
                .map(|m| {
                    let c = (0.5 * amplitude * sys.charge[(k, m)].norm()).powi(2);
                    let mut w = 0.0;
                    for den in [sys.energies[k] - sys.energies[m] + freq, sys.energies[k] - sys.energies[m] - freq] {
                        if den.abs() > RESONANCE_GUARD {
                            w += 1.0 / den;
                        }
                    }
                    c * w
                })
                .sum()
        })
        .collect()
}

/// Time-independent Hamiltonian (GHz) in the frame set by the tone
/// assignment. One-photon tones couple with ½Ω⟨b|n̂|a⟩; two-photon tones are
/// folded into an effective coupling plus Stark shifts.
pub fn effective_hamiltonian(sys: &LevelSystem, plan: &DrivePlan) -> Result<CMatrix> {
    if plan.frame != Frame::MultiRotating {
        return Err(Error::Plan("effective Hamiltonian needs the multi-rotating frame".into()));
    }
    let assign = assign_tones(sys, plan)?;
    let theta = frame_energies(sys, plan, &assign)?;
    let d = sys.dim();
    let mut h = CMatrix::zeros(d, d);
    for k in 0..d {
        h[(k, k)] = Complex64::new(sys.energies[k] - theta[k], 0.0);
    }
    for e in &assign {
        let tone = &plan.tones[e.tone];
        let (a, b) = (e.lower, e.upper);
        let v = match e.photons {
            1 => sys.charge[(b, a)] * (0.5 * tone.amplitude),
            _ => {
                for (k, s) in stark_shifts(sys, tone.amplitude, tone.frequency).into_iter().enumerate() {
                    h[(k, k)] += s;
                }
                two_photon_element(sys, a, b, tone.frequency) * tone.amplitude.powi(2)
            }
        };
        h[(b, a)] += v;
        h[(a, b)] += v.conj();
    }
    Ok(h)
}
