use serde::{Deserialize, Serialize};
use std::fmt;

use super::labels::{LabeledSpectrum, StateLabel};
use crate::linalg::CMatrix;
use crate::units;

/// Multi-photon lines need a nonvanishing (n̂^p)_ij between retained states.
const SELECTION_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    Plasmon,
    Fluxon,
    Sideband,
    JjMode,
}

impl TransitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransitionKind::Plasmon => "plasmon",
            TransitionKind::Fluxon => "fluxon",
            TransitionKind::Sideband => "sideband",
            TransitionKind::JjMode => "jj_mode",
        }
    }
}

impl fmt::Display for TransitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionRecord {
    pub from_label: StateLabel,
    pub to_label: StateLabel,
    pub from_index: usize,
    pub to_index: usize,
    /// Tone frequency in GHz; photon_order·frequency is the level spacing.
    pub frequency: f64,
    pub photon_order: u32,
    pub dipole_n: f64,
    pub dipole_phi: f64,
    pub kind: TransitionKind,
    /// Resonator photon-number change for sideband lines, 0 otherwise.
    pub resonator_change: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatalogConfig {
    pub max_photon: u32,
    /// Kelvin; initial states within `thermal_window`·k_B·T of the ground state are included.
    pub temperature: f64,
    pub thermal_window: f64,
    pub include_thermal: bool,
}

impl Default for CatalogConfig {
    fn default() -> Self {
        CatalogConfig { max_photon: 2, temperature: 0.020, thermal_window: 3.0, include_thermal: true }
    }
}

impl CatalogConfig {
    pub fn with_max_photon(max_photon: u32) -> Self {
        CatalogConfig { max_photon, ..Default::default() }
    }

    pub(crate) fn initial_states(&self, energies: &[f64]) -> Vec<usize> {
        if energies.is_empty() {
            return Vec::new();
        }
        if !self.include_thermal {
            return vec![0];
        }
        let window = self.thermal_window * units::thermal_energy_ghz(self.temperature);
        (0..energies.len()).filter(|&i| i == 0 || energies[i] - energies[0] <= window).collect()
    }
}

/// Upward transitions from the ground state and thermally reachable states,
/// one record per allowed photon order.
pub fn transition_catalog(s: &LabeledSpectrum, cfg: &CatalogConfig) -> Vec<TransitionRecord> {
    allowed_lines(&s.energies, &s.charge_elements, &s.phase_elements, cfg)
        .into_iter()
        .map(|l| TransitionRecord {
            from_label: s.labels[l.from],
            to_label: s.labels[l.to],
            from_index: l.from,
            to_index: l.to,
            frequency: l.frequency,
            photon_order: l.order,
            dipole_n: s.dipole_n(l.from, l.to),
            dipole_phi: s.dipole_phi(l.from, l.to),
            kind: classify(s, l.from, l.to),
            resonator_change: 0,
        })
        .collect()
}

/// An allowed line before labels are attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Line {
    pub from: usize,
    pub to: usize,
    pub order: u32,
    pub frequency: f64,
}

/// Selection-rule-filtered lines from the initial states, in catalog order.
pub(crate) fn allowed_lines(energies: &[f64], charge: &CMatrix, phase: &CMatrix, cfg: &CatalogConfig) -> Vec<Line> {
    let k = energies.len();
    let powers = charge_powers(charge, cfg.max_photon);
    let mut out = Vec::new();
    for i in cfg.initial_states(energies) {
        for j in 0..k {
            let gap = energies[j] - energies[i];
            if gap <= 0.0 {
                continue;
            }
            for (p, np) in powers.iter().enumerate() {
                let order = p as u32 + 1;
                let allowed = if order == 1 {
                    charge[(i, j)].norm().max(phase[(i, j)].norm()) > SELECTION_FLOOR
                } else {
                    np[(i, j)].norm() > SELECTION_FLOOR
                };
                if allowed {
                    out.push(Line { from: i, to: j, order, frequency: gap / order as f64 });
                }
            }
        }
    }
    out
}

fn classify(s: &LabeledSpectrum, i: usize, j: usize) -> TransitionKind {
    if let Some(n1) = &s.mode1_occupation {
        if (n1[j] - n1[i]).abs() >= 0.5 {
            return TransitionKind::JjMode;
        }
    }
    if s.labels[i].well_index == s.labels[j].well_index {
        TransitionKind::Plasmon
    } else {
        TransitionKind::Fluxon
    }
}

fn charge_powers(n: &CMatrix, max_photon: u32) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::with_capacity(max_photon as usize);
    for p in 0..max_photon as usize {
        let next = if p == 0 { n.clone() } else { &out[p - 1] * n };
        out.push(next);
    }
    out
}
