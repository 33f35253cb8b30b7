use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::units;

/// Single-mode fluxonium energies in GHz: H/h = 4·E_C·n² + ½·E_L·φ² − E_J·cos(φ + φ_ext).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleModeParams {
    #[serde(rename = "E_C_GHz")]
    pub e_c: f64,
    #[serde(rename = "E_L_GHz")]
    pub e_l: f64,
    #[serde(rename = "E_J_GHz")]
    pub e_j: f64,
}

impl SingleModeParams {
    /// E_J = 0 is accepted as the harmonic limit.
    pub fn new(e_c: f64, e_l: f64, e_j: f64) -> Result<Self> {
        let p = SingleModeParams { e_c, e_l, e_j };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_c > 0.0 && self.e_c.is_finite()) {
            return Err(domain(format!("E_C must be positive, got {}", self.e_c)));
        }
        if !(self.e_l > 0.0 && self.e_l.is_finite()) {
            return Err(domain(format!("E_L must be positive, got {}", self.e_l)));
        }
        if !(self.e_j >= 0.0 && (self.e_j / self.e_c).is_finite()) {
            return Err(domain(format!("E_J must be non-negative, got {}", self.e_j)));
        }
        Ok(())
    }

    /// Harmonic frequency √(8·E_C·E_L) in GHz.
    pub fn plasma_frequency(&self) -> f64 {
        (8.0 * self.e_c * self.e_l).sqrt()
    }

    pub fn device1() -> Self {
        SingleModeParams { e_c: 0.89, e_l: 1.37, e_j: 10.95 }
    }

    pub fn device2() -> Self {
        SingleModeParams { e_c: 0.56, e_l: 0.52, e_j: 16.16 }
    }

    pub fn device3() -> Self {
        SingleModeParams { e_c: 1.90, e_l: 0.53, e_j: 5.90 }
    }
}

/// Effective two-mode circuit: two quadratic modes whose flux coordinates sum
/// to the junction phase, bilinear −φ₀φ₁/L_J and the exact junction cosine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeParams {
    #[serde(rename = "C_eff_F")]
    pub c_eff: [f64; 2],
    #[serde(rename = "L_eff_H")]
    pub l_eff: [f64; 2],
    /// Offset charges in units of 2e.
    #[serde(rename = "q_offset_2e")]
    pub q_offset: [f64; 2],
    #[serde(rename = "E_J_GHz")]
    pub e_j: f64,
    #[serde(rename = "L_J_H")]
    pub l_j: f64,
}

impl TwoModeParams {
    pub fn new(c_eff: [f64; 2], l_eff: [f64; 2], q_offset: [f64; 2], e_j: f64) -> Result<Self> {
        if !(e_j > 0.0 && e_j.is_finite()) {
            return Err(domain(format!("E_J must be positive, got {e_j}")));
        }
        let p = TwoModeParams { c_eff, l_eff, q_offset, e_j, l_j: units::inductance_from_energy(e_j) };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..2 {
            if !(self.c_eff[i] > 0.0 && self.c_eff[i].is_finite()) {
                return Err(domain(format!("C_eff[{i}] must be positive, got {}", self.c_eff[i])));
            }
            if !(self.l_eff[i] > 0.0 && self.l_eff[i].is_finite()) {
                return Err(domain(format!("L_eff[{i}] must be positive, got {}", self.l_eff[i])));
            }
            if !self.q_offset[i].is_finite() {
                return Err(domain("offset charge must be finite"));
            }
        }
        let expect = units::inductance_from_energy(self.e_j);
        if ((self.l_j - expect) / expect).abs() > 1e-12 {
            return Err(domain(format!("L_J = {} inconsistent with E_J (expected {expect})", self.l_j)));
        }
        Ok(())
    }

    pub fn e_c(&self, mode: usize) -> f64 {
        units::charging_energy_ghz(self.c_eff[mode])
    }

    pub fn e_l(&self, mode: usize) -> f64 {
        units::inductive_energy_ghz(self.l_eff[mode])
    }

    /// Linearized normal-mode frequency (GHz) of `mode`, junction expanded to
    /// second order about zero phase.
    pub fn linear_frequency(&self, mode: usize) -> f64 {
        (8.0 * self.e_c(mode) * (self.e_l(mode) + self.e_j)).sqrt()
    }
}

/// External flux as the phase Φ_ext/φ0 in radians.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FluxBias {
    pub phi_ext: f64,
}

impl FluxBias {
    pub fn new(phi_ext: f64) -> Result<Self> {
        if !phi_ext.is_finite() {
            return Err(domain("flux must be finite"));
        }
        Ok(FluxBias { phi_ext })
    }

    pub fn zero() -> Self {
        FluxBias { phi_ext: 0.0 }
    }

    /// Flux given as a multiple of π, e.g. `from_pi(-0.46)`.
    pub fn from_pi(fraction: f64) -> Self {
        FluxBias { phi_ext: fraction * PI }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    #[serde(rename = "omega_r_GHz")]
    pub omega_r: f64,
    #[serde(rename = "Q_loaded")]
    pub q_loaded: f64,
    #[serde(rename = "g_GHz")]
    pub g: f64,
}

impl ResonatorParams {
    pub fn new(omega_r: f64, q_loaded: f64, g: f64) -> Result<Self> {
        let r = ResonatorParams { omega_r, q_loaded, g };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_r > 0.0) {
            return Err(domain("resonator frequency must be positive"));
        }
        if !(self.q_loaded > 1.0) {
            return Err(domain("loaded Q must exceed 1"));
        }
        if !self.g.is_finite() {
            return Err(domain("coupling must be finite"));
        }
        Ok(())
    }

    /// Linewidth κ = ω_r/Q in GHz (same frequency convention as ω_r).
    pub fn kappa(&self) -> f64 {
        self.omega_r / self.q_loaded
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn device1_resonator_linewidth() {
        let r = ResonatorParams::new(6.08, 8400.0, 0.05).unwrap();
        assert!((r.kappa() * 1e6 - 723.8).abs() < 0.05, "{} kHz", r.kappa() * 1e6);
    }

    #[test]
    fn rejects_bad_records() {
        assert!(SingleModeParams::new(0.0, 1.0, 1.0).is_err());
        assert!(SingleModeParams::new(1.0, -1.0, 1.0).is_err());
        assert!(SingleModeParams::new(1.0, 1.0, 0.0).is_ok());
        assert!(TwoModeParams::new([1e-15, 1e-15], [1e-7, -1e-9], [0.0; 2], 5.0).is_err());
        assert!(ResonatorParams::new(6.0, 1.0, 0.1).is_err());
        let mut p = TwoModeParams::new([1e-15, 1e-15], [1e-7, 1e-9], [0.0; 2], 5.0).unwrap();
        p.l_j *= 1.0 + 1e-9;
        assert!(p.validate().is_err());
    }

    #[test]
    fn json_keys_carry_units() {
        let s = serde_json::to_string(&SingleModeParams::device1()).unwrap();
        assert!(s.contains("\"E_C_GHz\":0.89"));
        let p = TwoModeParams::new([2e-14, 3e-15], [1.2e-7, 1e-8], [0.0; 2], 10.95).unwrap();
        let back: TwoModeParams = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back);
    }
}
