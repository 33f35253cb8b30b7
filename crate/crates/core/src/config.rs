//! Device description files (JSON).
//!
//! ```json
//! {
//!   "name": "device-1",
//!   "single_mode": { "E_C_GHz": 0.89, "E_L_GHz": 1.37, "E_J_GHz": 10.95 },
//!   "loss": { "Q_L": 39000, "Q_C": 15100, "temperature_K": 0.02 }
//! }
//! ```
//!
//! `two_mode`, `geometry` and `resonator` are optional sections; at least one
//! of `single_mode` and `two_mode` must be present.

use serde::{Deserialize, Serialize};

use crate::circuit::{ResonatorParams, SingleModeParams, DEFAULT_SINGLE_DIM, DEFAULT_TWO_MODE_DIMS};
use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::nanowire::{sheet_density_from_inductance, two_mode_from_topology, CircuitTopology, NanowireGeometry};
use crate::spectra::SpectrumModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoModeSpec {
    pub topology: CircuitTopology,
    #[serde(rename = "E_J_GHz")]
    pub e_j: f64,
    #[serde(default = "default_two_mode_dims")]
    pub dims: (usize, usize),
}

fn default_two_mode_dims() -> (usize, usize) {
    DEFAULT_TWO_MODE_DIMS
}

fn default_dim() -> usize {
    DEFAULT_SINGLE_DIM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub single_mode: Option<SingleModeParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_mode: Option<TwoModeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<NanowireGeometry>,
    #[serde(default)]
    pub loss: LossModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonator: Option<ResonatorParams>,
    /// Oscillator basis size for the single-mode model.
    #[serde(default = "default_dim")]
    pub basis_dim: usize,
}

impl DeviceConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let d: DeviceConfig = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("device config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.single_mode.is_none() && self.two_mode.is_none() {
            return Err(Error::Schema("device needs a single_mode or two_mode section".into()));
        }
        if let Some(p) = &self.single_mode {
            p.validate()?;
        }
        if let Some(t) = &self.two_mode {
            t.topology.validate()?;
            if !(t.e_j > 0.0) {
                return Err(Error::Schema("two_mode.E_J_GHz must be positive".into()));
            }
        }
        if let Some(g) = &self.geometry {
            g.validate()?;
        }
        if let Some(r) = &self.resonator {
            r.validate()?;
        }
        self.loss.validate()
    }

    pub fn single(&self) -> Result<SingleModeParams> {
        self.single_mode.ok_or_else(|| Error::Schema("device has no single_mode section".into()))
    }

    pub fn two_mode_spec(&self) -> Result<TwoModeSpec> {
        self.two_mode.ok_or_else(|| Error::Schema("device has no two_mode section".into()))
    }

    pub fn single_model(&self) -> Result<SpectrumModel> {
        Ok(SpectrumModel::Single { params: self.single()?, dim: self.basis_dim })
    }

    pub fn two_mode_model(&self) -> Result<SpectrumModel> {
        let t = self.two_mode_spec()?;
        Ok(SpectrumModel::TwoMode { params: two_mode_from_topology(&t.topology, t.e_j)?, dims: t.dims })
    }

    /// Single-mode if available, else the two-mode pipeline.
    pub fn default_model(&self) -> Result<SpectrumModel> {
        if self.single_mode.is_some() {
            self.single_model()
        } else {
            self.two_mode_model()
        }
    }

    /// Built-in descriptions of the three measured devices.
    pub fn preset(name: &str) -> Option<Self> {
        let base = |name: &str, p: SingleModeParams| DeviceConfig {
            name: name.to_string(),
            single_mode: Some(p),
            two_mode: None,
            geometry: None,
            loss: LossModel::default(),
            resonator: None,
            basis_dim: DEFAULT_SINGLE_DIM,
        };
        let wire = |length: f64, width: f64, l_k: f64| {
            let g = NanowireGeometry::new(length, width, 15e-9, None).expect("valid geometry");
            NanowireGeometry { n_s: sheet_density_from_inductance(l_k, &g).ok(), ..g }
        };
        match name {
            "device-1" => Some(DeviceConfig {
                two_mode: Some(TwoModeSpec { topology: CircuitTopology::device1(), e_j: 10.95, dims: DEFAULT_TWO_MODE_DIMS }),
                geometry: Some(wire(730e-6, 110e-9, 121e-9)),
                ..base(name, SingleModeParams::device1())
            }),
            "device-2" => Some(DeviceConfig {
                geometry: Some(wire(730e-6, 40e-9, 314e-9)),
                ..base(name, SingleModeParams::device2())
            }),
            "device-3" => Some(base(name, SingleModeParams::device3())),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in ["device-1", "device-2", "device-3"] {
            let d = DeviceConfig::preset(name).unwrap();
            assert_eq!(DeviceConfig::from_json(&d.to_json()).unwrap(), d);
        }
    }

    #[test]
    fn unknown_fields_and_empty_devices_rejected() {
        assert!(matches!(DeviceConfig::from_json("{}"), Err(Error::Schema(_))));
        let typo = r#"{"single_mode": {"E_C_GHz": 1, "E_L_GHz": 1, "E_J_GHz": 1}, "los": {}}"#;
        assert!(matches!(DeviceConfig::from_json(typo), Err(Error::Schema(_))));
        let ok = r#"{"single_mode": {"E_C_GHz": 1, "E_L_GHz": 1, "E_J_GHz": 1}}"#;
        let d = DeviceConfig::from_json(ok).unwrap();
        assert_eq!(d.loss, LossModel::default());
        assert_eq!(d.basis_dim, DEFAULT_SINGLE_DIM);
    }
}
