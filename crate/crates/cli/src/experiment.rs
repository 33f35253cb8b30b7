//! JSON configurations for the driven-dynamics commands.

use serde::{Deserialize, Serialize};

use fluxonium::circuit::{FluxBias, SingleModeParams};
use fluxonium::dynamics::{collapse_from_loss, CollapseOp, DrivePlan, DriveTone, LevelSystem, PulseSpec};
use fluxonium::loss::LossModel;
use fluxonium::spectra::SpectrumModel;

use crate::error::{CliError, CliResult};

/// A frequency given outright or relative to a transition of the level system.
#[derive(Debug, Clone, PartialEq)]
pub struct ToneRef {
    /// Transition "a->b"; used for assignment and, without `freq`, for the frequency.
    pub target: Option<String>,
    pub freq: Option<f64>,
    pub photons: u32,
    pub detuning: f64,
}

fn one() -> u32 {
    1
}

impl ToneRef {
    pub fn frequency(&self, sys: &LevelSystem) -> CliResult<f64> {
        if let Some(f) = self.freq {
            return Ok(f + self.detuning);
        }
        let target = self.target.as_deref().ok_or_else(|| CliError::config("tone needs freq_GHz or target"))?;
        if self.photons == 0 {
            return Err(CliError::config("photons must be at least 1"));
        }
        let (a, b) = sys.pair(target)?;
        Ok(sys.gap(a, b).abs() / self.photons as f64 + self.detuning)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub from: String,
    pub to: String,
    pub rate_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollapseSpec {
    /// Derive downward channels from the device loss model.
    #[serde(default = "yes")]
    pub from_loss: bool,
    /// Add upward channels in detailed balance at the loss-model temperature.
    #[serde(default)]
    pub thermal: bool,
    #[serde(default)]
    pub extra: Vec<ChannelSpec>,
}

fn yes() -> bool {
    true
}

impl Default for CollapseSpec {
    fn default() -> Self {
        CollapseSpec { from_loss: true, thermal: false, extra: Vec::new() }
    }
}

impl CollapseSpec {
    pub fn build(&self, sys: &LevelSystem, p: &SingleModeParams, m: &LossModel) -> CliResult<Vec<CollapseOp>> {
        let mut ops = if self.from_loss { collapse_from_loss(sys, p, m, self.thermal)? } else { Vec::new() };
        for c in &self.extra {
            ops.push(CollapseOp::new(sys.index_of(&c.from)?, sys.index_of(&c.to)?, c.rate_per_s)?);
        }
        Ok(ops)
    }
}

fn eight() -> usize {
    8
}

/// Labeled level system at one flux point.
pub fn level_system(p: SingleModeParams, dim: usize, phi_ext: f64, levels: usize) -> CliResult<LevelSystem> {
    let s = SpectrumModel::Single { params: p, dim }.solve(FluxBias::new(phi_ext)?, levels)?;
    Ok(LevelSystem::from_spectrum(&s, levels)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneSpec {
    #[serde(default)]
    pub target: Option<String>,
    #[serde(rename = "freq_GHz", default)]
    pub freq: Option<f64>,
    #[serde(default = "one")]
    pub photons: u32,
    #[serde(rename = "detuning_GHz", default)]
    pub detuning: f64,
    #[serde(rename = "amp_GHz")]
    pub amplitude: f64,
}

impl ToneSpec {
    pub fn tone(&self) -> ToneRef {
        ToneRef { target: self.target.clone(), freq: self.freq, photons: self.photons, detuning: self.detuning }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub tone: usize,
    /// Defaults to the tone's own frequency.
    #[serde(rename = "center_GHz", default)]
    pub center: Option<f64>,
    #[serde(rename = "span_GHz")]
    pub span: f64,
    #[serde(default = "forty_one")]
    pub points: usize,
}

fn forty_one() -> usize {
    41
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveMapConfig {
    pub phi_ext_rad: f64,
    #[serde(default = "eight")]
    pub levels: usize,
    pub tones: Vec<ToneSpec>,
    /// Row axis then column axis.
    pub sweep: [AxisSpec; 2],
    /// Level whose steady-state population is mapped.
    pub target: String,
    #[serde(default)]
    pub collapse: CollapseSpec,
}

impl DriveMapConfig {
    pub fn plan(&self, sys: &LevelSystem) -> CliResult<DrivePlan> {
        let tones = self
            .tones
            .iter()
            .map(|t| Ok(DriveTone::new(t.tone().frequency(sys)?, t.amplitude, t.target.as_deref())?))
            .collect::<CliResult<Vec<_>>>()?;
        let mut plan = DrivePlan::new(tones);
        plan.level_count = self.levels;
        plan.validate()?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub target: String,
    #[serde(rename = "carrier_GHz", default)]
    pub carrier: Option<f64>,
    #[serde(default = "one")]
    pub photons: u32,
    #[serde(rename = "detuning_GHz", default)]
    pub detuning: f64,
    pub sigma_s: f64,
    #[serde(default = "pi")]
    pub area: f64,
    #[serde(default = "four")]
    pub truncation: f64,
}

fn pi() -> f64 {
    std::f64::consts::PI
}

fn four() -> f64 {
    4.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaitGrid {
    pub start_s: f64,
    pub stop_s: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseT1Config {
    pub phi_ext_rad: f64,
    #[serde(default = "eight")]
    pub levels: usize,
    pub pulses: Vec<PulseConfig>,
    pub readout: String,
    pub wait: WaitGrid,
    #[serde(default)]
    pub fit_from_s: Option<f64>,
    #[serde(default)]
    pub collapse: CollapseSpec,
}

impl PulseT1Config {
    pub fn pulses(&self, sys: &LevelSystem) -> CliResult<Vec<PulseSpec>> {
        self.pulses
            .iter()
            .map(|p| {
                let carrier =
                    ToneRef { target: Some(p.target.clone()), freq: p.carrier, photons: p.photons, detuning: p.detuning };
                let spec = PulseSpec {
                    sigma: p.sigma_s,
                    carrier: carrier.frequency(sys)?,
                    area: p.area,
                    truncation: p.truncation,
                    target: p.target.clone(),
                };
                spec.validate()?;
                Ok(spec)
            })
            .collect()
    }
}
