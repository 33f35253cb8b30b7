use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const DATASET_CSV_HEADER: &str = "phi_ext_rad,freq_GHz,photon_order,label_hint,weight";

/// One observed spectroscopy line. `freq` is the drive frequency, so an
/// n-photon line sits at gap/n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    #[serde(rename = "phi_ext_rad")]
    pub phi_ext: f64,
    #[serde(rename = "freq_GHz")]
    pub freq: f64,
    pub photon_order: u32,
    /// Transition label such as "g0->e0"; empty in CSV means none.
    #[serde(default, deserialize_with = "empty_as_none")]
    pub label_hint: Option<String>,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

fn empty_as_none<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    let s: Option<String> = Option::deserialize(d)?;
    Ok(s.map(|s| s.trim().to_string()).filter(|s| !s.is_empty()))
}

impl DataPoint {
    pub fn new(phi_ext: f64, freq: f64, photon_order: u32) -> Self {
        DataPoint { phi_ext, freq, photon_order, label_hint: None, weight: 1.0 }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.label_hint = Some(hint.into());
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    /// Level spacing implied by the tone.
    pub fn gap(&self) -> f64 {
        self.freq * self.photon_order as f64
    }

    /// Parses the hint into (from, to) label strings.
    pub fn hint_pair(&self) -> Option<(&str, &str)> {
        let h = self.label_hint.as_deref()?;
        let (a, b) = h.split_once("->")?;
        Some((a.trim(), b.trim()))
    }

    pub(crate) fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.phi_ext
            .total_cmp(&other.phi_ext)
            .then(self.freq.total_cmp(&other.freq))
            .then(self.photon_order.cmp(&other.photon_order))
            .then(self.label_hint.cmp(&other.label_hint))
            .then(self.weight.total_cmp(&other.weight))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyDataset {
    pub points: Vec<DataPoint>,
}

impl SpectroscopyDataset {
    pub fn new(points: Vec<DataPoint>) -> Result<Self> {
        let d = SpectroscopyDataset { points };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::Schema("dataset is empty".into()));
        }
        for (i, p) in self.points.iter().enumerate() {
            let row = i + 1;
            if !p.phi_ext.is_finite() || !(p.freq.is_finite() && p.freq > 0.0) {
                return Err(Error::Schema(format!("row {row}: flux and frequency must be finite, frequency positive")));
            }
            if p.photon_order < 1 {
                return Err(Error::Schema(format!("row {row}: photon_order must be >= 1")));
            }
            if !(p.weight.is_finite() && p.weight > 0.0) {
                return Err(Error::Schema(format!("row {row}: weight must be positive")));
            }
            if p.label_hint.is_some() && p.hint_pair().is_none() {
                return Err(Error::Schema(format!("row {row}: label hint must look like g0->e0")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Width of the covered flux interval in radians.
    pub fn flux_span(&self) -> f64 {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.phi_ext), hi.max(p.phi_ext)));
        hi - lo
    }

    /// Level-spacing window (min, max) covered by the data.
    pub fn gap_window(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.gap()), hi.max(p.gap())))
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Schema(e.to_string()))?.clone();
        for required in ["phi_ext_rad", "freq_GHz", "photon_order"] {
            if !headers.iter().any(|h| h == required) {
                return Err(Error::Schema(format!("missing column {required}")));
            }
        }
        let points = rdr
            .deserialize()
            .enumerate()
            .map(|(i, r)| r.map_err(|e| Error::Schema(format!("row {}: {e}", i + 1))))
            .collect::<Result<Vec<DataPoint>>>()?;
        Self::new(points)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| Error::Schema(e.to_string());
        w.write_record(DATASET_CSV_HEADER.split(',')).map_err(io)?;
        for p in &self.points {
            w.write_record([
                p.phi_ext.to_string(),
                p.freq.to_string(),
                p.photon_order.to_string(),
                p.label_hint.clone().unwrap_or_default(),
                p.weight.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Schema(e.to_string()))
    }
}
