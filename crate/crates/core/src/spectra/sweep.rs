use std::io::Write;

use serde::{Deserialize, Serialize};

use super::catalog::{transition_catalog, CatalogConfig, TransitionRecord};
use super::model::SpectrumModel;
use crate::circuit::FluxBias;
use crate::exec::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub phi_ext: f64,
    pub energies: Vec<f64>,
    pub transitions: Vec<TransitionRecord>,
    /// Set when this grid point failed; the sweep continues regardless.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

pub const SWEEP_CSV_HEADER: &str = "phi_ext_rad,from_label,to_label,photon_order,freq_GHz,dipole_n,dipole_phi,kind";

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{SWEEP_CSV_HEADER}")?;
        for p in &self.points {
            for t in &p.transitions {
                writeln!(
                    w,
                    "{:.12},{},{},{},{:.12},{:.6e},{:.6e},{}",
                    p.phi_ext, t.from_label, t.to_label, t.photon_order, t.frequency, t.dipole_n, t.dipole_phi, t.kind
                )?;
            }
        }
        Ok(())
    }
}

/// Transition catalogs over a flux grid, ordered by grid index.
pub fn flux_sweep(
    model: &SpectrumModel,
    flux_grid: &[f64],
    k: usize,
    cfg: &CatalogConfig,
    exec: Execution,
) -> SweepResult {
    let points = exec.map(flux_grid, |&phi| {
        let solved = FluxBias::new(phi).and_then(|flux| model.solve(flux, k));
        match solved {
            Ok(s) => SweepPoint {
                phi_ext: phi,
                transitions: transition_catalog(&s, cfg),
                energies: s.energies,
                error: None,
            },
            Err(e) => SweepPoint { phi_ext: phi, energies: Vec::new(), transitions: Vec::new(), error: Some(e.to_string()) },
        }
    });
    SweepResult { points }
}
