use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::dataset::{DataPoint, SpectroscopyDataset};
use crate::circuit::FluxBias;
use crate::error::{domain, Error, Result};
use crate::spectra::{allowed_lines, CatalogConfig, SpectrumModel};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub levels: usize,
    pub catalog: CatalogConfig,
    /// Tone-frequency band (GHz) a spectrometer would cover.
    pub band: (f64, f64),
    /// Lines weaker than this are treated as unobservable: |n| or |φ| for
    /// one photon, |(n²)_ij| for two.
    pub min_strength: f64,
    pub label_hints: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            levels: 10,
            catalog: CatalogConfig::default(),
            band: (0.5, 20.0),
            min_strength: 0.05,
            label_hints: false,
        }
    }
}

/// Samples observable catalog lines at each flux and adds Gaussian
/// frequency noise. Deterministic for a fixed seed.
pub fn synthesize_spectroscopy(
    model: &SpectrumModel,
    flux_grid: &[f64],
    noise_sigma: f64,
    seed: u64,
    cfg: &SynthesisConfig,
) -> Result<SpectroscopyDataset> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(domain("noise sigma must be finite and non-negative"));
    }
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| domain(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::new();
    for &phi in flux_grid {
        let s = model.solve(FluxBias::new(phi)?, cfg.levels)?;
        let n2 = &s.charge_elements * &s.charge_elements;
        for line in allowed_lines(&s.energies, &s.charge_elements, &s.phase_elements, &cfg.catalog) {
            let (i, j) = (line.from, line.to);
            let strength = match line.order {
                1 => s.charge_elements[(i, j)].norm().max(s.phase_elements[(i, j)].norm()),
                2 => n2[(i, j)].norm(),
                _ => 0.0,
            };
            if strength < cfg.min_strength || line.frequency < cfg.band.0 || line.frequency > cfg.band.1 {
                continue;
            }
            let mut p = DataPoint::new(phi, line.frequency + noise.sample(&mut rng), line.order);
            if cfg.label_hints {
                p = p.with_hint(format!("{}->{}", s.labels[i], s.labels[j]));
            }
            points.push(p);
        }
    }
    if points.is_empty() {
        return Err(Error::Fit("no observable lines in the band".into()));
    }
    SpectroscopyDataset::new(points)
}
