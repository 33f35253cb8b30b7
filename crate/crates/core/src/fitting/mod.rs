//! Spectroscopy datasets, single- and two-mode parameter fits, and synthetic data.

mod dataset;
mod fit;
mod simplex;
mod synth;

pub use dataset::{DataPoint, SpectroscopyDataset, DATASET_CSV_HEADER};
pub use fit::{
    fit_single_mode, fit_two_mode, single_mode_objective, two_mode_objective, FitOptions, FitReport, FittedModel, FluxCalibration, PointResidual, TopologyParam,
};
pub use simplex::{nelder_mead, SimplexOptions, SimplexResult};
pub use synth::{synthesize_spectroscopy, SynthesisConfig};
