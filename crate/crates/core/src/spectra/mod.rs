//! Diagonalization, well-based state labels, transition catalogs and flux sweeps.

mod catalog;
mod diag;
mod labels;
mod model;
mod sideband;
mod sweep;

pub use catalog::{transition_catalog, CatalogConfig, TransitionKind, TransitionRecord};
pub use diag::{diagonalize, Eigenpairs};
pub use labels::{find_wells, label_states, LabeledSpectrum, StateLabel, Well, DELOCALIZED_THRESHOLD};
pub use model::SpectrumModel;
pub(crate) use catalog::{allowed_lines, Line};
pub use sideband::{qubit_resonator_hamiltonian, sideband_lines};
pub use sweep::{flux_sweep, SweepPoint, SweepResult, SWEEP_CSV_HEADER};
