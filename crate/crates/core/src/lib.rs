//! Modelling toolkit for fluxonium qubits shunted by a kinetic-inductance
//! nanowire: Hamiltonians, nanowire normal modes, labelled spectra, loss,
//! driven-dissipative dynamics and spectroscopy fitting.

pub mod circuit;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod fitting;
pub mod linalg;
pub mod loss;
pub mod nanowire;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
pub use exec::Execution;
