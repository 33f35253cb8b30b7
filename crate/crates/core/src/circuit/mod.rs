//! Parameter records, oscillator-basis operators and Hamiltonian assembly.

mod hamiltonian;
mod operators;
mod params;

pub use hamiltonian::{
    build_single_mode_hamiltonian, build_two_mode_hamiltonian, check_single_mode_convergence,
    converged_single_mode, couple_resonator, BasisTag, ConvergenceReport, HamiltonianMatrix,
    TwoModeOperators, DEFAULT_SINGLE_DIM, DEFAULT_TWO_MODE_DIMS,
};
pub use operators::{
    annihilation, number_operator, oscillator_operators, oscillator_wavefunctions, phase_exponential, phase_zpf,
    OscillatorOperators,
};
pub use params::{FluxBias, ResonatorParams, SingleModeParams, TwoModeParams};
