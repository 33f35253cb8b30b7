//! Driven-dissipative dynamics of a few retained fluxonium levels: rotating
//! frame Hamiltonians for multitone drives, Lindblad evolution and steady
//! states, two-tone population maps and a pulsed T1 protocol.

mod drive;
mod lab;
mod levels;
mod lindblad;
mod map;
mod pulse;

pub use drive::{
    assign_tones, effective_hamiltonian, frame_energies, stark_shifts, two_photon_element, Assignment, DrivePlan, DriveTone,
    Frame, RESONANCE_GUARD,
};
pub use lab::lab_frame_population;
pub use levels::{collapse_from_loss, total_decay_rate, CollapseOp, LevelSystem};
pub use lindblad::{
    angular_scale, evolve, liouvillian, steady_state, DensityState, SteadyState, Trajectory, DEGENERACY_RATIO, MAX_STEP_PHASE,
    MAX_STORED,
};
pub use map::{drive_map, linear_fit, linspace, local_maxima, peak_position, MapSweep, PopulationMap, RidgeScan, MAP_CSV_HEADER};
pub use pulse::{apply_pulses, fit_exponential, pulse_sequence_t1, DecayFit, PulseSpec, PulseT1Result, TRACE_CSV_HEADER};
