//! Physical constants and the energy/element conversions used everywhere.
//!
//! All Hamiltonians are expressed as H/h in GHz. Circuit elements are in SI
//! units (farads, henries). External flux is the dimensionless phase
//! Φ_ext/φ0 with φ0 = ħ/2e.

use std::f64::consts::PI;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Free electron mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Reduced flux quantum φ0 = ħ/2e, Wb.
pub const REDUCED_FLUX_QUANTUM: f64 = HBAR / (2.0 * ELECTRON_CHARGE);

pub const GHZ: f64 = 1e9;

/// Charging energy e²/2C in GHz.
pub fn charging_energy_ghz(capacitance: f64) -> f64 {
    ELECTRON_CHARGE * ELECTRON_CHARGE / (2.0 * capacitance) / PLANCK / GHZ
}

/// Capacitance (F) with charging energy `e_c` GHz.
pub fn capacitance_from_ec(e_c: f64) -> f64 {
    ELECTRON_CHARGE * ELECTRON_CHARGE / (2.0 * e_c * PLANCK * GHZ)
}

/// Inductive energy φ0²/L in GHz.
pub fn inductive_energy_ghz(inductance: f64) -> f64 {
    REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / inductance / PLANCK / GHZ
}

/// Inductance (H) with inductive energy `e_l` GHz. Also gives L_J from E_J.
pub fn inductance_from_energy(e_l: f64) -> f64 {
    REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / (e_l * PLANCK * GHZ)
}

/// k_B·T / h in GHz.
pub fn thermal_energy_ghz(temperature: f64) -> f64 {
    BOLTZMANN * temperature / PLANCK / GHZ
}

/// Angular frequency (rad/s) of a frequency given in GHz.
pub fn angular(freq_ghz: f64) -> f64 {
    2.0 * PI * freq_ghz * GHZ
}
