//! Simulation of a one-step controlled-phase gate where one photonic qubit
//! simultaneously controls several target photonic qubits, each encoded in a
//! pair of opposite-parity states of a microwave cavity coupled to a flux
//! qutrit.
//!
//! The crate layers as follows: [`hilbert`] (Fock-space algebra),
//! [`encoding`] (parity qubits), [`model`] (parameters and Hamiltonians),
//! [`gate`] (exact diagonal gate), [`dynamics`] (integrators), [`ghz`]
//! (GHZ preparation) and [`experiments`] (sweeps, configs, CSV, CLI).

pub type C64 = num_complex::Complex64;

pub mod dynamics;
pub mod encoding;
pub mod error;
pub mod experiments;
pub mod gate;
pub mod ghz;
pub mod hilbert;
pub mod model;

pub use error::{Error, Result};

/// Angular frequency in rad/s for a frequency given in GHz (ω/2π).
pub fn ghz_to_rad_per_s(f_ghz: f64) -> f64 {
    2.0 * std::f64::consts::PI * f_ghz * 1e9
}

/// Inverse of [`ghz_to_rad_per_s`].
pub fn rad_per_s_to_ghz(w: f64) -> f64 {
    w / (2.0 * std::f64::consts::PI * 1e9)
}
