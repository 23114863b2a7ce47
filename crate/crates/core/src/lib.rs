//! Frequency-domain model of radiation-pressure back-action in a detuned
//! single-port optomechanical cavity.
//!
//! The crate is organised bottom-up:
//!
//! * [`params`] holds the optical, mechanical and drive parameters and the
//!   derived cavity quantities every other module consumes.
//! * [`response`] computes bare and effective mechanical susceptibilities,
//!   the back-action spring constant and the signal amplification factor.
//! * [`noise`] builds quantum-limited noise budgets, the standard quantum
//!   limit and equivalent-signal sensitivity curves, including the
//!   finite-cavity-bandwidth corrections.
//! * [`lab`] emulates the three-step measurement protocol: thermal-noise
//!   spectra, a swept-sine network analyzer and Lorentzian fits.
//!
//! All frequencies are angular (rad/s) and all quantities SI. Spectral
//! densities are one-sided and expressed per hertz.

pub mod constants;
pub mod error;
pub mod grid;
pub mod io;
pub mod lab;
pub mod noise;
pub mod params;
pub mod response;
pub mod spectrum;

pub use error::{Error, Result};
pub use grid::FrequencyGrid;
pub use noise::{
    FiniteBandwidthFactors, NoiseModel, QuantumNoiseBudget, SensitivityCurve, SqlReference,
};
pub use params::{CavitySystem, DriveState, MechanicalParams, OpticalParams};
pub use response::EffectiveModeParams;
pub use spectrum::{SpectrumTrace, SpectrumUnit};

pub use num_complex::Complex64;

/// Converts an ordinary frequency in hertz to angular frequency.
#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    std::f64::consts::TAU * f
}

/// Converts an angular frequency to ordinary frequency in hertz.
#[inline]
pub fn rad_to_hz(omega: f64) -> f64 {
    omega / std::f64::consts::TAU
}
