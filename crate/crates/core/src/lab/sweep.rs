//! Swept-sine network analyzer.
//!
//! The cavity-length modulation is stepped across the grid; at each point
//! the analyzer reads the coherent signal response `A(Ω)·S_sig` on top of
//! the incoherent thermal floor reduced by the coherent-averaging gain `G`.
//! `S_sig` sits `signal_level_db` above the thermal noise at `Ω_M`, and the
//! trace is normalized to its value 1 kHz above `Ω_M`.

use super::thermal::{BathParams, PsdModel, ThermalModel};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::params::CavitySystem;
use crate::response::amplification_factor;
use crate::spectrum::{SpectrumTrace, SpectrumUnit};

pub const DEFAULT_SIGNAL_LEVEL_DB: f64 = 25.0;
/// Normalization point above the mechanical resonance, Hz.
pub const REFERENCE_OFFSET_HZ: f64 = 1e3;
/// Minimum sweep coverage below and above `Ω_M`, Hz.
pub const COVERAGE_BELOW_HZ: f64 = 500.0;
pub const COVERAGE_ABOVE_HZ: f64 = 1500.0;

/// Normalized swept response on `grid`.
pub fn swept_sine_response(
    system: &CavitySystem,
    bath: &BathParams,
    grid: &FrequencyGrid,
    signal_level_db: f64,
    analyzer_gain: f64,
) -> Result<SpectrumTrace> {
    let omega_m = system.mechanical.omega_m();
    let lo = omega_m - crate::hz_to_rad(COVERAGE_BELOW_HZ);
    let hi = omega_m + crate::hz_to_rad(COVERAGE_ABOVE_HZ);
    if !grid.covers(lo, hi) {
        return Err(Error::GridCoverage(format!(
            "swept sine needs {:.3} kHz to {:.3} kHz",
            crate::rad_to_hz(lo) / 1e3,
            crate::rad_to_hz(hi) / 1e3
        )));
    }
    if !signal_level_db.is_finite() {
        return Err(Error::domain("run.signal_level_db", "must be finite"));
    }
    if !(analyzer_gain.is_finite() && analyzer_gain > 0.0) {
        return Err(Error::domain("lab.analyzer_gain", "must be finite and > 0"));
    }

    let thermal = ThermalModel::new(*system, *bath)?;
    let signal = thermal.psd(omega_m) * 10f64.powf(signal_level_db / 10.0);
    let raw = grid
        .iter()
        .map(|w| Ok(amplification_factor(system, w)? * signal + thermal.psd(w) / analyzer_gain))
        .collect::<Result<Vec<f64>>>()?;
    let raw = SpectrumTrace::new(grid.as_slice().to_vec(), raw, SpectrumUnit::Dimensionless)?;
    let reference = raw
        .value_at(omega_m + crate::hz_to_rad(REFERENCE_OFFSET_HZ))
        .expect("coverage checked above");
    let values = raw.values.iter().map(|v| v / reference).collect();
    SpectrumTrace::new(raw.omega, values, SpectrumUnit::Dimensionless)
}
