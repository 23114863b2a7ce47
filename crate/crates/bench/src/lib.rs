//! Shared fixtures for the benchmarks.

use backaction::{CavitySystem, FrequencyGrid, MechanicalParams, OpticalParams};

/// 500 µm, F = 110 000 cavity at 810 nm with the 1128.5 kHz, 72 mg,
/// Q = 760 000 mirror mode.
pub fn reference_system(power: f64, detuning_over_gamma: f64) -> CavitySystem {
    CavitySystem::with_drive(
        OpticalParams::new(500e-6, 110_000.0, 810e-9).expect("valid optics"),
        MechanicalParams::from_frequency_hz(1128.5e3, 72e-6, 760_000.0).expect("valid mode"),
        power,
        detuning_over_gamma,
    )
    .expect("valid drive")
}

/// 2 kHz window from 500 Hz below to 1.5 kHz above the mirror resonance.
pub fn sweep_grid(points: usize) -> FrequencyGrid {
    FrequencyGrid::linear_hz(1128.0e3, 1130.0e3, points).expect("valid grid")
}
