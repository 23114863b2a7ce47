//! Physical parameters of the cavity, the mirror mode and the optical drive.
//!
//! Detuning convention: the mean detuning `ψ̄` is a round-trip phase offset,
//! handled in units of the cavity damping rate `γ`. Negative values are
//! red-detuned (cooling side): they soften the optical spring and add
//! optical damping.

use num_complex::Complex64;

use crate::constants::{HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Largest cavity damping rate for which the small-`γ` cavity model holds.
pub const MAX_CAVITY_DAMPING: f64 = 0.01;

fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::domain(name, format!("must be finite and > 0, got {value}")))
    }
}

/// Single-port Fabry-Perot cavity with a lossless moving end mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalParams {
    length: f64,
    finesse: f64,
    wavelength: f64,
    gamma: f64,
    tau: f64,
    cavity_bandwidth: f64,
    wavenumber: f64,
}

impl OpticalParams {
    /// Derives the cavity rates from length (m), finesse and wavelength (m).
    ///
    /// `γ = π/F`, `τ = 2L/c` (round trip), `Ω_cav = γ/τ`, `k = 2π/λ`.
    pub fn new(length: f64, finesse: f64, wavelength: f64) -> Result<Self> {
        let length = require_positive("cavity.length_m", length)?;
        let finesse = require_positive("cavity.finesse", finesse)?;
        let wavelength = require_positive("cavity.wavelength_m", wavelength)?;

        let gamma = std::f64::consts::PI / finesse;
        if gamma >= MAX_CAVITY_DAMPING {
            return Err(Error::ModelValidity(format!(
                "cavity damping γ = π/F = {gamma:.4e} must be below {MAX_CAVITY_DAMPING} \
                 (finesse {finesse} too low)"
            )));
        }
        let tau = 2.0 * length / SPEED_OF_LIGHT;
        Ok(OpticalParams {
            length,
            finesse,
            wavelength,
            gamma,
            tau,
            cavity_bandwidth: gamma / tau,
            wavenumber: std::f64::consts::TAU / wavelength,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn finesse(&self) -> f64 {
        self.finesse
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Cavity damping rate `γ` (dimensionless, per round trip).
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Round-trip storage time `τ`, s.
    pub fn storage_time(&self) -> f64 {
        self.tau
    }

    /// Cavity bandwidth `Ω_cav`, rad/s.
    pub fn cavity_bandwidth(&self) -> f64 {
        self.cavity_bandwidth
    }

    /// Optical wavenumber `k`, rad/m.
    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    /// Optical angular frequency, rad/s.
    pub fn optical_frequency(&self) -> f64 {
        self.wavenumber * SPEED_OF_LIGHT
    }

    /// `Δ(Ω) = (γ − iΩτ)² + ψ̄²` for an absolute detuning `ψ̄`.
    pub fn delta(&self, detuning: f64, omega: f64) -> Complex64 {
        let a = Complex64::new(self.gamma, -omega * self.tau);
        a * a + detuning * detuning
    }
}

/// A single mechanical mode of the end mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalParams {
    omega_m: f64,
    mass: f64,
    q: f64,
}

impl MechanicalParams {
    pub fn new(omega_m: f64, mass: f64, q: f64) -> Result<Self> {
        let omega_m = require_positive("mirror.f_m_hz", omega_m)?;
        let mass = require_positive("mirror.mass_kg", mass)?;
        if !(q.is_finite() && q > 1.0) {
            return Err(Error::domain("mirror.q", format!("must satisfy Q > 1, got {q}")));
        }
        Ok(MechanicalParams { omega_m, mass, q })
    }

    pub fn from_frequency_hz(f_m: f64, mass: f64, q: f64) -> Result<Self> {
        Self::new(crate::hz_to_rad(f_m), mass, q)
    }

    /// Resonance `Ω_M`, rad/s.
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Intrinsic damping `Γ = Ω_M/Q`, rad/s.
    pub fn damping(&self) -> f64 {
        self.omega_m / self.q
    }

    /// Same mode with its resonance moved to `omega_m`; `Q` is kept.
    pub fn with_omega_m(&self, omega_m: f64) -> Result<Self> {
        Self::new(omega_m, self.mass, self.q)
    }

    /// `χ⁻¹(Ω) = M(Ω_M² − Ω² − iΩ_MΩ/Q)`, N/m.
    pub fn inverse_susceptibility(&self, omega: f64) -> Complex64 {
        Complex64::new(
            self.mass * (self.omega_m * self.omega_m - omega * omega),
            -self.mass * self.omega_m * omega / self.q,
        )
    }

    /// Lorentzian susceptibility `χ(Ω)`, m/N.
    pub fn susceptibility(&self, omega: f64) -> Complex64 {
        self.inverse_susceptibility(omega).inv()
    }
}

/// Input power and detuning of the probe beam with the derived mean fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveState {
    power: f64,
    detuning_over_gamma: f64,
    detuning: f64,
    photon_flux: f64,
    intensity: f64,
    readout_gain: f64,
}

impl DriveState {
    /// Builds the drive for `power` (W) at detuning `ψ̄/γ`.
    ///
    /// Intensities are photon fluxes: `|ā_in|² = P/(ħω)`,
    /// `Ī = 2γ|ā_in|²/(γ² + ψ̄²)` and `ξ = 4kγ|ā_in|/(γ² + ψ̄²)`.
    pub fn new(optical: &OpticalParams, power: f64, detuning_over_gamma: f64) -> Result<Self> {
        if !(power.is_finite() && power >= 0.0) {
            return Err(Error::domain(
                "drive.power_w",
                format!("must be finite and >= 0, got {power}"),
            ));
        }
        if !detuning_over_gamma.is_finite() {
            return Err(Error::domain(
                "drive.detuning_over_gamma",
                format!("must be finite, got {detuning_over_gamma}"),
            ));
        }
        let gamma = optical.gamma();
        let detuning = detuning_over_gamma * gamma;
        let photon_flux = power / (HBAR * optical.optical_frequency());
        let lorentz = gamma * gamma + detuning * detuning;
        Ok(DriveState {
            power,
            detuning_over_gamma,
            detuning,
            photon_flux,
            intensity: 2.0 * gamma * photon_flux / lorentz,
            readout_gain: 4.0 * optical.wavenumber() * gamma * photon_flux.sqrt() / lorentz,
        })
    }

    /// Probe beam switched off.
    pub fn off(optical: &OpticalParams) -> Self {
        Self::new(optical, 0.0, 0.0).expect("zero drive is always valid")
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn detuning_over_gamma(&self) -> f64 {
        self.detuning_over_gamma
    }

    /// Absolute mean detuning `ψ̄`.
    pub fn detuning(&self) -> f64 {
        self.detuning
    }

    /// Incident photon flux `|ā_in|²`, photons/s.
    pub fn photon_flux(&self) -> f64 {
        self.photon_flux
    }

    /// Mean intracavity intensity `Ī`, photons/s.
    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    /// Phase readout gain `ξ`, 1/(m·√s).
    pub fn readout_gain(&self) -> f64 {
        self.readout_gain
    }
}

/// Cavity, mirror mode and drive evaluated together.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySystem {
    pub optical: OpticalParams,
    pub mechanical: MechanicalParams,
    pub drive: DriveState,
}

impl CavitySystem {
    pub fn new(optical: OpticalParams, mechanical: MechanicalParams, drive: DriveState) -> Self {
        CavitySystem {
            optical,
            mechanical,
            drive,
        }
    }

    /// Convenience constructor from power (W) and `ψ̄/γ`.
    pub fn with_drive(
        optical: OpticalParams,
        mechanical: MechanicalParams,
        power: f64,
        detuning_over_gamma: f64,
    ) -> Result<Self> {
        let drive = DriveState::new(&optical, power, detuning_over_gamma)?;
        Ok(Self::new(optical, mechanical, drive))
    }

    pub fn with_power(&self, power: f64) -> Result<Self> {
        Self::with_drive(
            self.optical,
            self.mechanical,
            power,
            self.drive.detuning_over_gamma(),
        )
    }

    pub fn with_detuning(&self, detuning_over_gamma: f64) -> Result<Self> {
        Self::with_drive(self.optical, self.mechanical, self.drive.power(), detuning_over_gamma)
    }

    /// The same mirror seen with the probe beam off.
    pub fn undriven(&self) -> Self {
        Self::new(self.optical, self.mechanical, DriveState::off(&self.optical))
    }
}
