//! Thermal displacement noise from the fluctuation-dissipation relation.

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::params::CavitySystem;
use crate::response::{effective_mode, inverse_chi_eff, EffectiveModeParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathParams {
    temperature: f64,
}

impl BathParams {
    pub fn new(temperature: f64) -> Result<Self> {
        if temperature.is_finite() && temperature > 0.0 {
            Ok(BathParams { temperature })
        } else {
            Err(Error::domain(
                "bath.temperature_k",
                format!("must be finite and > 0, got {temperature}"),
            ))
        }
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// A one-sided displacement spectral density with a single resonance.
pub trait PsdModel {
    /// Density at angular frequency `omega`, m²/Hz.
    fn psd(&self, omega: f64) -> f64;
    /// Resonance, rad/s.
    fn resonance(&self) -> f64;
    /// Full width at half maximum of the resonance, rad/s.
    fn linewidth(&self) -> f64;
}

/// `S_x(Ω) = (4k_BT/Ω)·Im χ_eff(Ω)` for a stable mode.
///
/// Uses the effective susceptibility, so a detuned probe sees the optically
/// shifted and broadened resonance. With the probe off this is the bare
/// mirror thermal noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalModel {
    system: CavitySystem,
    bath: BathParams,
    mode: EffectiveModeParams,
}

impl ThermalModel {
    pub fn new(system: CavitySystem, bath: BathParams) -> Result<Self> {
        let mode = effective_mode(&system)?;
        if !mode.stable {
            return Err(Error::Unstable {
                gamma_eff: mode.gamma_eff,
            });
        }
        Ok(ThermalModel { system, bath, mode })
    }

    pub fn system(&self) -> &CavitySystem {
        &self.system
    }

    pub fn mode(&self) -> EffectiveModeParams {
        self.mode
    }

    /// Thermal variance of the bare oscillator `k_BT/(MΩ_M²)`, m².
    pub fn equipartition_variance(&self) -> f64 {
        let m = &self.system.mechanical;
        BOLTZMANN * self.bath.temperature / (m.mass() * m.omega_m() * m.omega_m())
    }
}

impl PsdModel for ThermalModel {
    fn psd(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        let inv = inverse_chi_eff(&self.system, omega);
        let im_chi = -inv.im / inv.norm_sqr();
        4.0 * BOLTZMANN * self.bath.temperature / omega * im_chi
    }

    fn resonance(&self) -> f64 {
        self.mode.omega_eff
    }

    fn linewidth(&self) -> f64 {
        self.mode.gamma_eff
    }
}

/// Thermal PSD at a single frequency, m²/Hz.
pub fn thermal_psd(system: &CavitySystem, bath: &BathParams, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::domain("omega", format!("must be > 0, got {omega}")));
    }
    Ok(ThermalModel::new(*system, *bath)?.psd(omega))
}

/// `peak·(w/2)²/((Ω − center)² + (w/2)²) + baseline`, the fit model, also
/// usable as a synthesis target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianPsd {
    pub center: f64,
    pub width: f64,
    pub peak: f64,
    pub baseline: f64,
}

impl PsdModel for LorentzianPsd {
    fn psd(&self, omega: f64) -> f64 {
        let h = 0.5 * self.width;
        let d = omega - self.center;
        self.peak * h * h / (d * d + h * h) + self.baseline
    }

    fn resonance(&self) -> f64 {
        self.center
    }

    fn linewidth(&self) -> f64 {
        self.width
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{MechanicalParams, OpticalParams};

    fn reference(power: f64, x: f64) -> CavitySystem {
        CavitySystem::with_drive(
            OpticalParams::new(500e-6, 110_000.0, 810e-9).unwrap(),
            MechanicalParams::from_frequency_hz(1128.5e3, 72e-6, 760_000.0).unwrap(),
            power,
            x,
        )
        .unwrap()
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let inner: f64 = (1..n)
            .map(|i| f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 })
            .sum();
        (f(a) + f(b) + inner) * h / 3.0
    }

    #[test]
    fn bare_peak_value() {
        let s = reference(0.0, 0.0);
        let bath = BathParams::new(300.0).unwrap();
        let m = s.mechanical;
        let expected = 4.0 * BOLTZMANN * 300.0 * m.q() / (m.mass() * m.omega_m().powi(3));
        let got = thermal_psd(&s, &bath, m.omega_m()).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equipartition() {
        let model = ThermalModel::new(reference(0.0, 0.0), BathParams::new(300.0).unwrap()).unwrap();
        let m = model.system().mechanical;
        let span = 50.0 * m.damping();
        let area = simpson(
            |w| model.psd(w),
            m.omega_m() - span,
            m.omega_m() + span,
            200_000,
        ) / std::f64::consts::TAU;
        let rel = area / model.equipartition_variance() - 1.0;
        assert!(rel.abs() < 0.01, "{rel}");
    }

    #[test]
    fn red_detuning_cools_the_peak() {
        let bath = BathParams::new(300.0).unwrap();
        let bare = ThermalModel::new(reference(0.0, 0.0), bath).unwrap();
        let cooled = ThermalModel::new(reference(4e-3, -2.97), bath).unwrap();
        let g = reference(0.0, 0.0).mechanical.damping();
        let ratio = cooled.psd(cooled.resonance()) / bare.psd(bare.resonance());
        assert!(ratio < 1.0 && cooled.linewidth() > g);
        assert!((ratio / (g / cooled.linewidth()) - 1.0).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn unstable_mode_rejected() {
        let bath = BathParams::new(300.0).unwrap();
        assert!(matches!(
            ThermalModel::new(reference(10e-3, 2.97), bath),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn bath_validation() {
        assert!(BathParams::new(0.0).is_err());
        assert!(thermal_psd(&reference(0.0, 0.0), &BathParams::new(1.0).unwrap(), -1.0).is_err());
    }
}
