//! Quantum-limited noise budgets and equivalent-signal sensitivity.
//!
//! Noise is expressed as equivalent cavity-length noise (m²/Hz, one-sided).
//! Shot noise `1/4ξ²` and radiation-pressure noise `ħ²ξ²|χ_eff|²` add to
//! `ħ|χ_eff|(ζ⁻¹ + ζ)/2` with `ζ = 2ħξ²|χ_eff|`, which never drops below the
//! standard quantum limit `ħ|χ_eff|`. When the cavity bandwidth is not large
//! compared to `Ω`, the factors `u` and `v` rescale `ζ` and add a
//! correlation term.

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::params::{CavitySystem, OpticalParams};
use crate::response::{amplification_factor, chi, chi_eff};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    /// Cavity bandwidth much larger than the analysis frequency.
    Narrowband,
    /// Includes the `u`, `v` corrections for a finite cavity bandwidth.
    FiniteBandwidth,
}

/// Narrowband shot/back-action budget at one frequency, all in m²/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumNoiseBudget {
    pub shot: f64,
    pub backaction: f64,
    pub total: f64,
    pub zeta: f64,
    pub sql: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteBandwidthFactors {
    pub u: Complex64,
    pub v: Complex64,
}

fn readout_gain(system: &CavitySystem, what: &'static str) -> Result<f64> {
    let xi = system.drive.readout_gain();
    if xi > 0.0 {
        Ok(xi)
    } else {
        Err(Error::ZeroPower(what))
    }
}

/// `u = Δ/(γ² + ψ̄² − iγΩτ)`, `v = (Ω/Ω_cav)(γψ̄/Δ)·u`.
pub fn finite_bandwidth_factors(
    optical: &OpticalParams,
    detuning: f64,
    omega: f64,
) -> FiniteBandwidthFactors {
    let gamma = optical.gamma();
    let delta = optical.delta(detuning, omega);
    let u = delta
        / Complex64::new(
            gamma * gamma + detuning * detuning,
            -gamma * omega * optical.storage_time(),
        );
    let v = (omega / optical.cavity_bandwidth()) * (gamma * detuning / delta) * u;
    FiniteBandwidthFactors { u, v }
}

/// Optomechanical parameter `ζ`.
pub fn zeta(system: &CavitySystem, omega: f64, model: NoiseModel) -> Result<f64> {
    let xi = readout_gain(system, "optomechanical parameter ζ")?;
    let narrow = 2.0 * HBAR * xi * xi * chi_eff(system, omega)?.norm();
    Ok(match model {
        NoiseModel::Narrowband => narrow,
        NoiseModel::FiniteBandwidth => {
            let f = finite_bandwidth_factors(&system.optical, system.drive.detuning(), omega);
            narrow / f.u.norm_sqr()
        }
    })
}

/// Standard quantum limit `ħ|χ_eff(Ω)|`, m²/Hz.
pub fn sql_effective(system: &CavitySystem, omega: f64) -> Result<f64> {
    Ok(HBAR * chi_eff(system, omega)?.norm())
}

/// Standard quantum limit of the bare resonator `ħ|χ(Ω)|`, m²/Hz.
pub fn sql_bare(system: &CavitySystem, omega: f64) -> f64 {
    HBAR * chi(&system.mechanical, omega).norm()
}

pub fn quantum_budget(system: &CavitySystem, omega: f64) -> Result<QuantumNoiseBudget> {
    let xi = readout_gain(system, "quantum noise")?;
    let chi_mag = chi_eff(system, omega)?.norm();
    let shot = 1.0 / (4.0 * xi * xi);
    let backaction = HBAR * HBAR * xi * xi * chi_mag * chi_mag;
    Ok(QuantumNoiseBudget {
        shot,
        backaction,
        total: shot + backaction,
        zeta: 2.0 * HBAR * xi * xi * chi_mag,
        sql: HBAR * chi_mag,
    })
}

/// Narrowband quantum noise `1/4ξ² + ħ²ξ²|χ_eff|²`, m²/Hz.
pub fn quantum_noise_narrowband(system: &CavitySystem, omega: f64) -> Result<f64> {
    Ok(quantum_budget(system, omega)?.total)
}

/// Quantum noise with finite-bandwidth corrections, m²/Hz:
/// `ħ|χ_eff|[(ζ⁻¹ + ζ)/2 + |v|²ζ/2 + Im(v*·χ_eff/|χ_eff|)]`.
pub fn quantum_noise_finite_bandwidth(system: &CavitySystem, omega: f64) -> Result<f64> {
    let xi = readout_gain(system, "quantum noise")?;
    let ce = chi_eff(system, omega)?;
    let chi_mag = ce.norm();
    let f = finite_bandwidth_factors(&system.optical, system.drive.detuning(), omega);
    let z = 2.0 * HBAR * xi * xi * chi_mag / f.u.norm_sqr();
    let cross = (f.v.conj() * ce / chi_mag).im;
    let bracket = 0.5 * (1.0 / z + z) + 0.5 * f.v.norm_sqr() * z + cross;
    let value = HBAR * chi_mag * bracket;
    if !(value > 0.0) {
        return Err(Error::NegativeNoise { omega, value });
    }
    Ok(value)
}

pub fn quantum_noise(system: &CavitySystem, omega: f64, model: NoiseModel) -> Result<f64> {
    match model {
        NoiseModel::Narrowband => quantum_noise_narrowband(system, omega),
        NoiseModel::FiniteBandwidth => quantum_noise_finite_bandwidth(system, omega),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqlReference {
    /// `ħ|χ_eff|`
    Effective,
    /// `ħ|χ|`
    Bare,
}

/// Equivalent signal noise (signal-to-noise ratio of one) on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCurve {
    pub grid: FrequencyGrid,
    /// Equivalent signal noise, m²/Hz.
    pub values: Vec<f64>,
    pub sql_effective: Vec<f64>,
    pub sql_bare: Vec<f64>,
    pub amplified: bool,
    pub model: NoiseModel,
}

impl SensitivityCurve {
    pub fn reference(&self, reference: SqlReference) -> &[f64] {
        match reference {
            SqlReference::Effective => &self.sql_effective,
            SqlReference::Bare => &self.sql_bare,
        }
    }

    /// Grid frequency and value of the largest improvement over `reference`.
    pub fn best_improvement_db(&self, reference: SqlReference) -> (f64, f64) {
        self.best_improvement_db_within(reference, f64::NEG_INFINITY, f64::INFINITY)
            .expect("curve is never empty")
    }

    /// As [`best_improvement_db`](Self::best_improvement_db), restricted to
    /// grid points in `[lo, hi]`.
    pub fn best_improvement_db_within(
        &self,
        reference: SqlReference,
        lo: f64,
        hi: f64,
    ) -> Option<(f64, f64)> {
        self.grid
            .iter()
            .zip(self.reference(reference).iter().zip(&self.values))
            .filter(|(w, _)| (lo..=hi).contains(w))
            .map(|(w, (r, v))| (w, 10.0 * (r / v).log10()))
            .fold(None, |best: Option<(f64, f64)>, p| match best {
                Some(b) if b.1 >= p.1 => Some(b),
                _ => Some(p),
            })
    }
}

/// Quantum noise, divided by the amplification factor when `amplified`.
pub fn sensitivity_curve(
    system: &CavitySystem,
    grid: &FrequencyGrid,
    amplified: bool,
    model: NoiseModel,
) -> Result<SensitivityCurve> {
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    let mut sql_eff = Vec::with_capacity(n);
    let mut sql_b = Vec::with_capacity(n);
    for omega in grid.iter() {
        let noise = quantum_noise(system, omega, model)?;
        let gain = if amplified {
            amplification_factor(system, omega)?
        } else {
            1.0
        };
        values.push(noise / gain);
        sql_eff.push(sql_effective(system, omega)?);
        sql_b.push(sql_bare(system, omega));
    }
    Ok(SensitivityCurve {
        grid: grid.clone(),
        values,
        sql_effective: sql_eff,
        sql_bare: sql_b,
        amplified,
        model,
    })
}

/// `10·log10(reference/curve)` at grid point `omega`; positive is beyond
/// the quantum limit.
pub fn improvement_db(curve: &SensitivityCurve, reference: SqlReference, omega: f64) -> Result<f64> {
    let i = curve.grid.index_of(omega)?;
    Ok(10.0 * (curve.reference(reference)[i] / curve.values[i]).log10())
}

/// Logarithmic power scan followed by golden-section refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSearch {
    /// W
    pub min_power: f64,
    /// W
    pub max_power: f64,
    pub points: usize,
}

impl Default for PowerSearch {
    fn default() -> Self {
        PowerSearch {
            min_power: 0.1e-3,
            max_power: 20e-3,
            points: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptimum {
    pub power: f64,
    pub value: f64,
}

/// Maximizes `objective` over input power at fixed detuning.
pub fn maximize_over_power<F>(
    base: &CavitySystem,
    search: PowerSearch,
    objective: F,
) -> Result<PowerOptimum>
where
    F: Fn(&CavitySystem) -> Result<f64>,
{
    if !(search.min_power > 0.0 && search.max_power > search.min_power && search.points >= 3) {
        return Err(Error::domain("power search", format!("invalid range {search:?}")));
    }
    let (l0, l1) = (search.min_power.ln(), search.max_power.ln());
    let step = (l1 - l0) / (search.points - 1) as f64;
    let eval = |log_p: f64| -> Result<f64> { objective(&base.with_power(log_p.exp())?) };

    let mut best = (0, f64::NEG_INFINITY);
    for i in 0..search.points {
        let v = eval(l0 + step * i as f64)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let mut best_point = (l0 + step * best.0 as f64, best.1);

    // Golden-section refinement between the neighbours of the best sample.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = l0 + step * best.0.saturating_sub(1) as f64;
    let mut b = l0 + step * (best.0 + 1).min(search.points - 1) as f64;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > 1e-4 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
        for (x, f) in [(c, fc), (d, fd)] {
            if f > best_point.1 {
                best_point = (x, f);
            }
        }
    }
    Ok(PowerOptimum {
        power: best_point.0.exp(),
        value: best_point.1,
    })
}

/// Power at which the narrowband `ζ(Ω)` equals one, searched in `[lo, hi]`
/// W. `ζ` is not monotone in power for a detuned cavity (it saturates near
/// `2γ/|ψ̄|` once the optical spring dominates), so the range is scanned
/// logarithmically for the first crossing, which is then bisected.
/// `None` when `ζ − 1` never changes sign on the scan.
pub fn power_for_unit_zeta(
    system: &CavitySystem,
    omega: f64,
    lo: f64,
    hi: f64,
) -> Result<Option<f64>> {
    const SCAN: usize = 64;
    let f = |log_p: f64| -> Result<f64> {
        Ok(zeta(&system.with_power(log_p.exp())?, omega, NoiseModel::Narrowband)?.ln())
    };
    let (l0, l1) = (lo.ln(), hi.ln());
    let step = (l1 - l0) / SCAN as f64;
    let mut a = l0;
    let mut fa = f(a)?;
    for i in 1..=SCAN {
        let b = l0 + step * i as f64;
        let fb = f(b)?;
        if fa == 0.0 {
            return Ok(Some(a.exp()));
        }
        if fa.signum() != fb.signum() {
            return bisect(&f, a, fa, b).map(|x| Some(x.exp()));
        }
        a = b;
        fa = fb;
    }
    Ok(None)
}

fn bisect<F>(f: &F, mut a: f64, fa: f64, mut b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let sign_a = fa.signum();
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == sign_a {
            a = m;
        } else {
            b = m;
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::MechanicalParams;
    use crate::response::effective_mode;

    fn optics() -> OpticalParams {
        OpticalParams::new(500e-6, 110_000.0, 810e-9).unwrap()
    }

    fn reference(power: f64, x: f64) -> CavitySystem {
        CavitySystem::with_drive(
            optics(),
            MechanicalParams::from_frequency_hz(1128.5e3, 72e-6, 760_000.0).unwrap(),
            power,
            x,
        )
        .unwrap()
    }

    /// Same mirror and drive, storage time divided by 1000.
    fn wide_cavity(s: &CavitySystem) -> CavitySystem {
        let o = OpticalParams::new(500e-9, 110_000.0, 810e-9).unwrap();
        CavitySystem::with_drive(o, s.mechanical, s.drive.power(), s.drive.detuning_over_gamma())
            .unwrap()
    }

    #[test]
    fn zero_power_is_an_error() {
        let s = reference(0.0, -2.97);
        let w = s.mechanical.omega_m();
        assert!(matches!(zeta(&s, w, NoiseModel::Narrowband), Err(Error::ZeroPower(_))));
        assert!(matches!(quantum_noise_narrowband(&s, w), Err(Error::ZeroPower(_))));
        assert!(matches!(quantum_noise_finite_bandwidth(&s, w), Err(Error::ZeroPower(_))));
    }

    #[test]
    fn zeta_near_effective_resonance() {
        // Hand chain: ξ ≈ 1.414e19, |χ_eff| ≈ 1/(MΩ_MΓ_eff) with Γ_eff ≈ 32.4
        // rad/s, giving ζ ≈ 2.55.
        let s = reference(4e-3, -2.97);
        let mode = effective_mode(&s).unwrap();
        let z = zeta(&s, mode.omega_eff, NoiseModel::Narrowband).unwrap();
        assert!((z / 2.55 - 1.0).abs() < 0.3, "{z}");
    }

    #[test]
    fn zeta_scales_with_power_at_fixed_response() {
        // Resonant cavity keeps χ_eff = χ, so only ξ² changes.
        let s = reference(1e-3, 0.0);
        let w = s.mechanical.omega_m() + 30.0;
        let z1 = zeta(&s, w, NoiseModel::Narrowband).unwrap();
        let z3 = zeta(&s.with_power(3e-3).unwrap(), w, NoiseModel::Narrowband).unwrap();
        assert!((z3 / z1 / 3.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_bandwidth_zeta_recovers_narrowband() {
        let s = wide_cavity(&reference(4e-3, -2.97));
        for w in [7.05e6, s.mechanical.omega_m(), 7.2e6] {
            let n = zeta(&s, w, NoiseModel::Narrowband).unwrap();
            let f = zeta(&s, w, NoiseModel::FiniteBandwidth).unwrap();
            assert!((f / n - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn two_closed_forms_agree() {
        let s = reference(2e-3, -2.03);
        for dw in [-300.0, -60.0, 0.0, 45.0, 2000.0] {
            let w = s.mechanical.omega_m() + dw;
            let b = quantum_budget(&s, w).unwrap();
            let zeta_form = b.sql * 0.5 * (1.0 / b.zeta + b.zeta);
            assert!((b.total / zeta_form - 1.0).abs() < 1e-12);
            assert!(b.total >= b.sql);
        }
    }

    #[test]
    fn bare_sql_at_resonance() {
        // ħQ/(MΩ_M²) ≈ 2.2e-38 m²/Hz, amplitude ≈ 1.5e-19 m/√Hz.
        let s = reference(0.0, 0.0);
        let sql = sql_bare(&s, s.mechanical.omega_m());
        assert!((sql / 2.2e-38 - 1.0).abs() < 0.02, "{sql}");
        assert!((sql.sqrt() / 1.5e-19 - 1.0).abs() < 0.02);
    }

    #[test]
    fn narrowband_equals_sql_at_unit_zeta() {
        let s = reference(1e-3, -2.97);
        let w = s.mechanical.omega_m() - 50.0;
        let p = power_for_unit_zeta(&s, w, 1e-9, 1.0).unwrap().unwrap();
        let tuned = s.with_power(p).unwrap();
        let b = quantum_budget(&tuned, w).unwrap();
        assert!((b.zeta - 1.0).abs() < 1e-6);
        assert!((b.total / b.sql - 1.0).abs() < 1e-9);
    }

    #[test]
    fn factors_static_limit() {
        let o = optics();
        let f = finite_bandwidth_factors(&o, -2.97 * o.gamma(), 0.0);
        assert_eq!(f.u, Complex64::new(1.0, 0.0));
        assert_eq!(f.v, Complex64::new(0.0, 0.0));
        for w in [1e4, 7e6, 3e7] {
            assert_eq!(finite_bandwidth_factors(&o, 0.0, w).v.norm(), 0.0);
        }
    }

    #[test]
    fn factors_at_reference_point() {
        // Direct arithmetic on u = Δ/(γ²+ψ̄²−iγΩτ), v = (Ω/Ω_cav)(γψ̄/Δ)u
        // with Δ = 7.4512127e-9 − 1.3509769e-9 i.
        let o = optics();
        let w = crate::hz_to_rad(1128.5e3);
        let f = finite_bandwidth_factors(&o, -2.97 * o.gamma(), w);
        assert!((f.u.norm() - 0.941_989_847).abs() < 1e-8, "{}", f.u.norm());
        assert!((f.v.norm() - 0.249_557_212).abs() < 1e-8, "{}", f.v.norm());
        assert!(f.v.norm() < 1.0);
    }

    #[test]
    fn cross_term_sign_fixture() {
        // Red detuning below the effective resonance: the correlation term
        // lowers the noise relative to the rescaled-ζ form.
        let s = reference(4e-3, -2.97);
        let w = s.mechanical.omega_m() - crate::hz_to_rad(20.0);
        let ce = chi_eff(&s, w).unwrap();
        let f = finite_bandwidth_factors(&s.optical, s.drive.detuning(), w);
        let cross = (f.v.conj() * ce / ce.norm()).im;
        assert!(cross < 0.0, "{cross}");
    }

    #[test]
    fn finite_bandwidth_reduces_to_narrowband() {
        let s = wide_cavity(&reference(4e-3, -2.97));
        let grid = FrequencyGrid::linear_hz(1127.5e3, 1130e3, 501).unwrap();
        for w in grid.iter() {
            let n = quantum_noise_narrowband(&s, w).unwrap();
            let f = quantum_noise_finite_bandwidth(&s, w).unwrap();
            assert!((f / n - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn resonant_cavity_only_rescales_zeta() {
        let s = reference(3e-3, 0.0);
        for w in [7.0e6, s.mechanical.omega_m(), 7.2e6] {
            let f = finite_bandwidth_factors(&s.optical, 0.0, w);
            let z = zeta(&s, w, NoiseModel::FiniteBandwidth).unwrap();
            let sql = sql_effective(&s, w).unwrap();
            let expected = sql * 0.5 * (1.0 / z + z);
            let got = quantum_noise_finite_bandwidth(&s, w).unwrap();
            assert!((got / expected - 1.0).abs() < 1e-14);
            assert!((z * f.u.norm_sqr() / zeta(&s, w, NoiseModel::Narrowband).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn amplified_curve_is_unamplified_over_gain() {
        let s = reference(2e-3, -2.97);
        let grid = FrequencyGrid::linear_hz(1128.0e3, 1129.0e3, 201).unwrap();
        for model in [NoiseModel::Narrowband, NoiseModel::FiniteBandwidth] {
            let plain = sensitivity_curve(&s, &grid, false, model).unwrap();
            let amp = sensitivity_curve(&s, &grid, true, model).unwrap();
            for (i, w) in grid.iter().enumerate() {
                let a = amplification_factor(&s, w).unwrap();
                assert_eq!(amp.values[i], plain.values[i] / a);
            }
        }
    }

    #[test]
    fn improvement_against_itself_is_zero() {
        let s = reference(1e-3, -2.97);
        let grid = FrequencyGrid::linear_hz(1128.0e3, 1129.0e3, 11).unwrap();
        let mut c = sensitivity_curve(&s, &grid, false, NoiseModel::Narrowband).unwrap();
        c.values = c.sql_effective.clone();
        let w = grid.as_slice()[3];
        assert_eq!(improvement_db(&c, SqlReference::Effective, w).unwrap(), 0.0);
        assert!(matches!(
            improvement_db(&c, SqlReference::Effective, w + 0.5),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn optimal_unamplified_curve_touches_sql() {
        let base = reference(1e-3, 0.0);
        let w = base.mechanical.omega_m() + 400.0;
        let grid = FrequencyGrid::new(vec![w]).unwrap();
        let p = power_for_unit_zeta(&base, w, 1e-9, 10.0).unwrap().unwrap();
        let c = sensitivity_curve(&base.with_power(p).unwrap(), &grid, false, NoiseModel::Narrowband)
            .unwrap();
        assert!(improvement_db(&c, SqlReference::Effective, w).unwrap().abs() < 1e-9);
    }

    #[test]
    fn power_search_finds_interior_optimum() {
        // Unamplified narrowband noise at a fixed frequency on a resonant
        // cavity is minimal where ζ = 1.
        let base = reference(1e-3, 0.0);
        let w = base.mechanical.omega_m() + 2000.0;
        let target = power_for_unit_zeta(&base, w, 1e-9, 1.0).unwrap().unwrap();
        let search = PowerSearch {
            min_power: target / 30.0,
            max_power: target * 40.0,
            points: 200,
        };
        let best =
            maximize_over_power(&base, search, |s| Ok(-quantum_noise_narrowband(s, w)?)).unwrap();
        assert!((best.power / target - 1.0).abs() < 0.01, "{} vs {target}", best.power);
    }
}
