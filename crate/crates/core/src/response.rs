//! Bare and effective mechanical response of the moving mirror.
//!
//! The intracavity radiation pressure acts on the mirror as a complex,
//! frequency-dependent spring `K_opt(Ω) = 8ħk²Ī ψ̄/Δ(Ω)`: the force produced
//! by a cavity-length change `X` is `−K_opt·X`, whether `X` is mirror motion
//! or the signal. The effective susceptibility follows from
//! `χ_eff⁻¹ = χ⁻¹ + K_opt`.
//!
//! With `Δ = (γ − iΩτ)² + ψ̄²` and the sign of `ψ̄` as chosen in
//! [`crate::params`], negative detunings give `Re K_opt < 0` (softer spring,
//! resonance pulled down) and `Im K_opt < 0` (extra damping, cooling).
//! Positive detunings anti-damp the mode and eventually cross the
//! parametric-instability threshold.

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::params::{CavitySystem, MechanicalParams};

/// Half-width of the mode search window, in units of the intrinsic damping.
pub const MODE_SEARCH_HALF_SPAN: f64 = 50.0;
/// Largest grid step for the mode search, as a fraction of `Γ`.
pub const MODE_SEARCH_STEP: f64 = 0.1;

/// Effective mode extracted from `χ_eff`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveModeParams {
    /// Location of the maximum of `|χ_eff|`, rad/s.
    pub omega_eff: f64,
    /// Effective damping, rad/s.
    pub gamma_eff: f64,
    pub stable: bool,
}

/// Bare Lorentzian susceptibility `χ(Ω)`, m/N.
pub fn chi(mech: &MechanicalParams, omega: f64) -> Complex64 {
    mech.susceptibility(omega)
}

/// Optical spring constant `K_opt(Ω)`, N/m.
pub fn backaction_coefficient(system: &CavitySystem, omega: f64) -> Complex64 {
    let drive = &system.drive;
    let psi = drive.detuning();
    let intensity = drive.intensity();
    if psi == 0.0 || intensity == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let k = system.optical.wavenumber();
    let strength = 8.0 * HBAR * k * k * intensity * psi;
    strength / system.optical.delta(psi, omega)
}

/// `χ_eff⁻¹(Ω) = χ⁻¹(Ω) + K_opt(Ω)`, N/m.
pub fn inverse_chi_eff(system: &CavitySystem, omega: f64) -> Complex64 {
    let inv = system.mechanical.inverse_susceptibility(omega);
    let kopt = backaction_coefficient(system, omega);
    if kopt == Complex64::new(0.0, 0.0) {
        inv
    } else {
        inv + kopt
    }
}

/// Effective susceptibility, inverted from [`inverse_chi_eff`].
pub fn chi_eff(system: &CavitySystem, omega: f64) -> Result<Complex64> {
    let inv = inverse_chi_eff(system, omega);
    let out = inv.inv();
    if inv.norm_sqr() == 0.0 || !out.is_finite() {
        return Err(Error::SingularResponse { omega });
    }
    Ok(out)
}

/// Signal amplification `A(Ω) = |χ_eff/χ|²`.
pub fn amplification_factor(system: &CavitySystem, omega: f64) -> Result<f64> {
    let inv_eff = inverse_chi_eff(system, omega);
    let denom = inv_eff.norm_sqr();
    let a = system.mechanical.inverse_susceptibility(omega).norm_sqr() / denom;
    if denom == 0.0 || !a.is_finite() {
        return Err(Error::SingularResponse { omega });
    }
    Ok(a)
}

/// Effective damping from the local oscillator reduction at `omega`:
/// `Γ_eff = −Im χ_eff⁻¹(Ω)/(MΩ)`.
pub fn local_damping(system: &CavitySystem, omega: f64) -> f64 {
    -inverse_chi_eff(system, omega).im / (system.mechanical.mass() * omega)
}

/// A grid suitable for [`effective_mode_params`]: spacing `Γ/10` and wide
/// enough to hold the optically shifted and broadened peak.
pub fn mode_search_grid(system: &CavitySystem) -> Result<FrequencyGrid> {
    let mech = &system.mechanical;
    let gamma = mech.damping();
    let kopt = backaction_coefficient(system, mech.omega_m());
    let scale = mech.mass() * mech.omega_m();
    let shift = kopt.re.abs() / (2.0 * scale);
    let gamma_eff = (gamma - kopt.im / scale).abs();
    let half_span = MODE_SEARCH_HALF_SPAN * (gamma + gamma_eff) + 2.0 * shift;
    let half_span = half_span.min(0.5 * mech.omega_m());
    FrequencyGrid::centered(mech.omega_m(), half_span, MODE_SEARCH_STEP * gamma)
}

/// Locates the effective resonance on `grid` and extracts its damping.
///
/// The peak of `|χ_eff|` is found on the grid and refined by a three-point
/// parabola; the damping comes from [`local_damping`] at the refined peak.
pub fn effective_mode_params(
    system: &CavitySystem,
    grid: &FrequencyGrid,
) -> Result<EffectiveModeParams> {
    let mech = &system.mechanical;
    let gamma = mech.damping();
    let lo = mech.omega_m() - MODE_SEARCH_HALF_SPAN * gamma;
    let hi = mech.omega_m() + MODE_SEARCH_HALF_SPAN * gamma;
    if !grid.covers(lo, hi) {
        return Err(Error::GridCoverage(format!(
            "mode search needs [{lo:.6e}, {hi:.6e}] rad/s, grid spans [{:.6e}, {:.6e}]",
            grid.first(),
            grid.last()
        )));
    }
    let max_step = MODE_SEARCH_STEP * gamma;
    if grid.max_step() > max_step * (1.0 + 1e-9) {
        return Err(Error::GridTooCoarse(format!(
            "step {:.4e} rad/s exceeds Γ/10 = {max_step:.4e} rad/s",
            grid.max_step()
        )));
    }

    let w = grid.as_slice();
    let mut mags = Vec::with_capacity(w.len());
    for &omega in w {
        mags.push(chi_eff(system, omega)?.norm());
    }
    let (i, _) = mags
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &m)| if m > b.1 { (i, m) } else { b });
    if i == 0 || i == w.len() - 1 {
        return Err(Error::GridTooCoarse(
            "peak of |χ_eff| is not bracketed by the grid".into(),
        ));
    }

    let omega_eff = parabola_vertex(
        (w[i - 1], mags[i - 1]),
        (w[i], mags[i]),
        (w[i + 1], mags[i + 1]),
    );
    let gamma_eff = local_damping(system, omega_eff);
    Ok(EffectiveModeParams {
        omega_eff,
        gamma_eff,
        stable: gamma_eff > 0.0,
    })
}

/// [`effective_mode_params`] on [`mode_search_grid`].
pub fn effective_mode(system: &CavitySystem) -> Result<EffectiveModeParams> {
    effective_mode_params(system, &mode_search_grid(system)?)
}

fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    // Work relative to the middle point to avoid cancellation at ~1e7 rad/s.
    let (x0, x2) = (a.0 - b.0, c.0 - b.0);
    let (y0, y1, y2) = (a.1, b.1, c.1);
    let num = x0 * x0 * (y1 - y2) - x2 * x2 * (y1 - y0);
    let den = x0 * (y1 - y2) - x2 * (y1 - y0);
    if den == 0.0 {
        return b.0;
    }
    let dx = 0.5 * num / den;
    b.0 + dx.clamp(x0, x2)
}
