//! Gaussian noise synthesis by frequency-domain coloring.
//!
//! Independent Gaussian Fourier coefficients are scaled by the square root
//! of the target density and transformed back. The result is a circular,
//! stationary series whose Welch estimate converges to the target.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::thermal::PsdModel;
use crate::error::{Error, Result};

/// Shortest acquisition for a resonance of linewidth `linewidth` (rad/s):
/// `100/Γ · 1/2π` seconds.
pub fn minimum_duration(linewidth: f64) -> f64 {
    100.0 / linewidth / std::f64::consts::TAU
}

fn check_common<M: PsdModel + ?Sized>(model: &M, duration: f64, sample_rate: f64) -> Result<usize> {
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::domain("sample_rate", format!("must be > 0, got {sample_rate}")));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::domain("duration", format!("must be > 0, got {duration}")));
    }
    let required = minimum_duration(model.linewidth());
    if duration < required {
        return Err(Error::DurationTooShort { duration, required });
    }
    let n = (duration * sample_rate).round() as usize;
    if n < 2 {
        return Err(Error::domain("duration", "fewer than two samples"));
    }
    Ok(n)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Real displacement samples (m) whose one-sided density follows `model`.
///
/// The sample rate must exceed four times the model resonance.
pub fn synthesize_timeseries<M: PsdModel + ?Sized>(
    model: &M,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    let resonance_hz = crate::rad_to_hz(model.resonance());
    if sample_rate <= 4.0 * resonance_hz {
        return Err(Error::Undersampled {
            sample_rate,
            resonance_hz,
        });
    }
    let n = check_common(model, duration, sample_rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // E|X_k|² = N·fs·S(f_k)/2 reproduces S under the one-sided estimator.
    let scale = |k: usize| {
        let f = k as f64 * sample_rate / n as f64;
        (0.5 * n as f64 * sample_rate * model.psd(crate::hz_to_rad(f))).sqrt()
    };
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    spectrum[0] = Complex64::new(scale(0) * normal(&mut rng), 0.0);
    for k in 1..n.div_ceil(2) {
        let s = scale(k) * std::f64::consts::FRAC_1_SQRT_2;
        let c = Complex64::new(s * normal(&mut rng), s * normal(&mut rng));
        spectrum[k] = c;
        spectrum[n - k] = c.conj();
    }
    if n % 2 == 0 {
        spectrum[n / 2] = Complex64::new(scale(n / 2) * normal(&mut rng), 0.0);
    }

    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    let norm = 1.0 / n as f64;
    Ok(spectrum.into_iter().map(|c| c.re * norm).collect())
}

/// Complex baseband samples of the band around `center` (rad/s), as a
/// zoom-mode spectrum analyzer records them after mixing down.
///
/// Samples are scaled so that their two-sided density at offset `δ` equals
/// the one-sided density of the displacement at `center + δ`; decode them
/// with [`super::welch::baseband_periodogram`].
pub fn synthesize_baseband<M: PsdModel + ?Sized>(
    model: &M,
    center: f64,
    duration: f64,
    sample_rate: f64,
    seed: u64,
) -> Result<Vec<Complex64>> {
    let n = check_common(model, duration, sample_rate)?;
    if center - std::f64::consts::PI * sample_rate <= 0.0 {
        return Err(Error::domain(
            "sample_rate",
            "baseband span reaches negative frequencies",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let df = sample_rate / n as f64;
    let mut spectrum: Vec<Complex64> = (0..n)
        .map(|k| {
            let offset = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            let psd = model.psd(center + crate::hz_to_rad(offset * df));
            let s = (n as f64 * sample_rate * psd).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
            Complex64::new(s * normal(&mut rng), s * normal(&mut rng))
        })
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    let norm = 1.0 / n as f64;
    Ok(spectrum.into_iter().map(|c| c * norm).collect())
}
