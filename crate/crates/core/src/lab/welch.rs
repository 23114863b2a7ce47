//! Welch-averaged periodograms with a periodic Hann window.
//!
//! Density scaling: `|X_k|²/(fs·Σw²)`, doubled for the one-sided estimate
//! except at DC and Nyquist. Unit-variance white noise sampled at `fs`
//! reads `2/fs`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectrum::{SpectrumTrace, SpectrumUnit};

pub fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / len as f64).cos()))
        .collect()
}

/// Distance between segment starts.
pub fn hop(segment_length: usize, overlap: f64) -> usize {
    let shared = (overlap * segment_length as f64).round() as usize;
    (segment_length - shared.min(segment_length - 1)).max(1)
}

pub fn segment_count(n_samples: usize, segment_length: usize, overlap: f64) -> usize {
    if segment_length == 0 || n_samples < segment_length {
        return 0;
    }
    (n_samples - segment_length) / hop(segment_length, overlap) + 1
}

/// Samples needed for `segments` segments.
pub fn samples_for(segments: usize, segment_length: usize, overlap: f64) -> usize {
    hop(segment_length, overlap) * segments.saturating_sub(1) + segment_length
}

fn validate(n: usize, sample_rate: f64, segment_length: usize, overlap: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    if !(sample_rate.is_finite() && sample_rate > 0.0) {
        return Err(Error::domain("sample_rate", format!("must be > 0, got {sample_rate}")));
    }
    if segment_length < 2 || segment_length > n {
        return Err(Error::domain(
            "segment_length",
            format!("must lie in [2, {n}], got {segment_length}"),
        ));
    }
    if !(0.0..=0.9).contains(&overlap) {
        return Err(Error::domain("overlap", format!("must lie in [0, 0.9], got {overlap}")));
    }
    Ok(())
}

/// Mean of `|FFT(w·segment)|²` over all segments.
fn averaged_power(samples: &[Complex64], segment_length: usize, overlap: f64, window: &[f64]) -> Vec<f64> {
    let fft = FftPlanner::new().plan_fft_forward(segment_length);
    let step = hop(segment_length, overlap);
    let count = segment_count(samples.len(), segment_length, overlap);
    let mut acc = vec![0.0; segment_length];
    let mut buf = vec![Complex64::new(0.0, 0.0); segment_length];
    for s in 0..count {
        let seg = &samples[s * step..s * step + segment_length];
        for ((b, &x), &w) in buf.iter_mut().zip(seg).zip(window) {
            *b = x * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let inv = 1.0 / count as f64;
    acc.iter_mut().for_each(|a| *a *= inv);
    acc
}

/// One-sided Welch PSD of a real series.
pub fn periodogram(
    samples: &[f64],
    sample_rate: f64,
    segment_length: usize,
    overlap: f64,
) -> Result<SpectrumTrace> {
    validate(samples.len(), sample_rate, segment_length, overlap)?;
    let window = hann(segment_length);
    let norm = 1.0 / (sample_rate * window.iter().map(|w| w * w).sum::<f64>());
    let complex: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let power = averaged_power(&complex, segment_length, overlap, &window);

    let half = segment_length / 2;
    let omega = (0..=half)
        .map(|k| crate::hz_to_rad(k as f64 * sample_rate / segment_length as f64))
        .collect();
    let values = (0..=half)
        .map(|k| {
            let edge = k == 0 || (segment_length % 2 == 0 && k == half);
            power[k] * norm * if edge { 1.0 } else { 2.0 }
        })
        .collect();
    SpectrumTrace::new(omega, values, SpectrumUnit::DisplacementPsd)
}

/// Welch PSD of baseband samples mixed down from `center` (rad/s), on
/// absolute frequencies `center + δ`, ordered by frequency.
pub fn baseband_periodogram(
    samples: &[Complex64],
    sample_rate: f64,
    center: f64,
    segment_length: usize,
    overlap: f64,
) -> Result<SpectrumTrace> {
    validate(samples.len(), sample_rate, segment_length, overlap)?;
    let window = hann(segment_length);
    let norm = 1.0 / (sample_rate * window.iter().map(|w| w * w).sum::<f64>());
    let power = averaged_power(samples, segment_length, overlap, &window);

    let df = sample_rate / segment_length as f64;
    let first_negative = segment_length.div_ceil(2);
    let order = (first_negative..segment_length).chain(0..first_negative);
    let (omega, values) = order
        .map(|k| {
            let offset = if k >= first_negative {
                k as f64 - segment_length as f64
            } else {
                k as f64
            };
            (center + crate::hz_to_rad(offset * df), power[k] * norm)
        })
        .unzip();
    SpectrumTrace::new(omega, values, SpectrumUnit::DisplacementPsd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn white_noise_level() {
        let fs = 10e6;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..1 << 20).map(|_| StandardNormal.sample(&mut rng)).collect();
        let p = periodogram(&x, fs, 1024, 0.5).unwrap();
        let interior = &p.values[1..p.len() - 1];
        let mean = interior.iter().sum::<f64>() / interior.len() as f64;
        // ~2047 segments, 511 bins: the mean is good to well under 1%.
        assert!((mean / 2e-7 - 1.0).abs() < 0.01, "{mean}");
        let worst = interior.iter().map(|v| (v / 2e-7 - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 0.2, "{worst}");
    }

    #[test]
    fn sinusoid_power() {
        let fs = 1e4;
        let a = 0.7;
        let f0 = 1234.5;
        let x: Vec<f64> = (0..1 << 16)
            .map(|i| a * (std::f64::consts::TAU * f0 * i as f64 / fs).sin())
            .collect();
        let p = periodogram(&x, fs, 4096, 0.5).unwrap();
        let df = fs / 4096.0;
        let k0 = (f0 / df).round() as usize;
        let peak: f64 = p.values[k0 - 4..=k0 + 4].iter().sum::<f64>() * df;
        assert!((peak / (a * a / 2.0) - 1.0).abs() < 0.02, "{peak}");
    }

    #[test]
    fn zero_in_zero_out() {
        let p = periodogram(&vec![0.0; 4096], 1e3, 256, 0.5).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn errors() {
        assert!(matches!(periodogram(&[], 1.0, 4, 0.0), Err(Error::EmptyInput)));
        assert!(periodogram(&[1.0; 8], 1.0, 16, 0.0).is_err());
        assert!(periodogram(&[1.0; 64], 1.0, 16, 0.95).is_err());
    }

    #[test]
    fn segment_bookkeeping() {
        assert_eq!(hop(4096, 0.5), 2048);
        assert_eq!(samples_for(200, 4096, 0.5), 2048 * 199 + 4096);
        assert_eq!(segment_count(samples_for(200, 4096, 0.5), 4096, 0.5), 200);
        assert_eq!(segment_count(100, 10, 0.0), 10);
    }

    #[test]
    fn baseband_white_level_and_axis() {
        let fs = 1000.0;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z: Vec<Complex64> = (0..1 << 18)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let center = 1e6;
        let p = baseband_periodogram(&z, fs, center, 512, 0.5).unwrap();
        assert_eq!(p.len(), 512);
        assert!((p.omega[256] - center).abs() < 1e-9);
        let mean = p.values.iter().sum::<f64>() / 512.0;
        // E|z|² = 2, spread over fs.
        assert!((mean / (2.0 / fs) - 1.0).abs() < 0.01, "{mean}");
    }
}
