//! Lorentzian peak fitting by damped Gauss-Newton (Levenberg-Marquardt).
//!
//! The model is `a·h²/((Ω − c)² + h²) + b` with `h = w/2`. Residuals are
//! relative, `y/m − 1`, which suits spectra with multiplicative
//! (chi-squared) scatter spanning several decades. Parameters are rescaled
//! internally to order one before iterating.

use crate::error::{Error, Result};
use crate::spectrum::SpectrumTrace;

pub const DEFAULT_MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-9;
const GRADIENT_TOLERANCE: f64 = 1e-12;
/// Smallest peak-to-baseline ratio accepted as a resonance.
const MIN_CONTRAST: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzianGuess {
    /// rad/s
    pub center: f64,
    /// Full width at half maximum, rad/s.
    pub width: f64,
    pub amplitude: f64,
    pub baseline: f64,
}

impl LorentzianGuess {
    /// Peak position, half-maximum width and extremes read off the trace.
    pub fn from_trace(trace: &SpectrumTrace) -> Self {
        let (i, max) = trace.peak();
        let min = trace.values.iter().copied().fold(f64::INFINITY, f64::min);
        let half = min + 0.5 * (max - min);
        let left = (0..i).rev().find(|&j| trace.values[j] < half).unwrap_or(0);
        let right = (i..trace.len())
            .find(|&j| trace.values[j] < half)
            .unwrap_or(trace.len() - 1);
        let spacing = if trace.len() > 1 {
            (trace.omega[trace.len() - 1] - trace.omega[0]) / (trace.len() - 1) as f64
        } else {
            1.0
        };
        let width = (trace.omega[right] - trace.omega[left]).max(2.0 * spacing);
        LorentzianGuess {
            center: trace.omega[i],
            width,
            amplitude: max - min,
            baseline: min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    /// rad/s
    pub center: f64,
    /// Full width at half maximum, rad/s.
    pub width: f64,
    /// Peak height above the baseline, in the trace's units.
    pub amplitude: f64,
    pub baseline: f64,
    /// RMS of the relative residuals.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Fits with the default iteration cap.
pub fn fit_lorentzian(trace: &SpectrumTrace, guess: LorentzianGuess) -> Result<FitResult> {
    fit_lorentzian_with(trace, guess, DEFAULT_MAX_ITERATIONS)
}

pub fn fit_lorentzian_with(
    trace: &SpectrumTrace,
    guess: LorentzianGuess,
    max_iterations: usize,
) -> Result<FitResult> {
    if trace.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(guess.width > 0.0 && guess.width.is_finite() && guess.center.is_finite()) {
        return Err(Error::domain("initial guess", format!("{guess:?}")));
    }
    let y_scale = trace.values.iter().copied().fold(0.0, f64::max);
    if !(y_scale > 0.0) || trace.values.iter().any(|&v| !(v >= 0.0)) {
        return Ok(FitResult {
            center: guess.center,
            width: guess.width,
            amplitude: guess.amplitude,
            baseline: guess.baseline,
            residual_norm: f64::INFINITY,
            converged: false,
            iterations: 0,
        });
    }

    let problem = Problem {
        x: trace.omega.iter().map(|&w| (w - guess.center) / guess.width).collect(),
        y: trace.values.iter().map(|&v| v / y_scale).collect(),
    };
    let mut p = [0.0, 1.0, guess.amplitude / y_scale, guess.baseline / y_scale];
    let mut cost = match problem.cost(&p) {
        Some(c) => c,
        None => {
            // Guess puts the model at or below zero somewhere; start from a
            // positive baseline instead.
            p[3] = p[3].max(1e-6);
            p[2] = p[2].max(1e-6);
            problem.cost(&p).unwrap_or(f64::INFINITY)
        }
    };

    let mut lambda = 1e-3;
    let mut numerically_converged = false;
    let mut iterations = 0;
    'outer: while iterations < max_iterations {
        iterations += 1;
        let (jtj, grad) = problem.normal_equations(&p);
        if grad.iter().all(|g| g.abs() < GRADIENT_TOLERANCE) {
            numerically_converged = true;
            break;
        }
        loop {
            let mut lhs = jtj;
            let floor = 1e-12 * (0..4).map(|i| jtj[i][i]).fold(0.0, f64::max);
            for (i, row) in lhs.iter_mut().enumerate() {
                row[i] += lambda * jtj[i][i].max(floor);
            }
            let step = solve4(lhs, grad.map(|g| -g));
            if let Some(step) = step {
                let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]];
                if let Some(c) = problem.cost(&trial).filter(|_| trial[1] > 0.0) {
                    if c <= cost {
                        let small = step
                            .iter()
                            .zip(&p)
                            .all(|(s, v)| s.abs() <= STEP_TOLERANCE * (1.0 + v.abs()));
                        p = trial;
                        cost = c;
                        lambda = (lambda / 3.0).max(1e-15);
                        if small {
                            numerically_converged = true;
                            break 'outer;
                        }
                        break;
                    }
                }
            }
            lambda *= 4.0;
            if lambda > 1e16 {
                // No descent direction left: a local minimum to working
                // precision.
                numerically_converged = true;
                break 'outer;
            }
        }
    }

    let center = guess.center + p[0] * guess.width;
    let width = p[1] * guess.width;
    let amplitude = p[2] * y_scale;
    let baseline = p[3] * y_scale;
    let lo = trace.omega[0];
    let hi = trace.omega[trace.len() - 1];
    let resolved = amplitude > 0.0
        && amplitude > MIN_CONTRAST * baseline.abs()
        && width > 0.0
        && width < hi - lo
        && (lo..=hi).contains(&center);
    Ok(FitResult {
        center,
        width,
        amplitude,
        baseline,
        residual_norm: (cost / trace.len() as f64).sqrt(),
        converged: numerically_converged && resolved,
        iterations,
    })
}

struct Problem {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Problem {
    fn model(p: &[f64; 4], x: f64) -> (f64, [f64; 4]) {
        let h = 0.5 * p[1];
        let d = x - p[0];
        let den = d * d + h * h;
        let shape = h * h / den;
        let m = p[2] * shape + p[3];
        let dc = p[2] * h * h * 2.0 * d / (den * den);
        let dw = p[2] * h * d * d / (den * den);
        (m, [dc, dw, shape, 1.0])
    }

    /// Sum of squared relative residuals; `None` if the model is not
    /// strictly positive everywhere.
    fn cost(&self, p: &[f64; 4]) -> Option<f64> {
        let mut sum = 0.0;
        for (&x, &y) in self.x.iter().zip(&self.y) {
            let (m, _) = Self::model(p, x);
            if !(m > 0.0) {
                return None;
            }
            let r = y / m - 1.0;
            sum += r * r;
        }
        sum.is_finite().then_some(sum)
    }

    fn normal_equations(&self, p: &[f64; 4]) -> ([[f64; 4]; 4], [f64; 4]) {
        let mut jtj = [[0.0; 4]; 4];
        let mut grad = [0.0; 4];
        for (&x, &y) in self.x.iter().zip(&self.y) {
            let (m, dm) = Self::model(p, x);
            let r = y / m - 1.0;
            let f = -y / (m * m);
            let j = dm.map(|d| f * d);
            for a in 0..4 {
                grad[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        (jtj, grad)
    }
}

/// Gaussian elimination with partial pivoting.
fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
