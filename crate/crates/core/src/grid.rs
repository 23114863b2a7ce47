use crate::error::{Error, Result};

/// Strictly increasing set of angular frequencies, rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omega: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::InvalidGrid("grid is empty".into()));
        }
        if let Some(bad) = omega.iter().find(|w| !w.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite point {bad}")));
        }
        if let Some(i) = omega.windows(2).position(|p| p[1] <= p[0]) {
            return Err(Error::InvalidGrid(format!(
                "not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(FrequencyGrid { omega })
    }

    /// `points` evenly spaced values from `start` to `stop` inclusive, rad/s.
    pub fn linear(start: f64, stop: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {points}")));
        }
        if !(start < stop) {
            return Err(Error::InvalidGrid(format!("start {start} must be below stop {stop}")));
        }
        let step = (stop - start) / (points - 1) as f64;
        let mut omega: Vec<f64> = (0..points).map(|i| start + step * i as f64).collect();
        omega[points - 1] = stop;
        Self::new(omega)
    }

    /// Linear grid specified in hertz.
    pub fn linear_hz(start_hz: f64, stop_hz: f64, points: usize) -> Result<Self> {
        Self::linear(crate::hz_to_rad(start_hz), crate::hz_to_rad(stop_hz), points)
    }

    /// Grid of spacing at most `max_step` spanning `center ± half_span`.
    pub fn centered(center: f64, half_span: f64, max_step: f64) -> Result<Self> {
        let intervals = (2.0 * half_span / max_step).ceil().max(2.0) as usize;
        Self::linear(center - half_span, center + half_span, intervals + 1)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.omega[0]
    }

    pub fn last(&self) -> f64 {
        self.omega[self.omega.len() - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.omega.iter().copied()
    }

    pub fn max_step(&self) -> f64 {
        self.omega
            .windows(2)
            .map(|p| p[1] - p[0])
            .fold(0.0, f64::max)
    }

    /// Grid points in hertz.
    pub fn to_hz(&self) -> Vec<f64> {
        self.omega.iter().map(|&w| crate::rad_to_hz(w)).collect()
    }

    /// Index of the grid point equal to `omega` to relative 1e-12.
    pub fn index_of(&self, omega: f64) -> Result<usize> {
        let i = self.omega.partition_point(|&w| w < omega);
        let tol = 1e-12 * omega.abs().max(f64::MIN_POSITIVE);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter(|&j| j < self.omega.len())
            .find(|&j| (self.omega[j] - omega).abs() <= tol)
            .ok_or(Error::OffGrid { omega })
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let slack = 1e-12 * lo.abs().max(hi.abs());
        self.first() <= lo + slack && self.last() >= hi - slack
    }
}
