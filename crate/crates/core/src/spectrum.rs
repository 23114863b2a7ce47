use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumUnit {
    /// One-sided displacement spectral density, m²/Hz.
    DisplacementPsd,
    Dimensionless,
}

impl SpectrumUnit {
    pub fn label(&self) -> &'static str {
        match self {
            SpectrumUnit::DisplacementPsd => "m2_per_hz",
            SpectrumUnit::Dimensionless => "1",
        }
    }
}

/// Real spectrum sampled on increasing angular frequencies (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub unit: SpectrumUnit,
}

impl SpectrumTrace {
    pub fn new(omega: Vec<f64>, values: Vec<f64>, unit: SpectrumUnit) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::EmptyInput);
        }
        if omega.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} frequencies but {} values",
                omega.len(),
                values.len()
            )));
        }
        if omega.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::InvalidGrid("trace frequencies not increasing".into()));
        }
        Ok(SpectrumTrace {
            omega,
            values,
            unit,
        })
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn frequency_hz(&self) -> Vec<f64> {
        self.omega.iter().map(|&w| crate::rad_to_hz(w)).collect()
    }

    /// Index and value of the largest sample.
    pub fn peak(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
    }

    /// Linear interpolation at `omega`; `None` outside the sampled range.
    pub fn value_at(&self, omega: f64) -> Option<f64> {
        let n = self.omega.len();
        if omega < self.omega[0] || omega > self.omega[n - 1] {
            return None;
        }
        let i = self.omega.partition_point(|&w| w <= omega);
        if i == 0 {
            return Some(self.values[0]);
        }
        if i == n {
            return Some(self.values[n - 1]);
        }
        let (w0, w1) = (self.omega[i - 1], self.omega[i]);
        let t = (omega - w0) / (w1 - w0);
        Some(self.values[i - 1] + t * (self.values[i] - self.values[i - 1]))
    }

    /// Trapezoidal integral over frequency in hertz.
    pub fn integrate_hz(&self) -> f64 {
        self.omega
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, v)| 0.5 * (v[0] + v[1]) * crate::rad_to_hz(w[1] - w[0]))
            .sum()
    }
}
