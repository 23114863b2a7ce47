//! Flat `key = value` run configuration.
//!
//! Parsing is strict: every required key must appear exactly once, unknown
//! keys are rejected and units are those suffixed in the key names. Keys
//! under `lab.` tune the emulated analyzer and are optional.

use std::fmt;

use backaction::lab::{BathParams, ProtocolConfig, ProtocolSettings};
use backaction::{
    CavitySystem, DriveState, Error as ModelError, FrequencyGrid, MechanicalParams,
    OpticalParams,
};

pub const REQUIRED_KEYS: [&str; 15] = [
    "cavity.length_m",
    "cavity.finesse",
    "cavity.wavelength_m",
    "mirror.f_m_hz",
    "mirror.mass_kg",
    "mirror.q",
    "drive.power_w",
    "drive.detuning_over_gamma",
    "bath.temperature_k",
    "run.grid_start_hz",
    "run.grid_stop_hz",
    "run.grid_points",
    "run.seed",
    "run.signal_level_db",
    "run.drift_hz_per_min",
];

pub const OPTIONAL_KEYS: [&str; 7] = [
    "lab.welch_segments",
    "lab.overlap",
    "lab.bins_per_linewidth",
    "lab.span_linewidths",
    "lab.sweep_time_s",
    "lab.reconfigure_s",
    "lab.analyzer_gain",
];

pub const MIN_GRID_POINTS: usize = 16;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required keys: {}", .0.join(", "))]
    Missing(Vec<&'static str>),
    #[error("{key}: {reason}")]
    Range { key: String, reason: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
}

pub fn is_known_key(key: &str) -> bool {
    REQUIRED_KEYS.contains(&key) || OPTIONAL_KEYS.contains(&key)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub cavity_length_m: f64,
    pub cavity_finesse: f64,
    pub cavity_wavelength_m: f64,
    pub mirror_f_m_hz: f64,
    pub mirror_mass_kg: f64,
    pub mirror_q: f64,
    pub drive_power_w: f64,
    pub drive_detuning_over_gamma: f64,
    pub bath_temperature_k: f64,
    pub grid_start_hz: f64,
    pub grid_stop_hz: f64,
    pub grid_points: usize,
    pub seed: u64,
    pub signal_level_db: f64,
    pub drift_hz_per_min: f64,
    pub lab: ProtocolSettings,
}

fn parse_f64(raw: &str) -> Result<f64, String> {
    raw.parse::<f64>()
        .map_err(|_| format!("expected a number, got `{raw}`"))
}

fn parse_uint<T: std::str::FromStr>(raw: &str) -> Result<T, String> {
    raw.parse::<T>()
        .map_err(|_| format!("expected a non-negative integer, got `{raw}`"))
}

impl RunConfig {
    fn blank() -> Self {
        RunConfig {
            cavity_length_m: f64::NAN,
            cavity_finesse: f64::NAN,
            cavity_wavelength_m: f64::NAN,
            mirror_f_m_hz: f64::NAN,
            mirror_mass_kg: f64::NAN,
            mirror_q: f64::NAN,
            drive_power_w: f64::NAN,
            drive_detuning_over_gamma: f64::NAN,
            bath_temperature_k: f64::NAN,
            grid_start_hz: f64::NAN,
            grid_stop_hz: f64::NAN,
            grid_points: 0,
            seed: 0,
            signal_level_db: f64::NAN,
            drift_hz_per_min: f64::NAN,
            lab: ProtocolSettings::default(),
        }
    }

    /// Assigns `key` from its textual value. Does not validate ranges.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), String> {
        let raw = raw.trim();
        match key {
            "cavity.length_m" => self.cavity_length_m = parse_f64(raw)?,
            "cavity.finesse" => self.cavity_finesse = parse_f64(raw)?,
            "cavity.wavelength_m" => self.cavity_wavelength_m = parse_f64(raw)?,
            "mirror.f_m_hz" => self.mirror_f_m_hz = parse_f64(raw)?,
            "mirror.mass_kg" => self.mirror_mass_kg = parse_f64(raw)?,
            "mirror.q" => self.mirror_q = parse_f64(raw)?,
            "drive.power_w" => self.drive_power_w = parse_f64(raw)?,
            "drive.detuning_over_gamma" => self.drive_detuning_over_gamma = parse_f64(raw)?,
            "bath.temperature_k" => self.bath_temperature_k = parse_f64(raw)?,
            "run.grid_start_hz" => self.grid_start_hz = parse_f64(raw)?,
            "run.grid_stop_hz" => self.grid_stop_hz = parse_f64(raw)?,
            "run.grid_points" => self.grid_points = parse_uint(raw)?,
            "run.seed" => self.seed = parse_uint(raw)?,
            "run.signal_level_db" => self.signal_level_db = parse_f64(raw)?,
            "run.drift_hz_per_min" => self.drift_hz_per_min = parse_f64(raw)?,
            "lab.welch_segments" => self.lab.welch_segments = parse_uint(raw)?,
            "lab.overlap" => self.lab.overlap = parse_f64(raw)?,
            "lab.bins_per_linewidth" => self.lab.bins_per_linewidth = parse_f64(raw)?,
            "lab.span_linewidths" => self.lab.span_linewidths = parse_f64(raw)?,
            "lab.sweep_time_s" => self.lab.sweep_time_s = parse_f64(raw)?,
            "lab.reconfigure_s" => self.lab.reconfigure_s = parse_f64(raw)?,
            "lab.analyzer_gain" => self.lab.analyzer_gain = parse_f64(raw)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Textual value of `key`, as written by [`to_text`](Self::to_text).
    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "cavity.length_m" => self.cavity_length_m.to_string(),
            "cavity.finesse" => self.cavity_finesse.to_string(),
            "cavity.wavelength_m" => self.cavity_wavelength_m.to_string(),
            "mirror.f_m_hz" => self.mirror_f_m_hz.to_string(),
            "mirror.mass_kg" => self.mirror_mass_kg.to_string(),
            "mirror.q" => self.mirror_q.to_string(),
            "drive.power_w" => self.drive_power_w.to_string(),
            "drive.detuning_over_gamma" => self.drive_detuning_over_gamma.to_string(),
            "bath.temperature_k" => self.bath_temperature_k.to_string(),
            "run.grid_start_hz" => self.grid_start_hz.to_string(),
            "run.grid_stop_hz" => self.grid_stop_hz.to_string(),
            "run.grid_points" => self.grid_points.to_string(),
            "run.seed" => self.seed.to_string(),
            "run.signal_level_db" => self.signal_level_db.to_string(),
            "run.drift_hz_per_min" => self.drift_hz_per_min.to_string(),
            "lab.welch_segments" => self.lab.welch_segments.to_string(),
            "lab.overlap" => self.lab.overlap.to_string(),
            "lab.bins_per_linewidth" => self.lab.bins_per_linewidth.to_string(),
            "lab.span_linewidths" => self.lab.span_linewidths.to_string(),
            "lab.sweep_time_s" => self.lab.sweep_time_s.to_string(),
            "lab.reconfigure_s" => self.lab.reconfigure_s.to_string(),
            "lab.analyzer_gain" => self.lab.analyzer_gain.to_string(),
            _ => return None,
        })
    }

    /// Every key, one per line. Parses back to an equal config.
    pub fn to_text(&self) -> String {
        REQUIRED_KEYS
            .iter()
            .chain(OPTIONAL_KEYS.iter())
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }

    /// Range checks. Model-validity limits are left to the model.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |key: &str, reason: String| ConfigError::Range {
            key: key.to_string(),
            reason,
        };
        if self.grid_points < MIN_GRID_POINTS {
            return Err(range(
                "run.grid_points",
                format!("must be >= {MIN_GRID_POINTS}, got {}", self.grid_points),
            ));
        }
        if !(self.grid_start_hz > 0.0 && self.grid_start_hz.is_finite()) {
            return Err(range("run.grid_start_hz", format!("must be > 0, got {}", self.grid_start_hz)));
        }
        if !(self.grid_stop_hz > self.grid_start_hz && self.grid_stop_hz.is_finite()) {
            return Err(range(
                "run.grid_stop_hz",
                format!("must exceed run.grid_start_hz, got {}", self.grid_stop_hz),
            ));
        }
        for (key, v) in [
            ("run.signal_level_db", self.signal_level_db),
            ("run.drift_hz_per_min", self.drift_hz_per_min),
            ("drive.detuning_over_gamma", self.drive_detuning_over_gamma),
        ] {
            if !v.is_finite() {
                return Err(range(key, format!("must be finite, got {v}")));
            }
        }
        let lab = &self.lab;
        if lab.welch_segments == 0 {
            return Err(range("lab.welch_segments", "must be >= 1".into()));
        }
        if !(0.0..=0.9).contains(&lab.overlap) {
            return Err(range("lab.overlap", format!("must lie in [0, 0.9], got {}", lab.overlap)));
        }
        for (key, v) in [
            ("lab.bins_per_linewidth", lab.bins_per_linewidth),
            ("lab.span_linewidths", lab.span_linewidths),
            ("lab.analyzer_gain", lab.analyzer_gain),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(range(key, format!("must be > 0, got {v}")));
            }
        }
        for (key, v) in [("lab.sweep_time_s", lab.sweep_time_s), ("lab.reconfigure_s", lab.reconfigure_s)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(range(key, format!("must be >= 0, got {v}")));
            }
        }
        // Parameter domains are checked by the model constructors.
        let domain = |e: ModelError| match e {
            ModelError::ParameterDomain { name, reason } => Some(range(name, reason)),
            _ => None,
        };
        if let Err(e) = self.mechanical() {
            if let Some(e) = domain(e) {
                return Err(e);
            }
        }
        if let Err(e) = BathParams::new(self.bath_temperature_k) {
            if let Some(e) = domain(e) {
                return Err(e);
            }
        }
        match self.optical() {
            Ok(optical) => {
                if let Err(e) = DriveState::new(&optical, self.drive_power_w, self.drive_detuning_over_gamma) {
                    if let Some(e) = domain(e) {
                        return Err(e);
                    }
                }
            }
            Err(e) => {
                if let Some(e) = domain(e) {
                    return Err(e);
                }
            }
        }
        Ok(())
    }

    pub fn optical(&self) -> backaction::Result<OpticalParams> {
        OpticalParams::new(self.cavity_length_m, self.cavity_finesse, self.cavity_wavelength_m)
    }

    pub fn mechanical(&self) -> backaction::Result<MechanicalParams> {
        MechanicalParams::from_frequency_hz(self.mirror_f_m_hz, self.mirror_mass_kg, self.mirror_q)
    }

    pub fn bath(&self) -> backaction::Result<BathParams> {
        BathParams::new(self.bath_temperature_k)
    }

    pub fn grid(&self) -> backaction::Result<FrequencyGrid> {
        FrequencyGrid::linear_hz(self.grid_start_hz, self.grid_stop_hz, self.grid_points)
    }

    pub fn system(&self) -> backaction::Result<CavitySystem> {
        CavitySystem::with_drive(
            self.optical()?,
            self.mechanical()?,
            self.drive_power_w,
            self.drive_detuning_over_gamma,
        )
    }

    pub fn protocol(&self) -> backaction::Result<ProtocolConfig> {
        let mut p = ProtocolConfig::new(
            self.optical()?,
            self.mechanical()?,
            self.drive_power_w,
            self.drive_detuning_over_gamma,
            self.bath()?,
            self.grid()?,
        );
        p.signal_level_db = self.signal_level_db;
        p.drift_hz_per_min = self.drift_hz_per_min;
        p.settings = self.lab;
        Ok(p)
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut config = RunConfig::blank();
    let mut seen: Vec<&str> = Vec::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line_no = i + 1;
        let syntax = |message: String| ConfigError::Syntax {
            line: line_no,
            message,
        };
        let line = match raw_line.find('#') {
            Some(at) => &raw_line[..at],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| syntax(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let Some(&known) = REQUIRED_KEYS
            .iter()
            .chain(OPTIONAL_KEYS.iter())
            .find(|k| **k == key)
        else {
            return Err(syntax(format!("unknown key `{key}`")));
        };
        if seen.contains(&known) {
            return Err(syntax(format!("duplicate key `{key}`")));
        }
        if value.trim().is_empty() {
            return Err(syntax(format!("missing value for `{key}`")));
        }
        config.set(known, value).map_err(|m| syntax(format!("{key}: {m}")))?;
        seen.push(known);
    }
    let missing: Vec<&'static str> = REQUIRED_KEYS
        .iter()
        .copied()
        .filter(|k| !seen.contains(k))
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::Missing(missing));
    }
    config.validate()?;
    Ok(config)
}
