//! Command implementations. Each returns the files it would write and its
//! summary lines without touching the filesystem.

use backaction::io::CsvTable;
use backaction::lab::{run_protocol, swept_sine_response, PsdModel, ThermalModel};
use backaction::noise::sensitivity_curve;
use backaction::response::{amplification_factor, effective_mode};
use backaction::{
    rad_to_hz, CavitySystem, EffectiveModeParams, Error as ModelError, FrequencyGrid, NoiseModel,
    SensitivityCurve, SqlReference,
};
use rayon::prelude::*;

use crate::config::{is_known_key, ConfigError, RunConfig};
use crate::error::{CliError, Result};
use crate::output::OutputSet;

/// Which sensitivity curves to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSelection {
    Both,
    AmplifiedOnly,
    UnamplifiedOnly,
}

impl CurveSelection {
    fn amplified(self) -> bool {
        self != CurveSelection::UnamplifiedOnly
    }

    fn unamplified(self) -> bool {
        self != CurveSelection::AmplifiedOnly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CurveOptions {
    pub model: NoiseModel,
    pub curves: CurveSelection,
}

impl Default for CurveOptions {
    fn default() -> Self {
        CurveOptions {
            model: NoiseModel::FiniteBandwidth,
            curves: CurveSelection::Both,
        }
    }
}

fn khz(omega: f64) -> f64 {
    rad_to_hz(omega) / 1e3
}

/// The effective mode, rejecting configurations that self-oscillate.
fn stable_mode(system: &CavitySystem) -> Result<EffectiveModeParams> {
    let mode = effective_mode(system)?;
    if !mode.stable {
        return Err(ModelError::Unstable {
            gamma_eff: mode.gamma_eff,
        }
        .into());
    }
    Ok(mode)
}

fn amplification_curve(system: &CavitySystem, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    grid.iter()
        .map(|w| amplification_factor(system, w).map_err(CliError::from))
        .collect()
}

/// Amplification traces, one per detuning, plus a combined table.
pub fn amplification(config: &RunConfig, detunings: &[f64]) -> Result<OutputSet> {
    let base = config.system()?;
    let grid = config.grid()?;
    let mut out = OutputSet::new();
    let mut combined = CsvTable::new(grid.to_hz());
    for &d in detunings {
        let system = base.with_detuning(d)?;
        let mode = stable_mode(&system)?;
        let values = amplification_curve(&system, &grid)?;
        let (i, peak) = values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        out.add(
            format!("amplification_detuning_{d}.csv"),
            CsvTable::new(grid.to_hz())
                .column("amplification", values.clone())?
                .render(),
        );
        combined = combined.column(format!("amplification_detuning_{d}"), values)?;
        out.say(format!(
            "amplification detuning {d}: peak A {peak:.4} at {:.4} kHz, f_eff {:.4} kHz, \
             gamma_eff/2pi {:.4} Hz",
            khz(grid.as_slice()[i]),
            khz(mode.omega_eff),
            rad_to_hz(mode.gamma_eff)
        ));
    }
    if detunings.len() > 1 {
        out.add("amplification.csv", combined.render());
    }
    Ok(out)
}

fn describe_curve(name: &str, curve: &SensitivityCurve) -> String {
    let (we, de) = curve.best_improvement_db(SqlReference::Effective);
    let (wb, db) = curve.best_improvement_db(SqlReference::Bare);
    format!(
        "sensitivity {name}: max {de:.3} dB beyond effective SQL at {:.4} kHz, \
         {db:.3} dB beyond bare SQL at {:.4} kHz",
        khz(we),
        khz(wb)
    )
}

/// Equivalent signal noise curves and both quantum limits.
pub fn sensitivity(config: &RunConfig, options: CurveOptions) -> Result<OutputSet> {
    let system = config.system()?;
    stable_mode(&system)?;
    let grid = config.grid()?;
    let freq = grid.to_hz();
    let mut out = OutputSet::new();
    let mut combined = CsvTable::new(freq.clone());
    let mut sql = None;
    for (amplified, wanted, name) in [
        (true, options.curves.amplified(), "amplified"),
        (false, options.curves.unamplified(), "unamplified"),
    ] {
        if !wanted {
            continue;
        }
        let curve = sensitivity_curve(&system, &grid, amplified, options.model)?;
        let column = format!("{name}_m2_per_hz");
        out.add(
            format!("sensitivity_{name}.csv"),
            CsvTable::new(freq.clone()).column(&column, curve.values.clone())?.render(),
        );
        combined = combined.column(column, curve.values.clone())?;
        out.say(describe_curve(name, &curve));
        sql = Some((curve.sql_effective, curve.sql_bare));
    }
    let (sql_eff, sql_bare) = sql.expect("at least one curve is selected");
    for (name, values) in [("sql_effective", sql_eff), ("sql_bare", sql_bare)] {
        let column = format!("{name}_m2_per_hz");
        out.add(
            format!("{name}.csv"),
            CsvTable::new(freq.clone()).column(&column, values.clone())?.render(),
        );
        combined = combined.column(column, values)?;
    }
    out.add("sensitivity.csv", combined.render());
    Ok(out)
}

/// Model thermal spectra with the probe on and off, and the swept response.
pub fn spectrum(config: &RunConfig) -> Result<OutputSet> {
    let system = config.system()?;
    let bath = config.bath()?;
    let grid = config.grid()?;
    let freq = grid.to_hz();
    let detuned = ThermalModel::new(system, bath)?;
    let bare = ThermalModel::new(system.undriven(), bath)?;
    let psd = |m: &ThermalModel| grid.iter().map(|w| m.psd(w)).collect::<Vec<f64>>();
    let (psd_detuned, psd_bare) = (psd(&detuned), psd(&bare));
    let swept = swept_sine_response(&system, &bath, &grid, config.signal_level_db, config.lab.analyzer_gain)?;

    let mut out = OutputSet::new();
    out.add(
        "thermal_psd_detuned.csv",
        CsvTable::new(freq.clone()).column("psd_m2_per_hz", psd_detuned.clone())?.render(),
    );
    out.add(
        "thermal_psd_bare.csv",
        CsvTable::new(freq.clone()).column("psd_m2_per_hz", psd_bare.clone())?.render(),
    );
    out.add(
        "thermal_psd.csv",
        CsvTable::new(freq.clone())
            .column("detuned_m2_per_hz", psd_detuned)?
            .column("bare_m2_per_hz", psd_bare)?
            .render(),
    );
    out.add(
        "swept_response.csv",
        CsvTable::new(freq).column("normalized_response", swept.values.clone())?.render(),
    );
    let mode = detuned.mode();
    out.say(format!(
        "thermal detuned: f_eff {:.4} kHz, gamma_eff/2pi {:.4} Hz",
        khz(mode.omega_eff),
        rad_to_hz(mode.gamma_eff)
    ));
    out.say(format!(
        "thermal bare: f_m {:.4} kHz, gamma/2pi {:.4} Hz",
        khz(bare.mode().omega_eff),
        rad_to_hz(bare.mode().gamma_eff)
    ));
    let (i, peak) = swept.peak();
    out.say(format!(
        "swept response: peak {peak:.4} at {:.4} kHz",
        khz(swept.omega[i])
    ));
    Ok(out)
}

/// Runs the emulated three-step measurement.
pub fn experiment(config: &RunConfig) -> Result<OutputSet> {
    let record = run_protocol(&config.protocol()?, config.seed)?;
    let grid = config.grid()?;
    let implied: Vec<f64> = grid.iter().map(|w| record.implied_amplification(w)).collect();
    let (i, peak) = implied
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
    let mut out = OutputSet::new();
    for (name, text) in record.files()? {
        out.add(name, text);
    }
    out.add(
        "implied_amplification.csv",
        CsvTable::new(grid.to_hz()).column("amplification", implied)?.render(),
    );
    out.say(format!(
        "experiment seed {}: fitted f_eff {:.4} kHz, gamma_eff/2pi {:.4} Hz, bare f_m {:.4} kHz \
         (drift {:.3} Hz), implied peak A {peak:.4} at {:.4} kHz, recovered {}",
        record.seed,
        khz(record.fitted_eff.omega_eff),
        rad_to_hz(record.fitted_eff.gamma_eff),
        khz(record.fitted_bare.omega_m),
        record.drift_applied_hz,
        khz(grid.as_slice()[i]),
        record.recovered()
    ));
    Ok(out)
}

fn sweep_point(config: &RunConfig, options: CurveOptions, dir: &str) -> Result<(Vec<f64>, OutputSet)> {
    let system = config.system()?;
    let grid = config.grid()?;
    let mut point = amplification(config, &[config.drive_detuning_over_gamma])?;
    point.extend(sensitivity(config, options)?);
    let values = amplification_curve(&system, &grid)?;
    let mut out = OutputSet::new();
    for (rel, text) in point.files() {
        out.add(std::path::Path::new(dir).join(rel), text.clone());
    }
    for line in point.summary() {
        out.say(format!("[{dir}] {line}"));
    }
    Ok((values, out))
}

/// Repeats the amplification and sensitivity computations with one key
/// varied. Points run on the current rayon pool.
pub fn sweep(config: &RunConfig, key: &str, values: &[String], options: CurveOptions) -> Result<OutputSet> {
    if !is_known_key(key) {
        return Err(ConfigError::UnknownKey(key.to_string()).into());
    }
    if values.is_empty() {
        return Err(CliError::Usage("sweep needs at least one value".into()));
    }
    let results: Vec<Result<(Vec<f64>, OutputSet)>> = values
        .par_iter()
        .map(|value| {
            let wrap = |e: CliError| CliError::SweepPoint {
                key: key.to_string(),
                value: value.clone(),
                source: Box::new(e),
            };
            let mut point = config.clone();
            point
                .set(key, value)
                .map_err(|reason| ConfigError::Range {
                    key: key.to_string(),
                    reason,
                })
                .map_err(|e| wrap(e.into()))?;
            point.validate().map_err(|e| wrap(e.into()))?;
            sweep_point(&point, options, &format!("{key}={}", value.trim())).map_err(wrap)
        })
        .collect();

    // Points only share a frequency axis when the grid itself is not swept.
    let shared_grid = !key.starts_with("run.grid_");
    let mut combined = CsvTable::new(config.grid()?.to_hz());
    let mut out = OutputSet::new();
    for (value, result) in values.iter().zip(results) {
        let (curve, point) = result?;
        if shared_grid {
            combined = combined.column(format!("amplification_{key}={}", value.trim()), curve)?;
        }
        out.extend(point);
    }
    if shared_grid {
        out.add("sweep_amplification.csv", combined.render());
    }
    Ok(out)
}
