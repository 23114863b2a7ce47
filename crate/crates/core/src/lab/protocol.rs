//! The three-step measurement protocol.
//!
//! 1. With the probe detuned, acquire the mirror thermal noise and fit it to
//!    obtain the effective mode.
//! 2. Sweep the signal modulation across the resonance with the network
//!    analyzer.
//! 3. Switch the probe off and acquire the bare thermal noise (resonant,
//!    low-power locking beam) to calibrate the intrinsic mode, which has
//!    drifted linearly in frequency since the start of the run.
//!
//! Thermal spectra are recorded as a zoom-mode analyzer would: complex
//! baseband samples around the expected resonance, Welch averaged. Elapsed
//! time is the sum of acquisition durations, the sweep time and a fixed
//! reconfiguration time between steps.

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::fit::{fit_lorentzian, FitResult, LorentzianGuess};
use super::sweep::{swept_sine_response, DEFAULT_SIGNAL_LEVEL_DB};
use super::synth::synthesize_baseband;
use super::thermal::{BathParams, PsdModel, ThermalModel};
use super::welch::{baseband_periodogram, samples_for};
use crate::error::{Error, Result};
use crate::grid::FrequencyGrid;
use crate::io::{write_atomic, CsvTable};
use crate::params::{CavitySystem, DriveState, MechanicalParams, OpticalParams};
use crate::response::EffectiveModeParams;
use crate::spectrum::SpectrumTrace;

/// Center tolerance of a recovered mode, in linewidths.
pub const CENTER_TOLERANCE: f64 = 1.0 / 20.0;
/// Relative tolerance of a recovered linewidth.
pub const WIDTH_TOLERANCE: f64 = 0.05;

/// Analyzer and timing assumptions of the emulated experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSettings {
    pub welch_segments: usize,
    pub overlap: f64,
    /// Frequency bins per expected linewidth.
    pub bins_per_linewidth: f64,
    /// Analyzer span in expected linewidths.
    pub span_linewidths: f64,
    /// Network-analyzer sweep duration, s.
    pub sweep_time_s: f64,
    /// Dead time between steps, s.
    pub reconfigure_s: f64,
    /// Coherent-averaging gain of the network analyzer over the thermal floor.
    pub analyzer_gain: f64,
}

impl Default for ProtocolSettings {
    fn default() -> Self {
        ProtocolSettings {
            welch_segments: 200,
            overlap: 0.5,
            bins_per_linewidth: 16.0,
            span_linewidths: 100.0,
            sweep_time_s: 120.0,
            reconfigure_s: 60.0,
            analyzer_gain: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub optical: OpticalParams,
    pub mechanical: MechanicalParams,
    /// Probe power, W.
    pub power: f64,
    pub detuning_over_gamma: f64,
    pub bath: BathParams,
    pub sweep_grid: FrequencyGrid,
    pub signal_level_db: f64,
    pub drift_hz_per_min: f64,
    pub settings: ProtocolSettings,
}

impl ProtocolConfig {
    /// Default signal level and drift, default settings.
    pub fn new(
        optical: OpticalParams,
        mechanical: MechanicalParams,
        power: f64,
        detuning_over_gamma: f64,
        bath: BathParams,
        sweep_grid: FrequencyGrid,
    ) -> Self {
        ProtocolConfig {
            optical,
            mechanical,
            power,
            detuning_over_gamma,
            bath,
            sweep_grid,
            signal_level_db: DEFAULT_SIGNAL_LEVEL_DB,
            drift_hz_per_min: 0.1,
            settings: ProtocolSettings::default(),
        }
    }

    pub fn detuned_system(&self) -> Result<CavitySystem> {
        CavitySystem::with_drive(self.optical, self.mechanical, self.power, self.detuning_over_gamma)
    }
}

/// Zoom-analyzer acquisition around `center`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcquisitionPlan {
    /// rad/s
    pub center: f64,
    /// Hz
    pub sample_rate: f64,
    pub segment_length: usize,
    pub segments: usize,
    pub overlap: f64,
}

impl AcquisitionPlan {
    /// Picks a power-of-two span and segment length so that the span covers
    /// `span_linewidths` and the resolution `bins_per_linewidth`.
    pub fn for_linewidth(center: f64, linewidth: f64, settings: &ProtocolSettings) -> Self {
        let width_hz = crate::rad_to_hz(linewidth);
        let sample_rate = ((settings.span_linewidths * width_hz).ceil() as usize)
            .next_power_of_two()
            .max(16) as f64;
        let segment_length = ((settings.bins_per_linewidth * sample_rate / width_hz).ceil() as usize)
            .next_power_of_two()
            .max(16);
        AcquisitionPlan {
            center,
            sample_rate,
            segment_length,
            segments: settings.welch_segments,
            overlap: settings.overlap,
        }
    }

    pub fn samples(&self) -> usize {
        samples_for(self.segments, self.segment_length, self.overlap)
    }

    /// s
    pub fn duration(&self) -> f64 {
        self.samples() as f64 / self.sample_rate
    }

    pub fn acquire<M: PsdModel + ?Sized>(&self, model: &M, seed: u64) -> Result<SpectrumTrace> {
        let z = synthesize_baseband(model, self.center, self.duration(), self.sample_rate, seed)?;
        baseband_periodogram(&z, self.sample_rate, self.center, self.segment_length, self.overlap)
    }
}

/// Intrinsic mode parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BareModeEstimate {
    /// rad/s
    pub omega_m: f64,
    /// rad/s
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub seed: u64,
    pub thermal_psd_detuned: SpectrumTrace,
    /// Normalized network-analyzer trace.
    pub swept_response: SpectrumTrace,
    pub thermal_psd_bare: SpectrumTrace,
    pub fit_detuned: FitResult,
    pub fit_bare: FitResult,
    pub fitted_eff: EffectiveModeParams,
    pub fitted_bare: BareModeEstimate,
    /// Mode parameters the synthesized data were drawn from.
    pub injected_eff: EffectiveModeParams,
    pub injected_bare: BareModeEstimate,
    /// Resonance shift of the bare mode at step 3, Hz.
    pub drift_applied_hz: f64,
    pub elapsed_at_bare_s: f64,
    pub total_duration_s: f64,
    pub detuned_plan: AcquisitionPlan,
    pub bare_plan: AcquisitionPlan,
}

fn within(center: f64, width: f64, true_center: f64, true_width: f64) -> bool {
    (center - true_center).abs() <= CENTER_TOLERANCE * true_width
        && (width / true_width - 1.0).abs() <= WIDTH_TOLERANCE
}

impl ExperimentRecord {
    /// Both fits converged and match the injected modes within tolerance.
    pub fn recovered(&self) -> bool {
        self.fit_detuned.converged
            && self.fit_bare.converged
            && within(
                self.fitted_eff.omega_eff,
                self.fitted_eff.gamma_eff,
                self.injected_eff.omega_eff,
                self.injected_eff.gamma_eff,
            )
            && within(
                self.fitted_bare.omega_m,
                self.fitted_bare.damping,
                self.injected_bare.omega_m,
                self.injected_bare.damping,
            )
    }

    /// `|χ_eff/χ|²` rebuilt from the two fitted oscillators; the mass
    /// cancels.
    pub fn implied_amplification(&self, omega: f64) -> f64 {
        let osc = |w0: f64, g: f64| {
            num_complex::Complex64::new(w0 * w0 - omega * omega, -omega * g)
        };
        let bare = osc(self.fitted_bare.omega_m, self.fitted_bare.damping);
        let eff = osc(self.fitted_eff.omega_eff, self.fitted_eff.gamma_eff);
        bare.norm_sqr() / eff.norm_sqr()
    }

    /// File names and contents of the record directory.
    pub fn files(&self) -> Result<Vec<(&'static str, String)>> {
        let psd_table = |t: &SpectrumTrace| {
            CsvTable::new(t.frequency_hz()).column("psd_m2_per_hz", t.values.clone())
        };
        Ok(vec![
            ("thermal_psd_detuned.csv", psd_table(&self.thermal_psd_detuned)?.render()),
            (
                "swept_response.csv",
                CsvTable::new(self.swept_response.frequency_hz())
                    .column("normalized_response", self.swept_response.values.clone())?
                    .render(),
            ),
            ("thermal_psd_bare.csv", psd_table(&self.thermal_psd_bare)?.render()),
            ("summary.txt", self.summary()),
        ])
    }

    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, text) in self.files()? {
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
        Ok(())
    }

    /// `key = value` lines with fitted parameters, drift and seed.
    pub fn summary(&self) -> String {
        let hz = crate::rad_to_hz;
        let lines: Vec<(&str, String)> = vec![
            ("seed", self.seed.to_string()),
            ("drift_applied_hz", self.drift_applied_hz.to_string()),
            ("elapsed_at_bare_s", self.elapsed_at_bare_s.to_string()),
            ("total_duration_s", self.total_duration_s.to_string()),
            ("fitted_eff.f_hz", hz(self.fitted_eff.omega_eff).to_string()),
            ("fitted_eff.gamma_rad_s", self.fitted_eff.gamma_eff.to_string()),
            ("fitted_eff.stable", self.fitted_eff.stable.to_string()),
            ("fitted_eff.converged", self.fit_detuned.converged.to_string()),
            ("fitted_eff.residual", self.fit_detuned.residual_norm.to_string()),
            ("fitted_bare.f_hz", hz(self.fitted_bare.omega_m).to_string()),
            ("fitted_bare.gamma_rad_s", self.fitted_bare.damping.to_string()),
            ("fitted_bare.converged", self.fit_bare.converged.to_string()),
            ("fitted_bare.residual", self.fit_bare.residual_norm.to_string()),
            ("injected_eff.f_hz", hz(self.injected_eff.omega_eff).to_string()),
            ("injected_eff.gamma_rad_s", self.injected_eff.gamma_eff.to_string()),
            ("injected_bare.f_hz", hz(self.injected_bare.omega_m).to_string()),
            ("injected_bare.gamma_rad_s", self.injected_bare.damping.to_string()),
            ("recovered", self.recovered().to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Runs the full protocol. Identical config and seed give identical records.
pub fn run_protocol(config: &ProtocolConfig, seed: u64) -> Result<ExperimentRecord> {
    let settings = &config.settings;
    for (name, v) in [
        ("lab.sweep_time_s", settings.sweep_time_s),
        ("lab.reconfigure_s", settings.reconfigure_s),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::domain(name, format!("must be finite and >= 0, got {v}")));
        }
    }
    if !config.drift_hz_per_min.is_finite() {
        return Err(Error::domain("run.drift_hz_per_min", "must be finite"));
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let detuned_seed = seeds.next_u64();
    let bare_seed = seeds.next_u64();

    // Step 1: detuned probe, thermal noise of the effective mode.
    let detuned = ThermalModel::new(config.detuned_system()?, config.bath)?;
    let injected_eff = detuned.mode();
    let detuned_plan =
        AcquisitionPlan::for_linewidth(injected_eff.omega_eff, injected_eff.gamma_eff, settings);
    let thermal_psd_detuned = detuned_plan.acquire(&detuned, detuned_seed)?;
    let fit_detuned = fit_lorentzian(
        &thermal_psd_detuned,
        LorentzianGuess::from_trace(&thermal_psd_detuned),
    )?;
    let fitted_eff = EffectiveModeParams {
        omega_eff: fit_detuned.center,
        gamma_eff: fit_detuned.width,
        stable: fit_detuned.width > 0.0,
    };

    // Step 2: swept-sine response.
    let swept_response = swept_sine_response(
        detuned.system(),
        &config.bath,
        &config.sweep_grid,
        config.signal_level_db,
        settings.analyzer_gain,
    )?;

    // Step 3: probe off, bare mode after drift.
    let elapsed_at_bare_s =
        detuned_plan.duration() + settings.reconfigure_s + settings.sweep_time_s + settings.reconfigure_s;
    let drift_applied_hz = config.drift_hz_per_min * elapsed_at_bare_s / 60.0;
    let drifted = config
        .mechanical
        .with_omega_m(config.mechanical.omega_m() + crate::hz_to_rad(drift_applied_hz))?;
    let bare_system = CavitySystem::new(config.optical, drifted, DriveState::off(&config.optical));
    let bare = ThermalModel::new(bare_system, config.bath)?;
    let injected_bare = BareModeEstimate {
        omega_m: bare.mode().omega_eff,
        damping: drifted.damping(),
    };
    let bare_plan =
        AcquisitionPlan::for_linewidth(config.mechanical.omega_m(), config.mechanical.damping(), settings);
    let thermal_psd_bare = bare_plan.acquire(&bare, bare_seed)?;
    let fit_bare = fit_lorentzian(&thermal_psd_bare, LorentzianGuess::from_trace(&thermal_psd_bare))?;

    Ok(ExperimentRecord {
        seed,
        thermal_psd_detuned,
        swept_response,
        thermal_psd_bare,
        fit_detuned,
        fit_bare,
        fitted_eff,
        fitted_bare: BareModeEstimate {
            omega_m: fit_bare.center,
            damping: fit_bare.width,
        },
        injected_eff,
        injected_bare,
        drift_applied_hz,
        elapsed_at_bare_s,
        total_duration_s: elapsed_at_bare_s + bare_plan.duration(),
        detuned_plan,
        bare_plan,
    })
}
