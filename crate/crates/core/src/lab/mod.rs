//! Emulation of the measurement protocol: thermal-noise spectra of the
//! detuned and bare mirror mode, a swept-sine network analyzer, Welch
//! spectrum estimation and Lorentzian fitting.

pub mod fit;
pub mod protocol;
pub mod sweep;
pub mod synth;
pub mod thermal;
pub mod welch;

pub use fit::{fit_lorentzian, FitResult, LorentzianGuess};
pub use protocol::{
    run_protocol, AcquisitionPlan, BareModeEstimate, ExperimentRecord, ProtocolConfig,
    ProtocolSettings,
};
pub use sweep::swept_sine_response;
pub use synth::{synthesize_baseband, synthesize_timeseries};
pub use thermal::{thermal_psd, BathParams, LorentzianPsd, PsdModel, ThermalModel};
pub use welch::{baseband_periodogram, periodogram};
