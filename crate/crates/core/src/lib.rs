//! Spontaneous-emission spectra and dark lines for a Λ-type and a
//! laser-driven emitter coupled to one flat (Markovian) and one structured
//! reservoir.
//!
//! The structured reservoir is described by one of four density-of-modes
//! models (sharp band edge, smoothed edge, edge plus a discrete or a
//! Lorentzian defect mode). The flat-channel spectrum S(δλ) then has a
//! closed rational form whose exact zeros — dark lines — are predicted,
//! located and classified. Two independent time-domain oracles (a
//! product-integration Volterra solver and a discretized mode-comb
//! evolution) validate every closed form.
//!
//! Module map:
//! - [`reservoir`]: density-of-modes models, frequency- and time-domain
//!   memory kernels;
//! - [`spectra`]: pole-safe closed-form spectra for both schemes, grids,
//!   normalization;
//! - [`darklines`]: dark-line catalogue, zero finding and dip detection;
//! - [`oracle`]: Volterra and mode-comb validators plus the comparison
//!   metric;
//! - [`special`], [`quad`]: the numerical primitives (oscillatory Fresnel
//!   integrals, erfc along the e^{iπ/4} ray, adaptive Simpson quadrature);
//! - [`config`], [`report`]: config files, figure presets, CSV/summary
//!   output for the CLI.

pub mod config;
pub mod darklines;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod reservoir;
pub mod special;
pub mod spectra;

/// An invalid configuration value, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {field}: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

pub use config::{figure_curves, load_config, CliError, OracleSettings, RunConfig};
pub use darklines::{
    count_peaks, detect_dips, find_zeros, predict_dark_lines, DarkLine, Origin,
};
pub use oracle::{
    comb_trajectory, compare_spectra, discretized_mode_evolve, solve_volterra,
    spectrum_from_trajectory, CombOptions, ModeComb, OracleError, Trajectory,
};
pub use reservoir::{
    branch_sqrt, defect_channel, dom_density, kernel_laplace, kernel_time, CouplingStrength,
    DefectChannel, DomModel, KernelError,
};
pub use spectra::{
    driven_spectrum, eval_grid, lambda_spectrum, spectrum_value, EmitterConfig, FrequencyGrid,
    Normalization, Scheme, Spectrum, SpectrumError,
};
