//! Run configuration: flat JSON key/value files, validation, defaults,
//! figure presets, and the CLI error-to-exit-code mapping.

use crate::oracle::OracleError;
use crate::reservoir::{CouplingStrength, DomModel};
use crate::spectra::{EmitterConfig, FrequencyGrid, Normalization, SpectrumError};
use crate::ConfigError;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Flat, fully explicit run description as read from a config file.
/// Unknown keys are rejected at parse time; keys that do not apply to the
/// chosen scheme/model are rejected at validation time with the offending
/// field named.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// "lambda" or "driven".
    pub scheme: String,
    /// "isotropic_edge", "smoothed_edge", "delta_defect" or
    /// "lorentzian_defect".
    pub model: String,
    /// Flat-channel rate; defaults to 1 (the frequency unit).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Structured-reservoir coupling g (enters kernels as g^{3/2}).
    pub g: f64,
    /// Band-edge detuning δ_g.
    pub delta_g: f64,
    /// Smoothing parameter ε (smoothed_edge only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Defect coupling g₁ (defect models only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1: Option<f64>,
    /// Defect detuning δ_c (defect models only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_c: Option<f64>,
    /// Defect linewidth γ_c (lorentzian_defect only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_c: Option<f64>,
    /// Rabi frequency Ω (driven scheme only; defaults to 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Laser detuning δ (driven scheme only; defaults to 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Initial emitting-state amplitude (driven scheme only; default 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2_0: Option<f64>,
    /// Initial second-upper-state amplitude (driven scheme only; default 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b3_0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    /// "raw" (default) or "peak".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<String>,
    /// Default output path; the CLI --out flag overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    /// Oracle horizon (default 50).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Volterra oracle step (default 0.005).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Mode-comb bin width (default 0.02).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comb_spacing: Option<f64>,
    /// Comb-oracle RK4 step (default 0.002).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comb_dt: Option<f64>,
    /// Marks an in-gap population-trapping run (lifts the oracle residual
    /// check and the t_max ≥ 10/γ requirement).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trapping: Option<bool>,
}

/// Time-domain oracle parameters with their defaults applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings {
    pub t_max: f64,
    pub dt: f64,
    pub comb_spacing: f64,
    pub comb_dt: f64,
    pub trapping: bool,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            t_max: 50.0,
            dt: 0.005,
            comb_spacing: 0.02,
            comb_dt: 0.002,
            trapping: false,
        }
    }
}

fn reject_if_present(value: Option<f64>, field: &'static str, scope: &str) -> Result<(), ConfigError> {
    if value.is_some() {
        return Err(ConfigError {
            field,
            reason: format!("only applies to {scope}"),
        });
    }
    Ok(())
}

fn require(value: Option<f64>, field: &'static str, scope: &str) -> Result<f64, ConfigError> {
    value.ok_or_else(|| ConfigError {
        field,
        reason: format!("required for {scope}"),
    })
}

impl RunConfig {
    /// Bare skeleton with every optional field unset.
    fn new(scheme: &str, model: &str, g: f64, delta_g: f64) -> Self {
        RunConfig {
            scheme: scheme.to_string(),
            model: model.to_string(),
            gamma: None,
            g,
            delta_g,
            epsilon: None,
            g1: None,
            delta_c: None,
            gamma_c: None,
            omega: None,
            delta: None,
            b2_0: None,
            b3_0: None,
            grid_min: None,
            grid_max: None,
            grid_n: None,
            normalization: None,
            out: None,
            t_max: None,
            dt: None,
            comb_spacing: None,
            comb_dt: None,
            trapping: None,
        }
    }

    /// Builds the reservoir model, rejecting parameters that do not belong
    /// to the chosen variant.
    pub fn dom_model(&self) -> Result<DomModel, ConfigError> {
        match self.model.as_str() {
            "isotropic_edge" => {
                reject_if_present(self.epsilon, "epsilon", "model = \"smoothed_edge\"")?;
                reject_if_present(self.g1, "g1", "defect models")?;
                reject_if_present(self.delta_c, "delta_c", "defect models")?;
                reject_if_present(self.gamma_c, "gamma_c", "model = \"lorentzian_defect\"")?;
                DomModel::isotropic_edge(self.delta_g)
            }
            "smoothed_edge" => {
                reject_if_present(self.g1, "g1", "defect models")?;
                reject_if_present(self.delta_c, "delta_c", "defect models")?;
                reject_if_present(self.gamma_c, "gamma_c", "model = \"lorentzian_defect\"")?;
                let epsilon = require(self.epsilon, "epsilon", "model = \"smoothed_edge\"")?;
                DomModel::smoothed_edge(self.delta_g, epsilon)
            }
            "delta_defect" => {
                reject_if_present(self.epsilon, "epsilon", "model = \"smoothed_edge\"")?;
                reject_if_present(self.gamma_c, "gamma_c", "model = \"lorentzian_defect\"")?;
                let g1 = require(self.g1, "g1", "defect models")?;
                let delta_c = require(self.delta_c, "delta_c", "defect models")?;
                DomModel::delta_defect(self.delta_g, g1, delta_c)
            }
            "lorentzian_defect" => {
                reject_if_present(self.epsilon, "epsilon", "model = \"smoothed_edge\"")?;
                let g1 = require(self.g1, "g1", "defect models")?;
                let delta_c = require(self.delta_c, "delta_c", "defect models")?;
                let gamma_c = require(self.gamma_c, "gamma_c", "model = \"lorentzian_defect\"")?;
                DomModel::lorentzian_defect(self.delta_g, g1, delta_c, gamma_c)
            }
            other => Err(ConfigError {
                field: "model",
                reason: format!(
                    "unknown model \"{other}\" (expected isotropic_edge, smoothed_edge, \
                     delta_defect or lorentzian_defect)"
                ),
            }),
        }
    }

    /// Builds the validated emitter configuration.
    pub fn emitter(&self) -> Result<EmitterConfig, ConfigError> {
        let model = self.dom_model()?;
        let gamma = self.gamma.unwrap_or(1.0);
        let g = CouplingStrength::new(self.g)?;
        match self.scheme.as_str() {
            "lambda" => {
                reject_if_present(self.omega, "omega", "scheme = \"driven\"")?;
                reject_if_present(self.delta, "delta", "scheme = \"driven\"")?;
                reject_if_present(self.b2_0, "b2_0", "scheme = \"driven\"")?;
                reject_if_present(self.b3_0, "b3_0", "scheme = \"driven\"")?;
                EmitterConfig::lambda(gamma, g, model)
            }
            "driven" => EmitterConfig::driven(
                gamma,
                g,
                model,
                self.omega.unwrap_or(0.0),
                self.delta.unwrap_or(0.0),
                self.b2_0.unwrap_or(1.0),
                self.b3_0.unwrap_or(0.0),
            ),
            other => Err(ConfigError {
                field: "scheme",
                reason: format!("unknown scheme \"{other}\" (expected \"lambda\" or \"driven\")"),
            }),
        }
    }

    /// Frequency grid with defaults applied.
    pub fn grid(&self) -> Result<FrequencyGrid, ConfigError> {
        FrequencyGrid::new(
            self.grid_min.unwrap_or(FrequencyGrid::DEFAULT_MIN),
            self.grid_max.unwrap_or(FrequencyGrid::DEFAULT_MAX),
            self.grid_n.unwrap_or(FrequencyGrid::DEFAULT_N),
        )
    }

    /// Output normalization with the default applied.
    pub fn normalization(&self) -> Result<Normalization, ConfigError> {
        match self.normalization.as_deref() {
            None | Some("raw") => Ok(Normalization::Raw),
            Some("peak") => Ok(Normalization::PeakUnit),
            Some(other) => Err(ConfigError {
                field: "normalization",
                reason: format!("unknown normalization \"{other}\" (expected \"raw\" or \"peak\")"),
            }),
        }
    }

    /// Oracle settings with defaults applied and invariants checked.
    pub fn oracle_settings(&self) -> Result<OracleSettings, ConfigError> {
        let defaults = OracleSettings::default();
        let settings = OracleSettings {
            t_max: self.t_max.unwrap_or(defaults.t_max),
            dt: self.dt.unwrap_or(defaults.dt),
            comb_spacing: self.comb_spacing.unwrap_or(defaults.comb_spacing),
            comb_dt: self.comb_dt.unwrap_or(defaults.comb_dt),
            trapping: self.trapping.unwrap_or(false),
        };
        let gamma = self.gamma.unwrap_or(1.0);
        if !(settings.t_max.is_finite() && settings.t_max > 0.0) {
            return Err(ConfigError {
                field: "t_max",
                reason: format!("must be > 0 (got {})", settings.t_max),
            });
        }
        if !settings.trapping && settings.t_max < 10.0 / gamma {
            return Err(ConfigError {
                field: "t_max",
                reason: format!(
                    "horizon {} is shorter than 10/gamma = {}; the projected spectrum would be \
                     truncated (set trapping = true for in-gap runs)",
                    settings.t_max,
                    10.0 / gamma
                ),
            });
        }
        for (value, field) in [
            (settings.dt, "dt"),
            (settings.comb_spacing, "comb_spacing"),
            (settings.comb_dt, "comb_dt"),
        ] {
            if !(value.is_finite() && value > 0.0 && value < settings.t_max) {
                return Err(ConfigError {
                    field,
                    reason: format!("must lie in (0, t_max) (got {value})"),
                });
            }
        }
        Ok(settings)
    }

    /// Runs every validation, returning the first failure.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.emitter()?;
        self.grid()?;
        self.normalization()?;
        self.oracle_settings()?;
        Ok(())
    }
}

/// Errors of the command-line front end, each with a distinct exit code:
/// 1 I/O, 2 parse, 3 validation, 4 degenerate spectrum, 5 oracle failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Validation(#[from] ConfigError),
    #[error("{0}")]
    Degenerate(#[from] SpectrumError),
    #[error("{0}")]
    Oracle(#[from] OracleError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Degenerate(_) => 4,
            CliError::Oracle(_) => 5,
        }
    }
}

/// Loads and fully validates a config file.
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)?;
    let cfg: RunConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// The three curve variants (label, band-edge detuning) used by every
/// figure preset.
pub const FIGURE_VARIANTS: [(&str, f64); 3] = [("dotted", 0.0), ("dashed", 1.0), ("full", -1.0)];

/// Parameter presets for figures 2–9: Λ scheme for 2–5, driven scheme
/// (Ω = 1, δ = −1.5, b₂(0) = 1) for 6–9; models cycle through isotropic,
/// smoothed (ε = 0.3), delta defect and Lorentzian defect (γ_c = 1), with
/// δ_c = −2 for the Λ figures and −2.5 for the driven ones. All rates in
/// units of γ = 1, g = 1.
pub fn figure_curves(id: u8) -> Option<Vec<(String, RunConfig)>> {
    if !(2..=9).contains(&id) {
        return None;
    }
    let driven = id >= 6;
    let scheme = if driven { "driven" } else { "lambda" };
    let delta_c = if driven { -2.5 } else { -2.0 };
    let curves = FIGURE_VARIANTS
        .iter()
        .map(|(label, delta_g)| {
            let mut cfg = match (id - 2) % 4 {
                0 => RunConfig::new(scheme, "isotropic_edge", 1.0, *delta_g),
                1 => {
                    let mut c = RunConfig::new(scheme, "smoothed_edge", 1.0, *delta_g);
                    c.epsilon = Some(0.3);
                    c
                }
                2 => {
                    let mut c = RunConfig::new(scheme, "delta_defect", 1.0, *delta_g);
                    c.g1 = Some(1.0);
                    c.delta_c = Some(delta_c);
                    c
                }
                _ => {
                    let mut c = RunConfig::new(scheme, "lorentzian_defect", 1.0, *delta_g);
                    c.g1 = Some(1.0);
                    c.delta_c = Some(delta_c);
                    c.gamma_c = Some(1.0);
                    c
                }
            };
            cfg.gamma = Some(1.0);
            if driven {
                cfg.omega = Some(1.0);
                cfg.delta = Some(-1.5);
                cfg.b2_0 = Some(1.0);
                cfg.b3_0 = Some(0.0);
            }
            (label.to_string(), cfg)
        })
        .collect();
    Some(curves)
}
