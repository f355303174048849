//! Closed-form long-time emission spectra into the flat (Markovian) channel.
//!
//! The spectrum is S(δλ) = γ |N(δλ)|² / |D(δλ)|², where N/D is the
//! steady-state Laplace amplitude of the emitting level evaluated on the
//! real frequency axis. Both schemes are evaluated in a pole-safe rational
//! form: numerator and denominator are multiplied through by the band-edge
//! root (and by the defect factor for the discrete defect), so every point,
//! including the band edge and the defect frequency, evaluates finitely.
//! This also makes dark-line suppression conditions algebraic: a zero of N
//! survives exactly where D stays nonzero.

use crate::reservoir::{branch_sqrt, CouplingStrength, DomModel};
use crate::ConfigError;
use num_complex::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which emitter is being driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Three-level Λ emitter, initially in the upper state, no laser.
    LambdaType,
    /// Four-level emitter with a laser coupling the two upper states.
    LaserDriven,
}

/// Full problem statement for a spectrum computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitterConfig {
    pub scheme: Scheme,
    /// Flat-channel decay rate; the global frequency unit. Must be > 0.
    pub gamma: f64,
    /// Coupling to the structured reservoir.
    pub g: CouplingStrength,
    pub model: DomModel,
    /// Rabi frequency of the driving laser (laser-driven scheme; 0 for Λ).
    pub omega: f64,
    /// Laser detuning from the driven transition (laser-driven scheme).
    pub delta: f64,
    /// Real initial amplitudes of the two upper states. The Λ scheme fixes
    /// b2_0 = 1, b3_0 = 0; the driven scheme requires b2_0² + b3_0² = 1.
    pub b2_0: f64,
    pub b3_0: f64,
}

impl EmitterConfig {
    /// Λ-type emitter, initially in its emitting state.
    pub fn lambda(gamma: f64, g: CouplingStrength, model: DomModel) -> Result<Self, ConfigError> {
        let cfg = EmitterConfig {
            scheme: Scheme::LambdaType,
            gamma,
            g,
            model,
            omega: 0.0,
            delta: 0.0,
            b2_0: 1.0,
            b3_0: 0.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Laser-driven emitter with real initial amplitudes (b2_0, b3_0).
    #[allow(clippy::too_many_arguments)]
    pub fn driven(
        gamma: f64,
        g: CouplingStrength,
        model: DomModel,
        omega: f64,
        delta: f64,
        b2_0: f64,
        b3_0: f64,
    ) -> Result<Self, ConfigError> {
        let cfg = EmitterConfig {
            scheme: Scheme::LaserDriven,
            gamma,
            g,
            model,
            omega,
            delta,
            b2_0,
            b3_0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Re-checks every invariant.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(ConfigError {
                field: "gamma",
                reason: format!("flat-channel decay rate must be > 0 (got {})", self.gamma),
            });
        }
        self.model.validate()?;
        match self.scheme {
            Scheme::LambdaType => {
                if self.omega != 0.0 || self.delta != 0.0 || self.b2_0 != 1.0 || self.b3_0 != 0.0 {
                    return Err(ConfigError {
                        field: "scheme",
                        reason: "Λ scheme fixes omega = 0, delta = 0, b2_0 = 1, b3_0 = 0"
                            .to_string(),
                    });
                }
            }
            Scheme::LaserDriven => {
                if !(self.omega.is_finite() && self.omega >= 0.0) {
                    return Err(ConfigError {
                        field: "omega",
                        reason: format!("Rabi frequency must be >= 0 (got {})", self.omega),
                    });
                }
                if !self.delta.is_finite() {
                    return Err(ConfigError {
                        field: "delta",
                        reason: format!("laser detuning must be finite (got {})", self.delta),
                    });
                }
                let norm = self.b2_0 * self.b2_0 + self.b3_0 * self.b3_0;
                if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
                    return Err(ConfigError {
                        field: "b2_0",
                        reason: format!(
                            "initial amplitudes must satisfy b2_0² + b3_0² = 1 (got {norm})"
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Uniform inclusive frequency grid for spectrum sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    min: f64,
    max: f64,
    n: usize,
}

impl FrequencyGrid {
    pub const DEFAULT_MIN: f64 = -6.0;
    pub const DEFAULT_MAX: f64 = 6.0;
    /// Default point count. 4801 points on [−6, 6] give spacing 1/400, so
    /// every quarter-integer frequency (all the preset dark-line positions)
    /// lands exactly on a grid point.
    pub const DEFAULT_N: usize = 4801;

    pub fn new(min: f64, max: f64, n: usize) -> Result<Self, ConfigError> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(ConfigError {
                field: "grid_min",
                reason: format!("grid must satisfy min < max (got [{min}, {max}])"),
            });
        }
        if n < 2 {
            return Err(ConfigError {
                field: "grid_n",
                reason: format!("grid needs at least 2 points (got {n})"),
            });
        }
        Ok(FrequencyGrid { min, max, n })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 2 by construction
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        self.min + i as f64 * self.step()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid {
            min: Self::DEFAULT_MIN,
            max: Self::DEFAULT_MAX,
            n: Self::DEFAULT_N,
        }
    }
}

/// Vertical scaling of a sampled spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// γ |N/D|² exactly as the closed form gives it.
    Raw,
    /// Rescaled so the maximum sample is 1 (unless identically zero).
    PeakUnit,
}

/// A sampled spectrum on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: FrequencyGrid,
    values: Vec<f64>,
    normalization: Normalization,
}

impl Spectrum {
    /// Wraps raw (unnormalized) sample values.
    pub fn from_raw_values(grid: FrequencyGrid, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "grid/value length mismatch");
        Spectrum {
            grid,
            values,
            normalization: Normalization::Raw,
        }
    }

    /// Applies the requested normalization (idempotent for `Raw`).
    pub fn normalized(mut self, normalization: Normalization) -> Self {
        if normalization == Normalization::PeakUnit {
            let peak = self.peak();
            if peak > 0.0 {
                for v in &mut self.values {
                    *v /= peak;
                }
            }
        }
        self.normalization = normalization;
        self
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Largest sample value.
    pub fn peak(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }
}

/// Spectrum evaluation failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    /// Numerator and denominator vanished together: a measure-zero
    /// parameter coincidence (e.g. band edge and defect at the same
    /// frequency). Reported rather than silently zeroed.
    #[error("spectrum denominator vanished at delta_lambda = {delta_lambda} (degenerate parameter coincidence)")]
    DegenerateDenominator { delta_lambda: f64 },
}

/// Pole-cleared amplitude pieces shared by both schemes at one frequency.
///
/// `f` is the cleared numerator factor and `d` the cleared denominator of
/// the Λ amplitude, so S_Λ = γ|f|²/|d|². The optional fields carry `f` with
/// one cleared factor divided back out; they exist exactly when that factor
/// was multiplied in, and they let the driven scheme cancel a common root
/// analytically when the laser detuning coincides with it.
struct Parts {
    f: Complex64,
    d: Complex64,
    f_over_r: Option<Complex64>,
    f_over_q: Option<Complex64>,
}

fn lambda_parts(cfg: &EmitterConfig, delta_lambda: f64) -> Parts {
    let a = Complex64::new(0.5 * cfg.gamma, -delta_lambda);
    let c = cfg.g.kernel_scale();
    let trivial = Parts {
        f: Complex64::new(1.0, 0.0),
        d: a,
        f_over_r: None,
        f_over_q: None,
    };
    match cfg.model {
        DomModel::IsotropicEdge { delta_g } => {
            if c > 0.0 {
                let r = branch_sqrt(delta_lambda - delta_g);
                Parts {
                    f: r,
                    d: a * r + c,
                    f_over_r: Some(Complex64::new(1.0, 0.0)),
                    f_over_q: None,
                }
            } else {
                trivial
            }
        }
        DomModel::SmoothedEdge { delta_g, epsilon } => {
            if c > 0.0 {
                let w = I * epsilon.sqrt() + branch_sqrt(delta_lambda - delta_g);
                Parts {
                    f: w,
                    d: a * w + c,
                    f_over_r: None,
                    f_over_q: None,
                }
            } else {
                trivial
            }
        }
        DomModel::EdgePlusDeltaDefect {
            delta_g,
            g1,
            delta_c,
        } => {
            let s = g1 * g1;
            match (c > 0.0, s > 0.0) {
                (true, true) => {
                    let r = branch_sqrt(delta_lambda - delta_g);
                    let q = Complex64::new(delta_lambda - delta_c, 0.0);
                    Parts {
                        f: r * q,
                        d: a * r * q + c * q + I * s * r,
                        f_over_r: Some(q),
                        f_over_q: Some(r),
                    }
                }
                (true, false) => {
                    let r = branch_sqrt(delta_lambda - delta_g);
                    Parts {
                        f: r,
                        d: a * r + c,
                        f_over_r: Some(Complex64::new(1.0, 0.0)),
                        f_over_q: None,
                    }
                }
                (false, true) => {
                    let q = Complex64::new(delta_lambda - delta_c, 0.0);
                    Parts {
                        f: q,
                        d: a * q + I * s,
                        f_over_r: None,
                        f_over_q: Some(Complex64::new(1.0, 0.0)),
                    }
                }
                (false, false) => trivial,
            }
        }
        DomModel::EdgePlusLorentzianDefect {
            delta_g,
            g1,
            delta_c,
            gamma_c,
        } => {
            let s = g1 * g1;
            let l = Complex64::new(0.5 * gamma_c, delta_c - delta_lambda);
            match (c > 0.0, s > 0.0) {
                (true, true) => {
                    let r = branch_sqrt(delta_lambda - delta_g);
                    Parts {
                        f: r * l,
                        d: a * r * l + c * l + s * r,
                        f_over_r: Some(l),
                        f_over_q: None,
                    }
                }
                (true, false) => {
                    let r = branch_sqrt(delta_lambda - delta_g);
                    Parts {
                        f: r,
                        d: a * r + c,
                        f_over_r: Some(Complex64::new(1.0, 0.0)),
                        f_over_q: None,
                    }
                }
                (false, true) => Parts {
                    f: l,
                    d: a * l + s,
                    f_over_r: None,
                    f_over_q: None,
                },
                (false, false) => trivial,
            }
        }
    }
}

fn intensity(
    gamma: f64,
    n: Complex64,
    d: Complex64,
    delta_lambda: f64,
) -> Result<f64, SpectrumError> {
    let dd = d.norm_sqr();
    if dd == 0.0 {
        return Err(SpectrumError::DegenerateDenominator { delta_lambda });
    }
    Ok(gamma * n.norm_sqr() / dd)
}

/// Λ-scheme spectrum at a single frequency.
pub fn lambda_spectrum(cfg: &EmitterConfig, delta_lambda: f64) -> Result<f64, SpectrumError> {
    debug_assert_eq!(cfg.scheme, Scheme::LambdaType);
    let p = lambda_parts(cfg, delta_lambda);
    intensity(cfg.gamma, p.f, p.d, delta_lambda)
}

/// Laser-driven spectrum at a single frequency.
///
/// The general form multiplies the Λ pieces into
/// N = [(δλ − δ) b2_0 + Ω b3_0]·F and D = i(δλ − δ)·D_Λ − Ω²·F.
/// When the laser detuning coincides exactly with the band edge (or the
/// discrete defect), N and D share the cleared root (or defect factor);
/// that common factor is cancelled analytically so the on-point value is
/// the true limit rather than 0/0.
pub fn driven_spectrum(cfg: &EmitterConfig, delta_lambda: f64) -> Result<f64, SpectrumError> {
    debug_assert_eq!(cfg.scheme, Scheme::LaserDriven);
    let p = lambda_parts(cfg, delta_lambda);
    if cfg.omega == 0.0 {
        // laser off: the second upper state decouples and the spectrum is
        // the Λ result scaled by the initial emitting-state population
        return intensity(cfg.gamma, p.f * cfg.b2_0, p.d, delta_lambda);
    }
    let amp = (delta_lambda - cfg.delta) * cfg.b2_0 + cfg.omega * cfg.b3_0;
    let om2 = cfg.omega * cfg.omega;
    if cfg.delta == cfg.model.delta_g() {
        if let Some(f_over_r) = p.f_over_r {
            // δλ − δ = r² exactly; one root cancels between N and D
            let r = branch_sqrt(delta_lambda - cfg.model.delta_g());
            let n = f_over_r * amp;
            let d = I * r * p.d - om2 * f_over_r;
            return intensity(cfg.gamma, n, d, delta_lambda);
        }
    }
    if let DomModel::EdgePlusDeltaDefect { delta_c, .. } = cfg.model {
        if cfg.delta == delta_c {
            if let Some(f_over_q) = p.f_over_q {
                // δλ − δ = δλ − δc exactly; the defect factor cancels
                let n = f_over_q * amp;
                let d = I * p.d - om2 * f_over_q;
                return intensity(cfg.gamma, n, d, delta_lambda);
            }
        }
    }
    let n = p.f * amp;
    let d = I * (delta_lambda - cfg.delta) * p.d - om2 * p.f;
    intensity(cfg.gamma, n, d, delta_lambda)
}

/// Spectrum at a single frequency, dispatching on the scheme.
pub fn spectrum_value(cfg: &EmitterConfig, delta_lambda: f64) -> Result<f64, SpectrumError> {
    match cfg.scheme {
        Scheme::LambdaType => lambda_spectrum(cfg, delta_lambda),
        Scheme::LaserDriven => driven_spectrum(cfg, delta_lambda),
    }
}

/// Samples the spectrum on a grid and applies the requested normalization.
pub fn eval_grid(
    cfg: &EmitterConfig,
    grid: FrequencyGrid,
    normalization: Normalization,
) -> Result<Spectrum, SpectrumError> {
    let mut values = Vec::with_capacity(grid.len());
    for delta_lambda in grid.points() {
        values.push(spectrum_value(cfg, delta_lambda)?);
    }
    Ok(Spectrum::from_raw_values(grid, values).normalized(normalization))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g1() -> CouplingStrength {
        CouplingStrength::new(1.0).unwrap()
    }

    fn lambda_cfg(model: DomModel) -> EmitterConfig {
        EmitterConfig::lambda(1.0, g1(), model).unwrap()
    }

    fn fig_driven(model: DomModel) -> EmitterConfig {
        EmitterConfig::driven(1.0, g1(), model, 1.0, -1.5, 1.0, 0.0).unwrap()
    }

    #[test]
    fn markovian_limit_is_a_lorentzian() {
        let gamma = 1.0;
        for model in [
            DomModel::isotropic_edge(0.0).unwrap(),
            DomModel::delta_defect(0.0, 0.0, -2.0).unwrap(),
            DomModel::lorentzian_defect(0.0, 0.0, -2.0, 1.0).unwrap(),
        ] {
            let cfg = EmitterConfig::lambda(gamma, CouplingStrength::zero(), model).unwrap();
            for dl in [-6.0, -1.0, 0.0, 0.3, 6.0] {
                let s = lambda_spectrum(&cfg, dl).unwrap();
                let want = gamma / (dl * dl + 0.25 * gamma * gamma);
                assert!((s - want).abs() <= 1e-12 * want, "dl {dl}: {s} vs {want}");
            }
            assert_eq!(lambda_spectrum(&cfg, 0.0).unwrap(), 4.0);
        }
    }

    #[test]
    fn sharp_edge_dark_line_and_continuity() {
        let cfg = lambda_cfg(DomModel::isotropic_edge(1.0).unwrap());
        assert_eq!(lambda_spectrum(&cfg, 1.0).unwrap(), 0.0);
        for side in [1.0 - 1e-8, 1.0 + 1e-8] {
            let s = lambda_spectrum(&cfg, side).unwrap();
            assert!(s > 0.0 && s < 1e-6, "S({side}) = {s}");
        }
    }

    #[test]
    fn sharp_edge_value_above_band() {
        // by hand: at δλ = 2, δg = 0, g = γ = 1 the rational form gives
        // S = 2 / (9.5 + √2)
        let cfg = lambda_cfg(DomModel::isotropic_edge(0.0).unwrap());
        let s = lambda_spectrum(&cfg, 2.0).unwrap();
        let want = 2.0 / (9.5 + 2.0_f64.sqrt());
        assert!((s - want).abs() < 1e-15, "{s} vs {want}");
    }

    #[test]
    fn smoothed_edge_fills_in_the_dark_line() {
        let cfg = lambda_cfg(DomModel::smoothed_edge(0.0, 0.3).unwrap());
        let s = lambda_spectrum(&cfg, 0.0).unwrap();
        assert!(s > 0.01, "smoothed spectrum should not vanish at the edge");
    }

    #[test]
    fn delta_defect_has_two_dark_lines() {
        let cfg = lambda_cfg(DomModel::delta_defect(0.0, 1.0, -2.0).unwrap());
        assert_eq!(lambda_spectrum(&cfg, 0.0).unwrap(), 0.0);
        assert_eq!(lambda_spectrum(&cfg, -2.0).unwrap(), 0.0);
        for side in [-2.0 - 1e-8, -2.0 + 1e-8] {
            let s = lambda_spectrum(&cfg, side).unwrap();
            assert!(s > 0.0 && s < 1e-6, "S({side}) = {s}");
        }
    }

    #[test]
    fn lorentzian_defect_keeps_only_the_edge_dark_line() {
        let cfg = lambda_cfg(DomModel::lorentzian_defect(0.0, 1.0, -2.0, 1.0).unwrap());
        assert_eq!(lambda_spectrum(&cfg, 0.0).unwrap(), 0.0);
        assert!(lambda_spectrum(&cfg, -2.0).unwrap() > 1e-3);
    }

    #[test]
    fn defect_with_zero_coupling_reduces_to_sharp_edge_exactly() {
        let sharp = lambda_cfg(DomModel::isotropic_edge(-1.0).unwrap());
        let del = lambda_cfg(DomModel::delta_defect(-1.0, 0.0, -2.0).unwrap());
        let lor = lambda_cfg(DomModel::lorentzian_defect(-1.0, 0.0, -2.0, 1.0).unwrap());
        for dl in [-3.0, -2.0, -1.0, 0.0, 2.0] {
            let a = lambda_spectrum(&sharp, dl).unwrap();
            assert_eq!(a, lambda_spectrum(&del, dl).unwrap());
            assert_eq!(a, lambda_spectrum(&lor, dl).unwrap());
        }
    }

    #[test]
    fn laser_off_reduces_to_lambda_exactly() {
        let model = DomModel::delta_defect(0.0, 1.0, -2.0).unwrap();
        let lam = lambda_cfg(model);
        let drv = EmitterConfig::driven(1.0, g1(), model, 0.0, -1.5, 1.0, 0.0).unwrap();
        for dl in [-3.0, -2.0, -1.5, 0.0, 0.7, 4.0] {
            assert_eq!(
                driven_spectrum(&drv, dl).unwrap(),
                lambda_spectrum(&lam, dl).unwrap()
            );
        }
    }

    #[test]
    fn driven_laser_dark_line() {
        let cfg = fig_driven(DomModel::isotropic_edge(1.0).unwrap());
        assert_eq!(driven_spectrum(&cfg, -1.5).unwrap(), 0.0);
        assert_eq!(driven_spectrum(&cfg, 1.0).unwrap(), 0.0); // band edge too
        // with both states initially populated the laser line moves to
        // δ − Ω b3/b2
        let cfg = EmitterConfig::driven(
            1.0,
            g1(),
            DomModel::isotropic_edge(1.0).unwrap(),
            1.0,
            -1.5,
            0.6,
            0.8,
        )
        .unwrap();
        let pos = -1.5 - 0.8 / 0.6;
        assert!(driven_spectrum(&cfg, pos).unwrap() < 1e-30);
    }

    #[test]
    fn driven_delta_defect_three_dark_lines() {
        let cfg = fig_driven(DomModel::delta_defect(0.0, 1.0, -2.5).unwrap());
        assert_eq!(driven_spectrum(&cfg, 0.0).unwrap(), 0.0);
        assert_eq!(driven_spectrum(&cfg, -1.5).unwrap(), 0.0);
        assert_eq!(driven_spectrum(&cfg, -2.5).unwrap(), 0.0);
    }

    #[test]
    fn driven_smoothed_edge_single_dark_line() {
        let cfg = fig_driven(DomModel::smoothed_edge(0.0, 0.3).unwrap());
        assert_eq!(driven_spectrum(&cfg, -1.5).unwrap(), 0.0);
        for dl in [-3.0, -1.0, 0.0, 1.0] {
            assert!(driven_spectrum(&cfg, dl).unwrap() > 1e-4);
        }
    }

    #[test]
    fn laser_on_edge_suppresses_the_edge_dark_line() {
        // δ = δg with the emitting state empty: the would-be edge zero is
        // lifted and the on-point value is the analytic limit γ b3²/Ω²
        let cfg = EmitterConfig::driven(
            1.0,
            g1(),
            DomModel::isotropic_edge(-1.5).unwrap(),
            1.0,
            -1.5,
            0.0,
            1.0,
        )
        .unwrap();
        let on_point = driven_spectrum(&cfg, -1.5).unwrap();
        assert!((on_point - 1.0).abs() < 1e-12, "limit value: {on_point}");
        // the limit is approached with a one-sided square-root cusp: just
        // below the edge the root is imaginary and shifts the denominator
        // linearly in sqrt(eta) (~2e-4 at eta = 1e-8), while just above it
        // the real root only enters at second order
        let below = driven_spectrum(&cfg, -1.5 - 1e-8).unwrap();
        let dev = (below - on_point).abs();
        assert!((1e-4..5e-4).contains(&dev), "gap-side deviation {dev}");
        let above = driven_spectrum(&cfg, -1.5 + 1e-8).unwrap();
        assert!((above - on_point).abs() < 1e-6, "band side: {above}");
    }

    #[test]
    fn laser_on_defect_suppresses_the_defect_dark_line() {
        let cfg = EmitterConfig::driven(
            1.0,
            g1(),
            DomModel::delta_defect(0.0, 1.0, -2.5).unwrap(),
            1.0,
            -2.5,
            0.0,
            1.0,
        )
        .unwrap();
        let on_point = driven_spectrum(&cfg, -2.5).unwrap();
        // analytic limit γ Ω² b3² / (g1² + Ω²)²
        assert!((on_point - 0.25).abs() < 1e-12, "limit value: {on_point}");
        for side in [-2.5 - 1e-8, -2.5 + 1e-8] {
            let s = driven_spectrum(&cfg, side).unwrap();
            assert!((s - on_point).abs() < 1e-5, "S({side}) = {s} vs {on_point}");
        }
        // the band-edge dark line survives
        assert_eq!(driven_spectrum(&cfg, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_parameter_coincidence_is_reported() {
        let cfg = lambda_cfg(DomModel::delta_defect(0.0, 1.0, 0.0).unwrap());
        assert_eq!(
            lambda_spectrum(&cfg, 0.0),
            Err(SpectrumError::DegenerateDenominator { delta_lambda: 0.0 })
        );
        let drv = EmitterConfig::driven(
            1.0,
            g1(),
            DomModel::delta_defect(0.0, 1.0, 0.0).unwrap(),
            1.0,
            0.0,
            1.0,
            0.0,
        )
        .unwrap();
        assert!(matches!(
            driven_spectrum(&drv, 0.0),
            Err(SpectrumError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn eval_grid_normalizations() {
        let cfg = lambda_cfg(DomModel::isotropic_edge(0.0).unwrap());
        let grid = FrequencyGrid::default();
        let raw = eval_grid(&cfg, grid, Normalization::Raw).unwrap();
        let peak = eval_grid(&cfg, grid, Normalization::PeakUnit).unwrap();
        assert!((peak.peak() - 1.0).abs() < 1e-12);
        let scale = raw.peak();
        for (r, p) in raw.values().iter().zip(peak.values()) {
            assert!((r / scale - p).abs() < 1e-12);
        }
    }

    #[test]
    fn default_grid_hits_preset_frequencies_exactly() {
        let grid = FrequencyGrid::default();
        assert_eq!(grid.point(0), -6.0);
        assert_eq!(grid.point(1400), -2.5);
        assert_eq!(grid.point(1600), -2.0);
        assert_eq!(grid.point(1800), -1.5);
        assert_eq!(grid.point(2000), -1.0);
        assert_eq!(grid.point(2400), 0.0);
        assert_eq!(grid.point(2800), 1.0);
        assert_eq!(grid.point(4800), 6.0);
    }

    #[test]
    fn grid_and_config_validation() {
        assert!(FrequencyGrid::new(1.0, 1.0, 100).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
        assert!(EmitterConfig::lambda(
            0.0,
            g1(),
            DomModel::isotropic_edge(0.0).unwrap()
        )
        .is_err());
        // 3-4-5 initial state is accepted
        assert!(EmitterConfig::driven(
            1.0,
            g1(),
            DomModel::isotropic_edge(0.0).unwrap(),
            1.0,
            -1.5,
            0.6,
            0.8,
        )
        .is_ok());
        assert_eq!(
            EmitterConfig::driven(
                1.0,
                g1(),
                DomModel::isotropic_edge(0.0).unwrap(),
                1.0,
                -1.5,
                0.5,
                0.5,
            )
            .unwrap_err()
            .field,
            "b2_0"
        );
        assert_eq!(
            EmitterConfig::driven(
                1.0,
                g1(),
                DomModel::isotropic_edge(0.0).unwrap(),
                -1.0,
                -1.5,
                1.0,
                0.0,
            )
            .unwrap_err()
            .field,
            "omega"
        );
    }

    proptest! {
        #[test]
        fn spectra_are_nonnegative(
            dl in -8.0f64..8.0,
            dg in -2.0f64..2.0,
            g in 0.0f64..2.0,
            omega in 0.0f64..2.0,
            delta in -2.0f64..2.0,
            theta in 0.0f64..std::f64::consts::FRAC_PI_2,
        ) {
            let model = DomModel::delta_defect(dg, 1.0, -2.0).unwrap();
            let cfg = EmitterConfig::driven(
                1.0,
                CouplingStrength::new(g).unwrap(),
                model,
                omega,
                delta,
                theta.cos(),
                theta.sin(),
            ).unwrap();
            if let Ok(s) = driven_spectrum(&cfg, dl) {
                prop_assert!(s >= 0.0);
            }
        }
    }
}
