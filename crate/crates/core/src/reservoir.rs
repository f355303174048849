//! Structured-reservoir models: density of modes and memory kernels.
//!
//! All frequencies are detunings from the emitter transition that couples to
//! the structured reservoir, in units of the flat-channel decay rate. Four
//! model families are supported: a sharp inverse-square-root band edge, a
//! smoothed band edge, and the sharp edge augmented by either a discrete
//! defect mode or a Lorentzian-broadened defect line inside the gap.
//!
//! The frequency-domain kernel returned by [`kernel_laplace`] is the Laplace
//! transform of the time-domain memory kernel evaluated on the imaginary
//! axis, continued from the right half-plane; [`branch_sqrt`] fixes the
//! branch that this continuation selects.

use crate::quad::simpson_auto;
use crate::special::{erfc_ray, osc_tail};
use crate::ConfigError;
use num_complex::Complex64;
use std::f64::consts::PI;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cutoff above the band edge for the smoothed-edge time-kernel quadrature;
/// the remainder of the mode integral is added as an analytic tail.
const BAND_CUTOFF: f64 = 400.0;

/// Density-of-modes model of the structured reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomModel {
    /// Inverse-square-root mode pileup just above a sharp band edge at
    /// detuning `delta_g`; no modes below it.
    IsotropicEdge { delta_g: f64 },
    /// Band edge regularized by a smoothing parameter `epsilon` > 0; the
    /// density rises like a square root instead of diverging.
    SmoothedEdge { delta_g: f64, epsilon: f64 },
    /// Sharp edge plus a discrete (zero-width) defect mode at `delta_c`
    /// with coupling amplitude `g1`.
    EdgePlusDeltaDefect { delta_g: f64, g1: f64, delta_c: f64 },
    /// Sharp edge plus a Lorentzian defect line at `delta_c` with full width
    /// `gamma_c` and integrated coupling weight `g1`².
    EdgePlusLorentzianDefect {
        delta_g: f64,
        g1: f64,
        delta_c: f64,
        gamma_c: f64,
    },
}

impl DomModel {
    /// Sharp band edge at `delta_g`.
    pub fn isotropic_edge(delta_g: f64) -> Result<Self, ConfigError> {
        require_finite("delta_g", delta_g)?;
        Ok(DomModel::IsotropicEdge { delta_g })
    }

    /// Smoothed band edge. `epsilon` must be strictly positive: the
    /// `epsilon = 0` case is the sharp edge and must be requested as such,
    /// so that the limit stays an explicit test, not a silent alias.
    pub fn smoothed_edge(delta_g: f64, epsilon: f64) -> Result<Self, ConfigError> {
        require_finite("delta_g", delta_g)?;
        require_finite("epsilon", epsilon)?;
        if epsilon <= 0.0 {
            return Err(ConfigError {
                field: "epsilon",
                reason: format!(
                    "smoothing parameter must be > 0 (got {epsilon}); use the sharp edge instead"
                ),
            });
        }
        Ok(DomModel::SmoothedEdge { delta_g, epsilon })
    }

    /// Sharp edge plus a discrete defect mode.
    pub fn delta_defect(delta_g: f64, g1: f64, delta_c: f64) -> Result<Self, ConfigError> {
        require_finite("delta_g", delta_g)?;
        require_finite("delta_c", delta_c)?;
        require_nonnegative("g1", g1)?;
        Ok(DomModel::EdgePlusDeltaDefect {
            delta_g,
            g1,
            delta_c,
        })
    }

    /// Sharp edge plus a Lorentzian defect line of full width `gamma_c` > 0.
    pub fn lorentzian_defect(
        delta_g: f64,
        g1: f64,
        delta_c: f64,
        gamma_c: f64,
    ) -> Result<Self, ConfigError> {
        require_finite("delta_g", delta_g)?;
        require_finite("delta_c", delta_c)?;
        require_nonnegative("g1", g1)?;
        require_finite("gamma_c", gamma_c)?;
        if gamma_c <= 0.0 {
            return Err(ConfigError {
                field: "gamma_c",
                reason: format!("defect linewidth must be > 0 (got {gamma_c})"),
            });
        }
        Ok(DomModel::EdgePlusLorentzianDefect {
            delta_g,
            g1,
            delta_c,
            gamma_c,
        })
    }

    /// Band-edge detuning of the model.
    pub fn delta_g(&self) -> f64 {
        match *self {
            DomModel::IsotropicEdge { delta_g }
            | DomModel::SmoothedEdge { delta_g, .. }
            | DomModel::EdgePlusDeltaDefect { delta_g, .. }
            | DomModel::EdgePlusLorentzianDefect { delta_g, .. } => delta_g,
        }
    }

    /// True for the model families whose kernel carries the bare
    /// inverse-square-root band-edge divisor (everything but the smoothed
    /// edge). These are the models with an exact spectral zero at `delta_g`.
    pub fn sharp_edge(&self) -> bool {
        !matches!(self, DomModel::SmoothedEdge { .. })
    }

    /// Re-checks all parameter invariants (useful after manual construction).
    pub fn validate(&self) -> Result<(), ConfigError> {
        match *self {
            DomModel::IsotropicEdge { delta_g } => {
                DomModel::isotropic_edge(delta_g).map(|_| ())
            }
            DomModel::SmoothedEdge { delta_g, epsilon } => {
                DomModel::smoothed_edge(delta_g, epsilon).map(|_| ())
            }
            DomModel::EdgePlusDeltaDefect {
                delta_g,
                g1,
                delta_c,
            } => DomModel::delta_defect(delta_g, g1, delta_c).map(|_| ()),
            DomModel::EdgePlusLorentzianDefect {
                delta_g,
                g1,
                delta_c,
                gamma_c,
            } => DomModel::lorentzian_defect(delta_g, g1, delta_c, gamma_c).map(|_| ()),
        }
    }
}

fn require_finite(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError {
            field,
            reason: format!("must be finite (got {value})"),
        })
    }
}

fn require_nonnegative(field: &'static str, value: f64) -> Result<(), ConfigError> {
    require_finite(field, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError {
            field,
            reason: format!("must be >= 0 (got {value})"),
        })
    }
}

/// Coupling of the emitter to the structured reservoir.
///
/// Stores the bare coupling `g`; every kernel formula uses the lumped scale
/// g^(3/2), exposed as [`CouplingStrength::kernel_scale`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingStrength {
    g: f64,
}

impl CouplingStrength {
    pub fn new(g: f64) -> Result<Self, ConfigError> {
        require_nonnegative("g", g)?;
        Ok(CouplingStrength { g })
    }

    pub fn zero() -> Self {
        CouplingStrength { g: 0.0 }
    }

    pub fn g(self) -> f64 {
        self.g
    }

    /// g^(3/2), the prefactor of every structured-reservoir kernel.
    pub fn kernel_scale(self) -> f64 {
        self.g * self.g.sqrt()
    }

    pub fn is_zero(self) -> bool {
        self.g == 0.0
    }
}

/// Kernel evaluation failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("frequency kernel has a pole at the band edge (delta_lambda = delta_g = {delta_lambda})")]
    PoleAtBandEdge { delta_lambda: f64 },
    #[error("frequency kernel has a pole at the defect mode (delta_lambda = delta_c = {delta_lambda})")]
    PoleAtDefect { delta_lambda: f64 },
    #[error("time kernel is defined for tau > 0 only (got {tau})")]
    NonPositiveTau { tau: f64 },
}

/// Principal square root continued onto the negative axis from above:
/// √x for x ≥ 0 and i√(−x) for x < 0, so Im ≥ 0 always.
///
/// This is the branch reached by approaching the imaginary frequency axis
/// from the decaying (right) Laplace half-plane, which keeps in-gap spectra
/// finite and nonnegative.
pub fn branch_sqrt(x: f64) -> Complex64 {
    if x >= 0.0 {
        Complex64::new(x.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-x).sqrt())
    }
}

/// Frequency-domain memory kernel at real frequency `delta_lambda`.
///
/// Sharp-edge families: g^(3/2) / branch_sqrt(δλ − δg), plus
/// i g₁²/(δλ − δc) for the discrete defect or
/// g₁²/(i(δc − δλ) + γc/2) for the Lorentzian defect.
/// Smoothed edge: g^(3/2) / (i√ε + branch_sqrt(δλ − δg)).
///
/// Returns a pole error at δλ = δg (sharp edge, g > 0) and at δλ = δc
/// (discrete defect, g₁ > 0); with the corresponding coupling exactly zero
/// the term is absent and no pole exists. Spectrum evaluation at these
/// points must go through the pole-safe forms in the spectra module.
pub fn kernel_laplace(
    model: &DomModel,
    g: CouplingStrength,
    delta_lambda: f64,
) -> Result<Complex64, KernelError> {
    let c = g.kernel_scale();
    let band = match *model {
        DomModel::SmoothedEdge { delta_g, epsilon } => {
            c / (I * epsilon.sqrt() + branch_sqrt(delta_lambda - delta_g))
        }
        DomModel::IsotropicEdge { delta_g }
        | DomModel::EdgePlusDeltaDefect { delta_g, .. }
        | DomModel::EdgePlusLorentzianDefect { delta_g, .. } => {
            if c == 0.0 {
                Complex64::new(0.0, 0.0)
            } else if delta_lambda == delta_g {
                return Err(KernelError::PoleAtBandEdge { delta_lambda });
            } else {
                c / branch_sqrt(delta_lambda - delta_g)
            }
        }
    };
    let defect = match *model {
        DomModel::EdgePlusDeltaDefect { g1, delta_c, .. } if g1 > 0.0 => {
            if delta_lambda == delta_c {
                return Err(KernelError::PoleAtDefect { delta_lambda });
            }
            I * g1 * g1 / (delta_lambda - delta_c)
        }
        DomModel::EdgePlusLorentzianDefect {
            g1,
            delta_c,
            gamma_c,
            ..
        } if g1 > 0.0 => g1 * g1 / Complex64::new(0.5 * gamma_c, delta_c - delta_lambda),
        _ => Complex64::new(0.0, 0.0),
    };
    Ok(band + defect)
}

/// Time-domain memory kernel K(τ), τ > 0.
///
/// Sharp edge: g^(3/2) e^(−iδg τ) e^(−iπ/4)/√(πτ). Discrete defect adds
/// g₁² e^(−iδc τ); Lorentzian defect adds g₁² e^(−iδc τ − γc τ/2). The
/// smoothed edge has no elementary closed form and is computed by
/// oscillatory quadrature of its mode integral up to a fixed cutoff above
/// the edge, plus an analytic tail (see `smoothed_band_profile`).
pub fn kernel_time(
    model: &DomModel,
    g: CouplingStrength,
    tau: f64,
) -> Result<Complex64, KernelError> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(KernelError::NonPositiveTau { tau });
    }
    let c = g.kernel_scale();
    let band = if c == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        match *model {
            DomModel::SmoothedEdge { delta_g, epsilon } => {
                c * phase(-delta_g * tau) * smoothed_band_profile(epsilon, tau, BAND_CUTOFF)
            }
            DomModel::IsotropicEdge { delta_g }
            | DomModel::EdgePlusDeltaDefect { delta_g, .. }
            | DomModel::EdgePlusLorentzianDefect { delta_g, .. } => {
                c * phase(-delta_g * tau) * sharp_edge_profile(tau)
            }
        }
    };
    let defect = match *model {
        DomModel::EdgePlusDeltaDefect { g1, delta_c, .. } => g1 * g1 * phase(-delta_c * tau),
        DomModel::EdgePlusLorentzianDefect {
            g1,
            delta_c,
            gamma_c,
            ..
        } => g1 * g1 * (-0.5 * gamma_c * tau) .exp() * phase(-delta_c * tau),
        _ => Complex64::new(0.0, 0.0),
    };
    Ok(band + defect)
}

fn phase(theta: f64) -> Complex64 {
    Complex64::new(0.0, theta).exp()
}

/// e^(−iπ/4)/√(πτ): the sharp-edge kernel profile before the δg phase.
fn sharp_edge_profile(tau: f64) -> Complex64 {
    let amp = 1.0 / (PI * tau).sqrt();
    Complex64::new(std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2) * amp
}

/// Mode integral of the smoothed-edge density against e^(−iuτ), taken from
/// the band edge up to `u_max` by quadrature (after the substitution
/// u = v², which removes the square-root kink at the edge) plus the
/// analytic tail of the remaining integrand expanded in ε/v².
///
/// `u_max` is exposed so tests can demonstrate cutoff convergence.
pub(crate) fn smoothed_band_profile(epsilon: f64, tau: f64, u_max: f64) -> Complex64 {
    let v_max = u_max.sqrt();
    // start with a few panels per oscillation of e^{-i tau v^2}
    let n0 = ((2.0 * tau * u_max) as usize).clamp(64, 1 << 20);
    let body = simpson_auto(
        &|v| {
            let v2 = v * v;
            2.0 * v2 / (epsilon + v2) * Complex64::new(0.0, -tau * v2).exp()
        },
        0.0,
        v_max,
        n0,
        1e-11,
    );
    // tail: 2 ∫_V^∞ [1 − ε/(ε+v²)] e^{−iτv²} dv with ε/(ε+v²) expanded in
    // inverse even powers; the moments M2k obey a two-term recurrence.
    let f_inf = osc_tail(v_max * tau.sqrt()) / tau.sqrt();
    let e_v = Complex64::new(0.0, -tau * u_max).exp();
    let two_i_tau = Complex64::new(0.0, 2.0 * tau);
    let m2 = e_v / v_max - two_i_tau * f_inf;
    let m4 = e_v / (3.0 * v_max.powi(3)) - two_i_tau / 3.0 * m2;
    let m6 = e_v / (5.0 * v_max.powi(5)) - two_i_tau / 5.0 * m4;
    let tail = 2.0 * (f_inf - epsilon * (m2 - epsilon * (m4 - epsilon * m6)));
    (body + tail) / PI
}

/// Smooth (non-singular) remainder of the smoothed-edge kernel after the
/// sharp-edge τ^(−1/2) profile is split off:
/// K_smoothed(τ) = c e^(−iδg τ) e^(−iπ/4)/√(πτ) + this. Valid for τ ≥ 0
/// (the value at τ = 0 is −c√ε). Used by the time-domain solver, which
/// treats the singular part by exact product integration and this part by
/// ordinary quadrature; its agreement with [`kernel_time`] is a cross-check
/// between two independent evaluation routes.
pub(crate) fn smoothed_regular_part(c: f64, delta_g: f64, epsilon: f64, tau: f64) -> Complex64 {
    debug_assert!(tau >= 0.0);
    let root_eps = epsilon.sqrt();
    -c * root_eps * phase((epsilon - delta_g) * tau) * erfc_ray((epsilon * tau).sqrt())
}

/// Band-continuum density of modes at detuning `x` (zero at and below the
/// edge). Defect lines are not part of the continuum; they are reported
/// separately by [`defect_channel`].
pub fn dom_density(model: &DomModel, x: f64) -> f64 {
    let delta_g = model.delta_g();
    if x <= delta_g {
        return 0.0;
    }
    let u = x - delta_g;
    match *model {
        DomModel::SmoothedEdge { epsilon, .. } => u.sqrt() / (PI * (epsilon + u)),
        _ => 1.0 / (PI * u.sqrt()),
    }
}

/// Defect contribution of a model, for consumers that need the discrete
/// line separately from the band continuum (e.g. the mode-comb oracle).
/// `weight` is the integrated spectral weight g₁² in both cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DefectChannel {
    /// All the weight at a single detuning.
    Discrete { detuning: f64, weight: f64 },
    /// Lorentzian line: weight spread with the given half-width.
    Lorentzian {
        center: f64,
        half_width: f64,
        weight: f64,
    },
}

/// The defect line of a model, if it has one with nonzero coupling.
pub fn defect_channel(model: &DomModel) -> Option<DefectChannel> {
    match *model {
        DomModel::EdgePlusDeltaDefect { g1, delta_c, .. } if g1 > 0.0 => {
            Some(DefectChannel::Discrete {
                detuning: delta_c,
                weight: g1 * g1,
            })
        }
        DomModel::EdgePlusLorentzianDefect {
            g1,
            delta_c,
            gamma_c,
            ..
        } if g1 > 0.0 => Some(DefectChannel::Lorentzian {
            center: delta_c,
            half_width: 0.5 * gamma_c,
            weight: g1 * g1,
        }),
        _ => None,
    }
}
