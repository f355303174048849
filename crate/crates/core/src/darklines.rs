//! Dark-line prediction and detection.
//!
//! A dark line is an exact zero of the flat-channel spectrum. They come in
//! three kinds: the structured-reservoir band edge, a discrete defect mode,
//! and the laser-induced zero of the driven scheme. `predict_dark_lines`
//! produces the catalogue directly from the configuration (including lines
//! that are suppressed, with the reason); `find_zeros` locates zeros
//! numerically from a sampled spectrum plus closed-form refinement;
//! `detect_dips` is a sampled-only variant usable on oracle output.

use crate::spectra::{spectrum_value, EmitterConfig, Scheme, Spectrum};
use crate::reservoir::DomModel;
use serde::Serialize;

/// What creates a (potential) dark line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Band edge of the structured reservoir.
    BandEdge,
    /// Discrete defect mode inside the gap.
    DefectMode,
    /// Interference zero created by the driving laser.
    LaserInduced,
}

/// One entry of the dark-line catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DarkLine {
    /// Where the zero sits (or would sit). Infinite when the laser line
    /// runs off to infinity (emitting state initially empty).
    pub position: f64,
    pub origin: Origin,
    /// Whether the spectrum actually vanishes there.
    pub present: bool,
    /// Why the line is absent, when it is.
    pub suppression_reason: Option<&'static str>,
}

impl DarkLine {
    fn present(position: f64, origin: Origin) -> Self {
        DarkLine {
            position,
            origin,
            present: true,
            suppression_reason: None,
        }
    }

    fn absent(position: f64, origin: Origin, reason: &'static str) -> Self {
        DarkLine {
            position,
            origin,
            present: false,
            suppression_reason: Some(reason),
        }
    }
}

/// Predicts every potential dark line of a configuration, flagging the
/// suppressed ones with the suppression mechanism.
pub fn predict_dark_lines(cfg: &EmitterConfig) -> Vec<DarkLine> {
    let mut lines = Vec::new();
    let driving = cfg.scheme == Scheme::LaserDriven && cfg.omega > 0.0;
    let delta_g = cfg.model.delta_g();

    // band edge
    if cfg.model.sharp_edge() {
        if cfg.g.is_zero() {
            lines.push(DarkLine::absent(delta_g, Origin::BandEdge, "g = 0"));
        } else if driving && cfg.delta == delta_g {
            lines.push(DarkLine::absent(delta_g, Origin::BandEdge, "delta = delta_g"));
        } else {
            lines.push(DarkLine::present(delta_g, Origin::BandEdge));
        }
    } else {
        lines.push(DarkLine::absent(
            delta_g,
            Origin::BandEdge,
            "smoothed edge, epsilon > 0",
        ));
    }

    // defect mode
    match cfg.model {
        DomModel::EdgePlusDeltaDefect { g1, delta_c, .. } => {
            if g1 == 0.0 {
                lines.push(DarkLine::absent(delta_c, Origin::DefectMode, "g1 = 0"));
            } else if driving && cfg.delta == delta_c {
                lines.push(DarkLine::absent(
                    delta_c,
                    Origin::DefectMode,
                    "delta = delta_c",
                ));
            } else {
                lines.push(DarkLine::present(delta_c, Origin::DefectMode));
            }
        }
        DomModel::EdgePlusLorentzianDefect { delta_c, .. } => {
            lines.push(DarkLine::absent(
                delta_c,
                Origin::DefectMode,
                "Lorentzian defect, gamma_c > 0",
            ));
        }
        DomModel::IsotropicEdge { .. } | DomModel::SmoothedEdge { .. } => {}
    }

    // laser-induced line
    if cfg.scheme == Scheme::LaserDriven {
        if cfg.omega == 0.0 {
            lines.push(DarkLine::absent(cfg.delta, Origin::LaserInduced, "Omega = 0"));
        } else if cfg.b2_0 == 0.0 {
            lines.push(DarkLine::absent(
                f64::INFINITY,
                Origin::LaserInduced,
                "b2(0) = 0",
            ));
        } else {
            lines.push(DarkLine::present(
                cfg.delta - cfg.omega * cfg.b3_0 / cfg.b2_0,
                Origin::LaserInduced,
            ));
        }
    }

    lines
}

/// Golden-section minimization of the raw closed-form spectrum.
fn golden_min(cfg: &EmitterConfig, mut a: f64, mut b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let eval = |x: f64| spectrum_value(cfg, x).unwrap_or(f64::INFINITY);
    let scale = 1.0_f64.max(a.abs()).max(b.abs());
    let width_tol = 1e-13 * scale;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..300 {
        if b - a <= width_tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, eval(xm))
}

/// Locates the exact zeros of a closed-form spectrum.
///
/// Sampled strict local minima below `rel_tol` times the sampled maximum
/// are refined against the raw closed form with a golden-section search;
/// a refined minimum counts as a zero only if it is below 1e−12 times the
/// raw peak. Returned positions are sorted and deduplicated.
pub fn find_zeros(cfg: &EmitterConfig, spec: &Spectrum, rel_tol: f64) -> Vec<f64> {
    let values = spec.values();
    let grid = spec.grid();
    let max = spec.peak();
    if max <= 0.0 {
        return Vec::new();
    }
    // raw peak for the acceptance threshold (the spectrum itself may be
    // peak-normalized)
    let raw_peak = grid
        .points()
        .filter_map(|x| spectrum_value(cfg, x).ok())
        .fold(0.0, f64::max);
    let mut zeros = Vec::new();
    for i in 1..values.len() - 1 {
        let v = values[i];
        if v < values[i - 1] && v < values[i + 1] && v <= rel_tol * max {
            let (x, s) = golden_min(cfg, grid.point(i - 1), grid.point(i + 1));
            if s <= 1e-12 * raw_peak {
                zeros.push(x);
            }
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zeros.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    zeros
}

/// Sampled-only dip detection for spectra without a closed form (oracle
/// output): returns grid positions of strict local minima at or below
/// `rel_tol` times the sampled maximum.
pub fn detect_dips(spec: &Spectrum, rel_tol: f64) -> Vec<f64> {
    let values = spec.values();
    let grid = spec.grid();
    let max = spec.peak();
    if max <= 0.0 {
        return Vec::new();
    }
    let mut dips = Vec::new();
    for i in 1..values.len() - 1 {
        if values[i] < values[i - 1] && values[i] < values[i + 1] && values[i] <= rel_tol * max {
            dips.push(grid.point(i));
        }
    }
    dips
}

/// Counts strict interior maxima above a small floor (1e−3 of the peak),
/// i.e. the number of visible spectral peaks.
pub fn count_peaks(spec: &Spectrum) -> usize {
    let values = spec.values();
    let max = spec.peak();
    let floor = 1e-3 * max;
    let mut count = 0;
    for i in 1..values.len().saturating_sub(1) {
        if values[i] > values[i - 1] && values[i] > values[i + 1] && values[i] >= floor {
            count += 1;
        }
    }
    count
}
