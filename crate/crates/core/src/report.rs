//! Output rendering: CSV spectra, atomic file writes, summary records.

use crate::darklines::DarkLine;
use crate::spectra::{FrequencyGrid, Spectrum};
use serde::Serialize;
use std::io::{self, Write};
use std::path::Path;

/// Renders a spectrum as CSV: header `delta_lambda,S`, one row per grid
/// point, 17 significant digits, LF line endings.
pub fn spectrum_csv(spec: &Spectrum) -> String {
    let mut out = String::with_capacity(48 * spec.values().len() + 16);
    out.push_str("delta_lambda,S\n");
    for (x, v) in spec.grid().points().zip(spec.values()) {
        out.push_str(&format!("{x:.16e},{v:.16e}\n"));
    }
    out
}

/// Writes a file atomically: the contents go to a sibling temp file which
/// is then renamed over the destination.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let file_name = path.file_name().ok_or_else(|| {
        io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("output path {} has no file name", path.display()),
        )
    })?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(contents)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Grid echo carried by every summary (the default grid is a tool choice,
/// so it is always recorded explicitly).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridInfo {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl From<&FrequencyGrid> for GridInfo {
    fn from(grid: &FrequencyGrid) -> Self {
        GridInfo {
            min: grid.min(),
            max: grid.max(),
            n: grid.len(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub command: &'static str,
    pub grid: GridInfo,
    pub normalization: &'static str,
    pub out: String,
    pub peaks: usize,
    pub zeros: Vec<f64>,
    pub runtime_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct DarklinesSummary {
    pub command: &'static str,
    pub grid: GridInfo,
    pub dark_lines: Vec<DarkLine>,
    pub peaks: usize,
    pub zeros: Vec<f64>,
    pub runtime_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct OracleSummary {
    pub command: &'static str,
    pub method: &'static str,
    pub grid: GridInfo,
    pub normalization: &'static str,
    pub out: String,
    pub peaks: usize,
    /// Sampled dip positions detected in the oracle spectrum.
    pub zeros: Vec<f64>,
    /// compare_spectra(closed form, oracle, floor 0.1).
    pub max_rel_err: f64,
    pub runtime_ms: u128,
}

#[derive(Debug, Serialize)]
pub struct CurveSummary {
    pub label: String,
    pub csv: String,
    pub config: String,
    pub peaks: usize,
    pub zeros: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct FigureSummary {
    pub command: &'static str,
    pub figure: u8,
    pub outdir: String,
    pub grid: GridInfo,
    pub normalization: &'static str,
    pub curves: Vec<CurveSummary>,
    pub runtime_ms: u128,
}
