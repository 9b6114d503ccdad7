//! JSON reports and CSV traces.

use std::fs;
use std::path::{Path, PathBuf};

use despeckle_core::{Image, SolveTrace};
use serde::{Serialize, Serializer};

use crate::args::{Method, MethodParams};
use crate::error::{CliError, Result};

/// PSNR of identical images is infinite, which JSON cannot hold as a number.
fn decibels<S: Serializer>(value: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) if v.is_infinite() => s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" }),
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_none(),
    }
}

/// `inf` or four decimals, as printed by `eval`.
pub fn format_psnr(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ImageStats {
    pub path: PathBuf,
    pub rows: usize,
    pub cols: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Non-positive pixels raised to 1 on load.
    pub promoted_pixels: usize,
}

impl ImageStats {
    pub fn of(path: &Path, image: &Image, promoted: usize) -> Self {
        Self {
            path: path.to_path_buf(),
            rows: image.rows(),
            cols: image.cols(),
            min: image.min(),
            max: image.max(),
            mean: image.mean(),
            promoted_pixels: promoted,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseEcho {
    pub looks: u32,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PartitionSizes {
    pub approx: usize,
    pub kept: usize,
    pub zeroed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DenoiseReport {
    pub input: ImageStats,
    pub model: NoiseEcho,
    pub method: Method,
    pub parameters: MethodParams,
    pub bias_factor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSizes>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "decibels")]
    pub psnr_noisy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "decibels")]
    pub psnr_denoised: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae_noisy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mae_denoised: Option<f64>,
    pub output: PathBuf,
    /// Pixels clamped when quantizing the output.
    pub clamped_pixels: usize,
    pub runtime_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
}

impl DenoiseReport {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

pub fn write_trace(path: &Path, trace: &SolveTrace) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["iteration", "objective", "residual", "seconds"])?;
    for e in &trace.entries {
        w.serialize((e.iteration, e.objective, e.residual, e.seconds))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
