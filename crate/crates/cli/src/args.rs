//! Command-line arguments. Each subcommand's argument struct is also the
//! parameter record stored in its run manifest, so a rerun sees exactly the
//! resolved values of the original invocation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::io::BitDepth;

/// Environment variable naming the default directory for outputs.
pub const OUTPUT_DIR_ENV: &str = "DESPECKLE_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "despeckle",
    version,
    about = "Multiplicative speckle removal with frame-constrained total variation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Corrupt a clean image with Gamma-distributed speckle
    Simulate(SimulateArgs),
    /// Restore a speckled image
    Denoise(DenoiseArgs),
    /// Print PSNR and MAE of a candidate against ground truth
    Eval(EvalArgs),
    /// Run a denoising method over a grid of parameter values
    Sweep(SweepArgs),
    /// Repeat a run recorded in a manifest
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Hard threshold followed by l1 fidelity + TV minimization
    L1frameTv,
    /// Quadratic fidelity + TV in the log domain
    L2tv,
    /// Hard thresholding of frame coefficients only
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scaling {
    /// Thresholds in units of each subband's noise level, weights in units of its atom TV
    Normalized,
    /// One absolute threshold and weight pair for all subbands
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// Clean image (PGM or raw-double)
    #[arg(long, required_unless_present = "phantom", conflicts_with = "phantom")]
    pub input: Option<PathBuf>,
    /// Use a built-in head phantom of this size instead of --input
    #[arg(long, value_name = "SIZE")]
    pub phantom: Option<usize>,
    /// Number of looks K
    #[arg(short = 'K', long, default_value_t = 1)]
    pub looks: u32,
    /// Mean of the speckle
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Noisy output (`.pgm` or raw-double); defaults into --output-dir
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the clean image here
    #[arg(long)]
    pub clean_output: Option<PathBuf>,
    /// Sample width for PGM outputs
    #[arg(long, value_enum, default_value_t = BitDepth::Eight)]
    pub bit_depth: BitDepth,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = ".")]
    pub output_dir: PathBuf,
}

/// Parameters shared by `denoise` and `sweep`.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MethodParams {
    #[arg(long, value_enum, default_value_t = Method::L1frameTv)]
    pub method: Method,
    /// Number of looks K of the input
    #[arg(short = 'K', long, default_value_t = 1)]
    pub looks: u32,
    /// Mean of the speckle
    #[arg(long, default_value_t = 1.0)]
    pub noise_mean: f64,
    /// Douglas-Rachford step size
    #[arg(long, default_value_t = despeckle_core::SolverConfig::DEFAULT_GAMMA)]
    pub gamma: f64,
    /// l1 weight on thresholded coefficients
    #[arg(long, default_value_t = 1.0)]
    pub lambda0: f64,
    /// l1 weight on kept coefficients
    #[arg(long, default_value_t = 0.5)]
    pub lambda1: f64,
    /// Hard threshold in units of the log-noise standard deviation
    #[arg(long, default_value_t = 2.0)]
    pub t_over_sigma: f64,
    /// Douglas-Rachford iterations
    #[arg(long, default_value_t = despeckle_core::SolverConfig::DEFAULT_ITERATIONS)]
    pub n_dr: usize,
    /// Inner projection iterations per TV prox
    #[arg(long, default_value_t = despeckle_core::TvProxConfig::DEFAULT_INNER)]
    pub n_fb: usize,
    /// Inner projection step size
    #[arg(long, default_value_t = despeckle_core::TvProxConfig::DEFAULT_BETA)]
    pub beta: f64,
    /// Douglas-Rachford relaxation
    #[arg(long, default_value_t = despeckle_core::SolverConfig::DEFAULT_MU)]
    pub mu: f64,
    /// Frame decomposition depth
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, value_enum, default_value_t = Scaling::Normalized)]
    pub scaling: Scaling,
    /// Fidelity weight of the l2tv baseline
    #[arg(long, default_value_t = 4.0)]
    pub rho: f64,
}

impl MethodParams {
    pub const GRID_NAMES: [&'static str; 11] = [
        "gamma",
        "lambda0",
        "lambda1",
        "t_over_sigma",
        "n_dr",
        "n_fb",
        "beta",
        "mu",
        "levels",
        "rho",
        "noise_mean",
    ];

    /// Sets a numeric parameter by name, as used by sweep grids.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(CliError::Usage(format!(
                    "{name} must be a non-negative integer, got {v}"
                )))
            }
        };
        match name {
            "gamma" => self.gamma = value,
            "lambda0" => self.lambda0 = value,
            "lambda1" => self.lambda1 = value,
            "t_over_sigma" => self.t_over_sigma = value,
            "n_dr" => self.n_dr = count(value)?,
            "n_fb" => self.n_fb = count(value)?,
            "beta" => self.beta = value,
            "mu" => self.mu = value,
            "levels" => self.levels = count(value)?,
            "rho" => self.rho = value,
            "noise_mean" => self.noise_mean = value,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown grid parameter {other:?}; expected one of {}",
                    Self::GRID_NAMES.join(", ")
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct DenoiseArgs {
    /// Speckled image (PGM or raw-double)
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: MethodParams,
    /// Recorded in the manifest; the restoration itself is deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restored image; defaults into --output-dir
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Ground truth; adds PSNR and MAE to the report
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// JSON report path [default: <output>.report.json]
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-iteration CSV trace (l1frame-tv only)
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = BitDepth::Eight)]
    pub bit_depth: BitDepth,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub candidate: PathBuf,
    /// Manifest path [default: <output-dir>/eval.manifest.json]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SweepArgs {
    /// Speckled image (PGM or raw-double)
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub params: MethodParams,
    /// Grid axis `name=v1,v2,...`; repeat for a Cartesian product
    #[arg(long = "grid", value_name = "NAME=VALUES")]
    pub grid: Vec<String>,
    /// Ground truth; adds PSNR and MAE columns
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Extension of per-cell images
    #[arg(long, default_value = "f64")]
    pub image_ext: String,
    #[arg(long, value_enum, default_value_t = BitDepth::Eight)]
    pub bit_depth: BitDepth,
    /// Receives sweep.csv, the per-cell images and the manifest
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Write every output into this directory instead of its recorded location
    #[arg(long)]
    pub redirect: Option<PathBuf>,
}

/// Moves `path` into `dir`, keeping its file name.
pub fn relocate(path: &Path, dir: &Path) -> PathBuf {
    match path.file_name() {
        Some(name) => dir.join(name),
        None => dir.to_path_buf(),
    }
}

fn relocate_opt(path: &mut Option<PathBuf>, dir: &Path) {
    if let Some(p) = path {
        *p = relocate(p, dir);
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image")
        .to_owned()
}

impl SimulateArgs {
    /// Fills in defaulted output paths.
    pub fn resolve(&mut self) {
        if self.output.is_none() {
            let base = match (&self.input, self.phantom) {
                (Some(p), _) => stem(p),
                (None, Some(n)) => format!("phantom{n}"),
                (None, None) => "image".into(),
            };
            self.output = Some(
                self.output_dir
                    .join(format!("{base}_K{}_seed{}.f64", self.looks, self.seed)),
            );
        }
    }

    pub fn redirect(&mut self, dir: &Path) {
        relocate_opt(&mut self.output, dir);
        relocate_opt(&mut self.clean_output, dir);
        self.output_dir = dir.to_path_buf();
    }
}

impl DenoiseArgs {
    pub fn resolve(&mut self) {
        if self.output.is_none() {
            let method = serde_json::to_value(self.params.method).unwrap();
            let method = method.as_str().unwrap_or("out");
            self.output = Some(
                self.output_dir
                    .join(format!("{}_{method}.f64", stem(&self.input))),
            );
        }
        if self.report.is_none() {
            let out = self.output.as_ref().unwrap();
            self.report = Some(with_suffix(out, ".report.json"));
        }
    }

    pub fn redirect(&mut self, dir: &Path) {
        relocate_opt(&mut self.output, dir);
        relocate_opt(&mut self.report, dir);
        relocate_opt(&mut self.trace, dir);
        self.output_dir = dir.to_path_buf();
    }
}

impl EvalArgs {
    pub fn resolve(&mut self) {
        if self.manifest.is_none() {
            self.manifest = Some(self.output_dir.join("eval.manifest.json"));
        }
    }

    pub fn redirect(&mut self, dir: &Path) {
        relocate_opt(&mut self.manifest, dir);
        self.output_dir = dir.to_path_buf();
    }
}

impl SweepArgs {
    pub fn redirect(&mut self, dir: &Path) {
        self.output_dir = dir.to_path_buf();
    }
}

/// `path` with `suffix` appended to its full file name.
pub fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(suffix);
    path.with_file_name(name)
}
