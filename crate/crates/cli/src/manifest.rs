//! Run manifests: everything needed to repeat a command exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::args::{DenoiseArgs, EvalArgs, SimulateArgs, SweepArgs};
use crate::error::{CliError, Result};

/// Generator behind every random draw, as `sample_speckle` uses it.
pub const RNG_ALGORITHM: &str = despeckle_core::RNG_ALGORITHM;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "parameters", rename_all = "lowercase")]
pub enum Invocation {
    Simulate(SimulateArgs),
    Denoise(DenoiseArgs),
    Eval(EvalArgs),
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngRecord {
    pub algorithm: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    #[serde(flatten)]
    pub invocation: Invocation,
    pub rng: RngRecord,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(
        invocation: Invocation,
        seed: u64,
        inputs: Vec<PathBuf>,
        outputs: Vec<PathBuf>,
    ) -> Self {
        Self {
            software: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            invocation,
            rng: RngRecord {
                algorithm: RNG_ALGORITHM.into(),
                seed,
            },
            inputs,
            outputs,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
    }
}
