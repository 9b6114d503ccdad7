//! Image files: binary PGM and raw doubles, chosen by content on read and
//! by extension on write.

pub mod pgm;
pub mod raw;

use std::fs;
use std::path::Path;

use despeckle_core::Image;

use crate::error::{CliError, Result};
pub use pgm::BitDepth;

/// What was read, plus how many non-positive pixels were raised to 1.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub image: Image,
    pub promoted: usize,
}

/// Reads a PGM or raw-double image. Non-positive pixels are raised to 1 so
/// that the log transform is defined; the count is reported back.
pub fn read_image(path: &Path) -> Result<Loaded> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let mut image = if bytes.starts_with(raw::MAGIC) {
        raw::decode(&bytes)
    } else if bytes.starts_with(b"P") {
        pgm::decode(&bytes).map(|d| d.image)
    } else {
        Err("unrecognized image format (expected PGM P5 or raw-double)".into())
    }
    .map_err(|reason| CliError::format(path, reason))?;
    let mut promoted = 0;
    for v in image.as_mut_slice() {
        if *v <= 0.0 {
            *v = 1.0;
            promoted += 1;
        }
    }
    Ok(Loaded { image, promoted })
}

pub fn is_pgm_path(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

/// Writes `.pgm` paths as PGM at `depth`, anything else as raw doubles.
/// Returns the number of pixels clamped by quantization.
pub fn write_image(path: &Path, image: &Image, depth: BitDepth) -> Result<usize> {
    let (bytes, clamped) = if is_pgm_path(path) {
        pgm::encode(image, depth)
    } else {
        (raw::encode(image), 0)
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    Ok(clamped)
}
