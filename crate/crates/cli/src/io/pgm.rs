//! Binary PGM (`P5`), 8 and 16 bits per sample.
//!
//! 8-bit gray levels `g` load as `g + 1`, so the working range is `[1, 256]`
//! and logarithms stay finite; saving inverts the shift. 16-bit samples load
//! unchanged.

use despeckle_core::Image;

/// Sample width of a PGM file.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize, clap::ValueEnum,
)]
pub enum BitDepth {
    #[value(name = "8")]
    #[serde(rename = "8")]
    Eight,
    #[value(name = "16")]
    #[serde(rename = "16")]
    Sixteen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub image: Image,
    pub maxval: u16,
}

fn header_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], String> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err("truncated header".into());
    }
    Ok(&bytes[start..*pos])
}

fn header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, String> {
    let tok = header_token(bytes, pos)?;
    std::str::from_utf8(tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| format!("bad {what} in header"))
}

pub fn decode(bytes: &[u8]) -> Result<Decoded, String> {
    let mut pos = 0;
    if header_token(bytes, &mut pos)? != b"P5" {
        return Err("not a binary PGM (expected P5)".into());
    }
    let cols = header_number(bytes, &mut pos, "width")?;
    let rows = header_number(bytes, &mut pos, "height")?;
    let maxval = header_number(bytes, &mut pos, "maxval")?;
    if !(1..=65535).contains(&maxval) {
        return Err(format!("maxval {maxval} outside 1..=65535"));
    }
    if rows == 0 || cols == 0 {
        return Err("empty image".into());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let width = if maxval < 256 { 1 } else { 2 };
    let need = rows * cols * width;
    let raster = bytes.get(pos..pos + need).ok_or_else(|| {
        format!(
            "raster holds {} bytes, expected {need}",
            bytes.len().saturating_sub(pos)
        )
    })?;
    let data: Vec<f64> = if width == 1 {
        raster.iter().map(|&g| g as f64 + 1.0).collect()
    } else {
        raster
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64)
            .collect()
    };
    let image = Image::new(rows, cols, data).map_err(|e| e.to_string())?;
    Ok(Decoded {
        image,
        maxval: maxval as u16,
    })
}

/// Encodes `image`, rounding and clamping to the representable range.
/// Returns the bytes and the number of clamped pixels.
pub fn encode(image: &Image, depth: BitDepth) -> (Vec<u8>, usize) {
    let maxval: u32 = match depth {
        BitDepth::Eight => 255,
        BitDepth::Sixteen => 65535,
    };
    let mut out = format!("P5\n{} {}\n{}\n", image.cols(), image.rows(), maxval).into_bytes();
    let mut clamped = 0;
    for &v in image.as_slice() {
        let level = match depth {
            BitDepth::Eight => v - 1.0,
            BitDepth::Sixteen => v,
        };
        let r = level.round();
        let q = if r.is_nan() || r < 0.0 {
            clamped += 1;
            0
        } else if r > maxval as f64 {
            clamped += 1;
            maxval
        } else {
            r as u32
        };
        match depth {
            BitDepth::Eight => out.push(q as u8),
            BitDepth::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    (out, clamped)
}
