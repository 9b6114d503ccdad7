//! Lossless interchange of `f64` images.
//!
//! Layout, all little-endian: 8-byte magic `DSPKF64\0`, `u32` rows, `u32`
//! columns, then `rows * cols` IEEE-754 doubles in row-major order.

use despeckle_core::Image;

pub const MAGIC: &[u8; 8] = b"DSPKF64\0";
pub const HEADER_LEN: usize = 16;

pub fn encode(image: &Image) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * image.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(image.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(image.cols() as u32).to_le_bytes());
    for v in image.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<Image, String> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err("not a raw-double image (bad magic)".into());
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * rows * cols {
        return Err(format!(
            "{rows}x{cols} image needs {} data bytes, found {}",
            8 * rows * cols,
            body.len()
        ));
    }
    let data = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Image::new(rows, cols, data).map_err(|e| e.to_string())
}
