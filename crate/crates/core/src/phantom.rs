//! Piecewise-constant test images.

use crate::grid::Image;

/// (intensity, semi-axis x, semi-axis y, center x, center y, angle in degrees)
const SHEPP_LOGAN: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Modified Shepp-Logan head phantom with gray levels mapped into `[1, 256]`
/// (background 1, outer skull 256).
pub fn shepp_logan(rows: usize, cols: usize) -> Image {
    Image::from_fn(rows, cols, |i, j| {
        let x = (2.0 * j as f64 + 1.0) / cols as f64 - 1.0;
        let y = 1.0 - (2.0 * i as f64 + 1.0) / rows as f64;
        let mut v = 0.0;
        for &(a, ax, ay, cx, cy, deg) in &SHEPP_LOGAN {
            let th = deg.to_radians();
            let (s, c) = (libm::sin(th), libm::cos(th));
            let dx = x - cx;
            let dy = y - cy;
            let u = (dx * c + dy * s) / ax;
            let w = (-dx * s + dy * c) / ay;
            if u * u + w * w <= 1.0 {
                v += a;
            }
        }
        1.0 + 255.0 * v.clamp(0.0, 1.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_levels() {
        let p = shepp_logan(64, 64);
        assert_eq!(p.min(), 1.0);
        assert_eq!(p.max(), 256.0);
        let mut levels: alloc::vec::Vec<u64> = p
            .as_slice()
            .iter()
            .map(|v| (v * 1000.0).round() as u64)
            .collect();
        levels.sort_unstable();
        levels.dedup();
        assert!(levels.len() >= 5 && levels.len() <= 10, "{levels:?}");
    }
}
