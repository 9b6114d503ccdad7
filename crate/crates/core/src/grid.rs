//! Discrete image calculus on a regular grid with unit spacing.
//!
//! The gradient uses forward differences with the last row and column
//! replicated, so its final-row vertical component and final-column
//! horizontal component vanish. The divergence uses backward differences
//! with zero boundary rows/columns, which makes it exactly the negative
//! adjoint of the gradient: `<grad u, z> = -<u, div z>`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A dense `rows x cols` grid of finite reals, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Image {
    /// Wraps row-major pixel data. Fails if the shape is empty, the length
    /// disagrees with the shape, or any pixel is not finite.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("shape", "image must be at least 1x1"));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(
                "data",
                alloc::format!("expected {} pixels, got {}", rows * cols, data.len()),
            ));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(alloc::format!(
                "pixel ({}, {}) is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, 0.0)
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "image must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "image must be at least 1x1");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds an image from nested rows; panics on ragged input. Mostly for tests.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let data: Vec<f64> = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.as_ref().len(), cols, "ragged rows");
                r.as_ref().iter().copied()
            })
            .collect();
        Self::new(rows.len(), cols, data).expect("valid image rows")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Image, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_shape(self.shape(), other.shape())?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &Image) -> Result<()> {
        check_shape(self.shape(), other.shape())?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A pair of same-shape images, e.g. a gradient or a dual variable.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    /// Vertical (row-direction) component.
    pub z1: Image,
    /// Horizontal (column-direction) component.
    pub z2: Image,
}

impl VectorField {
    pub fn new(z1: Image, z2: Image) -> Result<Self> {
        check_shape(z1.shape(), z2.shape())?;
        Ok(Self { z1, z2 })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            z1: Image::zeros(rows, cols),
            z2: Image::zeros(rows, cols),
        }
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.z1.shape()
    }

    /// Per-pixel Euclidean magnitude `sqrt(z1^2 + z2^2)`.
    pub fn magnitude(&self) -> Image {
        self.z1
            .zip_map(&self.z2, |a, b| libm::sqrt(a * a + b * b))
            .expect("components share a shape")
    }

    pub fn scale(&mut self, alpha: f64) {
        self.z1.scale(alpha);
        self.z2.scale(alpha);
    }
}

pub(crate) fn check_shape(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Forward-difference gradient with replicated last row/column.
pub fn gradient(u: &Image) -> VectorField {
    let mut out = VectorField::zeros(u.rows(), u.cols());
    gradient_into(u, &mut out);
    out
}

/// In-place [`gradient`]; `out` must have the shape of `u`.
pub fn gradient_into(u: &Image, out: &mut VectorField) {
    let (m, n) = u.shape();
    debug_assert_eq!(out.shape(), (m, n));
    let src = u.as_slice();
    let z1 = out.z1.as_mut_slice();
    for i in 0..m {
        let row = i * n;
        if i + 1 < m {
            for j in 0..n {
                z1[row + j] = src[row + n + j] - src[row + j];
            }
        } else {
            z1[row..row + n].fill(0.0);
        }
    }
    let z2 = out.z2.as_mut_slice();
    for i in 0..m {
        let row = i * n;
        for j in 0..n - 1 {
            z2[row + j] = src[row + j + 1] - src[row + j];
        }
        z2[row + n - 1] = 0.0;
    }
}

/// Backward-difference divergence, the negative adjoint of [`gradient`].
pub fn divergence(z: &VectorField) -> Image {
    let (m, n) = z.shape();
    let mut out = Image::zeros(m, n);
    divergence_into(z, &mut out);
    out
}

/// In-place [`divergence`]; `out` must have the shape of `z`.
pub fn divergence_into(z: &VectorField, out: &mut Image) {
    let (m, n) = z.shape();
    debug_assert_eq!(out.shape(), (m, n));
    let z1 = z.z1.as_slice();
    let z2 = z.z2.as_slice();
    let d = out.as_mut_slice();
    for i in 0..m {
        for j in 0..n {
            let k = i * n + j;
            let mut v = 0.0;
            if i + 1 < m {
                v += z1[k];
            }
            if i > 0 {
                v -= z1[k - n];
            }
            if j + 1 < n {
                v += z2[k];
            }
            if j > 0 {
                v -= z2[k - 1];
            }
            d[k] = v;
        }
    }
}

/// Isotropic discrete total variation: the sum over pixels of `|grad u|`.
pub fn tv_norm(u: &Image) -> f64 {
    let (m, n) = u.shape();
    let s = u.as_slice();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            let k = i * n + j;
            let dv = if i + 1 < m { s[k + n] - s[k] } else { 0.0 };
            let dh = if j + 1 < n { s[k + 1] - s[k] } else { 0.0 };
            total += libm::sqrt(dv * dv + dh * dh);
        }
    }
    total
}

/// Anything that can be viewed as a flat real vector with a fixed layout.
pub trait Euclidean {
    /// Layout key; two values are comparable iff their layouts agree.
    fn layout(&self) -> (usize, usize);
    fn values(&self) -> impl Iterator<Item = f64> + '_;
}

impl Euclidean for Image {
    fn layout(&self) -> (usize, usize) {
        self.shape()
    }
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

impl Euclidean for VectorField {
    fn layout(&self) -> (usize, usize) {
        let (m, n) = self.shape();
        (2 * m, n)
    }
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.z1.values().chain(self.z2.values())
    }
}

pub fn inner<T: Euclidean>(a: &T, b: &T) -> Result<f64> {
    check_shape(a.layout(), b.layout())?;
    Ok(a.values().zip(b.values()).map(|(x, y)| x * y).sum())
}

pub fn norm2<T: Euclidean>(a: &T) -> f64 {
    libm::sqrt(a.values().map(|x| x * x).sum())
}

pub fn norm1<T: Euclidean>(a: &T) -> f64 {
    a.values().map(f64::abs).sum()
}

pub fn norm_inf<T: Euclidean>(a: &T) -> f64 {
    a.values().map(f64::abs).fold(0.0, f64::max)
}

/// `||a - b||_2`, failing on layout mismatch.
pub fn distance<T: Euclidean>(a: &T, b: &T) -> Result<f64> {
    check_shape(a.layout(), b.layout())?;
    Ok(libm::sqrt(
        a.values()
            .zip(b.values())
            .map(|(x, y)| (x - y) * (x - y))
            .sum(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_corner_impulse() {
        let u = Image::from_rows(&[[0.0, 0.0], [0.0, 1.0]]);
        let g = gradient(&u);
        assert_eq!(g.z1, Image::from_rows(&[[0.0, 1.0], [0.0, 0.0]]));
        assert_eq!(g.z2, Image::from_rows(&[[0.0, 0.0], [1.0, 0.0]]));
    }

    #[test]
    fn gradient_of_constant_and_single_pixel() {
        let g = gradient(&Image::filled(3, 5, 7.25));
        assert_eq!(norm_inf(&g), 0.0);
        let g = gradient(&Image::from_rows(&[[5.0]]));
        assert_eq!(g.z1.as_slice(), &[0.0]);
        assert_eq!(g.z2.as_slice(), &[0.0]);
    }

    #[test]
    fn divergence_boundary_rows() {
        let z = VectorField::new(
            Image::from_rows(&[[1.0, 0.0], [0.0, 0.0]]),
            Image::zeros(2, 2),
        )
        .unwrap();
        assert_eq!(divergence(&z), Image::from_rows(&[[1.0, 0.0], [-1.0, 0.0]]));
        assert_eq!(norm_inf(&divergence(&VectorField::zeros(4, 3))), 0.0);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_norm(&Image::filled(4, 4, 3.0)), 0.0);
        let u = Image::from_rows(&[[0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(tv_norm(&u), 2.0);
        assert_eq!(tv_norm(&u), norm1(&gradient(&u).magnitude()));
        assert_eq!(tv_norm(&u.map(|v| v + 12.5)), 2.0);
    }

    #[test]
    fn norms() {
        let u = Image::from_rows(&[[3.0, -4.0]]);
        assert_eq!(norm_inf(&u), 4.0);
        assert_eq!(norm1(&u), 7.0);
        assert_eq!(norm2(&u), 5.0);
        assert_eq!(inner(&u, &u).unwrap(), 25.0);
        assert_eq!(norm1(&Image::zeros(3, 3)), 0.0);
        assert!(matches!(
            inner(&u, &Image::zeros(2, 1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_images() {
        assert!(Image::new(0, 3, Vec::new()).is_err());
        assert!(Image::new(1, 2, vec![1.0]).is_err());
        assert!(matches!(
            Image::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::Domain(_))
        ));
    }
}
