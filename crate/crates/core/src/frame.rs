//! Undecimated tight frame built from cubic B-spline framelets.
//!
//! The 1-D filter bank is the unitary-extension family of the cubic
//! B-spline: a low-pass `h0 = [1 4 6 4 1] / 16` and four high-pass filters
//! `h_k`, with `sum_k |H_k(w)|^2 = 1` for every frequency. Each level of the
//! 2-D transform splits the current approximation as
//! `1 = (1 - A) + A (1 - B) + A B`, where `A` and `B` are the squared
//! low-pass responses along the two axes. That gives eight detail bands per
//! level (four one-axis bands and four low-passed cross bands) and keeps the
//! frame Parseval, so `W^T W = Id` exactly. Filters are dilated by `2^j` at
//! level `j` (a trous) and applied with periodic extension; every subband
//! keeps the image shape. The axis roles alternate between levels so that
//! neither direction is favored over the whole decomposition.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{check_shape, Euclidean, Image};

const TAPS: usize = 5;

/// Cubic B-spline framelet filters `sqrt(C(4,k)) ((1+z)/2)^(4-k) ((1-z)/2)^k`.
fn spline_filters() -> [[f64; TAPS]; TAPS] {
    let mut out = [[0.0; TAPS]; TAPS];
    for (k, filt) in out.iter_mut().enumerate() {
        // expand (1+z)^(4-k) (1-z)^k
        let mut poly = [0.0f64; TAPS];
        poly[0] = 1.0;
        for step in 0..4 {
            let sign = if step < 4 - k { 1.0 } else { -1.0 };
            for d in (0..=step).rev() {
                poly[d + 1] += sign * poly[d];
            }
        }
        let binom = [1.0, 4.0, 6.0, 4.0, 1.0][k];
        let scale = libm::sqrt(binom) / 16.0;
        for (f, p) in filt.iter_mut().zip(poly) {
            *f = scale * p;
        }
    }
    out
}

/// Which part of the decomposition a subband holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subband {
    /// Coarsest low-pass approximation; never thresholded.
    Approx,
    /// Detail band `band` (0..8) at scale `level` (0 = finest).
    Detail { level: usize, band: usize },
}

/// Frame coefficients: one image-shaped array per subband, stored
/// contiguously. The approximation subband always comes first.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameCoeffs {
    rows: usize,
    cols: usize,
    labels: Vec<Subband>,
    data: Vec<f64>,
}

impl FrameCoeffs {
    pub fn zeros_like(other: &FrameCoeffs) -> Self {
        Self {
            rows: other.rows,
            cols: other.cols,
            labels: other.labels.clone(),
            data: vec![0.0; other.data.len()],
        }
    }

    /// Builds a coefficient set from raw storage laid out as `labels`.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        labels: Vec<Subband>,
        data: Vec<f64>,
    ) -> Result<Self> {
        if labels.first() != Some(&Subband::Approx)
            || labels.iter().filter(|l| **l == Subband::Approx).count() != 1
        {
            return Err(Error::invalid(
                "labels",
                "exactly one leading approximation subband required",
            ));
        }
        if data.len() != labels.len() * rows * cols {
            return Err(Error::invalid(
                "data",
                "length does not match subband layout",
            ));
        }
        Ok(Self {
            rows,
            cols,
            labels,
            data,
        })
    }

    #[inline]
    pub fn image_shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn num_subbands(&self) -> usize {
        self.labels.len()
    }

    /// Total number of coefficients `M`.
    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn labels(&self) -> &[Subband] {
        &self.labels
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn band_len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn band(&self, index: usize) -> &[f64] {
        let n = self.band_len();
        &self.data[index * n..(index + 1) * n]
    }

    pub fn band_mut(&mut self, index: usize) -> &mut [f64] {
        let n = self.band_len();
        &mut self.data[index * n..(index + 1) * n]
    }

    pub fn band_image(&self, index: usize) -> Image {
        Image::new(self.rows, self.cols, self.band(index).to_vec()).expect("finite coefficients")
    }

    /// Number of coefficients in the approximation subband (`#I*`).
    pub fn approx_len(&self) -> usize {
        self.band_len()
    }

    /// True if coefficient `k` (flat index) lies in the approximation subband.
    #[inline]
    pub fn is_approx(&self, k: usize) -> bool {
        k < self.band_len()
    }

    pub fn check_compatible(&self, other: &FrameCoeffs) -> Result<()> {
        check_shape(self.layout(), other.layout())?;
        if self.labels != other.labels {
            return Err(Error::invalid("coefficients", "subband layouts differ"));
        }
        Ok(())
    }

    /// `self += alpha * other`
    pub fn add_scaled(&mut self, alpha: f64, other: &FrameCoeffs) -> Result<()> {
        self.check_compatible(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|v| *v *= alpha);
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            labels: self.labels.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl Euclidean for FrameCoeffs {
    fn layout(&self) -> (usize, usize) {
        (self.labels.len() * self.rows, self.cols)
    }
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().copied()
    }
}

/// Analysis/synthesis pair with `synthesize(analyze(u)) = u` and
/// `analyze^T analyze = c Id`.
pub trait TightFrame {
    /// Analysis operator `W`.
    fn analyze(&self, u: &Image) -> FrameCoeffs;
    /// Adjoint `W^T`.
    fn adjoint(&self, x: &FrameCoeffs) -> Result<Image>;
    /// Frame constant `c`.
    fn frame_constant(&self) -> f64;
    /// Per-subband `l2` norm of the analysis atoms, i.e. the standard
    /// deviation of unit white noise in each subband.
    fn atom_norms(&self) -> &[f64];
    /// Per-subband total variation of the synthesis atoms `W~ e_i`.
    fn atom_tv(&self) -> &[f64];
    /// Pseudo-inverse `c^-1 W^T`.
    fn synthesize(&self, x: &FrameCoeffs) -> Result<Image> {
        let mut u = self.adjoint(x)?;
        let c = self.frame_constant();
        if c != 1.0 {
            u.scale(1.0 / c);
        }
        Ok(u)
    }
}

/// The undecimated cubic B-spline framelet transform with `levels` scales.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineFramelets {
    levels: usize,
    filters: [[f64; TAPS]; TAPS],
    constant: f64,
    atom_norms: Vec<f64>,
    atom_tv: Vec<f64>,
}

/// Number of detail bands produced at each level.
pub const BANDS_PER_LEVEL: usize = 2 * (TAPS - 1);

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    Vertical,
    Horizontal,
}

impl Axis {
    fn other(self) -> Self {
        match self {
            Axis::Vertical => Axis::Horizontal,
            Axis::Horizontal => Axis::Vertical,
        }
    }
}

impl SplineFramelets {
    pub const FAMILY: &'static str = "b3-spline-framelets";

    pub fn new(levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::invalid(
                "levels",
                "at least one decomposition level is required",
            ));
        }
        let mut frame = Self {
            levels,
            filters: spline_filters(),
            constant: 1.0,
            atom_norms: Vec::new(),
            atom_tv: Vec::new(),
        };
        // Atoms are measured on a grid wide enough that the coarsest one
        // does not wrap around.
        let size = (TAPS - 1) * (1usize << levels) * 2;
        let center = size / 2;
        let mut delta = Image::zeros(size, size);
        delta.set(center, center, 1.0);
        let coeffs = frame.analyze(&delta);
        // c = ||W delta||^2 for a unit impulse
        frame.constant = coeffs.as_slice().iter().map(|v| v * v).sum();
        frame.atom_norms = (0..coeffs.num_subbands())
            .map(|b| libm::sqrt(coeffs.band(b).iter().map(|v| v * v).sum()))
            .collect();
        let mut unit = FrameCoeffs::zeros_like(&coeffs);
        frame.atom_tv = (0..coeffs.num_subbands())
            .map(|b| {
                unit.band_mut(b)[center * size + center] = 1.0;
                let atom = frame.synthesize(&unit).expect("layout matches");
                unit.band_mut(b)[center * size + center] = 0.0;
                crate::grid::tv_norm(&atom)
            })
            .collect();
        Ok(frame)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn labels(&self) -> Vec<Subband> {
        let mut labels = Vec::with_capacity(1 + self.levels * BANDS_PER_LEVEL);
        labels.push(Subband::Approx);
        for level in 0..self.levels {
            for band in 0..BANDS_PER_LEVEL {
                labels.push(Subband::Detail { level, band });
            }
        }
        labels
    }

    fn split_axis(level: usize) -> Axis {
        if level.is_multiple_of(2) {
            Axis::Vertical
        } else {
            Axis::Horizontal
        }
    }

    fn band_offset(level: usize, band: usize, n: usize) -> usize {
        (1 + level * BANDS_PER_LEVEL + band) * n
    }
}

/// Circular dilated filtering along one axis. `transpose` applies the adjoint.
#[allow(clippy::too_many_arguments)]
fn filter_axis(
    src: &[f64],
    dst: &mut [f64],
    rows: usize,
    cols: usize,
    axis: Axis,
    taps: &[f64; TAPS],
    dilation: usize,
    transpose: bool,
    accumulate: bool,
) {
    let (len, stride, lines, line_stride) = match axis {
        Axis::Vertical => (rows, cols, cols, 1),
        Axis::Horizontal => (cols, 1, rows, cols),
    };
    let half = (TAPS / 2) as isize;
    let mut offsets = [0usize; TAPS];
    for (t, off) in offsets.iter_mut().enumerate() {
        let mut shift = (t as isize - half) * dilation as isize;
        if transpose {
            shift = -shift;
        }
        *off = shift.rem_euclid(len as isize) as usize;
    }
    for line in 0..lines {
        let base = line * line_stride;
        for p in 0..len {
            let mut acc = 0.0;
            for t in 0..TAPS {
                let mut q = p + offsets[t];
                if q >= len {
                    q -= len;
                }
                acc += taps[t] * src[base + q * stride];
            }
            let slot = &mut dst[base + p * stride];
            if accumulate {
                *slot += acc;
            } else {
                *slot = acc;
            }
        }
    }
}

impl TightFrame for SplineFramelets {
    fn analyze(&self, u: &Image) -> FrameCoeffs {
        let (rows, cols) = u.shape();
        let n = rows * cols;
        let labels = self.labels();
        let mut data = vec![0.0; labels.len() * n];
        let mut current = u.as_slice().to_vec();
        let mut smoothed = vec![0.0; n];
        let [h0, detail @ ..] = &self.filters;
        for level in 0..self.levels {
            let dilation = 1usize << level;
            let first = Self::split_axis(level);
            let second = first.other();
            for (k, g) in detail.iter().enumerate() {
                let off = Self::band_offset(level, k, n);
                filter_axis(
                    &current,
                    &mut data[off..off + n],
                    rows,
                    cols,
                    first,
                    g,
                    dilation,
                    false,
                    false,
                );
            }
            filter_axis(
                &current,
                &mut smoothed,
                rows,
                cols,
                first,
                h0,
                dilation,
                false,
                false,
            );
            for (k, g) in detail.iter().enumerate() {
                let off = Self::band_offset(level, TAPS - 1 + k, n);
                filter_axis(
                    &smoothed,
                    &mut data[off..off + n],
                    rows,
                    cols,
                    second,
                    g,
                    dilation,
                    false,
                    false,
                );
            }
            filter_axis(
                &smoothed,
                &mut current,
                rows,
                cols,
                second,
                h0,
                dilation,
                false,
                false,
            );
        }
        data[..n].copy_from_slice(&current);
        FrameCoeffs {
            rows,
            cols,
            labels,
            data,
        }
    }

    fn adjoint(&self, x: &FrameCoeffs) -> Result<Image> {
        if x.labels.len() != 1 + self.levels * BANDS_PER_LEVEL || x.labels != self.labels() {
            return Err(Error::invalid(
                "coefficients",
                "subband layout does not match this frame",
            ));
        }
        let (rows, cols) = x.image_shape();
        let n = rows * cols;
        let data = x.as_slice();
        let mut current = data[..n].to_vec();
        let mut smoothed = vec![0.0; n];
        let [h0, detail @ ..] = &self.filters;
        for level in (0..self.levels).rev() {
            let dilation = 1usize << level;
            let first = Self::split_axis(level);
            let second = first.other();
            filter_axis(
                &current,
                &mut smoothed,
                rows,
                cols,
                second,
                h0,
                dilation,
                true,
                false,
            );
            for (k, g) in detail.iter().enumerate() {
                let off = Self::band_offset(level, TAPS - 1 + k, n);
                filter_axis(
                    &data[off..off + n],
                    &mut smoothed,
                    rows,
                    cols,
                    second,
                    g,
                    dilation,
                    true,
                    true,
                );
            }
            filter_axis(
                &smoothed,
                &mut current,
                rows,
                cols,
                first,
                h0,
                dilation,
                true,
                false,
            );
            for (k, g) in detail.iter().enumerate() {
                let off = Self::band_offset(level, k, n);
                filter_axis(
                    &data[off..off + n],
                    &mut current,
                    rows,
                    cols,
                    first,
                    g,
                    dilation,
                    true,
                    true,
                );
            }
        }
        Image::new(rows, cols, current)
    }

    fn frame_constant(&self) -> f64 {
        self.constant
    }

    fn atom_norms(&self) -> &[f64] {
        &self.atom_norms
    }

    fn atom_tv(&self) -> &[f64] {
        &self.atom_tv
    }
}

/// Membership of a coefficient in the threshold partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoeffClass {
    /// `I*`: approximation coefficient, kept intact.
    Approx,
    /// `I1`: detail coefficient with `|y| > T`, kept.
    Kept,
    /// `I0`: detail coefficient with `|y| <= T`, zeroed.
    Zeroed,
}

/// Partition of the coefficient index set into `I*`, `I1` and `I0`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexPartition {
    classes: Vec<CoeffClass>,
}

impl IndexPartition {
    pub fn classes(&self) -> &[CoeffClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn i_star(&self) -> Vec<bool> {
        self.mask(CoeffClass::Approx)
    }

    pub fn i1(&self) -> Vec<bool> {
        self.mask(CoeffClass::Kept)
    }

    pub fn i0(&self) -> Vec<bool> {
        self.mask(CoeffClass::Zeroed)
    }

    pub fn count(&self, class: CoeffClass) -> usize {
        self.classes.iter().filter(|c| **c == class).count()
    }

    fn mask(&self, class: CoeffClass) -> Vec<bool> {
        self.classes.iter().map(|c| *c == class).collect()
    }
}

/// Hard-thresholds every detail coefficient at `threshold` (`|y| <= T` goes
/// to zero); the approximation subband is left untouched.
pub fn hard_threshold(y: &FrameCoeffs, threshold: f64) -> Result<(FrameCoeffs, IndexPartition)> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid("T", "threshold must be >= 0"));
    }
    let mut out = y.clone();
    let approx = y.approx_len();
    let mut classes = Vec::with_capacity(y.len());
    for (k, v) in out.data.iter_mut().enumerate() {
        if k < approx {
            classes.push(CoeffClass::Approx);
        } else if v.abs() > threshold {
            classes.push(CoeffClass::Kept);
        } else {
            *v = 0.0;
            classes.push(CoeffClass::Zeroed);
        }
    }
    Ok((out, IndexPartition { classes }))
}

/// Hard threshold with a per-subband threshold `threshold * band_scale[b]`.
/// With `band_scale` set to the atom norms this thresholds every subband at
/// the same multiple of its own noise level.
pub fn hard_threshold_by_band(
    y: &FrameCoeffs,
    threshold: f64,
    band_scale: &[f64],
) -> Result<(FrameCoeffs, IndexPartition)> {
    if !(threshold >= 0.0) {
        return Err(Error::invalid("T", "threshold must be >= 0"));
    }
    if band_scale.len() != y.num_subbands() {
        return Err(Error::invalid(
            "band_scale",
            "one factor per subband is required",
        ));
    }
    let mut out = y.clone();
    let n = y.approx_len();
    let mut classes = Vec::with_capacity(y.len());
    for (k, v) in out.data.iter_mut().enumerate() {
        let band = k / n;
        if band == 0 {
            classes.push(CoeffClass::Approx);
            continue;
        }
        // T * scale is infinite for T = inf; 0 * inf never occurs since scale > 0
        let t = threshold * band_scale[band];
        if v.abs() > t {
            classes.push(CoeffClass::Kept);
        } else {
            *v = 0.0;
            classes.push(CoeffClass::Zeroed);
        }
    }
    Ok((out, IndexPartition { classes }))
}

/// `W~ y_TH`: the image rebuilt from hard-thresholded coefficients.
pub fn threshold_reconstruct<F: TightFrame + ?Sized>(
    frame: &F,
    y: &FrameCoeffs,
    threshold: f64,
) -> Result<Image> {
    let (y_th, _) = hard_threshold(y, threshold)?;
    frame.synthesize(&y_th)
}
