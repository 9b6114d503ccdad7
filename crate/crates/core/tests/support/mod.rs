//! Reference solvers written independently of the library internals. They
//! share only the `Image`/`FrameCoeffs` containers and the frame operators,
//! whose own identities are checked elsewhere.

#![allow(dead_code)]

use despeckle_core::{FrameCoeffs, Image, TightFrame};

/// SplitMix64, enough for reproducible test data.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed ^ 0x9e37_79b9_7f4a_7c15)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        lo + (hi - lo) * u
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn image(&mut self, rows: usize, cols: usize, lo: f64, hi: f64) -> Image {
        Image::from_fn(rows, cols, |_, _| self.uniform(lo, hi))
    }
}

/// Piecewise-constant test scene: a few random rectangles and disks.
pub fn blocks(rows: usize, cols: usize, seed: u64) -> Image {
    let mut rng = TestRng::new(seed);
    let mut img = Image::filled(rows, cols, 20.0);
    for k in 0..6 {
        let level = rng.uniform(10.0, 200.0);
        let ci = rng.uniform(0.0, rows as f64);
        let cj = rng.uniform(0.0, cols as f64);
        let r = rng.uniform(0.15, 0.35) * rows.min(cols) as f64;
        for i in 0..rows {
            for j in 0..cols {
                let (di, dj) = (i as f64 - ci, j as f64 - cj);
                let inside = if k % 2 == 0 {
                    di * di + dj * dj <= r * r
                } else {
                    di.abs() <= r && dj.abs() <= 0.6 * r
                };
                if inside {
                    img.set(i, j, level);
                }
            }
        }
    }
    img
}

/// Forward differences with zero in the last row / column.
pub fn grad(u: &Image) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = u.shape();
    let mut g1 = vec![0.0; m * n];
    let mut g2 = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            if i + 1 < m {
                g1[i * n + j] = u.get(i + 1, j) - u.get(i, j);
            }
            if j + 1 < n {
                g2[i * n + j] = u.get(i, j + 1) - u.get(i, j);
            }
        }
    }
    (g1, g2)
}

/// Transpose of [`grad`], assembled entry by entry.
pub fn grad_transpose(m: usize, n: usize, p1: &[f64], p2: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let k = i * n + j;
            if i + 1 < m {
                out[(i + 1) * n + j] += p1[k];
                out[k] -= p1[k];
            }
            if j + 1 < n {
                out[k + 1] += p2[k];
                out[k] -= p2[k];
            }
        }
    }
    out
}

pub fn tv(u: &Image) -> f64 {
    let (g1, g2) = grad(u);
    g1.iter().zip(&g2).map(|(a, b)| a.hypot(*b)).sum()
}

/// `argmin_z gamma lambda |z - y| + (z - x)^2 / 2` by bisection on the sign of
/// the right derivative, which is monotone for a convex function. Comparing
/// slopes instead of values keeps full precision near the minimum.
pub fn scalar_prox_oracle(x: f64, y: f64, gamma_lambda: f64) -> f64 {
    let right_slope = |z: f64| (z - x) + if z >= y { gamma_lambda } else { -gamma_lambda };
    let mut lo = x.min(y) - gamma_lambda - 1.0;
    let mut hi = x.max(y) + gamma_lambda + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if right_slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `argmin_w ||u - w||^2 / 2 + strength TV(w)` by subgradient descent with
/// step `1/t` (the objective is 1-strongly convex).
pub fn rof_subgradient(u: &Image, strength: f64, iterations: usize) -> Image {
    let (m, n) = u.shape();
    let mut w = u.clone();
    for t in 1..=iterations {
        let (g1, g2) = grad(&w);
        let mut p1 = vec![0.0; m * n];
        let mut p2 = vec![0.0; m * n];
        for k in 0..m * n {
            let mag = g1[k].hypot(g2[k]);
            if mag > 1e-15 {
                p1[k] = g1[k] / mag;
                p2[k] = g2[k] / mag;
            }
        }
        let tv_sub = grad_transpose(m, n, &p1, &p2);
        let step = 1.0 / t as f64;
        for (k, v) in w.as_mut_slice().iter_mut().enumerate() {
            let g = (*v - u.as_slice()[k]) + strength * tv_sub[k];
            *v -= step * g;
        }
    }
    w
}

/// `sum_i lambda_i |x_i - y_i| + TV(W~ x)`, evaluated from scratch.
pub fn criterion<F: TightFrame>(
    frame: &F,
    x: &FrameCoeffs,
    y: &FrameCoeffs,
    lambda: &[f64],
) -> f64 {
    let fid: f64 = x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .zip(lambda)
        .map(|((a, b), l)| l * (a - b).abs())
        .sum();
    fid + tv(&frame.synthesize(x).unwrap())
}

/// Chambolle-Pock primal-dual iterations on
/// `min_x sum_i lambda_i |x_i - y_i| + || grad W~ x ||_{1,2}`.
pub fn primal_dual<F: TightFrame>(
    frame: &F,
    y: &FrameCoeffs,
    lambda: &[f64],
    iterations: usize,
) -> FrameCoeffs {
    let (m, n) = y.image_shape();
    let c = frame.frame_constant();
    let norm_sq = 8.0 / c;
    let tau = 0.95 / norm_sq.sqrt();
    let sigma = 0.95 / norm_sq.sqrt();
    let mut x = y.clone();
    let mut x_bar = x.clone();
    let mut p1 = vec![0.0; m * n];
    let mut p2 = vec![0.0; m * n];
    let mut best = x.clone();
    let mut best_val = f64::INFINITY;
    for t in 0..iterations {
        let (g1, g2) = grad(&frame.synthesize(&x_bar).unwrap());
        for k in 0..m * n {
            let a = p1[k] + sigma * g1[k];
            let b = p2[k] + sigma * g2[k];
            let scale = a.hypot(b).max(1.0);
            p1[k] = a / scale;
            p2[k] = b / scale;
        }
        // K* p = W~^T grad^T p = c^-1 W grad^T p
        let back = Image::new(m, n, grad_transpose(m, n, &p1, &p2)).unwrap();
        let kp = frame.analyze(&back);
        let previous = x.clone();
        for (((v, &g), &yy), &l) in x
            .as_mut_slice()
            .iter_mut()
            .zip(kp.as_slice())
            .zip(y.as_slice())
            .zip(lambda)
        {
            let z = *v - tau * g / c - yy;
            let thr = tau * l;
            *v = yy + z.signum() * (z.abs() - thr).max(0.0);
        }
        for ((b, &v), &p) in x_bar
            .as_mut_slice()
            .iter_mut()
            .zip(x.as_slice())
            .zip(previous.as_slice())
        {
            *b = 2.0 * v - p;
        }
        if t % 50 == 0 || t + 1 == iterations {
            let val = criterion(frame, &x, y, lambda);
            if val < best_val {
                best_val = val;
                best = x.clone();
            }
        }
    }
    best
}

/// Largest eigenvalue of `-Div grad = grad^T grad` by power iteration.
pub fn grad_spectral_norm_sq(m: usize, n: usize, iterations: usize, seed: u64) -> f64 {
    let mut rng = TestRng::new(seed);
    let mut v: Vec<f64> = (0..m * n).map(|_| rng.uniform(-1.0, 1.0)).collect();
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.iter_mut().for_each(|a| *a /= norm);
        let img = Image::new(m, n, v.clone()).unwrap();
        let div_grad = despeckle_core::divergence(&despeckle_core::gradient(&img));
        let w: Vec<f64> = div_grad.as_slice().iter().map(|a| -a).collect();
        lambda = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        v = w;
    }
    lambda
}
