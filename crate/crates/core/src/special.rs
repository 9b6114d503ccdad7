//! Polygamma functions, the Gamma speckle law and its log-domain statistics.

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::grid::Image;

/// Identifier of the pseudo-random generator used by every sampler in this
/// crate, recorded in run manifests. Seeds map to streams through
/// `ChaCha8Rng::seed_from_u64`.
pub const RNG_ALGORITHM: &str = "chacha8/seed_from_u64";

/// Below this argument the recurrences shift upward before the asymptotic
/// series is evaluated.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// Digamma, `d/dz log Gamma(z)`, for `z > 0`.
pub fn digamma(z: f64) -> Result<f64> {
    check_positive(z)?;
    let mut z = z;
    let mut shift = 0.0;
    while z < ASYMPTOTIC_FROM {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let r = 1.0 / (z * z);
    // Bernoulli terms B_{2k} / (2k z^{2k}), k = 1..7
    let series = r
        * (1.0 / 12.0
            - r * (1.0 / 120.0
                - r * (1.0 / 252.0
                    - r * (1.0 / 240.0 - r * (1.0 / 132.0 - r * (691.0 / 32760.0 - r / 12.0))))));
    Ok(shift + libm::log(z) - 0.5 / z - series)
}

/// Trigamma, `d^2/dz^2 log Gamma(z)`, for `z > 0`.
pub fn trigamma(z: f64) -> Result<f64> {
    check_positive(z)?;
    let mut z = z;
    let mut shift = 0.0;
    while z < ASYMPTOTIC_FROM {
        shift += 1.0 / (z * z);
        z += 1.0;
    }
    let r = 1.0 / (z * z);
    // B_{2k} / z^{2k+1}, k = 1..7
    let series = r
        * (1.0 / 6.0
            - r * (1.0 / 30.0
                - r * (1.0 / 42.0
                    - r * (1.0 / 30.0 - r * (5.0 / 66.0 - r * (691.0 / 2730.0 - r * 7.0 / 6.0))))));
    Ok(shift + (1.0 + 0.5 / z + series) / z)
}

/// `psi_order(z)` for order 0 (digamma) or 1 (trigamma).
pub fn polygamma(order: u32, z: f64) -> Result<f64> {
    match order {
        0 => digamma(z),
        1 => trigamma(z),
        _ => Err(Error::invalid("order", "only orders 0 and 1 are supported")),
    }
}

fn check_positive(z: f64) -> Result<()> {
    if z > 0.0 && z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(alloc::format!(
            "polygamma requires a finite z > 0, got {z}"
        )))
    }
}

/// Parameters of the averaged speckle law: `eta = (1/K) sum eta_k` with
/// `E[eta_k] = mu`, which is Gamma with shape `K` and mean `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    looks: u32,
    mean: f64,
}

impl NoiseModel {
    pub fn new(looks: u32, mean: f64) -> Result<Self> {
        if looks < 1 {
            return Err(Error::invalid("K", "number of looks must be >= 1"));
        }
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::invalid("mu", "noise mean must be > 0"));
        }
        Ok(Self { looks, mean })
    }

    /// `K` looks with unit mean, the usual SAR convention.
    pub fn unit_mean(looks: u32) -> Result<Self> {
        Self::new(looks, 1.0)
    }

    #[inline]
    pub fn looks(&self) -> u32 {
        self.looks
    }

    #[inline]
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard deviation of `eta`, `mu / sqrt(K)`.
    pub fn std_dev(&self) -> f64 {
        self.mean / libm::sqrt(self.looks as f64)
    }

    /// Density of `eta`: `(K/mu)^K eta^(K-1) exp(-K eta / mu) / Gamma(K)`.
    pub fn pdf(&self, eta: f64) -> f64 {
        if eta < 0.0 {
            return 0.0;
        }
        let k = self.looks as f64;
        if eta == 0.0 {
            return if self.looks == 1 {
                1.0 / self.mean
            } else {
                0.0
            };
        }
        libm::exp(
            k * libm::log(k / self.mean) + (k - 1.0) * libm::log(eta)
                - k * eta / self.mean
                - libm::lgamma(k),
        )
    }

    /// Density of `n = log eta`, i.e. `pdf(e^n) e^n`.
    pub fn log_pdf(&self, n: f64) -> f64 {
        let k = self.looks as f64;
        libm::exp(
            k * libm::log(k / self.mean) + k * n - k * libm::exp(n) / self.mean - libm::lgamma(k),
        )
    }
}

/// Mean and variance of the log-noise `n = log eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNoiseStats {
    pub mean: f64,
    pub variance: f64,
    pub sigma: f64,
}

/// `E[n] = psi0(K) - log K + log mu` and `Var[n] = psi1(K)`.
pub fn log_noise_stats(model: &NoiseModel) -> LogNoiseStats {
    let k = model.looks as f64;
    let mean = digamma(k).expect("K >= 1") - libm::log(k) + libm::log(model.mean);
    let variance = trigamma(k).expect("K >= 1");
    LogNoiseStats {
        mean,
        variance,
        sigma: libm::sqrt(variance),
    }
}

/// Draws an `rows x cols` field of i.i.d. Gamma(K, mean mu) speckle.
/// Identical seeds give identical fields on every platform.
pub fn sample_speckle(model: &NoiseModel, rows: usize, cols: usize, seed: u64) -> Image {
    let k = model.looks as f64;
    let law = Gamma::new(k, model.mean / k).expect("valid gamma parameters");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::from_fn(rows, cols, |_, _| law.sample(&mut rng))
}

/// `S = S0 * eta` pixelwise with fresh speckle drawn from `seed`.
pub fn apply_multiplicative_noise(clean: &Image, model: &NoiseModel, seed: u64) -> Result<Image> {
    ensure_positive(clean)?;
    let eta = sample_speckle(model, clean.rows(), clean.cols(), seed);
    clean.zip_map(&eta, |s, e| s * e)
}

pub(crate) fn ensure_positive(img: &Image) -> Result<()> {
    match img.as_slice().iter().position(|&v| v <= 0.0) {
        None => Ok(()),
        Some(k) => Err(Error::Domain(alloc::format!(
            "pixel ({}, {}) = {} is not strictly positive",
            k / img.cols(),
            k % img.cols(),
            img.as_slice()[k]
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    const PI2_6: f64 = core::f64::consts::PI * core::f64::consts::PI / 6.0;

    #[test]
    fn classical_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-12);
        assert!((trigamma(1.0).unwrap() - PI2_6).abs() < 1e-12);
        // psi1(10) = pi^2/6 - sum_{k<10} 1/k^2
        let tail: f64 = (1..10).map(|k| 1.0 / (k * k) as f64).sum();
        assert!((trigamma(10.0).unwrap() - (PI2_6 - tail)).abs() < 1e-12);
        assert!((trigamma(10.0).unwrap() - 0.105_166).abs() < 1e-6);
        // psi0(1/2) = -gamma - 2 ln 2
        let half = -EULER_GAMMA - 2.0 * core::f64::consts::LN_2;
        assert!((digamma(0.5).unwrap() - half).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(digamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(trigamma(-1.5), Err(Error::Domain(_))));
        assert!(polygamma(2, 1.0).is_err());
        assert!(NoiseModel::new(0, 1.0).is_err());
        assert!(NoiseModel::new(3, 0.0).is_err());
    }

    #[test]
    fn stats_for_single_look() {
        let s = log_noise_stats(&NoiseModel::unit_mean(1).unwrap());
        assert!((s.mean + EULER_GAMMA).abs() < 1e-12);
        assert!((s.variance - PI2_6).abs() < 1e-12);
        assert!((s.sigma * s.sigma - s.variance).abs() <= 2.0 * f64::EPSILON * s.variance);
        let s = log_noise_stats(&NoiseModel::unit_mean(10).unwrap());
        assert!((s.variance - 0.105_166).abs() < 1e-6);
    }

    #[test]
    fn pdf_integrates_to_one() {
        for (k, mu) in [(1, 1.0), (4, 2.0), (10, 1.0)] {
            let m = NoiseModel::new(k, mu).unwrap();
            let h = 1e-4;
            let total: f64 = (0..200_000).map(|i| m.pdf((i as f64 + 0.5) * h) * h).sum();
            assert!((total - 1.0).abs() < 1e-4, "K={k}: {total}");
            let total: f64 = (0..200_000)
                .map(|i| m.log_pdf(-10.0 + (i as f64 + 0.5) * h) * h)
                .sum();
            // truncation at n = -10 only matters for K = 1
            assert!((total - 1.0).abs() < 1e-4, "K={k}: log pdf {total}");
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let m = NoiseModel::unit_mean(3).unwrap();
        assert_eq!(sample_speckle(&m, 4, 5, 9), sample_speckle(&m, 4, 5, 9));
        assert_ne!(sample_speckle(&m, 4, 5, 9), sample_speckle(&m, 4, 5, 10));
    }

    #[test]
    fn multiplicative_noise_on_ones_is_the_speckle() {
        let m = NoiseModel::unit_mean(2).unwrap();
        let s = apply_multiplicative_noise(&Image::filled(3, 3, 1.0), &m, 5).unwrap();
        assert_eq!(s, sample_speckle(&m, 3, 3, 5));
        let mut zero = Image::filled(2, 2, 1.0);
        zero.set(1, 0, 0.0);
        assert!(matches!(
            apply_multiplicative_noise(&zero, &m, 1),
            Err(Error::Domain(_))
        ));
    }
}
