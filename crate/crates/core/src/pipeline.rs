//! End-to-end restoration, the two baselines and the quality metrics.

use crate::error::{Error, Result};
use crate::frame::{
    hard_threshold, hard_threshold_by_band, CoeffClass, FrameCoeffs, IndexPartition, TightFrame,
};
use crate::grid::{check_shape, distance, norm_inf, Image};
use crate::prox::{tv_prox, TvProxConfig};
use crate::solver::{
    douglas_rachford_timed, relative_residual, BandScaling, DrSolution, SolverConfig,
};
use crate::special::{ensure_positive, log_noise_stats, trigamma, NoiseModel};

/// Multiplicative correction `1 + psi1(K) / 2` applied after exponentiation.
pub fn bias_factor(model: &NoiseModel) -> f64 {
    1.0 + 0.5 * trigamma(model.looks() as f64).expect("K >= 1")
}

/// Threshold `factor * sqrt(psi1(K))`; the default restoration uses factor 2.
pub fn threshold_for(model: &NoiseModel, factor: f64) -> f64 {
    factor * log_noise_stats(model).sigma
}

fn log_image(s: &Image) -> Result<Image> {
    ensure_positive(s)?;
    Ok(s.map(libm::log))
}

fn restore_intensity(u: &Image, model: &NoiseModel) -> Image {
    let factor = bias_factor(model);
    u.map(|v| libm::exp(v) * factor)
}

/// Hard-thresholds `y` according to `scaling`.
pub fn threshold_coefficients<F: TightFrame + ?Sized>(
    frame: &F,
    y: &FrameCoeffs,
    threshold: f64,
    scaling: BandScaling,
) -> Result<(FrameCoeffs, IndexPartition)> {
    match scaling {
        BandScaling::Uniform => hard_threshold(y, threshold),
        BandScaling::AtomNormalized => hard_threshold_by_band(y, threshold, frame.atom_norms()),
    }
}

/// The solver configuration with weights resolved against `frame`.
pub fn resolve_config<F: TightFrame + ?Sized>(
    frame: &F,
    cfg: &SolverConfig,
) -> Result<SolverConfig> {
    match cfg.scaling() {
        BandScaling::Uniform => Ok(cfg.clone()),
        BandScaling::AtomNormalized => {
            let weights = cfg.weights().clone().relative_to(frame.atom_tv())?;
            Ok(cfg.clone().with_weights(weights))
        }
    }
}

/// Everything produced by a full restoration.
#[derive(Debug, Clone)]
pub struct Restoration {
    /// Restored intensity image `exp(u_hat) (1 + psi1(K)/2)`.
    pub image: Image,
    /// Restored log-image `u_hat`.
    pub log_image: Image,
    pub solution: DrSolution,
    pub threshold: f64,
    /// Sizes of `I*`, `I1`, `I0`.
    pub partition_sizes: [usize; 3],
    /// Final fixed-point residual over `||y_TH||`.
    pub relative_residual: f64,
}

/// Full restoration: log, analysis, hard threshold at `threshold`,
/// Douglas-Rachford from `x0 = y_TH`, synthesis, exp, bias correction.
pub fn denoise<F: TightFrame + ?Sized>(
    s: &Image,
    model: &NoiseModel,
    frame: &F,
    cfg: &SolverConfig,
    threshold: f64,
) -> Result<Image> {
    Ok(denoise_detailed(s, model, frame, cfg, threshold, &|| 0.0)?.image)
}

/// [`denoise`] returning the intermediate state and the solver trace.
pub fn denoise_detailed<F: TightFrame + ?Sized>(
    s: &Image,
    model: &NoiseModel,
    frame: &F,
    cfg: &SolverConfig,
    threshold: f64,
    clock: &dyn Fn() -> f64,
) -> Result<Restoration> {
    let v = log_image(s)?;
    let y = frame.analyze(&v);
    let (y_th, part) = threshold_coefficients(frame, &y, threshold, cfg.scaling())?;
    let resolved = resolve_config(frame, cfg)?;
    let solution = douglas_rachford_timed(&y_th, &part, frame, &resolved, &y_th, clock)?;
    let image = restore_intensity(&solution.u_hat, model);
    Ok(Restoration {
        relative_residual: relative_residual(&solution, &y_th),
        image,
        log_image: solution.u_hat.clone(),
        partition_sizes: [
            part.count(CoeffClass::Approx),
            part.count(CoeffClass::Kept),
            part.count(CoeffClass::Zeroed),
        ],
        solution,
        threshold,
    })
}

/// Log-domain `L2`-TV baseline: `u = argmin rho ||u - v||^2 + TV(u)`, which
/// is exactly `prox_{TV / (2 rho)}(v)`.
pub fn denoise_l2tv(s: &Image, model: &NoiseModel, rho: f64, cfg: &TvProxConfig) -> Result<Image> {
    if !(rho > 0.0) {
        return Err(Error::invalid("rho", "fidelity weight must be > 0"));
    }
    let v = log_image(s)?;
    if rho.is_infinite() {
        return Ok(restore_intensity(&v, model));
    }
    let u = tv_prox(&v, 0.5 / rho, cfg)?.image;
    Ok(restore_intensity(&u, model))
}

/// Threshold-only baseline `exp(W~ y_TH) (1 + psi1(K)/2)`.
pub fn denoise_hardthreshold<F: TightFrame + ?Sized>(
    s: &Image,
    model: &NoiseModel,
    frame: &F,
    threshold: f64,
    scaling: BandScaling,
) -> Result<Image> {
    let v = log_image(s)?;
    let (y_th, _) = threshold_coefficients(frame, &frame.analyze(&v), threshold, scaling)?;
    let u = frame.synthesize(&y_th)?;
    Ok(restore_intensity(&u, model))
}

/// `20 log10(sqrt(N) ||S0||_inf / ||S_hat - S0||)`; `+inf` for identical images.
pub fn psnr(reference: &Image, estimate: &Image) -> Result<f64> {
    check_shape(reference.shape(), estimate.shape())?;
    let peak = norm_inf(reference);
    if peak == 0.0 {
        return Err(Error::Domain("reference image is identically zero".into()));
    }
    let err = distance(reference, estimate)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(20.0 * libm::log10(libm::sqrt(reference.len() as f64) * peak / err))
}

/// Mean absolute deviation `||S_hat - S0||_1 / N`.
pub fn mae(reference: &Image, estimate: &Image) -> Result<f64> {
    check_shape(reference.shape(), estimate.shape())?;
    let total: f64 = reference
        .as_slice()
        .iter()
        .zip(estimate.as_slice())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(total / reference.len() as f64)
}
