#![no_std]
//! Multiplicative (speckle) noise removal for grayscale images.
//!
//! The restoration works on the log-image: frame coefficients of the log
//! data are hard-thresholded, then refined by minimizing a weighted `l1`
//! fit to those coefficients plus the total variation of the synthesized
//! image. The minimization uses Douglas-Rachford splitting whose total
//! variation proximity step is computed by a projected dual iteration.
//! A polygamma-based factor corrects the bias introduced by returning to the
//! intensity domain.
//!
//! Everything here is `no_std` with `alloc`; file formats and the command
//! line front end live in the `despeckle` crate.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod frame;
pub mod grid;
pub mod phantom;
pub mod pipeline;
pub mod prox;
pub mod solver;
pub mod special;

pub use error::{Error, Result};
pub use frame::{
    hard_threshold, hard_threshold_by_band, threshold_reconstruct, CoeffClass, FrameCoeffs,
    IndexPartition, SplineFramelets, Subband, TightFrame,
};
pub use grid::{
    divergence, gradient, inner, norm1, norm2, norm_inf, tv_norm, Euclidean, Image, VectorField,
};
pub use pipeline::{
    bias_factor, denoise, denoise_detailed, denoise_hardthreshold, denoise_l2tv, mae, psnr,
    resolve_config, threshold_coefficients, threshold_for, Restoration,
};
pub use prox::{
    duality_gap, moreau_check, project_unit_ball, prox_phi, prox_psi, rprox_phi, rprox_psi,
    soft_threshold, tv_prox, LambdaWeights, PhiProx, TvProx, TvProxConfig,
};
pub use solver::{
    douglas_rachford, objective, relative_residual, BandScaling, DrSolution, SolveTrace,
    SolverConfig, TraceEntry,
};
pub use special::{
    apply_multiplicative_noise, digamma, log_noise_stats, polygamma, sample_speckle, trigamma,
    LogNoiseStats, NoiseModel, RNG_ALGORITHM,
};
