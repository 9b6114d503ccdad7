//! Douglas-Rachford minimization of `F(x) = Psi(x) + Phi(x)` over frame
//! coefficients.
//!
//! Each outer step is
//! `x <- (1 - mu/2) x + (mu/2) rprox_{gamma Psi}(rprox_{gamma Phi}(x))`.
//! The iterates themselves do not minimize `F`; the minimizer estimate is
//! `prox_{gamma Phi}` of the last iterate, which is what [`douglas_rachford`]
//! returns.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::{FrameCoeffs, IndexPartition, TightFrame};
use crate::grid::{distance, norm2, tv_norm, Image};
use crate::prox::{prox_psi, rprox_psi, LambdaWeights, PhiProx, TvProxConfig};

/// How thresholds and `l1` weights relate to the subbands of the frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandScaling {
    /// One absolute threshold and two absolute weights for every subband.
    Uniform,
    /// Threshold in units of each subband's atom norm (its noise level) and
    /// weights in units of each subband's atom total variation.
    #[default]
    AtomNormalized,
}

/// Outer-loop settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    gamma: f64,
    mu: f64,
    n_dr: usize,
    weights: LambdaWeights,
    tv: TvProxConfig,
    record_trace: bool,
    scaling: BandScaling,
}

impl SolverConfig {
    pub const DEFAULT_GAMMA: f64 = 0.05;
    pub const DEFAULT_MU: f64 = 1.0;
    pub const DEFAULT_ITERATIONS: usize = 50;

    pub fn new(
        gamma: f64,
        mu: f64,
        n_dr: usize,
        weights: LambdaWeights,
        tv: TvProxConfig,
        record_trace: bool,
    ) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::invalid(
                "gamma",
                alloc::format!("γ must be > 0, got {gamma}"),
            ));
        }
        if !(mu > 0.0 && mu < 2.0) {
            return Err(Error::invalid(
                "mu",
                alloc::format!("μ must lie in (0, 2), got {mu}"),
            ));
        }
        if n_dr == 0 {
            return Err(Error::invalid(
                "n_dr",
                "at least one Douglas-Rachford iteration is required",
            ));
        }
        Ok(Self {
            gamma,
            mu,
            n_dr,
            weights,
            tv,
            record_trace,
            scaling: BandScaling::default(),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn n_dr(&self) -> usize {
        self.n_dr
    }
    pub fn weights(&self) -> &LambdaWeights {
        &self.weights
    }
    pub fn tv(&self) -> &TvProxConfig {
        &self.tv
    }
    pub fn record_trace(&self) -> bool {
        self.record_trace
    }
    pub fn scaling(&self) -> BandScaling {
        self.scaling
    }

    pub fn with_scaling(mut self, scaling: BandScaling) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn with_weights(mut self, weights: LambdaWeights) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_tv(mut self, tv: TvProxConfig) -> Self {
        self.tv = tv;
        self
    }

    pub fn with_trace(mut self, record: bool) -> Self {
        self.record_trace = record;
        self
    }

    pub fn with_iterations(self, n_dr: usize) -> Result<Self> {
        let scaling = self.scaling;
        Ok(Self::new(
            self.gamma,
            self.mu,
            n_dr,
            self.weights,
            self.tv,
            self.record_trace,
        )?
        .with_scaling(scaling))
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: Self::DEFAULT_GAMMA,
            mu: Self::DEFAULT_MU,
            n_dr: Self::DEFAULT_ITERATIONS,
            weights: LambdaWeights::default(),
            tv: TvProxConfig::default(),
            record_trace: false,
            scaling: BandScaling::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// `F(prox_{gamma Phi}(x^(t)))`.
    pub objective: f64,
    /// `||x^(t+1) - x^(t)||`.
    pub residual: f64,
    /// Seconds since the solve started, if a clock was supplied.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveTrace {
    pub entries: Vec<TraceEntry>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Output of [`douglas_rachford`].
#[derive(Debug, Clone)]
pub struct DrSolution {
    /// `prox_{gamma Phi}(x^(N))`, the minimizer estimate.
    pub x_hat: FrameCoeffs,
    /// `W~ x_hat`.
    pub u_hat: Image,
    /// `prox_{gamma Psi}(rprox_{gamma Phi}(x^(N)))`, the data-side estimate;
    /// it coincides with `x_hat` at a fixed point and exhibits the exact
    /// fits `x[i] = y_TH[i]`.
    pub x_fit: FrameCoeffs,
    /// Last Douglas-Rachford iterate `x^(N)`.
    pub x_last: FrameCoeffs,
    /// Last fixed-point residual `||x^(N) - x^(N-1)||`.
    pub final_residual: f64,
    pub trace: SolveTrace,
}

/// `F(x) = sum_i lambda_i |x[i] - y_TH[i]| + TV(W~ x)`.
pub fn objective<F: TightFrame + ?Sized>(
    x: &FrameCoeffs,
    y_th: &FrameCoeffs,
    weights: &LambdaWeights,
    part: &IndexPartition,
    frame: &F,
) -> Result<f64> {
    Ok(fidelity(x, y_th, weights, part)? + tv_norm(&frame.synthesize(x)?))
}

/// The `Psi` term alone.
pub fn fidelity(
    x: &FrameCoeffs,
    y_th: &FrameCoeffs,
    weights: &LambdaWeights,
    part: &IndexPartition,
) -> Result<f64> {
    x.check_compatible(y_th)?;
    if part.len() != x.len() {
        return Err(Error::invalid(
            "partition",
            "size does not match the coefficients",
        ));
    }
    weights.check_bands(x.num_subbands())?;
    let n = x.approx_len();
    Ok(x.as_slice()
        .iter()
        .zip(y_th.as_slice())
        .zip(part.classes())
        .enumerate()
        .map(|(k, ((a, b), c))| weights.weight(*c, k / n) * (a - b).abs())
        .sum())
}

/// Runs `cfg.n_dr()` Douglas-Rachford iterations from `x0`.
pub fn douglas_rachford<F: TightFrame + ?Sized>(
    y_th: &FrameCoeffs,
    part: &IndexPartition,
    frame: &F,
    cfg: &SolverConfig,
    x0: &FrameCoeffs,
) -> Result<DrSolution> {
    douglas_rachford_timed(y_th, part, frame, cfg, x0, &|| 0.0)
}

/// [`douglas_rachford`] with a caller-supplied clock (seconds) for the trace.
pub fn douglas_rachford_timed<F: TightFrame + ?Sized>(
    y_th: &FrameCoeffs,
    part: &IndexPartition,
    frame: &F,
    cfg: &SolverConfig,
    x0: &FrameCoeffs,
    clock: &dyn Fn() -> f64,
) -> Result<DrSolution> {
    x0.check_compatible(y_th)?;
    let start = clock();
    cfg.weights.check_bands(x0.num_subbands())?;
    let mut phi = PhiProx::new(frame, cfg.gamma, cfg.tv)?;
    let half = 0.5 * cfg.mu;
    let mut x = x0.clone();
    let mut trace = SolveTrace::default();
    let mut residual = 0.0;
    for t in 0..cfg.n_dr {
        let corr = phi.correction(&x)?;
        let objective_now = if cfg.record_trace {
            let mut p = x.clone();
            p.add_scaled(-1.0, &corr)?;
            Some(objective(&p, y_th, &cfg.weights, part, frame)?)
        } else {
            None
        };
        let mut r = x.clone();
        r.add_scaled(-2.0, &corr)?;
        let q = rprox_psi(&r, y_th, &cfg.weights, part, cfg.gamma)?;
        let mut next = x.clone();
        next.scale(1.0 - half);
        next.add_scaled(half, &q)?;
        residual = distance(&next, &x)?;
        x = next;
        if let Some(objective) = objective_now {
            trace.entries.push(TraceEntry {
                iteration: t,
                objective,
                residual,
                seconds: clock() - start,
            });
        }
    }
    let corr = phi.correction(&x)?;
    let mut x_hat = x.clone();
    x_hat.add_scaled(-1.0, &corr)?;
    let mut r = x.clone();
    r.add_scaled(-2.0, &corr)?;
    let x_fit = prox_psi(&r, y_th, &cfg.weights, part, cfg.gamma)?;
    let u_hat = frame.synthesize(&x_hat)?;
    Ok(DrSolution {
        x_hat,
        u_hat,
        x_fit,
        x_last: x,
        final_residual: residual,
        trace,
    })
}

/// Relative fixed-point residual `||x^(N) - x^(N-1)|| / ||x^(0)||`.
pub fn relative_residual(solution: &DrSolution, x0: &FrameCoeffs) -> f64 {
    let scale = norm2(x0);
    if scale == 0.0 {
        solution.final_residual
    } else {
        solution.final_residual / scale
    }
}
