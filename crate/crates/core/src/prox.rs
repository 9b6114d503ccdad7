//! Proximity operators for the two terms of the criterion.
//!
//! `Psi(x) = sum_i lambda_i |x[i] - y_TH[i]|` has a closed-form prox
//! (shifted soft-thresholding). `Phi(x) = TV(W~ x)` is a tight-frame
//! pre-composition of the total variation, so
//! `prox_{gamma Phi}(x) = x - W P_C(W~ x)` where `P_C(u) = u - prox_{(gamma/c) TV}(u)`.
//! The projection has no closed form and is computed by a projected
//! gradient (forward-backward) iteration on the dual field `z`:
//!
//! `z <- P_B(z + beta grad(div z - u / s))`, `P_C(u) = s div z`, `s = gamma / c`,
//!
//! which converges for `0 < beta < 1/4` because `||div||^2 <= 8`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::frame::{CoeffClass, FrameCoeffs, IndexPartition, TightFrame};
use crate::grid::{check_shape, divergence, divergence_into, gradient, Image, VectorField};

/// The two `l1` weights: `lambda0` on `I0`, `lambda1` on `I1 u I*`.
///
/// Optionally each subband multiplies both weights by its own factor, e.g.
/// the total variation of its synthesis atoms, so that the two values are
/// expressed relative to the per-atom bound above which a coefficient can no
/// longer move.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaWeights {
    lambda0: f64,
    lambda1: f64,
    band_scale: Option<Vec<f64>>,
}

impl LambdaWeights {
    pub fn new(lambda0: f64, lambda1: f64) -> Result<Self> {
        for (name, v) in [("lambda0", lambda0), ("lambda1", lambda1)] {
            if !(v > 0.0) || v.is_nan() {
                return Err(Error::invalid(name, "weights must be > 0"));
            }
        }
        Ok(Self {
            lambda0,
            lambda1,
            band_scale: None,
        })
    }

    /// Scales both weights in subband `b` by `scale[b]`.
    pub fn relative_to(mut self, scale: &[f64]) -> Result<Self> {
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::invalid(
                "band_scale",
                "factors must be finite and > 0",
            ));
        }
        self.band_scale = Some(scale.to_vec());
        Ok(self)
    }

    pub fn band_scale(&self) -> Option<&[f64]> {
        self.band_scale.as_deref()
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    /// Weight of a coefficient of class `class` in subband `band`.
    #[inline]
    pub fn weight(&self, class: CoeffClass, band: usize) -> f64 {
        let base = match class {
            CoeffClass::Zeroed => self.lambda0,
            CoeffClass::Kept | CoeffClass::Approx => self.lambda1,
        };
        match &self.band_scale {
            Some(scale) => base * scale[band],
            None => base,
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mut out = Self::new(self.lambda0 * factor, self.lambda1 * factor)?;
        out.band_scale = self.band_scale.clone();
        Ok(out)
    }

    pub(crate) fn check_bands(&self, bands: usize) -> Result<()> {
        match &self.band_scale {
            Some(scale) if scale.len() != bands => Err(Error::invalid(
                "band_scale",
                alloc::format!("{} factors for {} subbands", scale.len(), bands),
            )),
            _ => Ok(()),
        }
    }
}

impl Default for LambdaWeights {
    fn default() -> Self {
        Self {
            lambda0: 1.0,
            lambda1: 0.5,
            band_scale: None,
        }
    }
}

/// Settings of the inner dual iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvProxConfig {
    beta: f64,
    n_inner: usize,
}

impl TvProxConfig {
    pub const DEFAULT_BETA: f64 = 0.24;
    pub const DEFAULT_INNER: usize = 200;

    pub fn new(beta: f64, n_inner: usize) -> Result<Self> {
        if !(beta > 0.0 && beta < 0.25) {
            return Err(Error::invalid(
                "beta",
                alloc::format!("β must be < 1/4 and > 0, got {beta}"),
            ));
        }
        if n_inner == 0 {
            return Err(Error::invalid(
                "n_fb",
                "at least one inner iteration is required",
            ));
        }
        Ok(Self { beta, n_inner })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_inner(&self) -> usize {
        self.n_inner
    }

    pub fn with_inner(self, n_inner: usize) -> Result<Self> {
        Self::new(self.beta, n_inner)
    }
}

impl Default for TvProxConfig {
    fn default() -> Self {
        Self {
            beta: Self::DEFAULT_BETA,
            n_inner: Self::DEFAULT_INNER,
        }
    }
}

/// `sign(z) max(|z| - t, 0)`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

fn check_psi_operands(x: &FrameCoeffs, y_th: &FrameCoeffs, part: &IndexPartition) -> Result<()> {
    x.check_compatible(y_th)?;
    if part.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: (x.len(), 1),
            found: (part.len(), 1),
        });
    }
    Ok(())
}

/// `prox_{gamma Psi}(x)[i] = y_TH[i] + soft(x[i] - y_TH[i], gamma lambda_i)`.
pub fn prox_psi(
    x: &FrameCoeffs,
    y_th: &FrameCoeffs,
    weights: &LambdaWeights,
    part: &IndexPartition,
    gamma: f64,
) -> Result<FrameCoeffs> {
    let mut out = x.clone();
    prox_psi_in_place(&mut out, y_th, weights, part, gamma)?;
    Ok(out)
}

/// In-place [`prox_psi`].
pub fn prox_psi_in_place(
    x: &mut FrameCoeffs,
    y_th: &FrameCoeffs,
    weights: &LambdaWeights,
    part: &IndexPartition,
    gamma: f64,
) -> Result<()> {
    check_psi_operands(x, y_th, part)?;
    weights.check_bands(x.num_subbands())?;
    let n = x.approx_len();
    for (k, ((v, &y), class)) in x
        .as_mut_slice()
        .iter_mut()
        .zip(y_th.as_slice())
        .zip(part.classes())
        .enumerate()
    {
        let t = gamma * weights.weight(*class, k / n);
        let d = *v - y;
        // exact fit when the residual is inside the dead zone
        *v = if d.abs() <= t {
            y
        } else {
            y + soft_threshold(d, t)
        };
    }
    Ok(())
}

/// `rprox_{gamma Psi} = 2 prox_{gamma Psi} - Id`.
pub fn rprox_psi(
    x: &FrameCoeffs,
    y_th: &FrameCoeffs,
    weights: &LambdaWeights,
    part: &IndexPartition,
    gamma: f64,
) -> Result<FrameCoeffs> {
    let mut out = prox_psi(x, y_th, weights, part, gamma)?;
    for (p, v) in out.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *p = 2.0 * *p - v;
    }
    Ok(out)
}

/// Pixelwise projection onto the unit ball: `z / max(1, |z|)`.
pub fn project_unit_ball(z: &VectorField) -> VectorField {
    let mut out = z.clone();
    project_unit_ball_in_place(&mut out);
    out
}

pub fn project_unit_ball_in_place(z: &mut VectorField) {
    let VectorField { z1, z2 } = z;
    for (a, b) in z1.as_mut_slice().iter_mut().zip(z2.as_mut_slice()) {
        let norm = libm::sqrt(*a * *a + *b * *b);
        if norm > 1.0 {
            *a /= norm;
            *b /= norm;
        }
    }
}

/// Runs `cfg.n_inner()` projected-gradient steps on the dual field `dual`
/// (warm start) and returns `P_C(u) = strength * div(dual)`.
pub fn project_dual_set(
    u: &Image,
    strength: f64,
    cfg: &TvProxConfig,
    dual: &mut VectorField,
) -> Result<Image> {
    if !(strength > 0.0) {
        return Err(Error::invalid("strength", "TV prox strength must be > 0"));
    }
    check_shape(u.shape(), dual.shape())?;
    let (m, n) = u.shape();
    let inv = 1.0 / strength;
    let beta = cfg.beta;
    let src = u.as_slice();
    let mut resid = Image::zeros(m, n);
    for _ in 0..cfg.n_inner {
        divergence_into(dual, &mut resid);
        for (r, &v) in resid.as_mut_slice().iter_mut().zip(src) {
            *r -= v * inv;
        }
        // z <- P_B(z + beta grad(resid)), fused over pixels
        let r = resid.as_slice();
        let VectorField { z1, z2 } = dual;
        let z1 = z1.as_mut_slice();
        let z2 = z2.as_mut_slice();
        for i in 0..m {
            for j in 0..n {
                let k = i * n + j;
                let gv = if i + 1 < m { r[k + n] - r[k] } else { 0.0 };
                let gh = if j + 1 < n { r[k + 1] - r[k] } else { 0.0 };
                let a = z1[k] + beta * gv;
                let b = z2[k] + beta * gh;
                let norm = libm::sqrt(a * a + b * b);
                if norm > 1.0 {
                    z1[k] = a / norm;
                    z2[k] = b / norm;
                } else {
                    z1[k] = a;
                    z2[k] = b;
                }
            }
        }
    }
    let mut p = divergence(dual);
    p.scale(strength);
    Ok(p)
}

/// Result of a total-variation proximity computation.
#[derive(Debug, Clone, PartialEq)]
pub struct TvProx {
    /// `prox_{s TV}(u)`.
    pub image: Image,
    /// Final dual field, reusable as a warm start.
    pub dual: VectorField,
}

/// `prox_{strength TV}(u) = u - P_C(u)`, from a zero dual start.
pub fn tv_prox(u: &Image, strength: f64, cfg: &TvProxConfig) -> Result<TvProx> {
    let (m, n) = u.shape();
    tv_prox_warm(u, strength, cfg, VectorField::zeros(m, n))
}

/// [`tv_prox`] starting the dual iteration from `dual`.
pub fn tv_prox_warm(
    u: &Image,
    strength: f64,
    cfg: &TvProxConfig,
    mut dual: VectorField,
) -> Result<TvProx> {
    let p = project_dual_set(u, strength, cfg, &mut dual)?;
    let image = u.zip_map(&p, |a, b| a - b)?;
    Ok(TvProx { image, dual })
}

/// Proximity operator of `gamma Phi` with a persistent dual field, so that
/// consecutive calls (e.g. across Douglas-Rachford iterations) warm-start the
/// inner iteration.
#[derive(Debug, Clone)]
pub struct PhiProx<'a, F: TightFrame + ?Sized> {
    frame: &'a F,
    gamma: f64,
    cfg: TvProxConfig,
    dual: Option<VectorField>,
}

impl<'a, F: TightFrame + ?Sized> PhiProx<'a, F> {
    pub fn new(frame: &'a F, gamma: f64, cfg: TvProxConfig) -> Result<Self> {
        if !(gamma > 0.0) {
            return Err(Error::invalid("gamma", "γ must be > 0"));
        }
        Ok(Self {
            frame,
            gamma,
            cfg,
            dual: None,
        })
    }

    /// `W P_C(W~ x)`, the correction subtracted by the prox.
    pub fn correction(&mut self, x: &FrameCoeffs) -> Result<FrameCoeffs> {
        let u = self.frame.synthesize(x)?;
        let (m, n) = u.shape();
        let dual = match &mut self.dual {
            Some(d) if d.shape() == (m, n) => d,
            slot => slot.insert(VectorField::zeros(m, n)),
        };
        let strength = self.gamma / self.frame.frame_constant();
        let p = project_dual_set(&u, strength, &self.cfg, dual)?;
        Ok(self.frame.analyze(&p))
    }

    /// `x - W P_C(W~ x)`.
    pub fn prox(&mut self, x: &FrameCoeffs) -> Result<FrameCoeffs> {
        let mut out = x.clone();
        out.add_scaled(-1.0, &self.correction(x)?)?;
        Ok(out)
    }

    /// `x - 2 W P_C(W~ x)`.
    pub fn rprox(&mut self, x: &FrameCoeffs) -> Result<FrameCoeffs> {
        let mut out = x.clone();
        out.add_scaled(-2.0, &self.correction(x)?)?;
        Ok(out)
    }

    pub fn dual(&self) -> Option<&VectorField> {
        self.dual.as_ref()
    }
}

/// `prox_{gamma Phi}(x)` computed from a cold dual start.
pub fn prox_phi<F: TightFrame + ?Sized>(
    x: &FrameCoeffs,
    frame: &F,
    gamma: f64,
    cfg: &TvProxConfig,
) -> Result<FrameCoeffs> {
    PhiProx::new(frame, gamma, *cfg)?.prox(x)
}

/// `rprox_{gamma Phi}(x) = x - 2 W P_C(W~ x)` from a cold dual start.
pub fn rprox_phi<F: TightFrame + ?Sized>(
    x: &FrameCoeffs,
    frame: &F,
    gamma: f64,
    cfg: &TvProxConfig,
) -> Result<FrameCoeffs> {
    PhiProx::new(frame, gamma, *cfg)?.rprox(x)
}

/// Self-test of the Moreau decomposition `prox_f + prox_f* = Id` for
/// `f = strength TV`: with `w = prox_f(u)` and `strength div z` standing in
/// for `prox_f*(u) = P_C(u)`, returns `||w + strength div z - u||_inf`.
pub fn moreau_check(u: &Image, strength: f64, cfg: &TvProxConfig) -> Result<f64> {
    let TvProx { image: w, dual } = tv_prox(u, strength, cfg)?;
    let mut p = divergence(&dual);
    p.scale(strength);
    Ok(u.as_slice()
        .iter()
        .zip(w.as_slice())
        .zip(p.as_slice())
        .map(|((a, b), c)| (b + c - a).abs())
        .fold(0.0, f64::max))
}

/// Largest per-pixel Fenchel-Young gap `strength (|grad w| + <grad w, z>)`
/// of a TV prox result. It is zero exactly when `-strength div z` is a
/// subgradient of `strength TV` at `w`, i.e. when the inner iteration has
/// converged, so it measures what [`moreau_check`] cannot.
pub fn duality_gap(result: &TvProx, strength: f64) -> f64 {
    let g = gradient(&result.image);
    let z = &result.dual;
    let mut gap = 0.0f64;
    for k in 0..result.image.len() {
        let (a, b) = (g.z1.as_slice()[k], g.z2.as_slice()[k]);
        let (z1, z2) = (z.z1.as_slice()[k], z.z2.as_slice()[k]);
        gap = gap.max(strength * (libm::sqrt(a * a + b * b) + a * z1 + b * z2));
    }
    gap
}
