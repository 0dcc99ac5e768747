//! Symmetric and one-sided stable variates, and isotropic stable vectors.
//!
//! Conventions: `S(d, alpha, gamma)` is the centred isotropic law on `R^d`
//! with characteristic function `exp(-gamma^alpha * |u|^alpha)`. The one-sided
//! variate `D` of index `beta` and scale `s` has Laplace transform
//! `E[exp(-lambda D)] = exp(-(s * lambda)^beta)`. Isotropic vectors are built
//! as `sqrt(D) * q` with `q ~ N(0, I_d)` and `s = 2 gamma^2`, which gives
//! `E[exp(i u.v)] = E[exp(-|u|^2 D / 2)] = exp(-gamma^alpha |u|^alpha)`.

use std::f64::consts::{PI, SQRT_2};

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Parameters `(d, alpha, gamma)` of an isotropic symmetric stable law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableSpec {
    dim: usize,
    alpha: f64,
    gamma: f64,
}

impl StableSpec {
    pub fn new(dim: usize, alpha: f64, gamma: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("stable dimension must be at least 1"));
        }
        check_alpha(alpha)?;
        check_gamma(gamma)?;
        Ok(Self { dim, alpha, gamma })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Characteristic function at a point of radius `|u|`.
    pub fn cf(&self, radius: f64) -> f64 {
        (-(self.gamma * radius.abs()).powf(self.alpha)).exp()
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::param(format!("stable index must lie in (0, 2], got {alpha}")))
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("stable scale must be positive and finite, got {gamma}")))
    }
}

/// One draw from `S(1, alpha, gamma)` by the Chambers–Mallows–Stuck transform.
pub fn sample_sas<R: Rng + ?Sized>(alpha: f64, gamma: f64, rng: &mut R) -> Result<f64> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    Ok(gamma * standard_sas(alpha, rng))
}

/// Draw with characteristic function `exp(-|t|^alpha)`; parameters unchecked.
pub(crate) fn standard_sas<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha == 2.0 {
        let z: f64 = StandardNormal.sample(rng);
        return SQRT_2 * z;
    }
    let u: f64 = Open01.sample(rng);
    let v = PI * (u - 0.5);
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    // log-space keeps small alpha from overflowing the intermediate powers
    let cos_v = v.cos();
    let log_tail = ((1.0 - alpha) / alpha) * (((1.0 - alpha) * v).cos().ln() - w.ln());
    let head = (alpha * v).sin() / cos_v.powf(1.0 / alpha);
    if head.is_finite() {
        head * log_tail.exp()
    } else {
        let sign = (alpha * v).sin().signum();
        sign * ((alpha * v).sin().abs().ln() - cos_v.ln() / alpha + log_tail).exp()
    }
}

/// One draw of the positive `beta`-stable variate with Laplace transform
/// `exp(-(scale * lambda)^beta)`.
///
/// For very small `beta` the draw can exceed the `f64` range; the isotropic
/// sampler works with the logarithm instead.
pub fn sample_positive_stable<R: Rng + ?Sized>(beta: f64, scale: f64, rng: &mut R) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param(format!("one-sided stable index must lie in (0, 1), got {beta}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::param(format!("one-sided stable scale must be positive, got {scale}")));
    }
    Ok(scale * log_standard_positive_stable(beta, rng).exp())
}

/// Logarithm of a positive stable draw with Laplace transform `exp(-lambda^beta)`
/// (Kanter's form of the totally-skewed Chambers–Mallows–Stuck transform).
pub(crate) fn log_standard_positive_stable<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> f64 {
    let open: f64 = Open01.sample(rng);
    let u = PI * open;
    let w: f64 = Exp1.sample(rng);
    (beta * u).sin().ln() - u.sin().ln() / beta
        + ((1.0 - beta) / beta) * (((1.0 - beta) * u).sin().ln() - w.ln())
}

/// One draw from `S(spec.dim, spec.alpha, spec.gamma)`.
pub fn sample_isotropic_vector<R: Rng + ?Sized>(spec: &StableSpec, rng: &mut R) -> Vec<f64> {
    let mut out = Vec::with_capacity(spec.dim);
    isotropic_components(spec.alpha, spec.gamma, spec.dim, rng, |z| out.push(z));
    out
}

/// Streams the components of one isotropic draw into `emit`, in order.
///
/// Shared by [`sample_isotropic_vector`] and the measurement path so that both
/// consume the random stream identically.
pub(crate) fn isotropic_components<R, F>(alpha: f64, gamma: f64, dim: usize, rng: &mut R, mut emit: F)
where
    R: Rng + ?Sized,
    F: FnMut(f64),
{
    // alpha = 2: the subordinator is the constant 2 gamma^2
    let radius = if alpha == 2.0 {
        SQRT_2 * gamma
    } else {
        let log_d = log_standard_positive_stable(alpha / 2.0, rng);
        // sqrt(2 gamma^2 D)
        SQRT_2 * gamma * (0.5 * log_d).exp()
    };
    for _ in 0..dim {
        let z: f64 = StandardNormal.sample(rng);
        emit(radius * z);
    }
}
