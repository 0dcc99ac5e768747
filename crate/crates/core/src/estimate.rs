//! Characteristic-function estimators of `|x|_{2,alpha}^alpha` and `k_alpha(x)`.
//!
//! A measurement set drawn with index `alpha` and scale `gamma` has
//! characteristic function `Psi(t) = exp(-gamma^alpha v |t|^alpha) phi_0(sigma t)`
//! with `v = |x|_{2,alpha}^alpha`. The estimator replaces `Psi` by the
//! empirical characteristic function, evaluated at a data-driven pilot point,
//! and inverts. Two independent sets (indices 1 and `alpha`) combine into an
//! estimate of `k_alpha`, with asymptotic normal confidence intervals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::MeasurementSet;
use crate::noise::NoiseModel;
use crate::rng::RandomStream;
use crate::stable::{check_alpha, standard_sas};
use crate::stats::{median, z_two_sided};

/// Positive floor substituted for a non-positive norm estimate.
pub const V_FLOOR: f64 = 1e-12;

/// Noise characteristic-function values this close to 0 are treated as roots:
/// at that size the value is rounding noise around a true zero.
pub const CF_ROOT_TOL: f64 = 1e-14;

/// Default two-sided miss probability of the confidence intervals.
pub const DEFAULT_BETA: f64 = 0.05;

/// `(1/n) sum exp(i t y_k)`.
pub fn empirical_cf(y: &[f64], t: f64) -> Result<Complex64> {
    if y.is_empty() {
        return Err(Error::domain("empirical characteristic function of an empty sample"));
    }
    let (re, im) = y.iter().fold((0.0, 0.0), |(re, im), &v| {
        let (s, c) = (t * v).sin_cos();
        (re + c, im + s)
    });
    let n = y.len() as f64;
    Ok(Complex64::new(re / n, im / n))
}

/// Inverts a characteristic-function value `psi` observed at `t`:
/// `-(gamma^alpha |t|^alpha)^-1 ln |Re(psi / phi_0(sigma t))|`.
///
/// Only the real part of the ratio enters; the result may be negative.
pub fn v_hat_from_cf(psi: Complex64, t: f64, alpha: f64, gamma: f64, noise: &NoiseModel) -> Result<f64> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::Evaluation(format!("evaluation point t must be finite and nonzero, got {t}")));
    }
    let phi = noise.cf(noise.sigma() * t);
    if phi.abs() < CF_ROOT_TOL {
        return Err(Error::Evaluation(format!(
            "noise characteristic function vanishes at sigma * t = {}",
            noise.sigma() * t
        )));
    }
    let ratio = (psi / phi).re;
    if ratio == 0.0 {
        return Err(Error::Evaluation(format!("Re(Psi(t) / phi_0(sigma t)) is exactly 0 at t = {t}")));
    }
    Ok(-ratio.abs().ln() / (gamma * t.abs()).powf(alpha))
}

/// Raw estimate `v_hat(t)` of `|x|_{2,alpha}^alpha` from a measurement set.
pub fn v_hat(set: &MeasurementSet, t: f64) -> Result<f64> {
    let psi = empirical_cf(&set.y, t)?;
    v_hat_from_cf(psi, t, set.alpha, set.gamma, &set.noise)
}

/// Pilot point `min(1/m, eta0/sigma)` with `m = median |y|`; returns `(t, m)`.
/// With `sigma = 0` the cap is dropped.
pub fn pilot_t(set: &MeasurementSet, eta0: f64) -> Result<(f64, f64)> {
    if set.y.is_empty() {
        return Err(Error::domain("pilot point of an empty sample"));
    }
    if !(eta0 > 0.0) {
        return Err(Error::param(format!("eta0 must be positive, got {eta0}")));
    }
    let abs: Vec<f64> = set.y.iter().map(|v| v.abs()).collect();
    let m = median(&abs);
    if m == 0.0 {
        return Err(Error::Degenerate("median absolute measurement is 0".into()));
    }
    let sigma = set.noise.sigma();
    let cap = if sigma == 0.0 { f64::INFINITY } else { eta0 / sigma };
    Ok(((1.0 / m).min(cap), m))
}

/// Limiting variance of the normalized estimator `v_hat / v`, evaluated at the
/// constant `c` and noise-to-signal ratio `rho`; `noise_cf` is `phi_0`.
pub fn theta<F: Fn(f64) -> f64>(alpha: f64, c: f64, rho: f64, noise_cf: F) -> Result<f64> {
    check_alpha(alpha)?;
    if c == 0.0 || !c.is_finite() {
        return Err(Error::Evaluation(format!("theta needs a finite nonzero c, got {c}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::param(format!("rho must be nonnegative, got {rho}")));
    }
    let c = c.abs();
    let phi1 = noise_cf(rho * c);
    if phi1.abs() < CF_ROOT_TOL {
        return Err(Error::Evaluation(format!("phi_0(rho |c|) vanishes at {}", rho * c)));
    }
    let phi2 = noise_cf(2.0 * rho * c);
    let ca = c.powf(alpha);
    let denom = 2.0 * phi1 * phi1;
    let inner = (2.0 * ca).exp() / denom + phi2 / denom * ((2.0 - 2f64.powf(alpha)) * ca).exp() - 1.0;
    Ok(inner / c.powf(2.0 * alpha))
}

/// Estimate of `|x|_{2,alpha}^alpha` with its plug-in variance terms.
#[derive(Debug, Clone, PartialEq)]
pub struct NormEstimate {
    pub alpha: f64,
    pub gamma: f64,
    /// Estimate of `|x|_{2,alpha}^alpha`, after clamping.
    pub v_hat: f64,
    /// Value before clamping.
    pub v_raw: f64,
    pub t_pilot: f64,
    /// Median absolute measurement.
    pub m_hat: f64,
    pub c_hat: f64,
    pub rho_hat: f64,
    pub theta_hat: f64,
    pub n: usize,
    /// `v_raw <= 0` and was replaced by [`V_FLOOR`].
    pub clamped: bool,
}

/// Full single-set pipeline: pilot point, inversion, plug-in constants.
pub fn estimate_norm(set: &MeasurementSet, eta0: f64) -> Result<NormEstimate> {
    let (t_pilot, m_hat) = pilot_t(set, eta0)?;
    let v_raw = v_hat(set, t_pilot)?;
    let clamped = !(v_raw > 0.0);
    let v = if clamped { V_FLOOR } else { v_raw };
    let scale = set.gamma * v.powf(1.0 / set.alpha);
    let c_hat = t_pilot * scale;
    let rho_hat = set.noise.sigma() / scale;
    let theta_hat = theta(set.alpha, c_hat, rho_hat, |t| set.noise.cf(t))?;
    Ok(NormEstimate {
        alpha: set.alpha,
        gamma: set.gamma,
        v_hat: v,
        v_raw,
        t_pilot,
        m_hat,
        c_hat,
        rho_hat,
        theta_hat,
        n: set.len(),
        clamped,
    })
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("beta must lie in (0, 1), got {beta}")))
    }
}

/// Asymptotic `1 - beta` interval for `|x|_{2,alpha}^alpha`.
pub fn norm_ci(est: &NormEstimate, beta: f64) -> Result<(f64, f64)> {
    check_beta(beta)?;
    let half = (est.theta_hat / est.n as f64).sqrt() * z_two_sided(beta);
    Ok(((1.0 - half) * est.v_hat, (1.0 + half) * est.v_hat))
}

/// Standardized error `sqrt(n / theta_hat) (v_hat / truth - 1)`.
pub fn norm_standardized(est: &NormEstimate, truth: f64) -> f64 {
    (est.n as f64 / est.theta_hat).sqrt() * (est.v_hat / truth - 1.0)
}

/// `v_alpha^(1/(1-alpha)) / v_1^(alpha/(1-alpha))`, evaluated in log space.
pub fn combine_sparsity(alpha: f64, v_alpha: f64, v_1: f64) -> f64 {
    ((v_alpha.ln() - alpha * v_1.ln()) / (1.0 - alpha)).exp()
}

/// Asymptotic variance of `k_hat / k` scaled by `n_1 + n_alpha`.
pub fn sparsity_variance(alpha: f64, theta_alpha: f64, theta_1: f64, pi_alpha: f64) -> f64 {
    let inv = 1.0 / (1.0 - alpha);
    theta_alpha / pi_alpha * inv * inv + theta_1 / (1.0 - pi_alpha) * (alpha * inv).powi(2)
}

/// Estimate of `k_alpha(x)` from two independent measurement sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityEstimate {
    pub alpha: f64,
    pub k_hat: f64,
    pub w_hat: f64,
    /// `n_alpha / (n_1 + n_alpha)`.
    pub pi_alpha: f64,
    pub n1: usize,
    pub n_alpha: usize,
    pub beta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub norm1: NormEstimate,
    pub norm_alpha: NormEstimate,
}

impl SparsityEstimate {
    pub fn clamped(&self) -> bool {
        self.norm1.clamped || self.norm_alpha.clamped
    }

    /// Standardized error `sqrt((n_1 + n_alpha) / w_hat) (k_hat / truth - 1)`.
    pub fn standardized(&self, truth: f64) -> f64 {
        ((self.n1 + self.n_alpha) as f64 / self.w_hat).sqrt() * (self.k_hat / truth - 1.0)
    }
}

/// Combines a Cauchy set (`alpha = 1`) and an index-`alpha` set into `k_hat`.
pub fn estimate_block_sparsity(
    y1: &MeasurementSet,
    y_alpha: &MeasurementSet,
    eta0: f64,
    beta: f64,
) -> Result<SparsityEstimate> {
    if y1.alpha != 1.0 {
        return Err(Error::param(format!("first measurement set must have alpha = 1, got {}", y1.alpha)));
    }
    let alpha = y_alpha.alpha;
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Err(Error::param("k_alpha estimation needs alpha != 1"));
    }
    if y1.layout != y_alpha.layout {
        return Err(Error::param("measurement sets were taken with different block layouts"));
    }
    check_beta(beta)?;
    let norm1 = estimate_norm(y1, eta0)?;
    let norm_alpha = estimate_norm(y_alpha, eta0)?;
    let (n1, n_alpha) = (y1.len(), y_alpha.len());
    let pi_alpha = n_alpha as f64 / (n1 + n_alpha) as f64;
    let k_hat = combine_sparsity(alpha, norm_alpha.v_hat, norm1.v_hat);
    let w_hat = sparsity_variance(alpha, norm_alpha.theta_hat, norm1.theta_hat, pi_alpha);
    let half = (w_hat / (n1 + n_alpha) as f64).sqrt() * z_two_sided(beta);
    Ok(SparsityEstimate {
        alpha,
        k_hat,
        w_hat,
        pi_alpha,
        n1,
        n_alpha,
        beta,
        ci_low: (1.0 - half) * k_hat,
        ci_high: (1.0 + half) * k_hat,
        norm1,
        norm_alpha,
    })
}

/// Which stable law stands in for `S_1` in the population pilot constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceLaw {
    /// Standard Cauchy `S(1, 1, 1)` regardless of the target index.
    #[default]
    Cauchy,
    /// `S(1, alpha, 1)`, the law of the normalized measurements.
    MatchIndex,
}

/// Population counterparts `(c_alpha, theta_alpha(c_alpha, rho))` of the plug-in constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalConstants {
    pub c: f64,
    pub theta: f64,
}

/// `c = min(1 / median|S + rho eps|, eta0 / rho)` by Monte Carlo over `draws`
/// samples, and `theta_alpha(c, rho)`. `noise` supplies the family of `eps`;
/// its own `sigma` is ignored.
pub fn theoretical_constants(
    alpha: f64,
    rho: f64,
    eta0: f64,
    noise: &NoiseModel,
    reference: ReferenceLaw,
    draws: usize,
    stream: &RandomStream,
) -> Result<TheoreticalConstants> {
    check_alpha(alpha)?;
    if !(rho >= 0.0) {
        return Err(Error::param(format!("rho must be nonnegative, got {rho}")));
    }
    if draws == 0 {
        return Err(Error::param("need at least one Monte Carlo draw"));
    }
    let index = match reference {
        ReferenceLaw::Cauchy => 1.0,
        ReferenceLaw::MatchIndex => alpha,
    };
    let unit = NoiseModel::new(noise.family(), 1.0)?;
    let mut rng = stream.rng();
    let abs: Vec<f64> = (0..draws)
        .map(|_| {
            let s = standard_sas(index, &mut rng);
            let e = if rho > 0.0 { rho * unit.sample(&mut rng) } else { 0.0 };
            (s + e).abs()
        })
        .collect();
    let cap = if rho == 0.0 { f64::INFINITY } else { eta0 / rho };
    let c = (1.0 / median(&abs)).min(cap);
    let theta = theta(alpha, c, rho, |t| unit.cf(t))?;
    Ok(TheoreticalConstants { c, theta })
}

/// Recovery error bound `kappa2 sqrt(k2 d ln(eN/m) / m) + kappa3 delta / |x|_2`
/// for mixed `l2/l1` recovery from `m` Gaussian measurements. The constants
/// are the caller's.
#[allow(clippy::too_many_arguments)]
pub fn recovery_error_bound(
    k2: f64,
    d: usize,
    n: usize,
    m: usize,
    delta: f64,
    x_l2: f64,
    kappa2: f64,
    kappa3: f64,
) -> Result<f64> {
    if m == 0 || m > n {
        return Err(Error::param(format!("need 1 <= m <= N, got m = {m}, N = {n}")));
    }
    if d == 0 {
        return Err(Error::param("block length must be positive"));
    }
    if !(k2 > 0.0 && x_l2 > 0.0 && delta >= 0.0 && kappa2 > 0.0 && kappa3 > 0.0) {
        return Err(Error::param("k2, |x|_2, kappa2, kappa3 must be positive and delta nonnegative"));
    }
    let m_f = m as f64;
    let log_term = (std::f64::consts::E * n as f64 / m_f).ln();
    Ok(kappa2 * (k2 * d as f64 * log_term / m_f).sqrt() + kappa3 * delta / x_l2)
}
