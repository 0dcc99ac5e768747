//! Symmetric measurement-noise families with known characteristic functions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal, StudentT};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Unit-scale noise law. `sigma` multiplies a draw from one of these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFamily {
    /// Standard normal.
    Gaussian,
    /// Laplace with unit scale, density `exp(-|x|) / 2`.
    Laplace,
    /// Uniform on `[-1, 1]`.
    Uniform,
    /// Student's t with `nu > 1` degrees of freedom and conventional scale.
    StudentT(f64),
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoiseFamily::Gaussian => f.write_str("gaussian"),
            NoiseFamily::Laplace => f.write_str("laplace"),
            NoiseFamily::Uniform => f.write_str("uniform"),
            NoiseFamily::StudentT(nu) => write!(f, "t:{nu}"),
        }
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" | "normal" => Ok(NoiseFamily::Gaussian),
            "laplace" => Ok(NoiseFamily::Laplace),
            "uniform" => Ok(NoiseFamily::Uniform),
            other => {
                let nu = other
                    .strip_prefix("t:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::param(format!("unknown noise family '{other}' (gaussian|laplace|uniform|t:<nu>)")))?;
                Ok(NoiseFamily::StudentT(nu))
            }
        }
    }
}

/// Noise `sigma * eps` with `eps` drawn from a unit-scale symmetric family.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    family: NoiseFamily,
    sigma: f64,
    // Student-t only: nodes (1/g, weight) of the chi-square mixture integral.
    mixture: Option<Arc<Vec<(f64, f64)>>>,
}

impl PartialEq for NoiseModel {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.sigma == other.sigma
    }
}

impl NoiseModel {
    pub fn new(family: NoiseFamily, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("noise scale must be nonnegative, got {sigma}")));
        }
        let mixture = match family {
            NoiseFamily::StudentT(nu) => {
                if !(nu > 1.0 && nu.is_finite()) {
                    return Err(Error::param(format!(
                        "Student-t noise needs finite nu > 1 so that E|eps| is finite, got {nu}"
                    )));
                }
                Some(Arc::new(chi_square_mixture_nodes(nu)))
            }
            _ => None,
        };
        Ok(Self { family, sigma, mixture })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(NoiseFamily::Gaussian, sigma)
    }

    pub fn noiseless() -> Self {
        Self::new(NoiseFamily::Gaussian, 0.0).expect("zero noise is valid")
    }

    pub fn family(&self) -> NoiseFamily {
        self.family
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Characteristic function of the unit draw, `phi_0(t)`.
    pub fn cf(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 1.0;
        }
        match self.family {
            NoiseFamily::Gaussian => (-0.5 * t * t).exp(),
            NoiseFamily::Laplace => 1.0 / (1.0 + t * t),
            NoiseFamily::Uniform => t.sin() / t,
            NoiseFamily::StudentT(nu) => {
                let nodes = self.mixture.as_ref().expect("mixture nodes for Student-t");
                let half = 0.5 * nu * t * t;
                let (num, den) = nodes.iter().fold((0.0, 0.0), |(num, den), &(inv_g, w)| {
                    (num + w * (-half * inv_g).exp(), den + w)
                });
                num / den
            }
        }
    }

    /// One draw of `sigma * eps`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        self.sigma * self.sample_unit(rng)
    }

    fn sample_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.family {
            NoiseFamily::Gaussian => StandardNormal.sample(rng),
            NoiseFamily::Laplace => {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() { e } else { -e }
            }
            NoiseFamily::Uniform => rng.random_range(-1.0..=1.0),
            NoiseFamily::StudentT(nu) => StudentT::new(nu).expect("validated nu").sample(rng),
        }
    }
}

/// Trapezoid nodes for `phi(t) = E[exp(-nu t^2 / (2 G))]`, `G ~ chi^2_nu`,
/// integrated over `u = ln g`. The integrand is smooth and decays
/// double-exponentially on the right and like `exp(nu u / 2)` on the left,
/// so a uniform grid converges geometrically.
fn chi_square_mixture_nodes(nu: f64) -> Vec<(f64, f64)> {
    let h = 0.01;
    let lo = -90.0 / nu;
    let hi = nu.ln() + 6.0;
    let log_norm = 0.5 * nu * std::f64::consts::LN_2 + ln_gamma(0.5 * nu);
    let steps = ((hi - lo) / h).ceil() as usize;
    (0..=steps)
        .map(|k| {
            let u = lo + k as f64 * h;
            let log_w = 0.5 * nu * u - 0.5 * u.exp() - log_norm;
            ((-u).exp(), h * log_w.exp())
        })
        .collect()
}

/// Largest `eta0 <= 1` on a 0.01 grid with `phi_0(eta) > 1/2` on all of `[0, eta0]`,
/// checked on a 1000-point grid.
pub fn eta0_for(noise: &NoiseModel) -> f64 {
    if noise.family == NoiseFamily::Gaussian {
        return 1.0;
    }
    let admissible = |eta: f64| (0..=1000).all(|i| noise.cf(eta * i as f64 / 1000.0) > 0.5);
    (1..=100)
        .rev()
        .map(|i| i as f64 / 100.0)
        .find(|&eta| admissible(eta))
        .unwrap_or(0.01)
}
