//! Random projections `y_i = <a_i, x> + sigma eps_i` with block-matched
//! isotropic stable rows.
//!
//! Row `i` of a measurement set draws from `stream.child(i)`: block `j` of
//! the row is an `S(d_j, alpha, gamma)` vector, drawn in block order, followed
//! by the row's noise term. Rows are therefore independent of how the work is
//! scheduled, and the first `m` rows of an `n`-row set equal an `m`-row set.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::rng::RandomStream;
use crate::signal::{BlockLayout, BlockSignal};
use crate::stable::{check_alpha, check_gamma, isotropic_components};

/// Noisy stable projections of one signal.
#[derive(Debug, Clone)]
pub struct MeasurementSet {
    pub y: Vec<f64>,
    pub alpha: f64,
    pub gamma: f64,
    pub noise: NoiseModel,
    pub layout: BlockLayout,
}

impl MeasurementSet {
    pub fn new(y: Vec<f64>, alpha: f64, gamma: f64, noise: NoiseModel, layout: BlockLayout) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::domain("a measurement set needs at least one measurement"));
        }
        check_alpha(alpha)?;
        check_gamma(gamma)?;
        Ok(Self { y, alpha, gamma, noise, layout })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// The first `n` measurements as a set of their own.
    pub fn prefix(&self, n: usize) -> Result<MeasurementSet> {
        if n == 0 || n > self.y.len() {
            return Err(Error::param(format!("prefix length {n} outside 1..={}", self.y.len())));
        }
        Ok(MeasurementSet {
            y: self.y[..n].to_vec(),
            alpha: self.alpha,
            gamma: self.gamma,
            noise: self.noise.clone(),
            layout: self.layout.clone(),
        })
    }
}

fn check_projection(x: &BlockSignal, alpha: f64, gamma: f64, n: usize) -> Result<()> {
    if x.values().is_empty() {
        return Err(Error::domain("cannot project a zero-length signal"));
    }
    if n == 0 {
        return Err(Error::param("number of measurements must be at least 1"));
    }
    check_alpha(alpha)?;
    check_gamma(gamma)
}

fn measure_row(x: &BlockSignal, alpha: f64, gamma: f64, noise: &NoiseModel, stream: RandomStream, mut row: Option<&mut Vec<f64>>) -> f64 {
    let mut rng = stream.rng();
    let values = x.values();
    let mut acc = 0.0;
    for block in x.layout().blocks() {
        let mut k = block.start;
        isotropic_components(alpha, gamma, block.len(), &mut rng, |a| {
            acc += a * values[k];
            if let Some(r) = row.as_deref_mut() {
                r.push(a);
            }
            k += 1;
        });
    }
    acc + noise.sample(&mut rng)
}

/// Draws `n` measurements of `x`, rows generated on the fly.
pub fn project(
    x: &BlockSignal,
    alpha: f64,
    gamma: f64,
    n: usize,
    noise: &NoiseModel,
    stream: &RandomStream,
) -> Result<MeasurementSet> {
    check_projection(x, alpha, gamma, n)?;
    let y: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| measure_row(x, alpha, gamma, noise, stream.child(i), None))
        .collect();
    MeasurementSet::new(y, alpha, gamma, noise.clone(), x.layout().clone())
}

/// Like [`project`] but also returns the `n x N` measurement matrix, row-major.
/// The measurements are identical to [`project`] with the same stream.
pub fn project_materialized(
    x: &BlockSignal,
    alpha: f64,
    gamma: f64,
    n: usize,
    noise: &NoiseModel,
    stream: &RandomStream,
) -> Result<(Vec<Vec<f64>>, MeasurementSet)> {
    check_projection(x, alpha, gamma, n)?;
    let (rows, y): (Vec<Vec<f64>>, Vec<f64>) = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut row = Vec::with_capacity(x.values().len());
            let yi = measure_row(x, alpha, gamma, noise, stream.child(i), Some(&mut row));
            (row, yi)
        })
        .unzip();
    let set = MeasurementSet::new(y, alpha, gamma, noise.clone(), x.layout().clone())?;
    Ok((rows, set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseFamily;
    use crate::signal::{make_exact_signal, mixed_norm};
    use crate::stats::{median, variance};
    use std::f64::consts::SQRT_2;

    #[test]
    fn cauchy_projection_scale() {
        let x = make_exact_signal(1000, 5).unwrap();
        let set = project(&x, 1.0, 1.0, 100_000, &NoiseModel::noiseless(), &RandomStream::new(1, 0)).unwrap();
        let abs: Vec<f64> = set.y.iter().map(|v| v.abs()).collect();
        let m = median(&abs);
        assert!((m - SQRT_2).abs() < 0.05, "median |y| = {m}");
    }

    #[test]
    fn gaussian_projection_variance() {
        let x = make_exact_signal(1000, 5).unwrap();
        let set = project(&x, 2.0, SQRT_2 / 2.0, 100_000, &NoiseModel::noiseless(), &RandomStream::new(2, 0)).unwrap();
        let v = variance(&set.y);
        assert!((v - 1.0).abs() < 0.03, "variance {v}");
    }

    #[test]
    fn zero_signal_gives_zero_measurements() {
        let x = BlockSignal::new(vec![0.0; 20], BlockLayout::uniform(20, 5).unwrap()).unwrap();
        let set = project(&x, 0.7, 1.0, 50, &NoiseModel::noiseless(), &RandomStream::new(3, 0)).unwrap();
        assert!(set.y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn errors() {
        let x = make_exact_signal(20, 5).unwrap();
        let s = RandomStream::new(0, 0);
        let nl = NoiseModel::noiseless();
        assert!(project(&x, 1.0, 1.0, 0, &nl, &s).is_err());
        assert!(project(&x, 2.5, 1.0, 10, &nl, &s).is_err());
        assert!(project(&x, 1.0, 0.0, 10, &nl, &s).is_err());
        assert!(MeasurementSet::new(vec![], 1.0, 1.0, nl, x.layout().clone()).is_err());
    }

    #[test]
    fn materialized_matches_streaming() {
        let layout = BlockLayout::new(vec![2, 3, 5]).unwrap();
        let x = BlockSignal::new((0..10).map(|i| (i as f64 - 4.5) / 3.0).collect(), layout).unwrap();
        let noise = NoiseModel::new(NoiseFamily::Laplace, 0.2).unwrap();
        let s = RandomStream::new(9, 4);
        let streamed = project(&x, 1.3, 0.8, 64, &noise, &s).unwrap();
        let (rows, mat) = project_materialized(&x, 1.3, 0.8, 64, &noise, &s).unwrap();
        assert_eq!(streamed.y, mat.y);
        assert_eq!(rows.len(), 64);
        // y - A x is the noise term alone
        for (row, yi) in rows.iter().zip(&mat.y) {
            let ax: f64 = row.iter().zip(x.values()).map(|(a, b)| a * b).sum();
            assert!((yi - ax).abs() < 2.0);
        }
        let noiseless = project_materialized(&x, 1.3, 0.8, 64, &NoiseModel::noiseless(), &s).unwrap();
        for (row, yi) in noiseless.0.iter().zip(&noiseless.1.y) {
            let ax: f64 = row.iter().zip(x.values()).map(|(a, b)| a * b).sum();
            assert!((yi - ax).abs() <= 1e-12 * ax.abs().max(1.0));
        }
    }

    #[test]
    fn prefix_consistency() {
        let x = make_exact_signal(30, 5).unwrap();
        let noise = NoiseModel::gaussian(0.1).unwrap();
        let s = RandomStream::new(4, 2);
        let long = project(&x, 0.5, 1.0, 100, &noise, &s).unwrap();
        let short = project(&x, 0.5, 1.0, 40, &noise, &s).unwrap();
        assert_eq!(long.prefix(40).unwrap().y, short.y);
    }

    #[test]
    fn projection_cf_matches_stable_scale() {
        // noiseless projections are S(1, alpha, gamma |x|_{2,alpha}); with noise the CF picks up phi_0(sigma t)
        let layout = BlockLayout::new(vec![2, 3, 5]).unwrap();
        let x = BlockSignal::new(vec![0.3, -0.2, 0.0, 0.0, 0.0, 0.5, 0.1, -0.4, 0.2, 0.05], layout).unwrap();
        let n = 100_000;
        let tol = 4.0 / (n as f64).sqrt();
        for (k, &alpha) in [0.5, 1.0, 1.5, 2.0].iter().enumerate() {
            let gamma = 1.0;
            let scale = gamma * mixed_norm(&x, alpha).unwrap();
            for noise in [NoiseModel::noiseless(), NoiseModel::new(NoiseFamily::StudentT(2.0), 0.3).unwrap()] {
                let set = project(&x, alpha, gamma, n, &noise, &RandomStream::new(50, k as u64)).unwrap();
                for t in [0.5, 1.0, 2.0] {
                    let re = set.y.iter().map(|v| (t * v).cos()).sum::<f64>() / n as f64;
                    let im = set.y.iter().map(|v| (t * v).sin()).sum::<f64>() / n as f64;
                    let want = (-(scale * t).powf(alpha)).exp() * noise.cf(noise.sigma() * t);
                    assert!((re - want).abs() < tol, "alpha {alpha} t {t}: {re} vs {want}");
                    assert!(im.abs() < tol);
                }
            }
        }
    }
}
