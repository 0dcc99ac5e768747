use rayon::prelude::*;

use super::config::{ExperimentConfig, Study};
use crate::error::{Error, Result};
use crate::estimate::{estimate_block_sparsity, norm_ci, norm_standardized, sparsity_variance, theoretical_constants};
use crate::measurement::{project, MeasurementSet};
use crate::noise::{eta0_for, NoiseFamily, NoiseModel};
use crate::rng::RandomStream;
use crate::signal::{bdnr, block_l0, block_sparsity, l20_bound_terms, make_stepped_signal, mixed_norm, BlockLayout, BlockSignal};
use crate::stats::{ks_standard_normal, median, order_invariant_mean, variance};

/// Seed of the auxiliary stream behind the theoretical curves. Fixed so that
/// overlays do not move with the study seed.
pub const THEORY_SEED: u64 = 0x7468_656f_7279;

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurveRow {
    /// `N=..;d=..;sigma=..`
    pub variant: String,
    pub signal_length: usize,
    pub block_length: usize,
    pub sigma: f64,
    pub n1: usize,
    pub n_alpha: usize,
    pub mean_rel_err: f64,
    pub median_rel_err: f64,
    /// `sqrt(2 omega / pi) / sqrt(n_1 + n_alpha)`, the mean of `|Z| sqrt(omega / n)`.
    pub theory: f64,
    pub k_true: f64,
    pub clamped: usize,
    pub replications: usize,
}

impl ErrorCurveRow {
    pub fn n_total(&self) -> usize {
        self.n1 + self.n_alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatSummary {
    pub mean: f64,
    pub variance: f64,
    pub ks_d: f64,
    pub ks_p: f64,
}

impl StatSummary {
    pub fn of(xs: &[f64]) -> Self {
        let (ks_d, ks_p) = ks_standard_normal(xs);
        Self { mean: order_invariant_mean(xs), variance: variance(xs), ks_d, ks_p }
    }
}

/// Standardized statistics of one `(noise, n_1, n_alpha)` case, indexed by replication.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalityCase {
    pub noise: NoiseFamily,
    pub n1: usize,
    pub n_alpha: usize,
    /// Cauchy-set norm estimate against `|x|_{2,1}`.
    pub res1: Vec<f64>,
    /// Index-alpha norm estimate against `|x|_{2,alpha}^alpha`.
    pub res_alpha: Vec<f64>,
    /// `k_hat` against `k_alpha(x)`.
    pub res: Vec<f64>,
    /// Replications whose `1 - beta` interval for `|x|_{2,alpha}^alpha` contains the truth.
    pub norm_ci_covered: usize,
    /// Replications whose interval for `k_alpha(x)` contains the truth.
    pub k_ci_covered: usize,
    pub clamped: usize,
}

impl NormalityCase {
    pub fn replications(&self) -> usize {
        self.res.len()
    }

    /// Summaries of `res1`, `res_alpha`, `res`, in that order.
    pub fn summaries(&self) -> [StatSummary; 3] {
        [StatSummary::of(&self.res1), StatSummary::of(&self.res_alpha), StatSummary::of(&self.res)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct L20Row {
    pub k: usize,
    pub bdnr: f64,
    pub n1: usize,
    pub n_alpha: usize,
    /// Mean of `|k_hat / |x|_{2,0} - 1|`.
    pub mean_rel_err: f64,
    pub median_rel_err: f64,
    pub clt_term: f64,
    pub approx_term: f64,
    pub clamped: usize,
    pub replications: usize,
}

impl L20Row {
    pub fn n_total(&self) -> usize {
        self.n1 + self.n_alpha
    }

    pub fn budget(&self) -> f64 {
        self.clt_term + self.approx_term
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRow {
    pub profile: String,
    pub blocks: usize,
    pub l20: usize,
    pub k2: f64,
    pub k1: f64,
    pub k_inf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StudyResult {
    ErrorCurve(Vec<ErrorCurveRow>),
    Normality(Vec<NormalityCase>),
    L20SmallAlpha(Vec<L20Row>),
    MeasureCompare(Vec<MeasureRow>),
}

pub fn run(cfg: &ExperimentConfig) -> Result<StudyResult> {
    match cfg.study {
        Study::ErrorCurve => run_error_curve(cfg),
        Study::Normality => run_normality(cfg),
        Study::L20SmallAlpha => run_l20_small_alpha(cfg),
        Study::MeasureCompare => run_measure_compare(cfg),
    }
}

fn require(cfg: &ExperimentConfig, study: Study) -> Result<()> {
    cfg.validate()?;
    if cfg.study != study {
        return Err(Error::param(format!("config is for {}, not {}", cfg.study.name(), study.name())));
    }
    Ok(())
}

fn eta0(cfg: &ExperimentConfig, noise: &NoiseModel) -> f64 {
    cfg.eta0.unwrap_or_else(|| eta0_for(noise))
}

fn max_sizes(grid: &[(usize, usize)]) -> (usize, usize) {
    grid.iter().fold((0, 0), |(a, b), &(n1, na)| (a.max(n1), b.max(na)))
}

/// Draws both measurement sets of replication `r` at the largest grid sizes.
fn draw_sets(
    cfg: &ExperimentConfig,
    x: &BlockSignal,
    noise: &NoiseModel,
    r: usize,
) -> Result<(MeasurementSet, MeasurementSet)> {
    let (n1, na) = max_sizes(&cfg.grid);
    let rep = RandomStream::new(cfg.seed, 0).child(r as u64);
    let y1 = project(x, 1.0, cfg.gamma1, n1, noise, &rep.child(1))?;
    let ya = project(x, cfg.alpha, cfg.gamma_alpha, na, noise, &rep.child(2))?;
    Ok((y1, ya))
}

/// `|k_hat / truth - 1|` and the clamp flag at every grid point, per replication.
fn relative_errors(
    cfg: &ExperimentConfig,
    x: &BlockSignal,
    noise: &NoiseModel,
    truth: f64,
) -> Result<Vec<Vec<(f64, bool)>>> {
    let eta0 = eta0(cfg, noise);
    (0..cfg.replications)
        .into_par_iter()
        .map(|r| {
            let (y1, ya) = draw_sets(cfg, x, noise, r)?;
            cfg.grid
                .iter()
                .map(|&(n1, na)| {
                    let est = estimate_block_sparsity(&y1.prefix(n1)?, &ya.prefix(na)?, eta0, cfg.beta)?;
                    Ok(((est.k_hat / truth - 1.0).abs(), est.clamped()))
                })
                .collect()
        })
        .collect()
}

/// Per grid point: (mean, median, clamped count) over replications.
fn aggregate(per_rep: &[Vec<(f64, bool)>], grid_len: usize) -> Vec<(f64, f64, usize)> {
    (0..grid_len)
        .map(|g| {
            let errs: Vec<f64> = per_rep.iter().map(|rep| rep[g].0).collect();
            let clamped = per_rep.iter().filter(|rep| rep[g].1).count();
            (order_invariant_mean(&errs), median(&errs), clamped)
        })
        .collect()
}

/// Asymptotic constants `(theta_1, theta_alpha)` at the population noise-to-signal ratios.
fn population_thetas(cfg: &ExperimentConfig, x: &BlockSignal, noise: &NoiseModel) -> Result<(f64, f64)> {
    let eta0 = eta0(cfg, noise);
    let aux = RandomStream::new(THEORY_SEED, 0);
    let rho1 = noise.sigma() / (cfg.gamma1 * mixed_norm(x, 1.0)?);
    let rho_a = noise.sigma() / (cfg.gamma_alpha * mixed_norm(x, cfg.alpha)?);
    let c1 = theoretical_constants(1.0, rho1, eta0, noise, cfg.reference, cfg.theory_draws, &aux.child(1))?;
    let ca = theoretical_constants(cfg.alpha, rho_a, eta0, noise, cfg.reference, cfg.theory_draws, &aux.child(2))?;
    Ok((c1.theta, ca.theta))
}

/// Mean absolute value of a centered normal with variance `omega / n`.
fn clt_term(alpha: f64, thetas: (f64, f64), n1: usize, na: usize) -> f64 {
    let n = (n1 + na) as f64;
    let omega = sparsity_variance(alpha, thetas.1, thetas.0, na as f64 / n);
    (2.0 * omega / std::f64::consts::PI).sqrt() / n.sqrt()
}

/// Mean relative error of `k_hat_alpha` per grid point and swept parameter,
/// with the theoretical curve.
pub fn run_error_curve(cfg: &ExperimentConfig) -> Result<StudyResult> {
    require(cfg, Study::ErrorCurve)?;
    let mut rows = Vec::new();
    for (n, d, sigma) in cfg.variants() {
        let x = cfg.signal.build(n, d, cfg.k)?;
        let noise = NoiseModel::new(cfg.noise[0], sigma)?;
        let truth = block_sparsity(&x, cfg.alpha)?;
        let thetas = population_thetas(cfg, &x, &noise)?;
        let per_rep = relative_errors(cfg, &x, &noise, truth)?;
        let agg = aggregate(&per_rep, cfg.grid.len());
        for (&(n1, na), (mean, med, clamped)) in cfg.grid.iter().zip(agg) {
            rows.push(ErrorCurveRow {
                variant: format!("N={n};d={d};sigma={sigma}"),
                signal_length: n,
                block_length: d,
                sigma,
                n1,
                n_alpha: na,
                mean_rel_err: mean,
                median_rel_err: med,
                theory: clt_term(cfg.alpha, thetas, n1, na),
                k_true: truth,
                clamped,
                replications: cfg.replications,
            });
        }
    }
    Ok(StudyResult::ErrorCurve(rows))
}

struct Standardized {
    res1: f64,
    res_alpha: f64,
    res: f64,
    norm_covered: bool,
    k_covered: bool,
    clamped: bool,
}

/// Standardized statistics for every `(noise, grid point)` case.
pub fn run_normality(cfg: &ExperimentConfig) -> Result<StudyResult> {
    require(cfg, Study::Normality)?;
    let x = cfg.signal.build(cfg.signal_length, cfg.block_length, cfg.k)?;
    let truth1 = mixed_norm(&x, 1.0)?;
    let truth_a = mixed_norm(&x, cfg.alpha)?.powf(cfg.alpha);
    let truth_k = block_sparsity(&x, cfg.alpha)?;
    let mut cases = Vec::new();
    for &family in &cfg.noise {
        let noise = NoiseModel::new(family, cfg.sigma)?;
        let eta0 = eta0(cfg, &noise);
        let per_rep: Vec<Vec<Standardized>> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let (y1, ya) = draw_sets(cfg, &x, &noise, r)?;
                cfg.grid
                    .iter()
                    .map(|&(n1, na)| {
                        let est = estimate_block_sparsity(&y1.prefix(n1)?, &ya.prefix(na)?, eta0, cfg.beta)?;
                        let (lo, hi) = norm_ci(&est.norm_alpha, cfg.beta)?;
                        Ok(Standardized {
                            res1: norm_standardized(&est.norm1, truth1),
                            res_alpha: norm_standardized(&est.norm_alpha, truth_a),
                            res: est.standardized(truth_k),
                            norm_covered: lo <= truth_a && truth_a <= hi,
                            k_covered: est.ci_low <= truth_k && truth_k <= est.ci_high,
                            clamped: est.clamped(),
                        })
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        for (g, &(n1, na)) in cfg.grid.iter().enumerate() {
            let column = |f: fn(&Standardized) -> f64| per_rep.iter().map(|rep| f(&rep[g])).collect::<Vec<_>>();
            let count = |f: fn(&Standardized) -> bool| per_rep.iter().filter(|rep| f(&rep[g])).count();
            cases.push(NormalityCase {
                noise: family,
                n1,
                n_alpha: na,
                res1: column(|s| s.res1),
                res_alpha: column(|s| s.res_alpha),
                res: column(|s| s.res),
                norm_ci_covered: count(|s| s.norm_covered),
                k_ci_covered: count(|s| s.k_covered),
                clamped: count(|s| s.clamped),
            });
        }
    }
    Ok(StudyResult::Normality(cases))
}

/// Mean relative error of `k_hat_alpha` as an estimate of the block count on
/// stepped signals, with the error budget `clt + approximation`.
pub fn run_l20_small_alpha(cfg: &ExperimentConfig) -> Result<StudyResult> {
    require(cfg, Study::L20SmallAlpha)?;
    let noise = NoiseModel::new(cfg.noise[0], cfg.sigma)?;
    let mut rows = Vec::new();
    for &k in &cfg.ks {
        let x = make_stepped_signal(cfg.signal_length, cfg.block_length, k)?;
        let count = block_l0(&x);
        let range = bdnr(&x)?;
        let approx = l20_bound_terms(cfg.alpha, range, count as f64);
        let thetas = population_thetas(cfg, &x, &noise)?;
        let per_rep = relative_errors(cfg, &x, &noise, count as f64)?;
        let agg = aggregate(&per_rep, cfg.grid.len());
        for (&(n1, na), (mean, med, clamped)) in cfg.grid.iter().zip(agg) {
            rows.push(L20Row {
                k,
                bdnr: range,
                n1,
                n_alpha: na,
                mean_rel_err: mean,
                median_rel_err: med,
                clt_term: clt_term(cfg.alpha, thetas, n1, na),
                approx_term: approx,
                clamped,
                replications: cfg.replications,
            });
        }
    }
    Ok(StudyResult::L20SmallAlpha(rows))
}

/// Block count next to `k_2`, `k_1` and `k_inf` on fixed block-norm profiles.
pub fn run_measure_compare(cfg: &ExperimentConfig) -> Result<StudyResult> {
    require(cfg, Study::MeasureCompare)?;
    let layout = BlockLayout::uniform(cfg.signal_length, cfg.block_length)?;
    let p = layout.num_blocks();
    let k = cfg.k;
    let profiles: Vec<(String, Vec<f64>)> = vec![
        (format!("two_level_k{k}_1e-6"), (0..p).map(|j| if j < k { 1.0 } else { 1e-6 }).collect()),
        (format!("two_level_k{k}_1e-2"), (0..p).map(|j| if j < k { 1.0 } else { 1e-2 }).collect()),
        ("power_decay_1".into(), (0..p).map(|j| 1.0 / (j + 1) as f64).collect()),
        ("power_decay_2".into(), (0..p).map(|j| 1.0 / ((j + 1) * (j + 1)) as f64).collect()),
        ("equal".into(), vec![1.0; p]),
        ("single".into(), (0..p).map(|j| if j == 0 { 1.0 } else { 0.0 }).collect()),
    ];
    let mut rows = Vec::new();
    for (profile, norms) in profiles {
        let mut values = vec![0.0; layout.len()];
        for (j, &norm) in norms.iter().enumerate() {
            let r = layout.block(j);
            let entry = norm / (r.len() as f64).sqrt();
            values[r].fill(entry);
        }
        let x = BlockSignal::new(values, layout.clone())?;
        rows.push(MeasureRow {
            profile,
            blocks: p,
            l20: block_l0(&x),
            k2: block_sparsity(&x, 2.0)?,
            k1: block_sparsity(&x, 1.0)?,
            k_inf: block_sparsity(&x, f64::INFINITY)?,
        });
    }
    Ok(StudyResult::MeasureCompare(rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::ReferenceLaw;
    use crate::experiments::config::Sweep;

    fn quick(mut cfg: ExperimentConfig) -> ExperimentConfig {
        cfg.signal_length = 50;
        cfg.replications = 6;
        cfg.grid = vec![(40, 40), (80, 60)];
        cfg.theory_draws = 20_000;
        cfg
    }

    #[test]
    fn error_curve_shape() {
        let mut cfg = quick(ExperimentConfig::error_curve());
        cfg.sweep = Sweep::Sigma(vec![0.0, 0.1]);
        let StudyResult::ErrorCurve(rows) = run(&cfg).unwrap() else { panic!() };
        assert_eq!(rows.len(), 4);
        for row in &rows {
            assert!(row.mean_rel_err.is_finite() && row.mean_rel_err >= 0.0);
            assert!(row.theory > 0.0 && row.theory.is_finite());
            assert!((row.k_true - 2.0).abs() < 1e-12);
        }
        assert_eq!(rows[0].variant, "N=50;d=5;sigma=0");
        assert!(rows[0].theory > rows[1].theory);
    }

    #[test]
    fn prefixes_share_draws_with_smaller_grids() {
        let cfg = quick(ExperimentConfig::error_curve());
        let mut single = cfg.clone();
        single.grid = vec![(40, 40)];
        let StudyResult::ErrorCurve(a) = run(&cfg).unwrap() else { panic!() };
        let StudyResult::ErrorCurve(b) = run(&single).unwrap() else { panic!() };
        assert_eq!(a[0].mean_rel_err, b[0].mean_rel_err);
    }

    #[test]
    fn normality_shape() {
        let cfg = quick(ExperimentConfig::normality());
        let StudyResult::Normality(cases) = run(&cfg).unwrap() else { panic!() };
        assert_eq!(cases.len(), 4);
        for case in &cases {
            assert_eq!(case.replications(), 6);
            assert!(case.res1.iter().chain(&case.res_alpha).chain(&case.res).all(|v| v.is_finite()));
            assert!(case.norm_ci_covered <= 6);
        }
        assert_eq!(cases[2].noise, NoiseFamily::StudentT(2.0));
    }

    #[test]
    fn l20_shape() {
        let mut cfg = quick(ExperimentConfig::l20_small_alpha());
        cfg.ks = vec![2, 10];
        cfg.reference = ReferenceLaw::MatchIndex;
        let StudyResult::L20SmallAlpha(rows) = run(&cfg).unwrap() else { panic!() };
        assert_eq!(rows.len(), 4);
        assert!((rows[2].bdnr - 10.0).abs() < 1e-12);
        assert!(rows.iter().all(|r| r.budget() > r.approx_term && r.mean_rel_err.is_finite()));
    }

    #[test]
    fn measure_compare_table() {
        let StudyResult::MeasureCompare(rows) = run(&ExperimentConfig::measure_compare()).unwrap() else {
            panic!()
        };
        let find = |name: &str| rows.iter().find(|r| r.profile.starts_with(name)).unwrap();
        let two = find("two_level_k5_1e-6");
        assert_eq!(two.l20, 20);
        assert!((two.k2 - 5.0).abs() < 1e-3 * 5.0);
        assert!((find("equal").k2 - 20.0).abs() < 1e-12);
        let single = find("single");
        assert_eq!((single.l20, single.k2), (1, 1.0));
        for r in &rows {
            assert!(r.k_inf <= r.k2 + 1e-12 && r.k2 <= r.k1 + 1e-12 && r.k1 <= r.l20 as f64 + 1e-12);
        }
    }

    #[test]
    fn wrong_study_rejected() {
        assert!(run_normality(&ExperimentConfig::error_curve()).is_err());
    }
}
