//! Block-structured signals and exact block-sparsity measures.

use std::ops::Range;

use crate::error::{Error, Result};

/// Partition of `0..N` into consecutive blocks of the given lengths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    lengths: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub fn new(lengths: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::param("a block layout needs at least one block"));
        }
        if let Some(j) = lengths.iter().position(|&d| d == 0) {
            return Err(Error::param(format!("block {j} has length 0")));
        }
        let mut offsets = Vec::with_capacity(lengths.len() + 1);
        offsets.push(0);
        for d in &lengths {
            offsets.push(offsets.last().unwrap() + d);
        }
        Ok(Self { lengths, offsets })
    }

    /// `n / d` blocks of length `d`.
    pub fn uniform(n: usize, d: usize) -> Result<Self> {
        if d == 0 || n == 0 || !n.is_multiple_of(d) {
            return Err(Error::param(format!("signal length {n} is not a positive multiple of block length {d}")));
        }
        Self::new(vec![d; n / d])
    }

    /// Number of blocks `p`.
    pub fn num_blocks(&self) -> usize {
        self.lengths.len()
    }

    /// Total length `N`.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn block_lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// Common block length, if every block has the same length.
    pub fn uniform_length(&self) -> Option<usize> {
        let d = self.lengths[0];
        self.lengths.iter().all(|&l| l == d).then_some(d)
    }

    pub fn block(&self, j: usize) -> Range<usize> {
        self.offsets[j]..self.offsets[j + 1]
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.offsets.windows(2).map(|w| w[0]..w[1])
    }
}

/// A real vector together with its block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSignal {
    values: Vec<f64>,
    layout: BlockLayout,
}

impl BlockSignal {
    pub fn new(values: Vec<f64>, layout: BlockLayout) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::param(format!(
                "signal has {} values but the layout covers {}",
                values.len(),
                layout.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("signal value {i} is not finite")));
        }
        Ok(Self { values, layout })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.layout
    }

    pub fn block(&self, j: usize) -> &[f64] {
        &self.values[self.layout.block(j)]
    }

    /// Euclidean norm of every block, in order.
    pub fn block_norms(&self) -> Vec<f64> {
        self.layout
            .blocks()
            .map(|r| l2_norm(&self.values[r]))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> BlockSignal {
        BlockSignal {
            values: self.values.iter().map(|v| c * v).collect(),
            layout: self.layout.clone(),
        }
    }
}

fn l2_norm(xs: &[f64]) -> f64 {
    let scale = xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * xs.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

/// `(sum_j b_j^alpha)^(1/alpha)` with `alpha = inf` meaning the maximum.
fn norm_of_norms(norms: &[f64], alpha: f64) -> f64 {
    let max = norms.iter().copied().fold(0.0, f64::max);
    if alpha == f64::INFINITY || max == 0.0 {
        return max;
    }
    max * norms.iter().map(|b| (b / max).powf(alpha)).sum::<f64>().powf(1.0 / alpha)
}

/// The mixed `l2/l_alpha` norm. Pass `f64::INFINITY` for the `l2/l_inf` norm.
pub fn mixed_norm(x: &BlockSignal, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::param(format!("mixed norm needs alpha > 0, got {alpha}; use block_l0 for alpha = 0")));
    }
    Ok(norm_of_norms(&x.block_norms(), alpha))
}

/// Number of blocks with nonzero Euclidean norm.
pub fn block_l0(x: &BlockSignal) -> usize {
    x.block_norms().iter().filter(|&&b| b > 0.0).count()
}

/// Distance from 1 inside which `alpha` is routed to the Shannon-entropy path.
pub const ENTROPY_GUARD: f64 = 1e-9;

/// The soft block-sparsity measure `k_alpha(x)` for `alpha` in `[0, inf]`.
///
/// `alpha = 0` gives the block count, `alpha = 1` the exponential of the
/// Shannon entropy of the block distribution, `alpha = inf` the ratio
/// `|x|_{2,1} / |x|_{2,inf}`. The zero signal has measure 0.
pub fn block_sparsity(x: &BlockSignal, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::param(format!("block sparsity order must be in [0, inf], got {alpha}")));
    }
    let norms = x.block_norms();
    Ok(sparsity_of_norms(&norms, alpha))
}

pub(crate) fn sparsity_of_norms(norms: &[f64], alpha: f64) -> f64 {
    let l1: f64 = norms.iter().sum();
    if l1 == 0.0 {
        return 0.0;
    }
    if alpha == 0.0 {
        return norms.iter().filter(|&&b| b > 0.0).count() as f64;
    }
    if alpha == f64::INFINITY {
        return l1 / norms.iter().copied().fold(0.0, f64::max);
    }
    if (alpha - 1.0).abs() < ENTROPY_GUARD {
        let entropy: f64 = norms
            .iter()
            .filter(|&&b| b > 0.0)
            .map(|b| {
                let p = b / l1;
                -p * p.ln()
            })
            .sum();
        return entropy.exp();
    }
    let ratio_log = norm_of_norms(norms, alpha).ln() - l1.ln();
    ((alpha / (1.0 - alpha)) * ratio_log).exp()
}

/// Distribution `pi_j = |x[j]|_2 / |x|_{2,1}` over block indices.
pub fn block_distribution(x: &BlockSignal) -> Result<Vec<f64>> {
    let norms = x.block_norms();
    let l1: f64 = norms.iter().sum();
    if l1 == 0.0 {
        return Err(Error::domain("block distribution is undefined for the zero signal"));
    }
    Ok(norms.into_iter().map(|b| b / l1).collect())
}

/// Block dynamic range: largest over smallest nonzero block norm.
pub fn bdnr(x: &BlockSignal) -> Result<f64> {
    let norms = x.block_norms();
    let nonzero = norms.iter().copied().filter(|&b| b > 0.0);
    let (min, max) = nonzero.fold((f64::INFINITY, 0.0f64), |(lo, hi), b| (lo.min(b), hi.max(b)));
    if max == 0.0 {
        return Err(Error::domain("block dynamic range is undefined for the zero signal"));
    }
    Ok(max / min)
}

/// Upper bound on `|k / |x|_{2,0} - 1|` for an estimate `k` of `k_alpha(x)`
/// whose relative error is `k_estimate_rel_err`, valid for `alpha` in `(0, 1)`.
pub fn l20_approx_bound(x: &BlockSignal, alpha: f64, k_estimate_rel_err: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("approximation bound needs alpha in (0, 1), got {alpha}")));
    }
    if !(k_estimate_rel_err >= 0.0) {
        return Err(Error::param("relative error must be nonnegative"));
    }
    let range = bdnr(x)?;
    let count = block_l0(x) as f64;
    Ok(l20_bound_terms(alpha, range, count) + k_estimate_rel_err)
}

/// `(alpha / (1 - alpha)) * (ln bdnr + alpha ln count)`.
pub fn l20_bound_terms(alpha: f64, bdnr: f64, count: f64) -> f64 {
    alpha / (1.0 - alpha) * (bdnr.ln() + alpha * count.ln())
}

/// `(1/sqrt(10)) 1_10` followed by zeros.
pub fn make_exact_signal(n: usize, d: usize) -> Result<BlockSignal> {
    if n < 10 {
        return Err(Error::param(format!("exact signal needs N >= 10, got {n}")));
    }
    let layout = BlockLayout::uniform(n, d)?;
    let mut values = vec![0.0; n];
    values[..10].fill(1.0 / 10f64.sqrt());
    BlockSignal::new(values, layout)
}

/// Every block nonzero, block `j` (1-based) with norm proportional to `1/j`, unit `l2` norm.
pub fn make_nearly_sparse_signal(n: usize, d: usize) -> Result<BlockSignal> {
    let layout = BlockLayout::uniform(n, d)?;
    let p = layout.num_blocks();
    decaying_blocks(layout, p)
}

/// First `k` blocks with norms proportional to `1, 1/2, ..., 1/k`, zeros after, unit `l2` norm.
/// Block count and dynamic range both equal `k`.
pub fn make_stepped_signal(n: usize, d: usize, k: usize) -> Result<BlockSignal> {
    let layout = BlockLayout::uniform(n, d)?;
    if k == 0 || k > layout.num_blocks() {
        return Err(Error::param(format!(
            "stepped signal needs 1 <= k <= {} blocks, got {k}",
            layout.num_blocks()
        )));
    }
    decaying_blocks(layout, k)
}

fn decaying_blocks(layout: BlockLayout, k: usize) -> Result<BlockSignal> {
    let c = 1.0 / (1..=k).map(|j| 1.0 / (j * j) as f64).sum::<f64>().sqrt();
    let mut values = vec![0.0; layout.len()];
    for j in 0..k {
        let r = layout.block(j);
        let entry = c / ((r.len() as f64).sqrt() * (j + 1) as f64);
        values[r].fill(entry);
    }
    BlockSignal::new(values, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn layout_validation() {
        assert!(BlockLayout::new(vec![]).is_err());
        assert!(BlockLayout::new(vec![2, 0, 3]).is_err());
        assert!(BlockLayout::uniform(10, 3).is_err());
        let l = BlockLayout::new(vec![2, 3, 5]).unwrap();
        assert_eq!(l.len(), 10);
        assert_eq!(l.num_blocks(), 3);
        assert_eq!(l.block(1), 2..5);
        assert_eq!(l.uniform_length(), None);
        assert!(BlockSignal::new(vec![0.0; 9], l).is_err());
    }

    #[test]
    fn exact_signal_norms() {
        let x = make_exact_signal(1000, 5).unwrap();
        assert!(close(mixed_norm(&x, 1.0).unwrap(), SQRT_2, 1e-14));
        assert!(close(mixed_norm(&x, 2.0).unwrap(), 1.0, 1e-14));
        assert!(close(mixed_norm(&x, f64::INFINITY).unwrap(), SQRT_2 / 2.0, 1e-14));
        assert_eq!(block_l0(&x), 2);
        assert_eq!(block_l0(&make_exact_signal(1000, 10).unwrap()), 1);
        assert!(mixed_norm(&x, 0.0).is_err());
        assert!(mixed_norm(&x, -1.0).is_err());
    }

    #[test]
    fn zero_signal() {
        let x = BlockSignal::new(vec![0.0; 12], BlockLayout::uniform(12, 4).unwrap()).unwrap();
        for a in [0.5, 1.0, 2.0, f64::INFINITY] {
            assert_eq!(mixed_norm(&x, a).unwrap(), 0.0);
        }
        for a in [0.0, 0.5, 1.0, 2.0, f64::INFINITY] {
            assert_eq!(block_sparsity(&x, a).unwrap(), 0.0);
        }
        assert_eq!(block_l0(&x), 0);
        assert!(matches!(block_distribution(&x), Err(Error::Domain(_))));
        assert!(matches!(bdnr(&x), Err(Error::Domain(_))));
    }

    #[test]
    fn exact_signal_k2() {
        for (d, want) in [(1, 10.0), (2, 5.0), (5, 2.0), (10, 1.0)] {
            let x = make_exact_signal(1000, d).unwrap();
            assert!(close(block_sparsity(&x, 2.0).unwrap(), want, 1e-14), "d={d}");
        }
    }

    #[test]
    fn equal_blocks_entropy() {
        let layout = BlockLayout::uniform(12, 3).unwrap();
        let x = BlockSignal::new(vec![1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.6, 0.8, 0.0], layout).unwrap();
        assert!(close(block_sparsity(&x, 1.0).unwrap(), 3.0, 1e-14));
        let single = make_exact_signal(20, 10).unwrap();
        assert!(close(block_sparsity(&single, 1.0).unwrap(), 1.0, 1e-15));
    }

    #[test]
    fn distribution_examples() {
        let x = make_exact_signal(1000, 5).unwrap();
        let pi = block_distribution(&x).unwrap();
        assert!(close(pi[0], 0.5, 1e-15) && close(pi[1], 0.5, 1e-15));
        assert!(pi[2..].iter().all(|&p| p == 0.0));
        let y = x.scaled(7.0);
        let pi7 = block_distribution(&y).unwrap();
        for (a, b) in pi.iter().zip(&pi7) {
            assert!(close(*a, *b, 1e-15));
        }
        let one = block_distribution(&make_exact_signal(100, 10).unwrap()).unwrap();
        assert_eq!(one[0], 1.0);
        assert!(one[1..].iter().all(|&p| p == 0.0));
    }

    #[test]
    fn bdnr_examples() {
        assert!(close(bdnr(&make_exact_signal(1000, 5).unwrap()).unwrap(), 1.0, 1e-15));
        for k in [10, 50, 100, 200] {
            let x = make_stepped_signal(1000, 5, k).unwrap();
            assert!(close(bdnr(&x).unwrap(), k as f64, 1e-12));
            assert_eq!(block_l0(&x), k);
        }
        let x = make_nearly_sparse_signal(1000, 5).unwrap();
        assert!(close(bdnr(&x).unwrap(), 200.0, 1e-12));
    }

    #[test]
    fn approx_bound_examples() {
        let x = make_exact_signal(1000, 1).unwrap(); // BDNR 1, ten blocks
        let b = l20_approx_bound(&x, 0.5, 0.0).unwrap();
        assert!(close(b, 0.5 * 10f64.ln(), 1e-14));
        let tiny = l20_approx_bound(&x, 1e-9, 0.0).unwrap();
        assert!(tiny < 1e-8);
        let x = make_stepped_signal(1000, 5, 10).unwrap();
        let b = l20_approx_bound(&x, 0.06, 0.0).unwrap();
        assert!((b - 0.155_791_927_568_533).abs() < 1e-12);
        assert!(l20_approx_bound(&x, 1.0, 0.0).is_err());
        assert!(l20_approx_bound(&x, 0.0, 0.0).is_err());
    }

    #[test]
    fn generators() {
        let x = make_exact_signal(1000, 5).unwrap();
        assert!(close(mixed_norm(&x, 2.0).unwrap(), 1.0, 1e-14));
        let x = make_nearly_sparse_signal(1000, 5).unwrap();
        assert!(close(mixed_norm(&x, 2.0).unwrap(), 1.0, 1e-14));
        let norms = x.block_norms();
        assert_eq!(norms.len(), 200);
        for (j, b) in norms.iter().enumerate() {
            assert!(close(b * (j + 1) as f64, norms[0], 1e-13));
        }
        let x = make_stepped_signal(1000, 5, 10).unwrap();
        assert!(close(mixed_norm(&x, 2.0).unwrap(), 1.0, 1e-14));
        assert!(make_exact_signal(8, 2).is_err());
        assert!(make_exact_signal(1000, 3).is_err());
        assert!(make_stepped_signal(1000, 5, 201).is_err());
        assert!(make_stepped_signal(1000, 5, 0).is_err());
    }

    #[test]
    fn negative_order_rejected() {
        let x = make_exact_signal(20, 5).unwrap();
        assert!(block_sparsity(&x, -0.5).is_err());
        assert!(block_sparsity(&x, f64::NAN).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        const GRID: [f64; 8] = [0.1, 0.5, 0.9, 1.0, 1.5, 2.0, 5.0, f64::INFINITY];

        fn signal() -> impl Strategy<Value = BlockSignal> {
            prop::collection::vec(1usize..6, 1..10)
                .prop_flat_map(|lengths| {
                    let n: usize = lengths.iter().sum();
                    (Just(lengths), prop::collection::vec(prop_oneof![Just(0.0), -1e3..1e3f64], n))
                })
                .prop_filter("nonzero", |(_, v)| v.iter().any(|x| *x != 0.0))
                .prop_map(|(lengths, v)| BlockSignal::new(v, BlockLayout::new(lengths).unwrap()).unwrap())
        }

        proptest! {
            #[test]
            fn bounded_by_block_count(x in signal()) {
                let p = x.layout().num_blocks() as f64;
                for a in GRID {
                    let k = block_sparsity(&x, a).unwrap();
                    prop_assert!(k >= 1.0 - 1e-12 && k <= p * (1.0 + 1e-12), "alpha {} k {}", a, k);
                }
                prop_assert_eq!(block_sparsity(&x, 0.0).unwrap(), block_l0(&x) as f64);
            }

            #[test]
            fn non_increasing_in_order(x in signal()) {
                let ks: Vec<f64> = GRID.iter().map(|&a| block_sparsity(&x, a).unwrap()).collect();
                for w in ks.windows(2) {
                    prop_assert!(w[1] <= w[0] * (1.0 + 1e-10), "{:?}", ks);
                }
            }

            #[test]
            fn scale_invariant(x in signal(), log_c in -8.0..8.0f64) {
                let y = x.scaled(10f64.powf(log_c));
                for a in GRID {
                    let (k, ky) = (block_sparsity(&x, a).unwrap(), block_sparsity(&y, a).unwrap());
                    prop_assert!((k - ky).abs() <= 1e-12 * k);
                }
            }

            #[test]
            fn entropy_limit(x in signal()) {
                let k1 = block_sparsity(&x, 1.0).unwrap();
                for a in [1.0 - 1e-6, 1.0 + 1e-6] {
                    prop_assert!((block_sparsity(&x, a).unwrap() - k1).abs() < 1e-4);
                }
            }

            #[test]
            fn continuous_in_order(x in signal(), a in 0.05..4.0f64) {
                let k = block_sparsity(&x, a).unwrap();
                let k2 = block_sparsity(&x, a + 1e-7).unwrap();
                prop_assert!((k - k2).abs() <= 1e-4 * k);
            }

            #[test]
            fn unit_blocks_match_scalar_measure(v in prop::collection::vec(0.01..10.0f64, 1..30), a in prop_oneof![Just(0.5), Just(2.0), Just(3.0)]) {
                let x = BlockSignal::new(v.clone(), BlockLayout::uniform(v.len(), 1).unwrap()).unwrap();
                let norm_a = v.iter().map(|t| t.abs().powf(a)).sum::<f64>().powf(1.0 / a);
                let norm_1 = v.iter().map(|t| t.abs()).sum::<f64>();
                let scalar = (norm_a / norm_1).powf(a / (1.0 - a));
                let k = block_sparsity(&x, a).unwrap();
                prop_assert!((k - scalar).abs() <= 1e-10 * scalar, "{} vs {}", k, scalar);
            }
        }
    }
}
