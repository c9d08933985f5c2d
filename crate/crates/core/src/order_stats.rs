//! Order statistics of independent, non-identically distributed exponentials.
//!
//! All functions take plain rate slices; a [`RateVector`] dereferences to one.
//! Rank indices are 1-based (rank 1 is the largest value), member indices are
//! 0-based positions within the supplied slice.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::root::bisect;

/// Tail mass left outside the quadrature range.
const TAIL_MASS: f64 = 1e-12;

/// Exponential rates sorted ascending, i.e. mean SNRs in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(mut rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::invalid("rates", "empty rate vector"));
        }
        if let Some(bad) = rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::invalid("rates", format!("rates must be positive and finite, got {bad}")));
        }
        rates.sort_by(f64::total_cmp);
        Ok(RateVector(rates))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Probabilities over ranks `1..=L` for one member at a fixed SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct RankDistribution {
    pub member: usize,
    /// `probs[n - 1]` is the probability of rank `n`.
    pub probs: Vec<f64>,
}

impl RankDistribution {
    pub fn rank(&self, n: usize) -> f64 {
        self.probs[n - 1]
    }

    /// Argmax rank, ties resolved toward the smaller rank.
    pub fn most_probable(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
            }
        }
        best + 1
    }
}

fn log_cdf_sum(rates: &[f64], x: f64) -> f64 {
    rates.iter().map(|&l| (-(-l * x).exp()).ln_1p()).sum()
}

/// CDF of the maximum: `∏ (1 - e^{-λ_i x})`.
pub fn max_cdf(rates: &[f64], x: f64) -> Result<f64> {
    if x < 0.0 || x.is_nan() {
        return Err(Error::invalid("x", format!("SNR must be nonnegative, got {x}")));
    }
    Ok(max_cdf_unchecked(rates, x))
}

pub(crate) fn max_cdf_unchecked(rates: &[f64], x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    log_cdf_sum(rates, x).exp()
}

/// Survival function of the maximum, accurate in the upper tail.
pub fn max_survival(rates: &[f64], x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x == f64::INFINITY {
        return 0.0;
    }
    -log_cdf_sum(rates, x).exp_m1()
}

/// Density of the maximum, the derivative of [`max_cdf`].
pub fn max_density(rates: &[f64], x: f64) -> f64 {
    if x < 0.0 {
        return 0.0;
    }
    let k = rates.len();
    let cdfs: Vec<f64> = rates.iter().map(|&l| -(-l * x).exp_m1()).collect();
    // suffix[i] = ∏_{j >= i} cdf_j
    let mut suffix = vec![1.0; k + 1];
    for i in (0..k).rev() {
        suffix[i] = suffix[i + 1] * cdfs[i];
    }
    let mut prefix = 1.0;
    let mut total = 0.0;
    for i in 0..k {
        let l = rates[i];
        total += l * (-l * x).exp() * prefix * suffix[i + 1];
        prefix *= cdfs[i];
    }
    total
}

/// Smallest power-of-two multiple of the largest mean where the survival of
/// the maximum drops below `tail`.
pub(crate) fn upper_cutoff<S: Fn(f64) -> f64>(survival: S, rates: &[f64], tail: f64) -> f64 {
    let min_rate = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut x = 1.0 / min_rate;
    while survival(x) >= tail {
        x *= 2.0;
    }
    x
}

/// Inverse of [`max_cdf`]: the `x` with `max_cdf(x) = p`.
pub fn max_quantile(rates: &[f64], p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("probability must lie in [0,1], got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(f64::INFINITY);
    }
    let hi = upper_cutoff(|x| max_survival(rates, x), rates, (1.0 - p) * 0.5);
    bisect(|x| max_cdf_unchecked(rates, x) - p, 0.0, hi, 1e-15)
}

fn check_member(len: usize, m: usize) -> Result<()> {
    if m >= len {
        return Err(Error::IndexOutOfRange { index: m, len });
    }
    Ok(())
}

/// Poisson-binomial counts over the members other than `m`, where member `j`
/// exceeds `r` with probability `e^{-λ_j r}`. Only counts `0..=max_count`
/// are tracked; `dp[c]` is the probability that exactly `c` others exceed `r`.
fn exceed_counts(rates: &[f64], m: usize, r: f64, max_count: usize) -> Vec<f64> {
    let mut dp = vec![0.0; max_count + 1];
    dp[0] = 1.0;
    let mut seen = 0usize;
    for (j, &l) in rates.iter().enumerate() {
        if j == m {
            continue;
        }
        let p = if r == f64::INFINITY { 0.0 } else { (-l * r).exp() };
        let q = 1.0 - p;
        seen += 1;
        let top = seen.min(max_count);
        for c in (1..=top).rev() {
            dp[c] = dp[c] * q + dp[c - 1] * p;
        }
        dp[0] *= q;
    }
    dp
}

/// Probability that member `m` has rank `n` among the cluster when its own
/// SNR equals `r`: exactly `n - 1` of the other members exceed `r`.
pub fn rank_probability(cluster_rates: &[f64], m: usize, n: usize, r: f64) -> Result<f64> {
    let len = cluster_rates.len();
    check_member(len, m)?;
    if n == 0 || n > len {
        return Err(Error::IndexOutOfRange { index: n, len });
    }
    if r < 0.0 || r.is_nan() {
        return Err(Error::invalid("r", format!("SNR must be nonnegative, got {r}")));
    }
    Ok(exceed_counts(cluster_rates, m, r, n - 1)[n - 1])
}

/// Full rank distribution of member `m` at SNR `r`.
pub fn rank_distribution(cluster_rates: &[f64], m: usize, r: f64) -> Result<RankDistribution> {
    let len = cluster_rates.len();
    check_member(len, m)?;
    if r < 0.0 || r.is_nan() {
        return Err(Error::invalid("r", format!("SNR must be nonnegative, got {r}")));
    }
    Ok(RankDistribution {
        member: m,
        probs: exceed_counts(cluster_rates, m, r, len - 1),
    })
}

pub fn most_probable_rank(cluster_rates: &[f64], m: usize, r: f64) -> Result<usize> {
    Ok(rank_distribution(cluster_rates, m, r)?.most_probable())
}

/// `P(rank n) - P(rank n + 1)` for member `m` at SNR `r`, in `O(L n)`.
pub(crate) fn adjacent_rank_gap(cluster_rates: &[f64], m: usize, n: usize, r: f64) -> f64 {
    let dp = exceed_counts(cluster_rates, m, r, n);
    dp[n - 1] - dp[n]
}

/// `E[log2(1 + X_(1))]`, the per-beam spectral efficiency of max-SNR
/// scheduling over all users.
pub fn expected_max_log_rate(rates: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::invalid("rates", "empty rate vector"));
    }
    let hi = upper_cutoff(|x| max_survival(rates, x), rates, TAIL_MASS);
    let f = |x: f64| (1.0 + x).log2() * max_density(rates, x);
    // Split at the bulk of the mass so the adaptive rule sees the peak.
    let median = max_quantile(rates, 0.5)?;
    Ok(integrate(f, 0.0, median, 1e-10, 1e-12) + integrate(f, median, hi, 1e-10, 1e-12))
}

/// CDF of the largest SNR reported on one beam when every user feeds back
/// only its best of `beams` i.i.d. beams. Includes the atom at zero from the
/// event that no user picks the beam.
pub fn best_beam_cdf(rates: &[f64], beams: usize, x: f64) -> f64 {
    best_beam_log_cdf(rates, beams, x).exp()
}

fn best_beam_log_cdf(rates: &[f64], beams: usize, x: f64) -> f64 {
    let mf = beams as f64;
    rates
        .iter()
        .map(|&l| {
            // user reports on this beam with a value above x
            let above = if x <= 0.0 {
                1.0
            } else {
                let log_f = (-(-l * x).exp_m1()).ln();
                -(mf * log_f).exp_m1()
            };
            (-above / mf).ln_1p()
        })
        .sum()
}

pub fn best_beam_survival(rates: &[f64], beams: usize, x: f64) -> f64 {
    -best_beam_log_cdf(rates, beams, x).exp_m1()
}

/// Expected `log2(1 + SNR)` of the user scheduled on one beam when each user
/// competes only on its best beam; idle beams contribute zero.
pub fn expected_best_beam_log_rate(rates: &[f64], beams: usize) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::invalid("rates", "empty rate vector"));
    }
    if beams == 0 {
        return Err(Error::invalid("beams", "must be positive"));
    }
    let hi = upper_cutoff(|x| best_beam_survival(rates, beams, x), rates, TAIL_MASS);
    let g = |x: f64| best_beam_survival(rates, beams, x) / ((1.0 + x) * std::f64::consts::LN_2);
    let split = 1.0 / rates.iter().cloned().fold(f64::INFINITY, f64::min);
    let split = split.min(hi);
    Ok(integrate(g, 0.0, split, 1e-10, 1e-12) + integrate(g, split, hi, 1e-10, 1e-12))
}
