//! Sum-rate loss caused by the smallest threshold.
//!
//! A user whose SNR sits below `r_{c,N_c}` stays silent, so the loss variable
//! of user `i` is `Z_i = X_i 1{X_i <= r}`. The expectation of `max Z_i` is
//! bounded with a mean/variance order-statistic bound, then pushed through
//! Jensen's inequality on `log2(1 + ·)`.

use crate::error::{Error, Result};
use crate::order_stats::max_cdf;

use super::{ClusterPlan, ThresholdKind};

/// Probability that every user falls below `r_min`, i.e. `P(X_(1) < r_min)`.
pub fn loss_probability(rates: &[f64], r_min: f64) -> Result<f64> {
    max_cdf(rates, r_min)
}

/// Regularized lower incomplete gamma `P(s, t)` for integer `s`.
fn lower_gamma_regularized(s: u32, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t < 1.0 {
        // e^{-t} t^s Σ t^k / (s (s+1) ... (s+k))
        let mut term = 1.0 / s as f64;
        let mut sum = term;
        for k in 1..200 {
            term *= t / (s + k) as f64;
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
        }
        let factorial: f64 = (1..s).map(f64::from).product();
        (-t).exp() * t.powi(s as i32) * sum / factorial
    } else {
        // 1 - e^{-t} Σ_{k<s} t^k / k!
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..s {
            term *= t / k as f64;
            sum += term;
        }
        1.0 - (-t).exp() * sum
    }
}

/// Mean and variance of `Z = X 1{X <= r}` with `X ~ Exp(rate)`.
pub fn truncated_moments(rate: f64, r: f64) -> Result<(f64, f64)> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid("rate", format!("must be positive, got {rate}")));
    }
    if r < 0.0 || r.is_nan() {
        return Err(Error::invalid("r", format!("threshold must be nonnegative, got {r}")));
    }
    if r == f64::INFINITY {
        let mean = 1.0 / rate;
        return Ok((mean, mean * mean));
    }
    let t = rate * r;
    let mean = lower_gamma_regularized(2, t) / rate;
    let second = 2.0 * lower_gamma_regularized(3, t) / (rate * rate);
    Ok((mean, (second - mean * mean).max(0.0)))
}

/// Closed-form upper bound on `E[max_i Z_i]` from per-variable means and
/// variances:
///
/// `Σ_i (μ_i + sqrt((μ_i - T)² + σ_i²)) / 2 + (2 - K) T / 2`, with
/// `T = max_j (μ_j + (K - 2) σ_j / (2 sqrt(K - 1)))`.
pub fn max_expectation_bound(means: &[f64], variances: &[f64]) -> Result<f64> {
    let k = means.len();
    if variances.len() != k {
        return Err(Error::invalid("variances", "length differs from means"));
    }
    if k < 2 {
        return Err(Error::invalid("means", "bound needs at least two variables"));
    }
    if variances.iter().any(|v| *v < 0.0 || v.is_nan()) {
        return Err(Error::invalid("variances", "must be nonnegative"));
    }
    let kf = k as f64;
    let coef = (kf - 2.0) / (2.0 * (kf - 1.0).sqrt());
    let t = means
        .iter()
        .zip(variances)
        .map(|(m, v)| m + coef * v.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = means
        .iter()
        .zip(variances)
        .map(|(m, v)| 0.5 * (m + ((m - t).powi(2) + v).sqrt()))
        .sum();
    Ok(sum + 0.5 * (2.0 - kf) * t)
}

/// Pieces of the sum-rate-loss bound for one threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct RateLossBound {
    pub r_min: f64,
    pub loss_probability: f64,
    pub truncated_means: Vec<f64>,
    pub truncated_variances: Vec<f64>,
    /// Upper bound on `E[Z_(1)]`.
    pub max_expectation: f64,
    /// `log2(1 + max_expectation) · P_L`, the bound on the per-beam loss.
    pub per_beam: f64,
    pub beams: usize,
}

impl RateLossBound {
    /// Bound on the total sum-rate loss, `M` times the per-beam bound.
    pub fn total(&self) -> f64 {
        self.beams as f64 * self.per_beam
    }
}

pub fn rate_loss_bound(rates: &[f64], r_min: f64, beams: usize) -> Result<RateLossBound> {
    if rates.is_empty() {
        return Err(Error::invalid("rates", "empty rate vector"));
    }
    let loss_probability = loss_probability(rates, r_min)?;
    let (truncated_means, truncated_variances): (Vec<f64>, Vec<f64>) = rates
        .iter()
        .map(|&l| truncated_moments(l, r_min))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let max_expectation = if rates.len() == 1 {
        truncated_means[0]
    } else {
        max_expectation_bound(&truncated_means, &truncated_variances)?
    };
    let per_beam = if loss_probability == 0.0 {
        0.0
    } else {
        max_expectation.ln_1p() / std::f64::consts::LN_2 * loss_probability
    };
    Ok(RateLossBound {
        r_min,
        loss_probability,
        truncated_means,
        truncated_variances,
        max_expectation,
        per_beam,
        beams,
    })
}

/// Smallest cluster count whose smallest threshold keeps the total
/// rate-loss bound within `tolerable_loss`. Returns `K` when nothing smaller
/// qualifies.
pub fn min_clusters(rates: &[f64], tolerable_loss: f64, beams: usize, kind: ThresholdKind) -> Result<usize> {
    if !(tolerable_loss > 0.0) {
        return Err(Error::invalid("delta_r_u", format!("must be positive, got {tolerable_loss}")));
    }
    let k = rates.len();
    for clusters in 1..=k {
        let plan = ClusterPlan::build(rates, clusters, kind)?;
        if rate_loss_bound(rates, plan.min_threshold(), beams)?.total() <= tolerable_loss {
            return Ok(clusters);
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn incomplete_gamma_branches_agree() {
        for s in [2u32, 3] {
            let below = lower_gamma_regularized(s, 1.0 - 1e-12);
            let above = lower_gamma_regularized(s, 1.0);
            assert!((below - above).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_moment_limits() {
        assert_eq!(truncated_moments(1.0, 0.0).unwrap(), (0.0, 0.0));
        let (m, v) = truncated_moments(1.0, 80.0).unwrap();
        assert!((m - 1.0).abs() < 1e-12 && (v - 1.0).abs() < 1e-12);
        let (m, _) = truncated_moments(1.0, 1.0).unwrap();
        assert!((m - (1.0 - 2.0 * (-1f64).exp())).abs() < 1e-15);
        assert!((m - 0.26424).abs() < 1e-5);
        assert!(truncated_moments(0.0, 1.0).is_err());
        assert!(truncated_moments(1.0, -1.0).is_err());
    }

    #[test]
    fn small_threshold_moments_are_accurate() {
        // E[Z] ≈ λ r² / 2, E[Z²] ≈ λ r³ / 3 for tiny r
        let (m, v) = truncated_moments(2.0, 1e-6).unwrap();
        assert!((m / (2.0 * 1e-12 / 2.0) - 1.0).abs() < 1e-5);
        assert!((v / (2.0 * 1e-18 / 3.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn two_variable_bound() {
        let b = max_expectation_bound(&[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!((b - 2.0).abs() < 1e-15);
        assert!(max_expectation_bound(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn zero_threshold_has_no_loss() {
        let b = rate_loss_bound(&[0.4, 0.8, 2.0], 0.0, 4).unwrap();
        assert_eq!(b.total(), 0.0);
        assert_eq!(b.loss_probability, 0.0);
    }

    #[test]
    fn iid_loss_probability() {
        let p = loss_probability(&[1.0, 1.0], std::f64::consts::LN_2).unwrap();
        assert!((p - 0.25).abs() < 1e-15);
    }

    #[test]
    fn min_clusters_extremes() {
        let rates: Vec<f64> = (1..=12).map(|i| 0.3 * i as f64).collect();
        assert_eq!(min_clusters(&rates, 1e9, 4, ThresholdKind::Type2).unwrap(), 1);
        // from N_c = 7 on, the last cluster has a single member and threshold 0
        assert_eq!(min_clusters(&rates, 1e-300, 4, ThresholdKind::Type2).unwrap(), 7);
        assert!(min_clusters(&rates, 0.0, 4, ThresholdKind::Type1).is_err());
    }
}
