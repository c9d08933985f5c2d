//! Cluster partitioning and feedback threshold sets.
//!
//! Users are sorted by decreasing mean SNR and split into `N_c` contiguous
//! clusters. Each cluster yields one threshold: the SNR above which a member's
//! most probable rank within the cluster is 1.

mod rate_loss;

pub use rate_loss::{
    loss_probability, max_expectation_bound, min_clusters, rate_loss_bound, truncated_moments,
    RateLossBound,
};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::order_stats::adjacent_rank_gap;
use crate::root::{bisect, bracket_positive_axis};

/// Relative tolerance of the crossing-point bisection.
pub const CROSSING_REL_TOL: f64 = 1e-12;

/// How a cluster's threshold is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    /// Exact heterogeneous rank probabilities, numeric crossing points.
    Type1,
    /// Cluster rates averaged, closed form `ln(L) / μ`.
    Type2,
}

impl fmt::Display for ThresholdKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThresholdKind::Type1 => write!(f, "type1"),
            ThresholdKind::Type2 => write!(f, "type2"),
        }
    }
}

impl FromStr for ThresholdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "type1" | "type-1" | "1" => Ok(ThresholdKind::Type1),
            "type2" | "type-2" | "2" => Ok(ThresholdKind::Type2),
            other => Err(Error::invalid("scheme", format!("unknown threshold type `{other}`"))),
        }
    }
}

/// One cluster: user indices and their rates, both ordered by ascending rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub rates: Vec<f64>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Arithmetic mean of the member rates, `μ_c`. This is a rate, not a mean SNR.
    pub fn mean_rate(&self) -> f64 {
        self.rates.iter().sum::<f64>() / self.rates.len() as f64
    }
}

/// Contiguous clusters of the mean-sorted users.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    clusters: Vec<Cluster>,
}

impl Partition {
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Cluster::len).collect()
    }

    /// Cluster index of each user.
    pub fn assignment(&self) -> Vec<usize> {
        let users = self.clusters.iter().map(Cluster::len).sum();
        let mut out = vec![usize::MAX; users];
        for (i, c) in self.clusters.iter().enumerate() {
            for &u in &c.members {
                out[u] = i;
            }
        }
        out
    }
}

/// Region-index bits for `N_c` clusters: `ceil(log2 N_c)`, zero for one cluster.
pub fn index_bits(clusters: usize) -> u32 {
    if clusters <= 1 {
        0
    } else {
        usize::BITS - (clusters - 1).leading_zeros()
    }
}

/// Sorts users by decreasing mean SNR (ascending rate, ties by user index)
/// and cuts them into `clusters` contiguous blocks. The first `K mod N_c`
/// blocks take one extra user.
pub fn partition_users(rates: &[f64], clusters: usize) -> Result<Partition> {
    let k = rates.len();
    if clusters == 0 {
        return Err(Error::invalid("clusters", "must be at least 1"));
    }
    if clusters > k {
        return Err(Error::TooManyClusters { clusters, users: k });
    }
    if let Some(bad) = rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::invalid("rates", format!("rates must be positive and finite, got {bad}")));
    }
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| rates[a].total_cmp(&rates[b]).then(a.cmp(&b)));

    let base = k / clusters;
    let extra = k % clusters;
    let mut out = Vec::with_capacity(clusters);
    let mut start = 0;
    for i in 0..clusters {
        let size = base + usize::from(i < extra);
        let members: Vec<usize> = order[start..start + size].to_vec();
        let member_rates = members.iter().map(|&u| rates[u]).collect();
        out.push(Cluster {
            members,
            rates: member_rates,
        });
        start += size;
    }
    Ok(Partition { clusters: out })
}

/// The SNR `Q_{m,n}` at which member `m` is equally likely to hold rank `n`
/// and rank `n + 1` (`n` is 1-based).
pub fn crossing_point(cluster_rates: &[f64], m: usize, n: usize) -> Result<f64> {
    let len = cluster_rates.len();
    if len < 2 {
        return Err(Error::NoCrossing);
    }
    if m >= len {
        return Err(Error::IndexOutOfRange { index: m, len });
    }
    if n == 0 || n >= len {
        return Err(Error::IndexOutOfRange { index: n, len: len - 1 });
    }
    let gap = |r: f64| adjacent_rank_gap(cluster_rates, m, n, r);
    let others: f64 = cluster_rates
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != m)
        .map(|(_, &l)| l)
        .sum::<f64>()
        / (len - 1) as f64;
    let guess = (len as f64 / n as f64).ln().max(0.1) / others;
    let (lo, hi) = bracket_positive_axis(gap, guess)?;
    bisect(gap, lo, hi, CROSSING_REL_TOL)
}

/// Per cluster, the largest rank-1/rank-2 crossing point over its members.
/// Single-member clusters get threshold 0.
pub fn type1_thresholds(partition: &Partition) -> Result<Vec<f64>> {
    partition
        .clusters()
        .iter()
        .map(|c| {
            if c.len() < 2 {
                return Ok(0.0);
            }
            (0..c.len()).try_fold(0.0f64, |acc, m| Ok(acc.max(crossing_point(&c.rates, m, 1)?)))
        })
        .collect()
}

/// Per cluster, `ln(L_i) / μ_i` with `L_i` the actual cluster size.
pub fn type2_thresholds(partition: &Partition) -> Vec<f64> {
    partition
        .clusters()
        .iter()
        .map(|c| (c.len() as f64).ln() / c.mean_rate())
        .collect()
}

/// Multiple thresholds for `K` i.i.d. users: `ln(K / p) / λ`, `p = 1..=N_c`.
pub fn homogeneous_thresholds(rate: f64, users: usize, clusters: usize) -> Result<Vec<f64>> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid("rate", format!("must be positive, got {rate}")));
    }
    if clusters == 0 {
        return Err(Error::invalid("clusters", "must be at least 1"));
    }
    if clusters > users {
        return Err(Error::TooManyClusters { clusters, users });
    }
    Ok((1..=clusters)
        .map(|p| (users as f64 / p as f64).ln() / rate)
        .collect())
}

/// Partition plus the threshold set it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPlan {
    pub kind: ThresholdKind,
    pub partition: Partition,
    /// `r_{c,1} >= r_{c,2} >= ... >= r_{c,N_c}`.
    pub thresholds: Vec<f64>,
    pub index_bits: u32,
}

impl ClusterPlan {
    pub fn build(rates: &[f64], clusters: usize, kind: ThresholdKind) -> Result<Self> {
        let partition = partition_users(rates, clusters)?;
        let thresholds = match kind {
            ThresholdKind::Type1 => type1_thresholds(&partition)?,
            ThresholdKind::Type2 => type2_thresholds(&partition),
        };
        Ok(ClusterPlan {
            kind,
            index_bits: index_bits(clusters),
            partition,
            thresholds,
        })
    }

    pub fn clusters(&self) -> usize {
        self.thresholds.len()
    }

    /// Smallest threshold `r_{c,N_c}`: users below it stay silent.
    pub fn min_threshold(&self) -> f64 {
        *self.thresholds.last().expect("plan has at least one cluster")
    }

    /// Region edges `[∞, r_{c,1}, ..., r_{c,N_c}]`; region `i` (0-based) is
    /// `[edges[i + 1], edges[i])`.
    pub fn region_edges(&self) -> Vec<f64> {
        std::iter::once(f64::INFINITY)
            .chain(self.thresholds.iter().copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_sizes() {
        let rates: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        assert_eq!(partition_users(&rates, 4).unwrap().sizes(), vec![2, 2, 2, 2]);
        assert_eq!(partition_users(&rates[..7], 4).unwrap().sizes(), vec![2, 2, 2, 1]);
        assert_eq!(partition_users(&rates, 1).unwrap().sizes(), vec![8]);
        assert!(matches!(
            partition_users(&rates[..3], 4),
            Err(Error::TooManyClusters { .. })
        ));
    }

    #[test]
    fn partition_sorts_by_decreasing_mean() {
        let rates = [3.0, 0.5, 2.0, 1.0];
        let p = partition_users(&rates, 2).unwrap();
        assert_eq!(p.clusters()[0].members, vec![1, 3]);
        assert_eq!(p.clusters()[1].members, vec![2, 0]);
        assert_eq!(p.assignment(), vec![1, 0, 1, 0]);
    }

    #[test]
    fn index_bit_counts() {
        assert_eq!(index_bits(1), 0);
        assert_eq!(index_bits(2), 1);
        assert_eq!(index_bits(3), 2);
        assert_eq!(index_bits(4), 2);
        assert_eq!(index_bits(5), 3);
    }

    #[test]
    fn homogeneous_crossings() {
        for &(rate, len) in &[(1.0, 2usize), (0.4, 5), (3.0, 20)] {
            let rates = vec![rate; len];
            let q = crossing_point(&rates, 0, 1).unwrap();
            assert!((q - (len as f64).ln() / rate).abs() < 1e-10 * q.max(1.0));
            for n in 1..len {
                let q = crossing_point(&rates, len - 1, n).unwrap();
                let exact = (len as f64 / n as f64).ln() / rate;
                assert!((q - exact).abs() < 1e-9 * exact.max(1.0), "n={n}: {q} vs {exact}");
            }
        }
        assert!(matches!(crossing_point(&[1.0], 0, 1), Err(Error::NoCrossing)));
    }

    #[test]
    fn homogeneous_threshold_values() {
        let t = homogeneous_thresholds(1.0, 4, 4).unwrap();
        let expected = [4f64.ln(), 2f64.ln(), (4.0f64 / 3.0).ln(), 0.0];
        for (a, b) in t.iter().zip(expected) {
            assert_eq!(*a, b);
        }
        assert!(t.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn type2_closed_form() {
        let rates = vec![0.4; 25];
        let p = partition_users(&rates, 1).unwrap();
        let t = type2_thresholds(&p);
        assert!((t[0] - 25f64.ln() / 0.4).abs() < 1e-12);
        assert!((t[0] - 8.0472).abs() < 1e-4);
        let single = partition_users(&[0.7, 0.2], 2).unwrap();
        assert_eq!(type2_thresholds(&single), vec![0.0, 0.0]);
        assert_eq!(type1_thresholds(&single).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn plan_edges_and_bits() {
        let rates: Vec<f64> = (1..=12).map(|i| 0.2 * i as f64).collect();
        let plan = ClusterPlan::build(&rates, 4, ThresholdKind::Type2).unwrap();
        assert_eq!(plan.index_bits, 2);
        assert_eq!(plan.region_edges().len(), 5);
        assert!(plan.thresholds.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(plan.min_threshold(), plan.thresholds[3]);
    }
}
