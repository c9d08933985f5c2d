//! Equiprobable ("pdf") quantizers for SNR regions, bit allocation and the
//! analytic feedback load.
//!
//! The reference distribution of every quantizer is the maximum SNR `X_(1)`
//! over all users, restricted to the region being quantized. Cells are split
//! at conditional quantiles so each carries the same probability, and each
//! cell is represented by its centroid.

use crate::error::{Error, Result};
use crate::order_stats::{max_cdf_unchecked, max_survival, upper_cutoff};
use crate::quadrature::integrate;
use crate::root::bisect;

/// Default per-region bit cap for the exhaustive allocation search.
pub const DEFAULT_MAX_BITS: u32 = 6;

/// Slack allowed on each user's feedback constraint.
pub const CONSTRAINT_SLACK: f64 = 1e-12;

/// One quantizer cell `[lower, upper)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub lower: f64,
    pub upper: f64,
    /// Conditional mean of the reference distribution over the cell.
    pub level: f64,
}

/// Quantizer for one SNR region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionQuantizer {
    pub lower: f64,
    pub upper: f64,
    pub bits: u32,
    /// Reference-distribution mass of the region.
    pub probability: f64,
    pub cells: Vec<Cell>,
}

impl RegionQuantizer {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x < self.upper
    }

    /// Cell index of `x`, which must lie in the region.
    pub fn cell_index(&self, x: f64) -> usize {
        let idx = self.cells.partition_point(|c| c.lower <= x);
        idx.saturating_sub(1)
    }

    pub fn levels(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.level).collect()
    }

    /// Single cell covering a region the reference distribution never visits.
    fn degenerate(lower: f64, upper: f64) -> Self {
        let level = if upper.is_finite() { 0.5 * (lower + upper) } else { lower };
        RegionQuantizer {
            lower,
            upper,
            bits: 0,
            probability: 0.0,
            cells: vec![Cell { lower, upper, level }],
        }
    }
}

/// View of `X_(1)` for the users with the given rates.
#[derive(Debug, Clone, Copy)]
struct MaxReference<'a> {
    rates: &'a [f64],
}

impl MaxReference<'_> {
    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            max_cdf_unchecked(self.rates, x)
        }
    }

    fn survival(&self, x: f64) -> f64 {
        max_survival(self.rates, x)
    }

    fn cutoff(&self, tail: f64) -> f64 {
        upper_cutoff(|x| self.survival(x), self.rates, tail)
    }

    /// Points splitting `[lower, upper)` into `cells` equal-mass pieces.
    /// Works on whichever of the CDF or the survival function is smaller on
    /// the region, so tiny masses stay resolvable.
    fn cuts(&self, lower: f64, upper: f64, cells: usize, use_cdf: bool) -> Result<Vec<f64>> {
        let hi_search = if upper.is_finite() { upper } else { self.cutoff(1e-300_f64.max(f64::MIN_POSITIVE)) };
        let mut out = Vec::with_capacity(cells.saturating_sub(1));
        if use_cdf {
            let (fa, fb) = (self.cdf(lower), self.cdf(upper));
            for t in 1..cells {
                let target = fa + (fb - fa) * t as f64 / cells as f64;
                out.push(bisect(|x| self.cdf(x) - target, lower, hi_search, 0.0)?);
            }
        } else {
            let (sa, sb) = (self.survival(lower), self.survival(upper));
            for t in 1..cells {
                let target = sa - (sa - sb) * t as f64 / cells as f64;
                out.push(bisect(|x| target - self.survival(x), lower, hi_search, 0.0)?);
            }
        }
        Ok(out)
    }

    /// `E[X; a <= X < b]`.
    fn partial_expectation(&self, a: f64, b: f64, use_cdf: bool) -> f64 {
        if use_cdf && b.is_finite() {
            let area = integrate(|x| self.cdf(x), a, b, 1e-14, 1e-13);
            b * self.cdf(b) - a * self.cdf(a) - area
        } else {
            let (end, tail_term) = if b.is_finite() {
                (b, b * self.survival(b))
            } else {
                (self.cutoff(1e-18 * self.survival(a).max(f64::MIN_POSITIVE)).max(a), 0.0)
            };
            let area = integrate(|x| self.survival(x), a, end, 1e-14, 1e-13);
            a * self.survival(a) - tail_term + area
        }
    }

    fn mass(&self, a: f64, b: f64) -> (f64, bool) {
        let use_cdf = b.is_finite() && self.cdf(b) < 0.5;
        let mass = if use_cdf {
            self.cdf(b) - self.cdf(a)
        } else {
            self.survival(a) - self.survival(b)
        };
        (mass, use_cdf)
    }
}

/// Equiprobable `2^bits`-cell quantizer of `[lower, upper)` under the maximum
/// of exponentials with the given rates. Levels are cell centroids.
pub fn equiprobable_levels(lower: f64, upper: f64, rates: &[f64], bits: u32) -> Result<RegionQuantizer> {
    if !(lower >= 0.0) || !(upper > lower) {
        return Err(Error::EmptyRegion { lo: lower, hi: upper });
    }
    if bits > 30 {
        return Err(Error::invalid("bits", format!("at most 30 bits per region, got {bits}")));
    }
    let reference = MaxReference { rates };
    let (probability, use_cdf) = reference.mass(lower, upper);
    if !(probability > 0.0) {
        return Err(Error::EmptyRegion { lo: lower, hi: upper });
    }
    let n = 1usize << bits;
    let cuts = reference.cuts(lower, upper, n, use_cdf)?;
    let mut edges = Vec::with_capacity(n + 1);
    edges.push(lower);
    edges.extend(cuts);
    edges.push(upper);
    let cells = edges
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let (p, local_cdf) = reference.mass(a, b);
            let level = if p > 0.0 {
                (reference.partial_expectation(a, b, local_cdf) / p).clamp(a, if b.is_finite() { b } else { f64::MAX })
            } else {
                a
            };
            Cell { lower: a, upper: b, level }
        })
        .collect();
    Ok(RegionQuantizer {
        lower,
        upper,
        bits,
        probability,
        cells,
    })
}

/// Probability that a user with rate `rate` lands in region `region`
/// (0-based) of `edges = [∞, r_1, ..., r_Nc]`.
pub fn region_probability(rate: f64, region: usize, edges: &[f64]) -> Result<f64> {
    if region + 1 >= edges.len() {
        return Err(Error::IndexOutOfRange {
            index: region,
            len: edges.len().saturating_sub(1),
        });
    }
    let surv = |x: f64| if x == f64::INFINITY { 0.0 } else { (-rate * x).exp() };
    Ok((surv(edges[region + 1]) - surv(edges[region])).max(0.0))
}

/// Per-region quantizers for a threshold set.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerSpec {
    /// `[∞, r_1, ..., r_Nc]`.
    pub edges: Vec<f64>,
    pub regions: Vec<RegionQuantizer>,
}

impl QuantizerSpec {
    pub fn build(edges: &[f64], rates: &[f64], bits: &[u32]) -> Result<Self> {
        if edges.len() != bits.len() + 1 {
            return Err(Error::invalid("bits", "one bit count per region required"));
        }
        let regions = bits
            .iter()
            .enumerate()
            .map(|(i, &b)| {
                let (lo, hi) = (edges[i + 1], edges[i]);
                match equiprobable_levels(lo, hi, rates, b) {
                    Ok(q) => Ok(q),
                    Err(Error::EmptyRegion { .. }) if b == 0 => Ok(RegionQuantizer::degenerate(lo, hi)),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantizerSpec {
            edges: edges.to_vec(),
            regions,
        })
    }

    pub fn bits(&self) -> Vec<u32> {
        self.regions.iter().map(|r| r.bits).collect()
    }

    /// Region index of `x`, or `None` below the smallest threshold.
    pub fn region_of(&self, x: f64) -> Option<usize> {
        let n = self.regions.len();
        // edges are weakly decreasing; the first region whose lower edge is <= x
        (0..n).find(|&i| x >= self.edges[i + 1] && x < self.edges[i])
    }
}

/// Per-user average quantization-bit constraints plus the region-index bits.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackBudget {
    pub per_user: Vec<f64>,
    pub index_bits: u32,
}

impl FeedbackBudget {
    pub fn uniform(users: usize, bits: f64, index_bits: u32) -> Result<Self> {
        if !(bits >= 0.0) {
            return Err(Error::invalid("feedback_constraint", format!("must be nonnegative, got {bits}")));
        }
        Ok(FeedbackBudget {
            per_user: vec![bits; users],
            index_bits,
        })
    }
}

/// Average `log2(1 + q)` over the cells of a quantizer, with `q` the cell's
/// lower edge: the SNR the scheduler can rely on once the cell is reported.
fn supportable_log_rate(q: &RegionQuantizer) -> f64 {
    q.cells.iter().map(|c| c.lower.ln_1p()).sum::<f64>() / std::f64::consts::LN_2 / q.cells.len() as f64
}

/// Precomputed region values for the allocation objective.
#[derive(Debug, Clone)]
pub struct AllocationProblem {
    pub edges: Vec<f64>,
    pub beams: usize,
    pub max_bits: u32,
    /// `P(X_(1) ∈ region i)`.
    pub region_mass: Vec<f64>,
    /// `values[i][b]`: average supportable log-rate in region `i` with `b` bits.
    pub values: Vec<Vec<f64>>,
    /// `user_mass[k][i] = P(X_k ∈ region i)`.
    pub user_mass: Vec<Vec<f64>>,
    pub budget: Vec<f64>,
}

impl AllocationProblem {
    pub fn new(edges: &[f64], rates: &[f64], budget: &FeedbackBudget, max_bits: u32, beams: usize) -> Result<Self> {
        if budget.per_user.len() != rates.len() {
            return Err(Error::invalid("feedback_constraint", "one constraint per user required"));
        }
        let regions = edges.len().saturating_sub(1);
        if regions == 0 {
            return Err(Error::invalid("edges", "need at least one region"));
        }
        let mut region_mass = Vec::with_capacity(regions);
        let mut values = Vec::with_capacity(regions);
        for i in 0..regions {
            let (lo, hi) = (edges[i + 1], edges[i]);
            let mut row = Vec::with_capacity(max_bits as usize + 1);
            let mut mass = 0.0;
            for b in 0..=max_bits {
                match equiprobable_levels(lo, hi, rates, b) {
                    Ok(q) => {
                        mass = q.probability;
                        row.push(supportable_log_rate(&q));
                    }
                    Err(Error::EmptyRegion { .. }) => row.push(0.0),
                    Err(e) => return Err(e),
                }
            }
            region_mass.push(mass);
            values.push(row);
        }
        let user_mass = rates
            .iter()
            .map(|&l| (0..regions).map(|i| region_probability(l, i, edges)).collect())
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(AllocationProblem {
            edges: edges.to_vec(),
            beams,
            max_bits,
            region_mass,
            values,
            user_mass,
            budget: budget.per_user.clone(),
        })
    }

    /// `M Σ_i P(X_(1) ∈ C_i) · mean_t log2(1 + q_t^i)`.
    pub fn objective(&self, bits: &[u32]) -> f64 {
        let per_beam: f64 = bits
            .iter()
            .enumerate()
            .map(|(i, &b)| self.region_mass[i] * self.values[i][b as usize])
            .sum();
        self.beams as f64 * per_beam
    }

    /// `C_k - Σ_i P(X_k ∈ C_i) b_i` for every user.
    pub fn slack(&self, bits: &[u32]) -> Vec<f64> {
        self.user_mass
            .iter()
            .zip(&self.budget)
            .map(|(mass, c)| c - mass.iter().zip(bits).map(|(p, &b)| p * b as f64).sum::<f64>())
            .collect()
    }

    pub fn is_feasible(&self, bits: &[u32]) -> bool {
        self.slack(bits).iter().all(|s| *s >= -CONSTRAINT_SLACK)
    }
}

/// Result of the exhaustive allocation search.
#[derive(Debug, Clone, PartialEq)]
pub struct BitAllocation {
    pub bits: Vec<u32>,
    pub objective: f64,
    pub slack: Vec<f64>,
}

/// Exhaustive search over `{0..=max_bits}^{N_c}`. Candidates are visited in
/// lexicographic order and only a strictly better objective replaces the
/// incumbent, so ties go to the lexicographically smallest vector. Branches
/// that already violate a constraint are pruned (loads only grow with bits).
pub fn allocate_bits(problem: &AllocationProblem) -> BitAllocation {
    let regions = problem.values.len();
    let users = problem.user_mass.len();
    let mut best_bits = vec![0u32; regions];
    let mut best_obj = problem.objective(&best_bits);
    let mut current = vec![0u32; regions];
    let mut load = vec![0.0f64; users];

    fn dfs(
        p: &AllocationProblem,
        depth: usize,
        current: &mut Vec<u32>,
        load: &mut Vec<f64>,
        best_bits: &mut Vec<u32>,
        best_obj: &mut f64,
    ) {
        if depth == current.len() {
            let obj = p.objective(current);
            if obj > *best_obj {
                *best_obj = obj;
                best_bits.clone_from(current);
            }
            return;
        }
        for b in 0..=p.max_bits {
            current[depth] = b;
            let bf = b as f64;
            let feasible = p
                .user_mass
                .iter()
                .zip(load.iter())
                .zip(&p.budget)
                .all(|((mass, l), c)| l + mass[depth] * bf <= c + CONSTRAINT_SLACK);
            if !feasible {
                break;
            }
            for (l, mass) in load.iter_mut().zip(&p.user_mass) {
                *l += mass[depth] * bf;
            }
            dfs(p, depth + 1, current, load, best_bits, best_obj);
            for (l, mass) in load.iter_mut().zip(&p.user_mass) {
                *l -= mass[depth] * bf;
            }
        }
        current[depth] = 0;
    }

    dfs(problem, 0, &mut current, &mut load, &mut best_bits, &mut best_obj);
    BitAllocation {
        slack: problem.slack(&best_bits),
        objective: best_obj,
        bits: best_bits,
    }
}

/// Average total feedback bits per scheduling instant when each user feeds
/// back on every beam above `r_min`: `M Σ_k e^{-λ_k r_min} (B_C + C_k)`.
pub fn expected_feedback_load(rates: &[f64], r_min: f64, index_bits: u32, per_user_bits: &[f64], beams: usize) -> f64 {
    let bc = f64::from(index_bits);
    beams as f64
        * rates
            .iter()
            .zip(per_user_bits)
            .map(|(&l, &c)| {
                let p = if r_min == f64::INFINITY { 0.0 } else { (-l * r_min).exp() };
                p * (bc + c)
            })
            .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn one_bit_exponential_cells() {
        let q = equiprobable_levels(0.0, f64::INFINITY, &[1.0], 1).unwrap();
        assert!((q.cells[0].upper - LN_2).abs() < 1e-14);
        // E[X | X < ln 2] = 2 (1 - (1 + ln 2)/2), E[X | X >= ln 2] = 1 + ln 2
        let low = 2.0 * (1.0 - 0.5 * (1.0 + LN_2));
        assert!((q.cells[0].level - low).abs() < 1e-9, "{}", q.cells[0].level);
        assert!((q.cells[1].level - (1.0 + LN_2)).abs() < 1e-9);
        assert!((q.cells[0].level - 0.30685).abs() < 1e-5);
    }

    #[test]
    fn zero_bits_is_region_mean() {
        let q = equiprobable_levels(0.0, f64::INFINITY, &[2.0], 0).unwrap();
        assert_eq!(q.cells.len(), 1);
        assert!((q.cells[0].level - 0.5).abs() < 1e-9);
        let q = equiprobable_levels(1.0, f64::INFINITY, &[1.0], 0).unwrap();
        assert!((q.cells[0].level - 2.0).abs() < 1e-9);
    }

    #[test]
    fn empty_region_is_rejected() {
        assert!(matches!(
            equiprobable_levels(1.0, 1.0, &[1.0], 2),
            Err(Error::EmptyRegion { .. })
        ));
    }

    #[test]
    fn region_probabilities() {
        let edges = [f64::INFINITY, 0.0];
        assert_eq!(region_probability(0.7, 0, &edges).unwrap(), 1.0);
        let edges = [f64::INFINITY, LN_2, 0.1];
        assert!((region_probability(1.0, 0, &edges).unwrap() - 0.5).abs() < 1e-15);
        assert!(region_probability(1.0, 2, &edges).is_err());
    }

    #[test]
    fn region_lookup() {
        let spec = QuantizerSpec::build(&[f64::INFINITY, 3.0, 1.0], &[0.5, 0.7], &[1, 2]).unwrap();
        assert_eq!(spec.region_of(5.0), Some(0));
        assert_eq!(spec.region_of(3.0), Some(0));
        assert_eq!(spec.region_of(2.0), Some(1));
        assert_eq!(spec.region_of(0.5), None);
        let r = &spec.regions[1];
        assert_eq!(r.cell_index(1.0), 0);
        assert_eq!(r.cell_index(2.999), 3);
    }

    #[test]
    fn feedback_load_limits() {
        let rates = vec![0.4; 10];
        let c = vec![0.8; 10];
        assert!((expected_feedback_load(&rates, 0.0, 2, &c, 4) - 112.0).abs() < 1e-12);
        assert_eq!(expected_feedback_load(&rates, f64::INFINITY, 2, &c, 4), 0.0);
    }

    #[test]
    fn zero_budget_allocates_nothing() {
        let rates = [0.4, 0.6, 1.1, 2.0];
        let edges = [f64::INFINITY, 4.0, 2.0, 0.5];
        let budget = FeedbackBudget::uniform(4, 0.0, 2).unwrap();
        let p = AllocationProblem::new(&edges, &rates, &budget, 6, 4).unwrap();
        assert_eq!(allocate_bits(&p).bits, vec![0, 0, 0]);
    }

    #[test]
    fn huge_budget_saturates_single_region() {
        let rates = [0.4, 0.6, 1.1];
        let edges = [f64::INFINITY, 0.0];
        let budget = FeedbackBudget::uniform(3, 1e6, 0).unwrap();
        let p = AllocationProblem::new(&edges, &rates, &budget, 6, 4).unwrap();
        assert_eq!(allocate_bits(&p).bits, vec![6]);
    }
}
