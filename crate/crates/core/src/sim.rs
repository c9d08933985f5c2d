//! Monte Carlo scheduling engine.
//!
//! Each drop samples per-user, per-beam SNRs, lets every user report
//! according to a [`FeedbackScheme`], schedules on each beam the user with
//! the largest reported value and credits the beam with the scheduled user's
//! rate. Drop `i` always consumes random stream `i` of the run key, and
//! partial sums are merged in fixed chunk order, so results do not depend on
//! the number of worker threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::{sample_snrs_analytic, sample_snrs_matrix, SnrSample, SystemConfig};
use crate::order_stats::max_quantile;
use crate::quantization::{
    allocate_bits, equiprobable_levels, expected_feedback_load, AllocationProblem, BitAllocation,
    FeedbackBudget, QuantizerSpec, RegionQuantizer,
};
use crate::stream::StreamKey;
use crate::thresholds::{rate_loss_bound, ClusterPlan, ThresholdKind};

/// Drops per parallel work unit. Fixed so the merge order never changes.
const CHUNK: usize = 512;

const VARIANCE_LABEL: u64 = 0x7661_7269_616e_6365;
const DROPS_LABEL: u64 = 0x6472_6f70_7300_0000;

/// Which beams a user reports on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamFeedback {
    /// Only the beam on which the user sees its highest SNR.
    #[default]
    BestBeam,
    /// Every beam independently; each beam then competes over all users.
    AllBeams,
}

/// How a scheduled beam's rate is credited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateAccounting {
    /// `log2(1 + true SNR)` of the scheduled user.
    #[default]
    TrueSnr,
    /// `log2(1 + lower edge of the reported cell)`.
    Quantized,
}

/// How per-beam SNRs are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrPath {
    /// Independent exponential marginals (exact for `N = M`).
    #[default]
    Analytic,
    /// Full channel matrices, random orthogonal precoder and ZF receiver.
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SimOptions {
    pub beam_feedback: BeamFeedback,
    pub accounting: RateAccounting,
    pub snr_path: SnrPath,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Scheme names as they appear in configs and result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    FullCsi,
    Conventional,
    SingleThreshold,
    ClusterType1,
    ClusterType2,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::FullCsi,
        SchemeKind::Conventional,
        SchemeKind::SingleThreshold,
        SchemeKind::ClusterType1,
        SchemeKind::ClusterType2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::FullCsi => "full_csi",
            SchemeKind::Conventional => "conventional",
            SchemeKind::SingleThreshold => "single_threshold",
            SchemeKind::ClusterType1 => "cluster_type1",
            SchemeKind::ClusterType2 => "cluster_type2",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid("schemes", format!("unknown scheme `{s}`")))
    }
}

/// Parameters used to prepare schemes for a user population.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSettings {
    pub clusters: usize,
    pub feedback_constraint: f64,
    pub max_bits: u32,
    pub outage_probability: f64,
    pub conventional_bits: u32,
    pub single_threshold_bits: u32,
}

impl Default for SchemeSettings {
    fn default() -> Self {
        SchemeSettings {
            clusters: 4,
            feedback_constraint: 0.8,
            max_bits: crate::quantization::DEFAULT_MAX_BITS,
            outage_probability: 0.1,
            conventional_bits: 3,
            single_threshold_bits: 3,
        }
    }
}

/// Threshold plan, bit allocation and region quantizers of a cluster scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterFeedback {
    pub plan: ClusterPlan,
    pub budget: FeedbackBudget,
    pub allocation: BitAllocation,
    pub quantizers: QuantizerSpec,
}

impl ClusterFeedback {
    pub fn prepare(config: &SystemConfig, kind: ThresholdKind, settings: &SchemeSettings) -> Result<Self> {
        let rates = config.rates();
        let plan = ClusterPlan::build(&rates, settings.clusters, kind)?;
        let budget = FeedbackBudget::uniform(rates.len(), settings.feedback_constraint, plan.index_bits)?;
        let edges = plan.region_edges();
        let problem = AllocationProblem::new(&edges, &rates, &budget, settings.max_bits, config.tx_antennas())?;
        let allocation = allocate_bits(&problem);
        let quantizers = QuantizerSpec::build(&edges, &rates, &allocation.bits)?;
        Ok(ClusterFeedback {
            plan,
            budget,
            allocation,
            quantizers,
        })
    }
}

/// A feedback and reporting rule.
#[derive(Debug, Clone, PartialEq)]
pub enum FeedbackScheme {
    /// Exact SNRs, no threshold. Feedback is not counted.
    FullCsi,
    /// Exact SNRs from users at or above `threshold`; isolates the loss caused
    /// by thresholding from quantization.
    ThresholdCsi { threshold: f64 },
    /// Every user always reports a level of a fixed quantizer of `[0, ∞)`.
    Conventional { quantizer: RegionQuantizer },
    /// Users strictly above `threshold` report a level of `(threshold, ∞)`.
    SingleThreshold {
        outage: f64,
        threshold: f64,
        quantizer: RegionQuantizer,
    },
    ClusterType1(ClusterFeedback),
    ClusterType2(ClusterFeedback),
}

/// One quantized (or exact) report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Report {
    pub region: Option<usize>,
    pub cell: Option<usize>,
    /// Value the scheduler compares.
    pub level: f64,
    /// SNR the report guarantees (lower cell edge, or the exact value).
    pub floor: f64,
    pub bits: u32,
    /// Bits spent on the in-region quantization index.
    pub quant_bits: u32,
}

/// SNR threshold of the single-threshold baseline: `P(X_(1) < r) = outage`.
pub fn single_threshold_level(rates: &[f64], outage: f64) -> Result<f64> {
    if !(outage > 0.0 && outage < 1.0) {
        return Err(Error::invalid("outage_probability", format!("must lie in (0,1), got {outage}")));
    }
    max_quantile(rates, outage)
}

impl FeedbackScheme {
    pub fn prepare(kind: SchemeKind, config: &SystemConfig, settings: &SchemeSettings) -> Result<Self> {
        let rates = config.rates();
        Ok(match kind {
            SchemeKind::FullCsi => FeedbackScheme::FullCsi,
            SchemeKind::Conventional => FeedbackScheme::Conventional {
                quantizer: equiprobable_levels(0.0, f64::INFINITY, &rates, settings.conventional_bits)?,
            },
            SchemeKind::SingleThreshold => {
                let threshold = single_threshold_level(&rates, settings.outage_probability)?;
                FeedbackScheme::SingleThreshold {
                    outage: settings.outage_probability,
                    threshold,
                    quantizer: equiprobable_levels(threshold, f64::INFINITY, &rates, settings.single_threshold_bits)?,
                }
            }
            SchemeKind::ClusterType1 => {
                FeedbackScheme::ClusterType1(ClusterFeedback::prepare(config, ThresholdKind::Type1, settings)?)
            }
            SchemeKind::ClusterType2 => {
                FeedbackScheme::ClusterType2(ClusterFeedback::prepare(config, ThresholdKind::Type2, settings)?)
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            FeedbackScheme::FullCsi => "full_csi",
            FeedbackScheme::ThresholdCsi { .. } => "threshold_csi",
            FeedbackScheme::Conventional { .. } => "conventional",
            FeedbackScheme::SingleThreshold { .. } => "single_threshold",
            FeedbackScheme::ClusterType1(_) => "cluster_type1",
            FeedbackScheme::ClusterType2(_) => "cluster_type2",
        }
    }

    /// Smallest SNR that triggers feedback.
    pub fn feedback_threshold(&self) -> f64 {
        match self {
            FeedbackScheme::FullCsi | FeedbackScheme::Conventional { .. } => 0.0,
            FeedbackScheme::ThresholdCsi { threshold } => *threshold,
            FeedbackScheme::SingleThreshold { threshold, .. } => *threshold,
            FeedbackScheme::ClusterType1(c) | FeedbackScheme::ClusterType2(c) => c.plan.min_threshold(),
        }
    }

    /// What a user with SNR `x` on some beam reports, if anything.
    pub fn report(&self, x: f64) -> Option<Report> {
        let exact = |x: f64| Report {
            region: None,
            cell: None,
            level: x,
            floor: x,
            bits: 0,
            quant_bits: 0,
        };
        let quantized = |q: &RegionQuantizer, region: Option<usize>, index_bits: u32| {
            let cell = q.cell_index(x);
            let c = &q.cells[cell];
            Report {
                region,
                cell: Some(cell),
                level: c.level,
                floor: c.lower,
                bits: index_bits + q.bits,
                quant_bits: q.bits,
            }
        };
        match self {
            FeedbackScheme::FullCsi => Some(exact(x)),
            FeedbackScheme::ThresholdCsi { threshold } => (x >= *threshold).then(|| exact(x)),
            FeedbackScheme::Conventional { quantizer } => Some(quantized(quantizer, None, 0)),
            FeedbackScheme::SingleThreshold { threshold, quantizer, .. } => {
                (x > *threshold).then(|| quantized(quantizer, None, 0))
            }
            FeedbackScheme::ClusterType1(c) | FeedbackScheme::ClusterType2(c) => {
                let region = c.quantizers.region_of(x)?;
                Some(quantized(&c.quantizers.regions[region], Some(region), c.plan.index_bits))
            }
        }
    }

    /// Literal analytic feedback load `M Σ_k e^{-λ_k r} (B_C + C_k)` for the
    /// scheme's threshold and per-event bit budget.
    pub fn analytic_load(&self, config: &SystemConfig) -> f64 {
        let rates = config.rates();
        let m = config.tx_antennas();
        let flat = |r: f64, bits: f64| expected_feedback_load(&rates, r, 0, &vec![bits; rates.len()], m);
        match self {
            FeedbackScheme::FullCsi | FeedbackScheme::ThresholdCsi { .. } => 0.0,
            FeedbackScheme::Conventional { quantizer } => flat(0.0, f64::from(quantizer.bits)),
            FeedbackScheme::SingleThreshold { threshold, quantizer, .. } => {
                flat(*threshold, f64::from(quantizer.bits))
            }
            FeedbackScheme::ClusterType1(c) | FeedbackScheme::ClusterType2(c) => expected_feedback_load(
                &rates,
                c.plan.min_threshold(),
                c.plan.index_bits,
                &c.budget.per_user,
                m,
            ),
        }
    }

    /// Total rate-loss bound at the scheme's feedback threshold.
    pub fn rate_loss_bound(&self, config: &SystemConfig) -> Result<f64> {
        let r = self.feedback_threshold();
        if r == 0.0 {
            return Ok(0.0);
        }
        Ok(rate_loss_bound(&config.rates(), r, config.tx_antennas())?.total())
    }
}

/// One user's report in a drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackEvent {
    pub user: usize,
    pub beam: usize,
    pub report: Report,
}

/// Everything that happened in one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct DropRecord {
    pub snr: SnrSample,
    pub events: Vec<FeedbackEvent>,
    /// Scheduled user per beam, `None` when nobody reported on it.
    pub scheduled: Vec<Option<usize>>,
    /// Rate credited to each beam (bits/s/Hz).
    pub rates: Vec<f64>,
}

impl DropRecord {
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }

    pub fn feedback_bits(&self) -> u64 {
        self.events.iter().map(|e| u64::from(e.report.bits)).sum()
    }
}

pub fn sample_snrs<R: rand::Rng + ?Sized>(config: &SystemConfig, rates: &[f64], path: SnrPath, rng: &mut R) -> SnrSample {
    match path {
        SnrPath::Analytic => sample_snrs_analytic(rates, config.tx_antennas(), rng),
        SnrPath::Matrix => sample_snrs_matrix(config, rng),
    }
}

/// Applies a scheme to already-sampled SNRs.
pub fn evaluate_drop(snr: &SnrSample, scheme: &FeedbackScheme, options: &SimOptions) -> DropRecord {
    let beams = snr.beams();
    let mut events = Vec::new();
    for user in 0..snr.users() {
        match options.beam_feedback {
            BeamFeedback::BestBeam => {
                let (beam, x) = snr.best_beam(user);
                if let Some(report) = scheme.report(x) {
                    events.push(FeedbackEvent { user, beam, report });
                }
            }
            BeamFeedback::AllBeams => {
                for beam in 0..beams {
                    if let Some(report) = scheme.report(snr.get(user, beam)) {
                        events.push(FeedbackEvent { user, beam, report });
                    }
                }
            }
        }
    }
    // events are in ascending user order, so `>` keeps the smallest index on ties
    let mut winner: Vec<Option<&FeedbackEvent>> = vec![None; beams];
    for e in &events {
        let slot = &mut winner[e.beam];
        if slot.is_none_or(|w| e.report.level > w.report.level) {
            *slot = Some(e);
        }
    }
    let scheduled = winner.iter().map(|w| w.map(|e| e.user)).collect();
    let rates = winner
        .iter()
        .map(|w| match w {
            None => 0.0,
            Some(e) => {
                let snr_used = match options.accounting {
                    RateAccounting::TrueSnr => snr.get(e.user, e.beam),
                    RateAccounting::Quantized => e.report.floor,
                };
                snr_used.ln_1p() / std::f64::consts::LN_2
            }
        })
        .collect();
    DropRecord {
        snr: snr.clone(),
        events,
        scheduled,
        rates,
    }
}

/// Samples one drop and applies the scheme.
pub fn run_drop<R: rand::Rng + ?Sized>(
    config: &SystemConfig,
    scheme: &FeedbackScheme,
    rng: &mut R,
    options: &SimOptions,
) -> DropRecord {
    let rates = config.rates();
    let snr = sample_snrs(config, &rates, options.snr_path, rng);
    evaluate_drop(&snr, scheme, options)
}

/// Running first and second moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Averages of one scheme over a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    pub scheme: &'static str,
    pub sum_rate: f64,
    pub sum_rate_se: f64,
    pub fb_bits: f64,
    pub fb_bits_se: f64,
    pub drops: u64,
    pub seed: u64,
    /// Feedback events per user over the whole run.
    pub user_events: Vec<u64>,
    /// In-region quantization bits per user over the whole run.
    pub user_quant_bits: Vec<u64>,
}

impl SchemeResult {
    /// Realized mean quantization bits per feedback event of each user.
    pub fn realized_quant_bits(&self) -> Vec<f64> {
        self.user_events
            .iter()
            .zip(&self.user_quant_bits)
            .map(|(&e, &b)| if e == 0 { 0.0 } else { b as f64 / e as f64 })
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Tally {
    rate: Moments,
    bits: Moments,
    user_events: Vec<u64>,
    user_quant_bits: Vec<u64>,
}

impl Tally {
    fn new(users: usize) -> Self {
        Tally {
            rate: Moments::default(),
            bits: Moments::default(),
            user_events: vec![0; users],
            user_quant_bits: vec![0; users],
        }
    }

    fn record(&mut self, drop: &DropRecord) {
        self.rate.push(drop.sum_rate());
        self.bits.push(drop.feedback_bits() as f64);
        for e in &drop.events {
            self.user_events[e.user] += 1;
            self.user_quant_bits[e.user] += u64::from(e.report.quant_bits);
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.rate.merge(&other.rate);
        self.bits.merge(&other.bits);
        for (a, b) in self.user_events.iter_mut().zip(&other.user_events) {
            *a += b;
        }
        for (a, b) in self.user_quant_bits.iter_mut().zip(&other.user_quant_bits) {
            *a += b;
        }
    }
}

/// Runs `per_drop` on every drop in fixed-size chunks (in parallel when
/// possible) and folds the chunk results in chunk order.
fn run_chunked<T, F, M>(n_drops: u64, workers: Option<usize>, init: impl Fn() -> T + Sync, per_drop: F, merge: M) -> Result<T>
where
    T: Send,
    F: Fn(&mut T, u64) + Sync,
    M: Fn(&mut T, &T),
{
    let chunks = n_drops.div_ceil(CHUNK as u64);
    let work = || -> Vec<T> {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let start = c * CHUNK as u64;
                let end = (start + CHUNK as u64).min(n_drops);
                for i in start..end {
                    per_drop(&mut acc, i);
                }
                acc
            })
            .collect()
    };
    let parts = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut total = init();
    for p in &parts {
        merge(&mut total, p);
    }
    Ok(total)
}

/// Runs several schemes on common SNR draws.
pub fn simulate_many(
    config: &SystemConfig,
    schemes: &[FeedbackScheme],
    n_drops: u64,
    key: &StreamKey,
    seed: u64,
    options: &SimOptions,
) -> Result<Vec<SchemeResult>> {
    if n_drops == 0 {
        return Err(Error::invalid("drops", "need at least one drop"));
    }
    let rates = config.rates();
    let users = config.users();
    let tallies = run_chunked(
        n_drops,
        options.workers,
        || vec![Tally::new(users); schemes.len()],
        |acc, i| {
            let mut rng = key.stream(i);
            let snr = sample_snrs(config, &rates, options.snr_path, &mut rng);
            for (t, s) in acc.iter_mut().zip(schemes) {
                t.record(&evaluate_drop(&snr, s, options));
            }
        },
        |total, part| {
            for (a, b) in total.iter_mut().zip(part) {
                a.merge(b);
            }
        },
    )?;
    Ok(schemes
        .iter()
        .zip(tallies)
        .map(|(s, t)| SchemeResult {
            scheme: s.name(),
            sum_rate: t.rate.mean(),
            sum_rate_se: t.rate.std_error(),
            fb_bits: t.bits.mean(),
            fb_bits_se: t.bits.std_error(),
            drops: n_drops,
            seed,
            user_events: t.user_events,
            user_quant_bits: t.user_quant_bits,
        })
        .collect())
}

pub fn simulate(
    config: &SystemConfig,
    scheme: &FeedbackScheme,
    n_drops: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<SchemeResult> {
    let key = StreamKey::from_seed(seed);
    Ok(simulate_many(config, std::slice::from_ref(scheme), n_drops, &key, seed, options)?.remove(0))
}

/// Mean and standard error of the per-drop sum-rate difference
/// `reference - candidate` on common draws.
pub fn simulate_rate_gap(
    config: &SystemConfig,
    reference: &FeedbackScheme,
    candidate: &FeedbackScheme,
    n_drops: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<Moments> {
    let key = StreamKey::from_seed(seed);
    let rates = config.rates();
    run_chunked(
        n_drops,
        options.workers,
        Moments::default,
        |acc, i| {
            let mut rng = key.stream(i);
            let snr = sample_snrs(config, &rates, options.snr_path, &mut rng);
            let a = evaluate_drop(&snr, reference, options).sum_rate();
            let b = evaluate_drop(&snr, candidate, options).sum_rate();
            acc.push(a - b);
        },
        |total, part| total.merge(part),
    )
}

/// Where the per-user channel variances of a sweep point come from.
#[derive(Debug, Clone, PartialEq)]
pub enum VarianceSource {
    /// Fresh `σ² ~ Uniform(0, 1]` per user count from the sweep's stream.
    Uniform,
    /// The first `K` entries of a fixed list.
    Explicit(Vec<f64>),
}

impl VarianceSource {
    pub fn draw(&self, users: usize, key: &StreamKey) -> Result<Vec<f64>> {
        match self {
            VarianceSource::Uniform => {
                use rand::Rng;
                let mut rng = key.derive(VARIANCE_LABEL).stream(users as u64);
                // 1 - U[0,1) lies in (0, 1], never zero
                Ok((0..users).map(|_| 1.0 - rng.random::<f64>()).collect())
            }
            VarianceSource::Explicit(v) => {
                if v.len() < users {
                    return Err(Error::invalid(
                        "channel_vars",
                        format!("{users} users requested but only {} variances given", v.len()),
                    ));
                }
                Ok(v[..users].to_vec())
            }
        }
    }
}

/// One (K, scheme) point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub users: usize,
    pub kind: SchemeKind,
    pub result: SchemeResult,
    pub analytic_bits: f64,
    pub rate_loss_bound: f64,
}

/// Sweeps the user count. For each `K`, draws the variances, rebuilds every
/// scheme and runs them all on the same SNR draws.
#[allow(clippy::too_many_arguments)]
pub fn sweep_users(
    base: &SystemConfig,
    user_counts: &[usize],
    variances: &VarianceSource,
    kinds: &[SchemeKind],
    settings: &SchemeSettings,
    n_drops: u64,
    seed: u64,
    options: &SimOptions,
) -> Result<Vec<SweepPoint>> {
    let master = StreamKey::from_seed(seed);
    let mut out = Vec::with_capacity(user_counts.len() * kinds.len());
    for &k in user_counts {
        if k == 0 {
            return Err(Error::invalid("k_list", "user counts must be positive"));
        }
        let config = base.with_channel_vars(variances.draw(k, &master)?)?;
        let schemes = kinds
            .iter()
            .map(|&kind| FeedbackScheme::prepare(kind, &config, settings))
            .collect::<Result<Vec<_>>>()?;
        let key = master.derive(DROPS_LABEL).derive(k as u64);
        let results = simulate_many(&config, &schemes, n_drops, &key, seed, options)?;
        for ((kind, scheme), result) in kinds.iter().zip(&schemes).zip(results) {
            out.push(SweepPoint {
                users: k,
                kind: *kind,
                analytic_bits: scheme.analytic_load(&config),
                rate_loss_bound: scheme.rate_loss_bound(&config)?,
                result,
            });
        }
    }
    Ok(out)
}
