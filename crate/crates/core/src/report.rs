//! Result tables and the three command implementations.
//!
//! `results.csv` columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `K` | number of users |
//! | `scheme` | scheme name |
//! | `sum_rate` | mean sum rate, bits/s/Hz |
//! | `sum_rate_se` | standard error of `sum_rate` |
//! | `fb_bits` | mean counted feedback bits per drop |
//! | `fb_bits_se` | standard error of `fb_bits` |
//! | `fb_bits_analytic` | analytic expected feedback load |
//! | `rate_loss_bound` | upper bound on the sum-rate loss from thresholding |
//! | `seed` | master seed of the run |
//!
//! Real numbers are written in plain decimal, rounded to 6 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::quantization::{allocate_bits, AllocationProblem, FeedbackBudget, QuantizerSpec};
use crate::sim::{sweep_users, SchemeKind, SweepPoint};
use crate::thresholds::{homogeneous_thresholds, min_clusters, partition_users, type1_thresholds, type2_thresholds, ClusterPlan, ThresholdKind};

pub const CSV_HEADER: [&str; 9] = [
    "K",
    "scheme",
    "sum_rate",
    "sum_rate_se",
    "fb_bits",
    "fb_bits_se",
    "fb_bits_analytic",
    "rate_loss_bound",
    "seed",
];

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Plain decimal with 6 significant digits.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_string() } else { x.to_string() };
    }
    // scientific formatting does the rounding and gives the final exponent
    let sci = format!("{x:.5e}");
    let exp: i32 = sci.split('e').nth(1).and_then(|e| e.parse().ok()).unwrap_or(0);
    let rounded: f64 = sci.parse().unwrap_or(x);
    let decimals = (5 - exp).max(0) as usize;
    format!("{rounded:.decimals$}")
}

/// One `(K, scheme)` line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub users: usize,
    pub scheme: SchemeKind,
    pub sum_rate: f64,
    pub sum_rate_se: f64,
    pub fb_bits: f64,
    pub fb_bits_se: f64,
    pub fb_bits_analytic: f64,
    pub rate_loss_bound: f64,
    pub seed: u64,
}

impl From<&SweepPoint> for ResultRow {
    fn from(p: &SweepPoint) -> Self {
        ResultRow {
            users: p.users,
            scheme: p.kind,
            sum_rate: p.result.sum_rate,
            sum_rate_se: p.result.sum_rate_se,
            fb_bits: p.result.fb_bits,
            fb_bits_se: p.result.fb_bits_se,
            fb_bits_analytic: p.analytic_bits,
            rate_loss_bound: p.rate_loss_bound,
            seed: p.result.seed,
        }
    }
}

impl ResultRow {
    fn record(&self) -> [String; 9] {
        [
            self.users.to_string(),
            self.scheme.name().to_string(),
            format_sig6(self.sum_rate),
            format_sig6(self.sum_rate_se),
            format_sig6(self.fb_bits),
            format_sig6(self.fb_bits_se),
            format_sig6(self.fb_bits_analytic),
            format_sig6(self.rate_loss_bound),
            self.seed.to_string(),
        ]
    }
}

pub fn write_csv<W: std::io::Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn fmt_list<T: std::fmt::Display>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Cluster membership, thresholds, index bits and the smallest adequate
/// cluster count, as CSV with a commented header block.
pub fn cmd_thresholds(cfg: &ExperimentConfig) -> Result<String> {
    let system = cfg.system()?;
    let rates = system.rates();
    let clusters = cfg.scheme.clusters;
    let partition = partition_users(&rates, clusters)?;
    let t1 = type1_thresholds(&partition)?;
    let t2 = type2_thresholds(&partition);
    let plan = ClusterPlan::build(&rates, clusters, ThresholdKind::Type1)?;
    let beams = system.tx_antennas();
    let tol = cfg.scheme.rate_loss_tolerance;
    let min1 = min_clusters(&rates, tol, beams, ThresholdKind::Type1)?;
    let min2 = min_clusters(&rates, tol, beams, ThresholdKind::Type2)?;

    let mut s = String::new();
    writeln!(s, "# users = {}", system.users()).unwrap();
    writeln!(s, "# clusters = {clusters}").unwrap();
    writeln!(s, "# index_bits = {}", plan.index_bits).unwrap();
    writeln!(s, "# rate_loss_tolerance = {tol}").unwrap();
    writeln!(s, "# min_clusters_type1 = {min1}").unwrap();
    writeln!(s, "# min_clusters_type2 = {min2}").unwrap();
    if rates.windows(2).all(|w| w[0] == w[1]) {
        let h = homogeneous_thresholds(rates[0], rates.len(), clusters)?;
        writeln!(s, "# homogeneous_thresholds = {}", fmt_list(h.iter().map(|t| format_sig6(*t)))).unwrap();
    }
    writeln!(s, "cluster,size,mean_rate,type1_threshold,type2_threshold,members,member_rates").unwrap();
    for (i, c) in partition.clusters().iter().enumerate() {
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            i + 1,
            c.len(),
            format_sig6(c.mean_rate()),
            format_sig6(t1[i]),
            format_sig6(t2[i]),
            fmt_list(c.members.iter().map(|m| m + 1)),
            fmt_list(c.rates.iter().map(|r| format_sig6(*r))),
        )
        .unwrap();
    }
    Ok(s)
}

/// Optimal bit allocation, per-user slack and quantizer tables for both
/// threshold types.
pub fn cmd_bitalloc(cfg: &ExperimentConfig) -> Result<String> {
    let system = cfg.system()?;
    let rates = system.rates();
    let mut s = String::new();
    for kind in [ThresholdKind::Type1, ThresholdKind::Type2] {
        let plan = ClusterPlan::build(&rates, cfg.scheme.clusters, kind)?;
        let budget = FeedbackBudget::uniform(rates.len(), cfg.scheme.feedback_constraint, plan.index_bits)?;
        let edges = plan.region_edges();
        let problem = AllocationProblem::new(&edges, &rates, &budget, cfg.scheme.max_bits, system.tx_antennas())?;
        let alloc = allocate_bits(&problem);
        let spec = QuantizerSpec::build(&edges, &rates, &alloc.bits)?;

        writeln!(s, "[{kind}]").unwrap();
        writeln!(s, "bits = {}", fmt_list(&alloc.bits)).unwrap();
        writeln!(s, "objective = {:.12}", alloc.objective).unwrap();
        writeln!(s, "feasible = {}", problem.is_feasible(&alloc.bits)).unwrap();
        writeln!(s, "user,slack").unwrap();
        for (k, sl) in alloc.slack.iter().enumerate() {
            writeln!(s, "{},{}", k + 1, format_sig6(*sl)).unwrap();
        }
        writeln!(s, "region,lower,upper,bits,levels").unwrap();
        for (i, q) in spec.regions.iter().enumerate() {
            writeln!(
                s,
                "{},{},{},{},{}",
                i + 1,
                format_sig6(q.lower),
                format_sig6(q.upper),
                q.bits,
                fmt_list(q.levels().into_iter().map(format_sig6)),
            )
            .unwrap();
        }
        writeln!(s).unwrap();
    }
    Ok(s)
}

/// Runs the configured sweep and returns its rows.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let base = cfg.system_for(1)?;
    let points = sweep_users(
        &base,
        &cfg.run.k_list,
        &cfg.system.channel_vars.source(),
        &cfg.scheme.schemes,
        &cfg.settings(),
        cfg.run.drops,
        cfg.run.seed,
        &cfg.options(),
    )?;
    Ok(points.iter().map(ResultRow::from).collect())
}

/// Runs the sweep and writes `results.csv` and `manifest.toml` into `out_dir`.
pub fn cmd_simulate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<ResultRow>> {
    let rows = run_sweep(cfg)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join(RESULTS_FILE);
    fs::write(&csv_path, rows_to_csv(&rows)?).map_err(|e| Error::io(&csv_path, e))?;
    let manifest = out_dir.join(MANIFEST_FILE);
    fs::write(&manifest, cfg.to_toml()?).map_err(|e| Error::io(&manifest, e))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(12.3456789), "12.3457");
        assert_eq!(format_sig6(0.000123456789), "0.000123457");
        assert_eq!(format_sig6(1234567.0), "1234570");
        assert_eq!(format_sig6(9.9999996), "10.0000");
        assert_eq!(format_sig6(-2.5), "-2.50000");
        assert_eq!(format_sig6(400.0), "400.000");
    }

    #[test]
    fn csv_has_fixed_header() {
        let text = rows_to_csv(&[]).unwrap();
        assert_eq!(
            text.trim_end(),
            "K,scheme,sum_rate,sum_rate_se,fb_bits,fb_bits_se,fb_bits_analytic,rate_loss_bound,seed"
        );
    }

    #[test]
    fn thresholds_report_errors_when_clusters_exceed_users() {
        let mut cfg = ExperimentConfig::default();
        cfg.system.users = 3;
        cfg.scheme.clusters = 4;
        assert!(matches!(cmd_thresholds(&cfg), Err(Error::TooManyClusters { .. })));
    }
}
