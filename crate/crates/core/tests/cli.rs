use std::path::Path;
use std::process::{Command, Output};

use clusterfb::config::ExperimentConfig;
use clusterfb::quantization::{AllocationProblem, FeedbackBudget};
use clusterfb::thresholds::{ClusterPlan, ThresholdKind};

fn clusterfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clusterfb")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn threshold_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("cluster,"))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn thresholds_default_config() {
    let out = stdout(&clusterfb(&["thresholds"]));
    assert!(out.contains("# index_bits = 2"));
    let rows = threshold_rows(&out);
    assert_eq!(rows.len(), 4);
    for col in [3, 4] {
        let t: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
        assert!(t.windows(2).all(|w| w[0] > w[1]), "{t:?}");
    }
    assert!(out.contains("# min_clusters_type1 = "));
}

#[test]
fn thresholds_homogeneous_full_split_ends_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[system]\nusers = 6\nchannel_vars = [0.5, 0.5, 0.5, 0.5, 0.5, 0.5]\n[scheme]\nclusters = 6\n[run]\nk_list = [6]\n",
    );
    let out = stdout(&clusterfb(&["thresholds", "--config", &cfg]));
    let line = out.lines().find(|l| l.starts_with("# homogeneous_thresholds")).unwrap();
    assert_eq!(line.split_whitespace().last().unwrap(), "0");
    let rows = threshold_rows(&out);
    assert_eq!(rows.last().unwrap()[3], "0");
}

#[test]
fn thresholds_rejects_too_many_clusters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nusers = 3\n[scheme]\nclusters = 4\n");
    let o = clusterfb(&["thresholds", "--config", &cfg]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("cluster count 4 exceeds user count 3"), "{err}");
}

#[test]
fn invalid_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nnoise_var = 0.0\n");
    let o = clusterfb(&["bitalloc", "--config", &cfg]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("system.noise_var"));
    let o = clusterfb(&["simulate", "--config", "/nonexistent/clusterfb.toml"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/nonexistent/clusterfb.toml"));
}

#[test]
fn bitalloc_zero_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[system]\nusers = 20\n[scheme]\nfeedback_constraint = 0.0\n");
    let out = stdout(&clusterfb(&["bitalloc", "--config", &cfg]));
    let bits: Vec<&str> = out.lines().filter(|l| l.starts_with("bits = ")).collect();
    assert_eq!(bits, vec!["bits = 0 0 0 0"; 2]);
}

#[test]
fn bitalloc_report_rescores() {
    let out = stdout(&clusterfb(&["bitalloc"]));
    let cfg = ExperimentConfig::default();
    let system = cfg.system().unwrap();
    let rates = system.rates();
    let sections: Vec<&str> = out.split("\n\n").filter(|s| !s.trim().is_empty()).collect();
    assert_eq!(sections.len(), 2);
    for (section, kind) in sections.iter().zip([ThresholdKind::Type1, ThresholdKind::Type2]) {
        let field = |key: &str| {
            section
                .lines()
                .find_map(|l| l.strip_prefix(key))
                .unwrap()
                .trim()
                .to_string()
        };
        let bits: Vec<u32> = field("bits = ").split_whitespace().map(|b| b.parse().unwrap()).collect();
        let objective: f64 = field("objective = ").parse().unwrap();
        assert_eq!(field("feasible = "), "true");
        let plan = ClusterPlan::build(&rates, 4, kind).unwrap();
        let budget = FeedbackBudget::uniform(rates.len(), 0.8, plan.index_bits).unwrap();
        let p = AllocationProblem::new(&plan.region_edges(), &rates, &budget, 6, 4).unwrap();
        assert!((p.objective(&bits) - objective).abs() < 1e-9);
        assert!(p.is_feasible(&bits));
    }
}

#[test]
fn simulate_writes_rows_and_manifest_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = clusterfb(&["simulate", "--drops", "200", "--seed", "7", "--out", first.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(first.join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "K,scheme,sum_rate,sum_rate_se,fb_bits,fb_bits_se,fb_bits_analytic,rate_loss_bound,seed"
    );
    assert_eq!(lines.len(), 51);
    assert!(lines[1..].iter().all(|l| l.ends_with(",7")));

    let manifest = first.join("manifest.toml");
    let resolved = ExperimentConfig::load(&manifest).unwrap();
    assert_eq!(resolved.run.drops, 200);
    assert_eq!(resolved.run.seed, 7);

    let second = dir.path().join("second");
    let o = clusterfb(&[
        "simulate",
        "--config",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(first.join("results.csv")).unwrap(), std::fs::read(second.join("results.csv")).unwrap());
}

#[test]
fn k_list_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = clusterfb(&["simulate", "--drops", "100", "--k-list", "12,24", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("results.csv")).unwrap();
    let ks: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ks, [vec!["12"; 5], vec!["24"; 5]].concat());
}
