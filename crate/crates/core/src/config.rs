//! Experiment configuration: a TOML file with `[system]`, `[scheme]` and
//! `[run]` tables. Every key is optional; unknown keys are rejected.
//!
//! ```toml
//! [system]
//! tx_antennas = 4
//! rx_antennas = 4
//! users = 100              # population for `thresholds` and `bitalloc`
//! power = 10.0
//! noise_var = 1.0
//! channel_vars = "uniform" # or an explicit list, e.g. [1.0, 0.5, 0.25]
//!
//! [scheme]
//! schemes = ["full_csi", "conventional", "single_threshold", "cluster_type1", "cluster_type2"]
//! clusters = 4
//! rate_loss_tolerance = 0.01
//! feedback_constraint = 0.8
//! max_bits = 6
//! outage_probability = 0.1
//! conventional_bits = 3
//! single_threshold_bits = 3
//! beam_feedback = "best_beam"   # or "all_beams"
//! accounting = "true_snr"       # or "quantized"
//! snr_path = "analytic"         # or "matrix"
//!
//! [run]
//! drops = 10000
//! seed = 1
//! k_list = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]
//! out_dir = "results"
//! ```
//!
//! With `channel_vars = "uniform"`, the variances for `K` users are drawn
//! from `(0, 1]` using a stream derived from `run.seed` and `K`, so
//! `thresholds`, `bitalloc` and `simulate` see the same population for the
//! same `K`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::SystemConfig;
use crate::sim::{BeamFeedback, RateAccounting, SchemeKind, SchemeSettings, SimOptions, SnrPath, VarianceSource};
use crate::stream::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceModel {
    Uniform,
}

/// Channel-variance source as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelVars {
    Model(VarianceModel),
    Explicit(Vec<f64>),
}

impl Default for ChannelVars {
    fn default() -> Self {
        ChannelVars::Model(VarianceModel::Uniform)
    }
}

impl ChannelVars {
    pub fn source(&self) -> VarianceSource {
        match self {
            ChannelVars::Model(VarianceModel::Uniform) => VarianceSource::Uniform,
            ChannelVars::Explicit(v) => VarianceSource::Explicit(v.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub users: usize,
    pub power: f64,
    pub noise_var: f64,
    pub channel_vars: ChannelVars,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            tx_antennas: 4,
            rx_antennas: 4,
            users: 100,
            power: 10.0,
            noise_var: 1.0,
            channel_vars: ChannelVars::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    pub schemes: Vec<SchemeKind>,
    pub clusters: usize,
    pub rate_loss_tolerance: f64,
    pub feedback_constraint: f64,
    pub max_bits: u32,
    pub outage_probability: f64,
    pub conventional_bits: u32,
    pub single_threshold_bits: u32,
    pub beam_feedback: BeamFeedback,
    pub accounting: RateAccounting,
    pub snr_path: SnrPath,
}

impl Default for SchemeSection {
    fn default() -> Self {
        let s = SchemeSettings::default();
        SchemeSection {
            schemes: SchemeKind::ALL.to_vec(),
            clusters: s.clusters,
            rate_loss_tolerance: 1e-2,
            feedback_constraint: s.feedback_constraint,
            max_bits: s.max_bits,
            outage_probability: s.outage_probability,
            conventional_bits: s.conventional_bits,
            single_threshold_bits: s.single_threshold_bits,
            beam_feedback: BeamFeedback::default(),
            accounting: RateAccounting::default(),
            snr_path: SnrPath::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub drops: u64,
    pub seed: u64,
    pub k_list: Vec<usize>,
    pub out_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            drops: 10_000,
            seed: 1,
            k_list: (1..=10).map(|i| 10 * i).collect(),
            out_dir: PathBuf::from("results"),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub scheme: SchemeSection,
    pub run: RunSection,
}

fn check(ok: bool, name: &'static str, reason: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(name, reason))
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Fully resolved config, suitable for a reproduction manifest.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        check(s.tx_antennas > 0, "system.tx_antennas", "must be positive")?;
        check(
            s.rx_antennas >= s.tx_antennas,
            "system.rx_antennas",
            format!("must be at least tx_antennas ({})", s.tx_antennas),
        )?;
        check(s.users > 0, "system.users", "must be positive")?;
        check(s.power > 0.0 && s.power.is_finite(), "system.power", format!("must be positive, got {}", s.power))?;
        check(
            s.noise_var > 0.0 && s.noise_var.is_finite(),
            "system.noise_var",
            format!("must be positive, got {}", s.noise_var),
        )?;
        if let ChannelVars::Explicit(v) = &s.channel_vars {
            check(
                v.iter().all(|x| *x > 0.0 && x.is_finite()),
                "system.channel_vars",
                "entries must be positive and finite",
            )?;
            let need = self.run.k_list.iter().copied().chain([s.users]).max().unwrap_or(0);
            check(
                v.len() >= need,
                "system.channel_vars",
                format!("{} entries given but {need} users requested", v.len()),
            )?;
        }

        let c = &self.scheme;
        check(!c.schemes.is_empty(), "scheme.schemes", "need at least one scheme")?;
        check(c.clusters > 0, "scheme.clusters", "must be positive")?;
        check(
            c.rate_loss_tolerance > 0.0 && c.rate_loss_tolerance.is_finite(),
            "scheme.rate_loss_tolerance",
            "must be positive",
        )?;
        check(
            c.feedback_constraint >= 0.0 && c.feedback_constraint.is_finite(),
            "scheme.feedback_constraint",
            "must be non-negative",
        )?;
        check(c.max_bits <= 16, "scheme.max_bits", "at most 16")?;
        check(
            c.outage_probability > 0.0 && c.outage_probability < 1.0,
            "scheme.outage_probability",
            "must lie in (0, 1)",
        )?;
        check(c.conventional_bits <= 16, "scheme.conventional_bits", "at most 16")?;
        check(c.single_threshold_bits <= 16, "scheme.single_threshold_bits", "at most 16")?;

        let r = &self.run;
        check(r.drops > 0, "run.drops", "must be positive")?;
        check(!r.k_list.is_empty(), "run.k_list", "need at least one user count")?;
        check(r.k_list.iter().all(|&k| k > 0), "run.k_list", "user counts must be positive")?;
        check(r.workers != Some(0), "run.workers", "must be positive")?;
        Ok(())
    }

    pub fn settings(&self) -> SchemeSettings {
        let c = &self.scheme;
        SchemeSettings {
            clusters: c.clusters,
            feedback_constraint: c.feedback_constraint,
            max_bits: c.max_bits,
            outage_probability: c.outage_probability,
            conventional_bits: c.conventional_bits,
            single_threshold_bits: c.single_threshold_bits,
        }
    }

    pub fn options(&self) -> SimOptions {
        SimOptions {
            beam_feedback: self.scheme.beam_feedback,
            accounting: self.scheme.accounting,
            snr_path: self.scheme.snr_path,
            workers: self.run.workers,
        }
    }

    /// System with `users` users whose variances come from the configured source.
    pub fn system_for(&self, users: usize) -> Result<SystemConfig> {
        let vars = self
            .system
            .channel_vars
            .source()
            .draw(users, &StreamKey::from_seed(self.run.seed))?;
        SystemConfig::new(
            self.system.tx_antennas,
            self.system.rx_antennas,
            self.system.power,
            self.system.noise_var,
            vars,
        )
    }

    /// System for the `thresholds` and `bitalloc` reports.
    pub fn system(&self) -> Result<SystemConfig> {
        self.system_for(self.system.users)
    }
}
