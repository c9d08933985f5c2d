//! Cluster-based feedback reduction for multiuser MIMO broadcast downlinks
//! with heterogeneous Rayleigh fading.
//!
//! Users whose mean SNRs differ are grouped into clusters by mean SNR. Each
//! cluster contributes one SNR threshold, and a user only feeds back when its
//! instantaneous SNR clears the smallest threshold. The crate provides:
//!
//! - [`fading`]: channel, random orthogonal precoder and zero-forcing SNR sampling
//! - [`order_stats`]: order statistics of independent non-identical exponentials
//! - [`thresholds`]: cluster partitioning, threshold sets and rate-loss bounds
//! - [`quantization`]: equiprobable region quantizers and bit allocation
//! - [`sim`]: the Monte Carlo scheduling engine
//! - [`config`] and [`report`]: experiment configuration and CSV reporting

pub mod config;
pub mod error;
pub mod fading;
pub mod order_stats;
pub mod quadrature;
pub mod quantization;
pub mod report;
pub mod root;
pub mod sim;
pub mod stream;
pub mod thresholds;

pub use error::{Error, Result};
pub use fading::SystemConfig;
pub use order_stats::RateVector;
pub use thresholds::ClusterPlan;
