//! Channel model: Rayleigh-faded MIMO channels, random orthogonal precoders
//! and post zero-forcing per-beam SNRs.
//!
//! With `N = M` receive antennas the per-beam SNR of user `k` is exponential
//! with rate `λ_k = M σ_N² / (P σ_k²)`, so the simulator normally samples that
//! marginal directly ([`sample_snr_analytic`]). The full matrix path is kept
//! for validation and for `N > M`.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex<f64>>;

/// Antenna counts, power budget and per-user channel variances.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    tx_antennas: usize,
    rx_antennas: usize,
    power: f64,
    noise_var: f64,
    channel_vars: Vec<f64>,
}

impl SystemConfig {
    pub fn new(
        tx_antennas: usize,
        rx_antennas: usize,
        power: f64,
        noise_var: f64,
        channel_vars: Vec<f64>,
    ) -> Result<Self> {
        if tx_antennas == 0 {
            return Err(Error::invalid("m", "must be positive"));
        }
        if rx_antennas < tx_antennas {
            return Err(Error::invalid("n", format!("need N >= M, got N={rx_antennas}, M={tx_antennas}")));
        }
        if !(power > 0.0 && power.is_finite()) {
            return Err(Error::invalid("power", format!("must be positive, got {power}")));
        }
        if !(noise_var > 0.0 && noise_var.is_finite()) {
            return Err(Error::invalid("noise_var", format!("must be positive, got {noise_var}")));
        }
        if channel_vars.is_empty() {
            return Err(Error::invalid("channel_vars", "need at least one user"));
        }
        if let Some((i, v)) = channel_vars
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::invalid("channel_vars", format!("entry {i} must be positive, got {v}")));
        }
        Ok(SystemConfig {
            tx_antennas,
            rx_antennas,
            power,
            noise_var,
            channel_vars,
        })
    }

    /// Transmit antennas (beams), `M`.
    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }

    /// Receive antennas per user, `N`.
    pub fn rx_antennas(&self) -> usize {
        self.rx_antennas
    }

    /// Number of users, `K`.
    pub fn users(&self) -> usize {
        self.channel_vars.len()
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn channel_vars(&self) -> &[f64] {
        &self.channel_vars
    }

    /// Exponential rate of user `k`'s per-beam SNR, `M σ_N² / (P σ_k²)`.
    pub fn rate(&self, k: usize) -> Result<f64> {
        let var = self.channel_vars.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.channel_vars.len(),
        })?;
        Ok(self.tx_antennas as f64 * self.noise_var / (self.power * var))
    }

    /// Per-user rates in user order.
    pub fn rates(&self) -> Vec<f64> {
        let scale = self.tx_antennas as f64 * self.noise_var / self.power;
        self.channel_vars.iter().map(|v| scale / v).collect()
    }

    /// Same antennas and power, different user population.
    pub fn with_channel_vars(&self, channel_vars: Vec<f64>) -> Result<Self> {
        SystemConfig::new(self.tx_antennas, self.rx_antennas, self.power, self.noise_var, channel_vars)
    }
}

/// One drop's channels: an `N×M` matrix per user and the shared `M×M` precoder.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub channels: Vec<CMatrix>,
    pub precoder: CMatrix,
}

/// Per-user, per-beam SNRs (linear scale), stored user-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSample {
    beams: usize,
    values: Vec<f64>,
}

impl SnrSample {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let beams = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == beams), "ragged SNR rows");
        SnrSample {
            beams,
            values: rows.into_iter().flatten().collect(),
        }
    }

    pub fn users(&self) -> usize {
        self.values.len().checked_div(self.beams).unwrap_or(0)
    }

    pub fn beams(&self) -> usize {
        self.beams
    }

    pub fn get(&self, user: usize, beam: usize) -> f64 {
        self.values[user * self.beams + beam]
    }

    pub fn user(&self, user: usize) -> &[f64] {
        &self.values[user * self.beams..(user + 1) * self.beams]
    }

    /// Beam index and value of the user's strongest beam (lowest index on ties).
    pub fn best_beam(&self, user: usize) -> (usize, f64) {
        let row = self.user(user);
        let mut best = 0;
        for (b, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = b;
            }
        }
        (best, row[best])
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<f64> {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(s * re, s * im)
}

/// Haar-distributed `M×M` unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal folded back into `Q`.
pub fn sample_orb_precoder<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CMatrix {
    assert!(m >= 1, "precoder dimension must be positive");
    loop {
        let g = CMatrix::from_fn(m, m, |_, _| complex_gaussian(rng, 1.0));
        let qr = g.qr();
        let r = qr.r();
        let mut q = qr.q();
        let mut ok = true;
        for j in 0..m {
            let d = r[(j, j)];
            let mag = d.norm();
            if mag == 0.0 {
                ok = false;
                break;
            }
            let phase = d / mag;
            for i in 0..m {
                q[(i, j)] *= phase;
            }
        }
        if ok {
            return q;
        }
    }
}

/// `N×M` channel with i.i.d. `CN(0, variance)` entries.
pub fn sample_channel<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng, variance))
}

pub fn sample_realization<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> ChannelRealization {
    let m = config.tx_antennas();
    let precoder = sample_orb_precoder(m, rng);
    let channels = config
        .channel_vars()
        .iter()
        .map(|&v| sample_channel(config.rx_antennas(), m, v, rng))
        .collect();
    ChannelRealization { channels, precoder }
}

/// Per-beam SNR after zero-forcing: `(P/M) / (σ_N² [((HW)^H HW)^{-1}]_mm)`.
pub fn zf_snr(h: &CMatrix, w: &CMatrix, config: &SystemConfig) -> Result<Vec<f64>> {
    let m = config.tx_antennas();
    if h.ncols() != m || w.nrows() != m || w.ncols() != m || h.nrows() < m {
        return Err(Error::invalid(
            "channel",
            format!("expected N×{m} channel (N >= {m}) and {m}×{m} precoder"),
        ));
    }
    let effective = h * w;
    let gram = effective.adjoint() * &effective;
    let inv = gram.try_inverse().ok_or(Error::RankDeficient)?;
    let per_beam_power = config.power() / m as f64;
    (0..m)
        .map(|j| {
            let d = inv[(j, j)].re;
            if d > 0.0 && d.is_finite() {
                Ok(per_beam_power / (config.noise_var() * d))
            } else {
                Err(Error::RankDeficient)
            }
        })
        .collect()
}

/// Exponential variate with rate `rate`.
pub fn sample_snr_analytic<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    Exp::new(rate).expect("rate must be positive").sample(rng)
}

/// Independent exponential per-beam SNRs for every user.
pub fn sample_snrs_analytic<R: Rng + ?Sized>(rates: &[f64], beams: usize, rng: &mut R) -> SnrSample {
    let mut values = Vec::with_capacity(rates.len() * beams);
    for &rate in rates {
        let dist = Exp::new(rate).expect("rate must be positive");
        for _ in 0..beams {
            values.push(dist.sample(rng));
        }
    }
    SnrSample { beams, values }
}

/// Per-beam SNRs through full channel matrices and zero-forcing. A
/// rank-deficient draw (a probability-zero event) is resampled.
pub fn sample_snrs_matrix<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> SnrSample {
    let m = config.tx_antennas();
    loop {
        let real = sample_realization(config, rng);
        let mut values = Vec::with_capacity(config.users() * m);
        let mut ok = true;
        for h in &real.channels {
            match zf_snr(h, &real.precoder, config) {
                Ok(v) => values.extend(v),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return SnrSample { beams: m, values };
        }
    }
}
