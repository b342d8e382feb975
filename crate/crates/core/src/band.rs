//! Gaussian UWB pulse spectrum and band-averaged received power.

use num_complex::Complex64;

use crate::error::Result;
use crate::tracer::PropagationPath;

/// Gaussian pulse spectrum sampled across the occupied band.
#[derive(Debug, Clone, PartialEq)]
pub struct UwbBand {
    pub center_frequency: f64,
    pub bandwidth: f64,
    pub sample_count: usize,
}

impl Default for UwbBand {
    /// UWB channel 2.
    fn default() -> Self {
        Self {
            center_frequency: 3.994e9,
            bandwidth: 468e6,
            sample_count: 9,
        }
    }
}

impl UwbBand {
    pub fn with_samples(mut self, sample_count: usize) -> Self {
        self.sample_count = sample_count;
        self
    }

    /// Standard deviation of `S(f) = exp(-(f - fc)^2 / (2 sigma^2))`, with
    /// the bandwidth taken as `2 sqrt(2 ln 10) sigma`.
    pub fn spectral_sigma(&self) -> f64 {
        self.bandwidth / (2.0 * (2.0 * std::f64::consts::LN_10).sqrt())
    }

    pub fn lowest_frequency(&self) -> f64 {
        if self.sample_count <= 1 {
            self.center_frequency
        } else {
            self.center_frequency - 0.5 * self.bandwidth
        }
    }

    pub fn samples(&self) -> Vec<(f64, f64)> {
        band_samples(self)
    }
}

/// Equally spaced `(frequency, weight)` pairs over `fc +/- B/2`, weighted by
/// the pulse power spectrum `|S(f)|^2` and normalized to sum to one.
pub fn band_samples(band: &UwbBand) -> Vec<(f64, f64)> {
    let n = band.sample_count.max(1);
    if n == 1 {
        return vec![(band.center_frequency, 1.0)];
    }
    let sigma = band.spectral_sigma();
    let step = band.bandwidth / (n - 1) as f64;
    let half = (n - 1) as f64 / 2.0;
    let mut samples: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            // offsets symmetric by construction
            let offset = (k as f64 - half) * step;
            let w = (-(offset * offset) / (sigma * sigma)).exp();
            (band.center_frequency + offset, w)
        })
        .collect();
    let total: f64 = samples.iter().map(|s| s.1).sum();
    for s in &mut samples {
        s.1 /= total;
    }
    samples
}

/// Transmit power and tolerated path loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_dbm: f64,
    pub max_path_loss_db: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        Self {
            tx_power_dbm: 0.0,
            max_path_loss_db: 90.0,
        }
    }
}

impl LinkBudget {
    pub fn threshold_dbm(&self) -> f64 {
        self.tx_power_dbm - self.max_path_loss_db
    }
}

/// Coherent sum over paths per frequency, power-weighted average over the
/// band. Returns dBm, `-inf` when there are no paths.
pub fn band_averaged_power(paths: &[PropagationPath], band: &UwbBand, budget: &LinkBudget) -> Result<f64> {
    if paths.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let mut mean = 0.0;
    for (f, w) in band_samples(band) {
        let mut sum = Complex64::new(0.0, 0.0);
        for p in paths {
            sum += p.amplitude_at(f)?;
        }
        mean += w * sum.norm_sqr();
    }
    Ok(budget.tx_power_dbm + 10.0 * mean.log10())
}

/// Band-averaged power from per-frequency channel sums, in dBm.
pub fn weighted_power_dbm(channel: &[Complex64], samples: &[(f64, f64)], budget: &LinkBudget) -> f64 {
    let mean: f64 = channel.iter().zip(samples).map(|(h, (_, w))| w * h.norm_sqr()).sum();
    if mean > 0.0 {
        budget.tx_power_dbm + 10.0 * mean.log10()
    } else {
        f64::NEG_INFINITY
    }
}
