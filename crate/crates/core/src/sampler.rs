//! Seeded Monte-Carlo noise sources and difference-current records.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`) seeded with
//! `seed_from_u64`; Gaussian deviates use the ziggurat sampler behind
//! `rand_distr::StandardNormal`. Streams are laid out as follows, and this
//! layout is part of the reproducibility contract:
//!
//! - vacuum quadratures: chunks of [`CHUNK_LEN`] samples, chunk `k` on ChaCha
//!   stream `k`, drawing `x` then `y` per sample;
//! - laser intensity noise: one sequential stream, [`RIN_STREAM`];
//! - detector electronic noise: [`ELECTRONIC_STREAM`] (see `detector`).
//!
//! Chunks are generated in parallel; the output does not depend on the
//! number of worker threads.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homodyne::{difference_current, transfer_coeffs, LocalOscillator, QuadratureSample};
use crate::interferometer::{compose_transfer, propagate, InterferometerConfig};

pub const CHUNK_LEN: usize = 1 << 16;
pub const RIN_STREAM: u64 = 1 << 63;
pub const ELECTRONIC_STREAM: u64 = (1 << 63) + 1;

/// Laser relative intensity noise.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RinModel {
    #[default]
    Off,
    /// One-sided fractional PSD `rin_dbhz` (dB/Hz), flat up to `bandwidth_hz`.
    On { rin_dbhz: f64, bandwidth_hz: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub sample_rate: f64,
    pub n_samples: usize,
    pub sigma2_vac: f64,
    pub rin: RinModel,
}

impl SamplerConfig {
    pub fn new(seed: u64, sample_rate: f64, n_samples: usize) -> Self {
        Self {
            seed,
            sample_rate,
            n_samples,
            sigma2_vac: crate::constants::VACUUM_QUADRATURE_VARIANCE,
            rin: RinModel::Off,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sample rate must be positive, got {}",
                self.sample_rate
            )));
        }
        if self.n_samples == 0 {
            return Err(Error::InvalidConfig("n_samples must be at least 1".into()));
        }
        if !(self.sigma2_vac >= 0.0 && self.sigma2_vac.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "vacuum variance must be non-negative, got {}",
                self.sigma2_vac
            )));
        }
        if let RinModel::On {
            rin_dbhz,
            bandwidth_hz,
        } = self.rin
        {
            if !rin_dbhz.is_finite() || !(bandwidth_hz > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "RIN needs a finite level and positive bandwidth, got {rin_dbhz} dB/Hz over {bandwidth_hz} Hz"
                )));
            }
        }
        Ok(())
    }
}

/// Uniformly sampled record, in whatever current unit the producer used.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTimeSeries {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub seed: u64,
    pub label: String,
    /// Sum photocurrent `j1 + j2`, kept so that the detector model can leak a
    /// fraction of it into the difference channel.
    pub common_mode: Option<Vec<f64>>,
}

impl NoiseTimeSeries {
    pub fn new(samples: Vec<f64>, sample_rate: f64, seed: u64, label: impl Into<String>) -> Self {
        Self {
            samples,
            sample_rate,
            seed,
            label: label.into(),
            common_mode: None,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.samples.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate
    }

    /// Multiply every sample (and the common-mode record) by `factor`.
    pub fn scaled(&self, factor: f64) -> NoiseTimeSeries {
        NoiseTimeSeries {
            samples: self.samples.iter().map(|v| v * factor).collect(),
            sample_rate: self.sample_rate,
            seed: self.seed,
            label: self.label.clone(),
            common_mode: self
                .common_mode
                .as_ref()
                .map(|c| c.iter().map(|v| v * factor).collect()),
        }
    }
}

/// Mixes `index` into `base` (SplitMix64 finaliser). Used wherever a run
/// needs a family of independent seeds from one user seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn vacuum_chunk(seed: u64, chunk: usize, len: usize, sigma: f64) -> Vec<QuadratureSample> {
    let mut rng = stream_rng(seed, chunk as u64);
    (0..len)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            QuadratureSample::new(sigma * x, sigma * y)
        })
        .collect()
}

/// I.i.d. Gaussian quadrature pairs with variance `sigma2_vac` each.
pub fn sample_vacuum(config: &SamplerConfig) -> Result<Vec<QuadratureSample>> {
    config.validate()?;
    let sigma = config.sigma2_vac.sqrt();
    let n = config.n_samples;
    let chunks = n.div_ceil(CHUNK_LEN);
    let parts: Vec<Vec<QuadratureSample>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let len = CHUNK_LEN.min(n - k * CHUNK_LEN);
            vacuum_chunk(config.seed, k, len, sigma)
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Fractional variance of the intensity noise actually realised at this
/// sample rate (`S * min(B, fs/2)`).
pub fn rin_fractional_variance(rin: RinModel, sample_rate: f64) -> f64 {
    match rin {
        RinModel::Off => 0.0,
        RinModel::On {
            rin_dbhz,
            bandwidth_hz,
        } => 10f64.powf(rin_dbhz / 10.0) * bandwidth_hz.min(0.5 * sample_rate),
    }
}

/// `I(t) = mean * (1 + delta(t))` with `delta` band-limited Gaussian noise.
///
/// The band limit is a single-pole low-pass whose noise-equivalent bandwidth
/// equals the configured bandwidth (pole at `2B/pi`), so
/// `Var(delta) = S * B`. Bandwidths at or above Nyquist give white noise.
pub fn sample_lo_intensity(config: &SamplerConfig, mean_intensity: f64) -> Result<Vec<f64>> {
    config.validate()?;
    let n = config.n_samples;
    let RinModel::On { bandwidth_hz, .. } = config.rin else {
        return Ok(vec![mean_intensity; n]);
    };
    let variance = rin_fractional_variance(config.rin, config.sample_rate);
    let std = variance.sqrt();
    let mut rng = stream_rng(config.seed, RIN_STREAM);

    let out = if bandwidth_hz >= 0.5 * config.sample_rate {
        (0..n)
            .map(|_| {
                let w: f64 = rng.sample(StandardNormal);
                mean_intensity * (1.0 + std * w)
            })
            .collect()
    } else {
        let pole_hz = 2.0 * bandwidth_hz / PI;
        let a = (-2.0 * PI * pole_hz / config.sample_rate).exp();
        let drive = std * (1.0 - a * a).sqrt();
        // Start from the stationary distribution.
        let mut delta = std * rng.sample::<f64, _>(StandardNormal);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(mean_intensity * (1.0 + delta));
            delta = a * delta + drive * rng.sample::<f64, _>(StandardNormal);
        }
        out
    };
    Ok(out)
}

/// Difference-current record in vacuum units.
///
/// Each sample draws one quadrature pair and one laser-intensity value; the
/// local-oscillator amplitude follows the intensity with its phase held.
pub fn generate_timeseries(
    interferometer: &InterferometerConfig,
    lo: &LocalOscillator,
    sampler: &SamplerConfig,
) -> Result<NoiseTimeSeries> {
    let u = compose_transfer(interferometer)?;
    let coeffs = transfer_coeffs(&u);
    let vacuum = sample_vacuum(sampler)?;
    let intensity = sample_lo_intensity(sampler, lo.intensity())?;
    let base = lo.amplitude();
    let mean_i = lo.intensity();

    let (samples, common): (Vec<f64>, Vec<f64>) = vacuum
        .par_iter()
        .zip(intensity.par_iter())
        .map(|(s, &i_t)| {
            let scale = if mean_i > 0.0 {
                (i_t / mean_i).max(0.0).sqrt()
            } else {
                0.0
            };
            let amp = base * scale;
            let lo_t = LocalOscillator::new(amp.re, amp.im);
            let diff = difference_current(&coeffs, &lo_t, s);
            let (o1, o2) = propagate(&u, amp, num_complex::Complex64::new(s.x, s.y));
            (diff, o1.norm_sqr() + o2.norm_sqr())
        })
        .unzip();

    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("difference current"));
    }

    Ok(NoiseTimeSeries {
        samples,
        sample_rate: sampler.sample_rate,
        seed: sampler.seed,
        label: format!(
            "difference current, phi = {:.9} rad, I_lo = {:.6e}",
            interferometer.phi.radians(),
            mean_i
        ),
        common_mode: Some(common),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn zero_variance_vacuum_is_silent() {
        let mut cfg = SamplerConfig::new(3, 1.0, 1000);
        cfg.sigma2_vac = 0.0;
        let v = sample_vacuum(&cfg).unwrap();
        assert!(v.iter().all(|s| s.x == 0.0 && s.y == 0.0));
    }

    #[test]
    fn vacuum_is_deterministic_and_seed_sensitive() {
        let cfg = SamplerConfig::new(11, 1.0, CHUNK_LEN + 17);
        let a = sample_vacuum(&cfg).unwrap();
        let b = sample_vacuum(&cfg).unwrap();
        assert_eq!(a, b);
        let c = sample_vacuum(&SamplerConfig::new(12, 1.0, CHUNK_LEN + 17)).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.len(), CHUNK_LEN + 17);
    }

    #[test]
    fn prefix_stable_across_lengths() {
        // Chunk layout means a longer record extends a shorter one.
        let a = sample_vacuum(&SamplerConfig::new(5, 1.0, 1000)).unwrap();
        let b = sample_vacuum(&SamplerConfig::new(5, 1.0, 3 * CHUNK_LEN)).unwrap();
        assert_eq!(&a[..], &b[..1000]);
    }

    #[test]
    fn config_validation() {
        assert!(SamplerConfig::new(0, 0.0, 10).validate().is_err());
        assert!(SamplerConfig::new(0, 1.0, 0).validate().is_err());
        let mut c = SamplerConfig::new(0, 1.0, 10);
        c.sigma2_vac = -1.0;
        assert!(c.validate().is_err());
        c.sigma2_vac = 0.25;
        c.rin = RinModel::On {
            rin_dbhz: -150.0,
            bandwidth_hz: 0.0,
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn lo_intensity_without_rin_is_constant() {
        let cfg = SamplerConfig::new(1, 1e9, 500);
        assert!(sample_lo_intensity(&cfg, 42.0)
            .unwrap()
            .iter()
            .all(|&v| v == 42.0));
        let mut cfg = cfg;
        cfg.rin = RinModel::On {
            rin_dbhz: -140.0,
            bandwidth_hz: 1e8,
        };
        assert!(sample_lo_intensity(&cfg, 0.0)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn rin_fractional_variance_matches_psd_integral() {
        let mut cfg = SamplerConfig::new(8, 20e9, 1_000_000);
        cfg.rin = RinModel::On {
            rin_dbhz: -160.0,
            bandwidth_hz: 1e9,
        };
        let oracle = 1e-16 * 1e9;
        assert!((rin_fractional_variance(cfg.rin, cfg.sample_rate) - oracle).abs() < 1e-20);

        let i = sample_lo_intensity(&cfg, 1.0).unwrap();
        let n = i.len() as f64;
        let mean = i.iter().sum::<f64>() / n;
        let var = i.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var / oracle - 1.0).abs() < 0.05, "var = {var:e}");
    }

    #[test]
    fn symmetric_quadrature_series_variance() {
        let interf = InterferometerConfig::symmetric(FRAC_PI_2);
        let lo = LocalOscillator::from_intensity(1.0e4);
        let cfg = SamplerConfig::new(99, 1e9, 200_000);
        let s = generate_timeseries(&interf, &lo, &cfg).unwrap();
        let expect = 4.0 * 1.0e4 * 0.25;
        let se_var = expect * (2.0 / s.len() as f64).sqrt();
        assert!((s.variance() - expect).abs() < 5.0 * se_var);
        assert!(s.mean().abs() < 5.0 * (expect / s.len() as f64).sqrt());
    }

    #[test]
    fn noiseless_in_phase_series_is_constant() {
        let interf = InterferometerConfig::symmetric(0.0);
        let lo = LocalOscillator::from_intensity(7.5);
        let mut cfg = SamplerConfig::new(1, 1e9, 100);
        cfg.sigma2_vac = 0.0;
        let s = generate_timeseries(&interf, &lo, &cfg).unwrap();
        assert!(s.samples.iter().all(|&v| (v - 7.5).abs() < 1e-12));
        let cm = s.common_mode.unwrap();
        assert!(cm.iter().all(|&v| (v - 7.5).abs() < 1e-12));
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| derive_seed(42, k)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
    }
}
