//! Averaged-periodogram (Welch) spectral estimation.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::{num_complex::Complex64, FftPlanner};

use crate::error::{Error, Result};
use crate::sampler::NoiseTimeSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    /// Periodic form of the window, length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }

    /// Overlap used by [`estimate_psd`]: 50 % for Hann, none for rectangular.
    pub fn default_overlap(self) -> f64 {
        match self {
            Window::Rectangular => 0.0,
            Window::Hann => 0.5,
        }
    }
}

/// One-sided spectral density estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    /// Units of the input squared, per hertz.
    pub power: Vec<f64>,
    pub n_averages: usize,
}

impl PsdEstimate {
    pub fn resolution(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            0.0
        }
    }

    /// `sum(power) * df`, which reproduces the mean-square of the input.
    pub fn total_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.resolution()
    }

    /// Integrated power over `lo_hz <= f <= hi_hz`.
    pub fn band_power(&self, lo_hz: f64, hi_hz: f64) -> f64 {
        let df = self.resolution();
        self.frequencies
            .iter()
            .zip(&self.power)
            .filter(|(f, _)| **f >= lo_hz && **f <= hi_hz)
            .map(|(_, p)| p * df)
            .sum()
    }
}

/// Welch estimate with the window's default overlap.
pub fn estimate_psd(
    series: &NoiseTimeSeries,
    segment_length: usize,
    window: Window,
) -> Result<PsdEstimate> {
    estimate_psd_with_overlap(series, segment_length, window, window.default_overlap())
}

pub fn estimate_psd_with_overlap(
    series: &NoiseTimeSeries,
    segment_length: usize,
    window: Window,
    overlap: f64,
) -> Result<PsdEstimate> {
    let n = series.len();
    if segment_length == 0 {
        return Err(Error::InvalidConfig(
            "segment length must be positive".into(),
        ));
    }
    if segment_length > n {
        return Err(Error::SegmentTooLong {
            segment: segment_length,
            len: n,
        });
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::InvalidConfig(format!(
            "overlap must lie in [0, 1), got {overlap}"
        )));
    }

    let step = ((segment_length as f64 * (1.0 - overlap)).round() as usize).max(1);
    let n_segments = (n - segment_length) / step + 1;
    let w = window.coefficients(segment_length);
    let w_energy: f64 = w.iter().map(|v| v * v).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment_length);
    let n_bins = segment_length / 2 + 1;

    let periodograms: Vec<Vec<f64>> = (0..n_segments)
        .into_par_iter()
        .map(|k| {
            let start = k * step;
            let mut buf: Vec<Complex64> = series.samples[start..start + segment_length]
                .iter()
                .zip(&w)
                .map(|(x, w)| Complex64::new(x * w, 0.0))
                .collect();
            fft.process(&mut buf);
            buf[..n_bins].iter().map(|z| z.norm_sqr()).collect()
        })
        .collect();

    // Sequential accumulation keeps results bit-identical across thread counts.
    let mut acc = vec![0.0; n_bins];
    for p in &periodograms {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
    }

    let fs = series.sample_rate;
    let norm = 1.0 / (fs * w_energy * n_segments as f64);
    let nyquist_bin = segment_length
        .is_multiple_of(2)
        .then_some(segment_length / 2);
    let power = acc
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let one_sided = if k == 0 || Some(k) == nyquist_bin {
                1.0
            } else {
                2.0
            };
            v * norm * one_sided
        })
        .collect();
    let frequencies = (0..n_bins)
        .map(|k| k as f64 * fs / segment_length as f64)
        .collect();

    Ok(PsdEstimate {
        frequencies,
        power,
        n_averages: n_segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(samples: Vec<f64>, fs: f64) -> NoiseTimeSeries {
        NoiseTimeSeries::new(samples, fs, 0, "test")
    }

    #[test]
    fn segment_longer_than_series() {
        let s = series(vec![0.0; 10], 1.0);
        assert!(matches!(
            estimate_psd(&s, 11, Window::Hann),
            Err(Error::SegmentTooLong {
                segment: 11,
                len: 10
            })
        ));
    }

    #[test]
    fn sinusoid_lands_in_one_bin() {
        let fs = 1024.0;
        let l = 256;
        let f0 = 40.0 * fs / l as f64;
        let s = series(
            (0..4096)
                .map(|i| (2.0 * PI * f0 * i as f64 / fs).sin())
                .collect(),
            fs,
        );
        let psd = estimate_psd(&s, l, Window::Rectangular).unwrap();
        assert_eq!(psd.n_averages, 16);
        let (peak, _) =
            psd.power.iter().enumerate().fold(
                (0, 0.0),
                |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc },
            );
        assert_eq!(peak, 40);
        assert!((psd.frequencies[peak] - f0).abs() < 1e-9);
        let other: f64 = psd
            .power
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != 40)
            .map(|(_, p)| p)
            .sum();
        assert!(other < 1e-20 * psd.power[40] + 1e-18);
        // Mean square of a unit sine is 1/2.
        assert!((psd.total_power() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_goes_to_dc() {
        let s = series(vec![3.0; 2048], 100.0);
        for w in [Window::Rectangular, Window::Hann] {
            let psd = estimate_psd(&s, 256, w).unwrap();
            let dc = psd.power[0];
            let rest: f64 = psd.power[2..].iter().sum();
            assert!(dc > 0.0);
            assert!(rest < 1e-20 * dc, "{w:?}");
        }
    }

    #[test]
    fn hann_uses_half_overlap() {
        let s = series(vec![0.0; 1024], 1.0);
        let psd = estimate_psd(&s, 128, Window::Hann).unwrap();
        assert_eq!(psd.n_averages, 15);
        assert_eq!(psd.frequencies.len(), 65);
        assert!((psd.resolution() - 1.0 / 128.0).abs() < 1e-15);
    }
}
