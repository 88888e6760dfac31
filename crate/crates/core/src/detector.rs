//! Balanced photodetector: frequency response, shot-noise spectral density,
//! electronic floor, common-mode rejection and quantum-over-floor clearance.
//!
//! Electrical power spectral densities are one-sided, in W/Hz delivered into
//! the load `R0`. A current PSD `S_i` (A^2/Hz) maps to `S_i * R0`.

use std::f64::consts::PI;
use std::io::Write;

use log::warn;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::constants::ELEMENTARY_CHARGE;
use crate::error::{Error, Result};
use crate::sampler::{stream_rng, NoiseTimeSeries, ELECTRONIC_STREAM};
use crate::spectrum::PsdEstimate;

/// Responsivity above which the quantum efficiency at 1550 nm would exceed 1.
pub const RESPONSIVITY_WARN_A_PER_W: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotodiodeParams {
    /// A/W
    pub responsivity: f64,
    /// A
    pub dark_current: f64,
    /// A
    pub saturation_current: f64,
    /// Hz
    pub bandwidth: f64,
}

impl Default for PhotodiodeParams {
    /// InGaAs pin diode: 0.78 A/W, 10 GHz, < 1 uA dark, ~30 mA saturation.
    fn default() -> Self {
        Self {
            responsivity: 0.78,
            dark_current: 1.0e-6,
            saturation_current: 30.0e-3,
            bandwidth: 10.0e9,
        }
    }
}

impl PhotodiodeParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("responsivity", self.responsivity),
            ("dark_current", self.dark_current),
            ("saturation_current", self.saturation_current),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "photodiode {name} must be finite and non-negative, got {v}"
                )));
            }
        }
        if self.responsivity > RESPONSIVITY_WARN_A_PER_W {
            warn!(
                "responsivity {} A/W implies quantum efficiency above 1 at 1550 nm",
                self.responsivity
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalancedDetectorConfig {
    pub diode_a: PhotodiodeParams,
    pub diode_b: PhotodiodeParams,
    /// Output load `R0`, ohms.
    pub load_resistance: f64,
    /// -3 dB frequency of the detector response, Hz.
    pub transfer_cutoff: f64,
    /// Butterworth order of the detector response.
    pub transfer_order: u32,
    /// White electronic floor in dBm/Hz into `R0`; `None` for a noiseless
    /// amplifier.
    pub electronic_noise_dbm_hz: Option<f64>,
    /// Fractional gain difference between the two detection arms.
    pub balance_mismatch: f64,
    /// Extra propagation delay of arm b, seconds.
    pub path_delay_mismatch: f64,
    /// Reported CMRR when the subtraction is exact.
    pub cmrr_ceiling_db: f64,
}

impl Default for BalancedDetectorConfig {
    fn default() -> Self {
        Self {
            diode_a: PhotodiodeParams::default(),
            diode_b: PhotodiodeParams::default(),
            load_resistance: 50.0,
            transfer_cutoff: 4.0e9,
            transfer_order: 2,
            electronic_noise_dbm_hz: Some(-176.0),
            balance_mismatch: 1.0e-3,
            path_delay_mismatch: 5.0e-12,
            cmrr_ceiling_db: 120.0,
        }
    }
}

impl BalancedDetectorConfig {
    pub fn validate(&self) -> Result<()> {
        self.diode_a.validate()?;
        self.diode_b.validate()?;
        let positive = [
            ("load_resistance", self.load_resistance),
            ("transfer_cutoff", self.transfer_cutoff),
            ("cmrr_ceiling_db", self.cmrr_ceiling_db),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.transfer_order == 0 {
            return Err(Error::InvalidConfig(
                "transfer_order must be at least 1".into(),
            ));
        }
        if !(self.balance_mismatch >= 0.0 && self.balance_mismatch < 2.0) {
            return Err(Error::InvalidConfig(format!(
                "balance_mismatch must lie in [0, 2), got {}",
                self.balance_mismatch
            )));
        }
        if !self.path_delay_mismatch.is_finite() {
            return Err(Error::InvalidConfig(
                "path_delay_mismatch must be finite".into(),
            ));
        }
        if let Some(db) = self.electronic_noise_dbm_hz {
            if !db.is_finite() {
                return Err(Error::InvalidConfig(
                    "electronic noise level must be finite".into(),
                ));
            }
        }
        Ok(())
    }

    /// Mean responsivity of the pair, A/W.
    pub fn responsivity(&self) -> f64 {
        0.5 * (self.diode_a.responsivity + self.diode_b.responsivity)
    }

    pub fn saturation_current(&self) -> f64 {
        self.diode_a
            .saturation_current
            .min(self.diode_b.saturation_current)
    }

    /// Electronic floor in W/Hz (zero when disabled).
    pub fn floor_psd(&self) -> f64 {
        self.electronic_noise_dbm_hz
            .map_or(0.0, |db| 1e-3 * 10f64.powf(db / 10.0))
    }

    /// Same detector without the electronic floor (LO-only contributions).
    pub fn noiseless(&self) -> Self {
        Self {
            electronic_noise_dbm_hz: None,
            ..self.clone()
        }
    }
}

/// Butterworth low-pass, normalised to `H(0) = 1`.
pub fn transfer_function(f: f64, det: &BalancedDetectorConfig) -> Complex64 {
    let n = det.transfer_order.max(1) as usize;
    let s = Complex64::new(0.0, f / det.transfer_cutoff);
    (1..=n).fold(Complex64::new(1.0, 0.0), |acc, k| {
        let theta = PI * (2 * k + n - 1) as f64 / (2 * n) as f64;
        let pole = Complex64::from_polar(1.0, theta);
        acc * (-pole) / (s - pole)
    })
}

/// `N(f) = 2 q P_opt A R0 |H(f)|^2`, W/Hz.
pub fn shot_noise_psd(f: f64, p_opt: f64, det: &BalancedDetectorConfig) -> Result<f64> {
    if !(p_opt >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "optical power must be non-negative, got {p_opt}"
        )));
    }
    Ok(2.0
        * ELEMENTARY_CHARGE
        * p_opt
        * det.responsivity()
        * det.load_resistance
        * transfer_function(f, det).norm_sqr())
}

/// Bridge between the dimensionless homodyne model and amperes.
///
/// The local-oscillator intensity is expressed as photoelectrons per sample,
/// `I_lo = A P_opt / (q fs)`, and a difference-current value `j` maps to
/// `kappa * j` amperes with `kappa = q fs / (2 sigma)`. With these two choices
/// the symmetric quadrature point (`j = -2 e' y`) has a white current PSD of
/// exactly `2 q A P_opt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitCalibration {
    pub lo_intensity: f64,
    pub amperes_per_unit: f64,
}

pub fn calibrate(
    p_opt: f64,
    det: &BalancedDetectorConfig,
    sample_rate: f64,
    sigma2_vac: f64,
) -> Result<UnitCalibration> {
    if !(p_opt >= 0.0) || !(sample_rate > 0.0) || !(sigma2_vac > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "calibration needs P_opt >= 0, fs > 0, sigma^2 > 0 (got {p_opt}, {sample_rate}, {sigma2_vac})"
        )));
    }
    let photocurrent = det.responsivity() * p_opt;
    Ok(UnitCalibration {
        lo_intensity: photocurrent / (ELEMENTARY_CHARGE * sample_rate),
        amperes_per_unit: ELEMENTARY_CHARGE * sample_rate / (2.0 * sigma2_vac.sqrt()),
    })
}

/// Time-domain detector applied to a difference-current record in amperes.
///
/// In order: common-mode leakage `(m/2) * (j1 + j2)` when the record carries
/// a sum current, filtering by `H(f)` (frequency-domain, whole record),
/// white electronic noise, and hard clipping at the diode saturation current.
/// Electronic noise is drawn from ChaCha stream `ELECTRONIC_STREAM` of the
/// record's seed.
pub fn apply_detector(
    series: &NoiseTimeSeries,
    det: &BalancedDetectorConfig,
) -> Result<NoiseTimeSeries> {
    det.validate()?;
    let fs = series.sample_rate;
    if fs < 2.0 * det.transfer_cutoff {
        warn!(
            "sample rate {fs:e} Hz is below twice the detector cutoff {:e} Hz; response will alias",
            det.transfer_cutoff
        );
    }
    let n = series.len();
    let mut signal: Vec<f64> = match &series.common_mode {
        Some(cm) => series
            .samples
            .iter()
            .zip(cm)
            .map(|(d, c)| d + 0.5 * det.balance_mismatch * c)
            .collect(),
        None => series.samples.clone(),
    };

    if n > 1 {
        filter_in_place(&mut signal, fs, det);
    }

    let floor = det.floor_psd();
    if floor > 0.0 {
        let std = (floor / det.load_resistance * 0.5 * fs).sqrt();
        let mut rng = stream_rng(series.seed, ELECTRONIC_STREAM);
        for v in signal.iter_mut() {
            *v += std * rng.sample::<f64, _>(StandardNormal);
        }
    }

    let sat = det.saturation_current();
    let mut clipped = 0usize;
    for v in signal.iter_mut() {
        if v.abs() > sat {
            *v = sat.copysign(*v);
            clipped += 1;
        }
    }
    if clipped > 0 {
        warn!("{clipped} of {n} samples clipped at the saturation current {sat:e} A");
    }

    Ok(NoiseTimeSeries {
        samples: signal,
        sample_rate: fs,
        seed: series.seed,
        label: format!("{} | detector", series.label),
        common_mode: None,
    })
}

fn filter_in_place(signal: &mut [f64], fs: f64, det: &BalancedDetectorConfig) {
    let n = signal.len();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward.process(&mut buf);
    for k in 1..=n / 2 {
        let h = transfer_function(k as f64 * fs / n as f64, det);
        if 2 * k == n {
            // The Nyquist bin must stay real.
            buf[k] *= h.norm();
        } else {
            buf[k] *= h;
            buf[n - k] *= h.conj();
        }
    }
    inverse.process(&mut buf);
    let scale = 1.0 / n as f64;
    for (v, z) in signal.iter_mut().zip(&buf) {
        *v = z.re * scale;
    }
}

/// Common-mode rejection in dB: response to an antiphase (differential)
/// modulation over response to an in-phase one.
///
/// Arm gains are `1 +- m/2`, each diode rolls off as a single pole at its own
/// bandwidth, and arm b carries an extra delay. Exact cancellation reports
/// the configured ceiling.
pub fn cmrr(f: f64, det: &BalancedDetectorConfig) -> f64 {
    let m = det.balance_mismatch;
    let pole = |bw: f64| {
        if bw > 0.0 {
            Complex64::new(1.0, f / bw).inv()
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let g_a = pole(det.diode_a.bandwidth) * (1.0 + 0.5 * m);
    let g_b = pole(det.diode_b.bandwidth)
        * (1.0 - 0.5 * m)
        * Complex64::from_polar(1.0, -2.0 * PI * f * det.path_delay_mismatch);
    let differential = (g_a + g_b).norm();
    let common = (g_a - g_b).norm();
    if common == 0.0 {
        return det.cmrr_ceiling_db;
    }
    (20.0 * (differential / common).log10()).min(det.cmrr_ceiling_db)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClearanceReport {
    pub frequencies: Vec<f64>,
    pub quantum_psd: Vec<f64>,
    pub floor_psd: Vec<f64>,
    pub clearance_db: Vec<f64>,
    pub threshold_db: f64,
    /// Upper edge of the band starting at the lowest frequency in which every
    /// point reaches the threshold (0 if the first point already fails).
    pub band_limit_hz: f64,
}

impl ClearanceReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "frequency_hz,quantum_psd_w_hz,floor_psd_w_hz,clearance_db"
        )?;
        for i in 0..self.frequencies.len() {
            writeln!(
                out,
                "{:e},{:e},{:e},{}",
                self.frequencies[i],
                self.quantum_psd[i],
                self.floor_psd[i],
                format_sig(self.clearance_db[i], 6)
            )?;
        }
        Ok(())
    }
}

fn clearance_value(quantum: f64, floor: f64, ceiling: f64) -> f64 {
    if floor <= 0.0 {
        return ceiling;
    }
    (10.0 * (1.0 + quantum / floor).log10()).min(ceiling)
}

/// Upper edge of the contiguous band from `frequencies[0]` where `db >= threshold`.
pub fn band_limit(frequencies: &[f64], db: &[f64], threshold_db: f64) -> f64 {
    let mut limit = 0.0;
    for (f, c) in frequencies.iter().zip(db) {
        if *c >= threshold_db {
            limit = *f;
        } else {
            break;
        }
    }
    limit
}

/// Predicted clearance of the shot noise over the electronic floor on a
/// uniform grid `0..=band_hz` with `n_points` points.
pub fn clearance(
    p_opt: f64,
    det: &BalancedDetectorConfig,
    band_hz: f64,
    n_points: usize,
    threshold_db: f64,
) -> Result<ClearanceReport> {
    if !(p_opt > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "clearance needs positive optical power, got {p_opt}"
        )));
    }
    if n_points < 2 || !(band_hz > 0.0) {
        return Err(Error::InvalidConfig(
            "clearance grid needs >= 2 points and a positive band".into(),
        ));
    }
    det.validate()?;
    let floor = det.floor_psd();
    let frequencies: Vec<f64> = (0..n_points)
        .map(|i| band_hz * i as f64 / (n_points - 1) as f64)
        .collect();
    let quantum_psd = frequencies
        .iter()
        .map(|&f| shot_noise_psd(f, p_opt, det))
        .collect::<Result<Vec<_>>>()?;
    let clearance_db: Vec<f64> = quantum_psd
        .iter()
        .map(|&q| clearance_value(q, floor, det.cmrr_ceiling_db))
        .collect();
    let band_limit_hz = band_limit(&frequencies, &clearance_db, threshold_db);
    Ok(ClearanceReport {
        floor_psd: vec![floor; n_points],
        frequencies,
        quantum_psd,
        clearance_db,
        threshold_db,
        band_limit_hz,
    })
}

/// Clearance measured from two simulated spectra, LO on over LO off.
pub fn measured_clearance(
    on: &PsdEstimate,
    off: &PsdEstimate,
    threshold_db: f64,
) -> Result<ClearanceReport> {
    if on.frequencies.len() != off.frequencies.len() {
        return Err(Error::InvalidConfig(
            "spectra have different frequency grids".into(),
        ));
    }
    let clearance_db: Vec<f64> = on
        .power
        .iter()
        .zip(&off.power)
        .map(|(p_on, p_off)| 10.0 * (p_on / p_off).log10())
        .collect();
    // Skip the DC bin: it carries the common-mode offset, not noise.
    let band_limit_hz = band_limit(&on.frequencies[1..], &clearance_db[1..], threshold_db);
    Ok(ClearanceReport {
        frequencies: on.frequencies.clone(),
        quantum_psd: on
            .power
            .iter()
            .zip(&off.power)
            .map(|(a, b)| a - b)
            .collect(),
        floor_psd: off.power.clone(),
        clearance_db,
        threshold_db,
        band_limit_hz,
    })
}

/// Formats `v` with `digits` significant digits.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
    if (-5..15).contains(&magnitude) {
        format!("{v:.decimals$}")
    } else {
        format!("{:.*e}", digits - 1, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det() -> BalancedDetectorConfig {
        BalancedDetectorConfig::default()
    }

    #[test]
    fn butterworth_points() {
        let d = det();
        assert!((transfer_function(0.0, &d) - 1.0).norm() < 1e-15);
        assert!((transfer_function(d.transfer_cutoff, &d).norm_sqr() - 0.5).abs() < 1e-14);
        let h10 = transfer_function(10.0 * d.transfer_cutoff, &d).norm_sqr();
        assert!((h10 - 1.0 / (1.0 + 1e4)).abs() < 1e-15);
        for order in 1..6 {
            let d = BalancedDetectorConfig {
                transfer_order: order,
                ..det()
            };
            for &r in &[0.1, 0.7, 1.0, 2.3] {
                let h = transfer_function(r * d.transfer_cutoff, &d).norm_sqr();
                assert!((h - 1.0 / (1.0 + r.powi(2 * order as i32))).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn transfer_magnitude_monotone() {
        let d = BalancedDetectorConfig {
            transfer_order: 4,
            ..det()
        };
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let h = transfer_function(i as f64 * 5e7, &d).norm();
            assert!(h <= prev + 1e-15);
            prev = h;
        }
    }

    #[test]
    fn shot_noise_hand_value() {
        let d = BalancedDetectorConfig {
            load_resistance: 50.0,
            ..det()
        };
        let n0 = shot_noise_psd(0.0, 1e-3, &d).unwrap();
        let hand = 2.0 * 1.602176634e-19 * 1e-3 * 0.78 * 50.0;
        assert!((n0 / hand - 1.0).abs() < 1e-12);
        assert!((n0 / 1.25e-20 - 1.0).abs() < 0.01);
        let dbm_hz = 10.0 * (n0 / 1e-3).log10();
        assert!((dbm_hz + 169.0).abs() < 0.1);
        assert_eq!(shot_noise_psd(3e9, 0.0, &d).unwrap(), 0.0);
        assert!(shot_noise_psd(0.0, -1e-3, &d).is_err());
    }

    #[test]
    fn shot_noise_linear_in_power() {
        let d = det();
        for &f in &[0.0, 1e9, 4e9, 9e9] {
            let a = shot_noise_psd(f, 1e-3, &d).unwrap();
            let b = shot_noise_psd(f, 2e-3, &d).unwrap();
            assert!((10.0 * (b / a).log10() - 3.0103).abs() < 1e-4);
        }
    }

    #[test]
    fn calibration_reproduces_shot_level() {
        let d = det();
        let cal = calibrate(1e-3, &d, 20e9, 0.25).unwrap();
        // White level of j = -2 e' y: 2 * Var(j) / fs = 2 * 4 I sigma^2 / fs.
        let var_units = 4.0 * cal.lo_intensity * 0.25;
        let psd_amps = 2.0 * var_units * cal.amperes_per_unit.powi(2) / 20e9;
        let target = 2.0 * ELEMENTARY_CHARGE * 0.78e-3;
        assert!((psd_amps / target - 1.0).abs() < 1e-12);
        // At sigma^2 = 1/4 the DC sum current maps to A * P_opt as well.
        assert!((cal.lo_intensity * cal.amperes_per_unit - 0.78e-3).abs() < 1e-15);
        assert!(calibrate(1e-3, &d, 20e9, 0.0).is_err());
    }

    #[test]
    fn detector_passes_slow_signals() {
        let d = BalancedDetectorConfig {
            electronic_noise_dbm_hz: None,
            ..det()
        };
        let fs = 20e9;
        let n = 4096;
        let f0 = 8.0 * fs / n as f64;
        let input: Vec<f64> = (0..n)
            .map(|i| 1e-3 + 1e-4 * (2.0 * PI * f0 * i as f64 / fs).sin())
            .collect();
        let s = NoiseTimeSeries::new(input, fs, 1, "dc");
        let out = apply_detector(&s, &d).unwrap();
        // A bin-centred tone comes out scaled and shifted by H(f0).
        let h = transfer_function(f0, &d);
        let err = out
            .samples
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let expected =
                    1e-3 + 1e-4 * h.norm() * (2.0 * PI * f0 * i as f64 / fs + h.arg()).sin();
                (v - expected).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "max error {err:e}");
    }

    #[test]
    fn detector_clips_at_saturation() {
        let d = BalancedDetectorConfig {
            electronic_noise_dbm_hz: None,
            ..det()
        };
        let s = NoiseTimeSeries::new(vec![0.05; 256], 20e9, 1, "big");
        let out = apply_detector(&s, &d).unwrap();
        assert!(out.samples.iter().all(|&v| v == 30e-3));
        let s = NoiseTimeSeries::new(vec![-0.05; 256], 20e9, 1, "big");
        let out = apply_detector(&s, &d).unwrap();
        assert!(out.samples.iter().all(|&v| v == -30e-3));
    }

    #[test]
    fn common_mode_leaks_with_mismatch() {
        let d = BalancedDetectorConfig {
            electronic_noise_dbm_hz: None,
            balance_mismatch: 0.01,
            ..det()
        };
        let mut s = NoiseTimeSeries::new(vec![0.0; 128], 20e9, 1, "cm");
        s.common_mode = Some(vec![2e-3; 128]);
        let out = apply_detector(&s, &d).unwrap();
        assert!(out.samples.iter().all(|&v| (v - 1e-5).abs() < 1e-15));
    }

    #[test]
    fn cmrr_examples() {
        let ideal = BalancedDetectorConfig {
            balance_mismatch: 0.0,
            path_delay_mismatch: 0.0,
            ..det()
        };
        assert_eq!(cmrr(1e9, &ideal), 120.0);

        let gain_only = BalancedDetectorConfig {
            balance_mismatch: 1e-3,
            ..ideal.clone()
        };
        // Two-diode subtraction oracle: gains 1 +- m/2 give 20 log10(2/m).
        let oracle = 20.0 * (2.0f64 / 1e-3).log10();
        assert!((cmrr(1.0, &gain_only) - oracle).abs() < 1e-6);
        assert!((cmrr(1.0, &gain_only) - 66.0).abs() < 0.1);

        let d = det();
        let mut prev = f64::INFINITY;
        for i in 0..=300 {
            let c = cmrr(i as f64 * 1e7, &d);
            assert!(c <= prev + 1e-12);
            assert!(c >= 15.0);
            prev = c;
        }
    }

    #[test]
    fn clearance_examples() {
        let d = det();
        let r = clearance(10e-3, &d, 6e9, 601, 12.0).unwrap();
        for i in 0..r.frequencies.len() {
            let expect = 10.0 * (1.0 + r.quantum_psd[i] / r.floor_psd[i]).log10();
            assert!((r.clearance_db[i] - expect).abs() < 1e-12);
        }
        assert!(r.band_limit_hz >= 4e9);

        // Halving the power in the shot-dominated regime costs ~3 dB.
        let loud = BalancedDetectorConfig {
            electronic_noise_dbm_hz: Some(-200.0),
            ..det()
        };
        let a = clearance(10e-3, &loud, 1e9, 3, 12.0).unwrap();
        let b = clearance(5e-3, &loud, 1e9, 3, 12.0).unwrap();
        assert!((a.clearance_db[0] - b.clearance_db[0] - 3.0103).abs() < 0.01);

        let silent = BalancedDetectorConfig {
            electronic_noise_dbm_hz: None,
            ..det()
        };
        let r = clearance(1e-3, &silent, 1e9, 3, 12.0).unwrap();
        assert!(r.clearance_db.iter().all(|&c| c == 120.0));
        assert!(clearance(0.0, &d, 1e9, 3, 12.0).is_err());
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(format_sig(14.123456789, 6), "14.1235");
        assert_eq!(format_sig(0.001234567, 6), "0.00123457");
        assert_eq!(format_sig(120.0, 6), "120.000");
    }
}
