//! Phase and power sweeps, with the through-origin fits used to read them.

use std::f64::consts::PI;

use log::debug;

use crate::detector::{apply_detector, calibrate, BalancedDetectorConfig};
use crate::error::{Error, Result};
use crate::homodyne::{transfer_coeffs, LocalOscillator};
use crate::interferometer::{compose_transfer, InterferometerConfig};
use crate::sampler::{derive_seed, generate_timeseries, SamplerConfig};
use crate::spectrum::{estimate_psd, Window};

/// `n` equally spaced phases over `[0, 2 pi]`, both ends included.
pub fn phase_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..n)
            .map(|k| 2.0 * PI * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint {
    pub phi: f64,
    /// Mean photon numbers at the two outputs.
    pub output1: f64,
    pub output2: f64,
    /// Mean difference current `<n1> - <n2>`.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeSweep {
    pub points: Vec<FringePoint>,
    /// `(max - min) / (max + min)` of output 1 over the grid.
    pub visibility: f64,
    /// Half the peak-to-peak difference current, per unit LO intensity.
    pub difference_amplitude: f64,
}

/// Mean outputs versus phase for a coherent LO of intensity `lo_intensity`
/// and a vacuum input of quadrature variance `sigma2_vac` (0 turns it off).
pub fn fringe_sweep(
    base: &InterferometerConfig,
    lo_intensity: f64,
    sigma2_vac: f64,
    phases: &[f64],
) -> Result<FringeSweep> {
    if phases.is_empty() {
        return Err(Error::InvalidConfig("phase grid is empty".into()));
    }
    if !(lo_intensity > 0.0) || !(sigma2_vac >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "fringe sweep needs I_lo > 0 and sigma^2 >= 0 (got {lo_intensity}, {sigma2_vac})"
        )));
    }
    let vac = 2.0 * sigma2_vac;
    let points = phases
        .iter()
        .map(|&phi| {
            let u = compose_transfer(&base.with_phase(phi))?;
            let output1 = u.u11.norm_sqr() * lo_intensity + u.u12.norm_sqr() * vac;
            let output2 = u.u21.norm_sqr() * lo_intensity + u.u22.norm_sqr() * vac;
            Ok(FringePoint {
                phi,
                output1,
                output2,
                difference: output1 - output2,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (lo1, hi1) = min_max(points.iter().map(|p| p.output1));
    let (lo_d, hi_d) = min_max(points.iter().map(|p| p.difference));
    let visibility = if hi1 + lo1 > 0.0 {
        (hi1 - lo1) / (hi1 + lo1)
    } else {
        0.0
    };
    Ok(FringeSweep {
        points,
        visibility,
        difference_amplitude: 0.5 * (hi_d - lo_d) / lo_intensity,
    })
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    /// Centered coefficient of determination.
    pub r_squared: f64,
}

/// Least-squares `y = b x`.
pub fn fit_linear_through_origin(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    check_fit_input(x, y, 2)?;
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all abscissae are zero"));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a).powi(2)).sum();
    Ok(LinearFit {
        slope,
        r_squared: r_squared(y, ss_res),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub linear: f64,
    pub quadratic: f64,
    pub quadratic_stderr: f64,
    pub r_squared: f64,
}

impl QuadraticFit {
    pub fn quadratic_t(&self) -> f64 {
        self.quadratic / self.quadratic_stderr
    }
}

/// Least-squares `y = b1 x + b2 x^2`.
pub fn fit_quadratic_through_origin(x: &[f64], y: &[f64]) -> Result<QuadraticFit> {
    check_fit_input(x, y, 3)?;
    let (mut s2, mut s3, mut s4, mut t1, mut t2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        s2 += a * a;
        s3 += a * a * a;
        s4 += a * a * a * a;
        t1 += a * b;
        t2 += a * a * b;
    }
    let det = s2 * s4 - s3 * s3;
    if !(det.abs() > 1e-12 * s2 * s4) {
        return Err(Error::Degenerate(
            "quadratic fit needs at least two distinct nonzero abscissae",
        ));
    }
    let linear = (s4 * t1 - s3 * t2) / det;
    let quadratic = (s2 * t2 - s3 * t1) / det;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - linear * a - quadratic * a * a).powi(2))
        .sum();
    let dof = (x.len() - 2) as f64;
    let quadratic_stderr = (ss_res / dof * s2 / det).sqrt();
    Ok(QuadraticFit {
        linear,
        quadratic,
        quadratic_stderr,
        r_squared: r_squared(y, ss_res),
    })
}

fn check_fit_input(x: &[f64], y: &[f64], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidConfig(format!(
            "fit needs equal-length data, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < min {
        return Err(Error::InvalidConfig(format!(
            "fit needs at least {min} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit input"));
    }
    Ok(())
}

fn r_squared(y: &[f64], ss_res: f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerScanConfig {
    pub powers_w: Vec<f64>,
    pub segment_length: usize,
    pub window: Window,
    /// Integration band; DC is always excluded.
    pub band_hz: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerScanPoint {
    pub power_w: f64,
    /// Band-integrated electrical power into the load, W.
    pub band_power_w: f64,
    /// The same with the LO-off record subtracted.
    pub excess_power_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerScan {
    pub points: Vec<PowerScanPoint>,
    pub floor_power_w: f64,
    pub linear: LinearFit,
    pub quadratic: QuadraticFit,
}

/// Detected noise power versus LO power.
///
/// Point `k` (1-based) runs on seed `derive_seed(sampler.seed, k)`; the
/// LO-off reference uses index 0.
pub fn power_scan(
    interferometer: &InterferometerConfig,
    sampler: &SamplerConfig,
    detector: &BalancedDetectorConfig,
    scan: &PowerScanConfig,
) -> Result<PowerScan> {
    if scan.powers_w.is_empty() {
        return Err(Error::InvalidConfig("power grid is empty".into()));
    }
    if scan.powers_w.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
        return Err(Error::InvalidConfig(
            "optical powers must be finite and non-negative".into(),
        ));
    }
    sampler.validate()?;
    detector.validate()?;
    let u = compose_transfer(interferometer)?;
    let coeffs = transfer_coeffs(&u);
    if coeffs.quadrature_gain_sqr() == 0.0 {
        debug!("interferometer has no quadrature gain at this phase");
    }

    let band_power = |power_w: f64, index: u64| -> Result<f64> {
        let cal = calibrate(power_w, detector, sampler.sample_rate, sampler.sigma2_vac)?;
        let run = SamplerConfig {
            seed: derive_seed(sampler.seed, index),
            ..sampler.clone()
        };
        let lo = LocalOscillator::from_intensity(cal.lo_intensity);
        let series = generate_timeseries(interferometer, &lo, &run)?.scaled(cal.amperes_per_unit);
        let mut detected = apply_detector(&series, detector)?;
        // The leaked common-mode DC would otherwise spill into the first bins.
        let mean = detected.mean();
        detected.samples.iter_mut().for_each(|v| *v -= mean);
        let psd = estimate_psd(&detected, scan.segment_length, scan.window)?;
        let lo_hz = scan.band_hz.0.max(0.5 * psd.resolution());
        Ok(psd.band_power(lo_hz, scan.band_hz.1) * detector.load_resistance)
    };

    let floor_power_w = band_power(0.0, 0)?;
    let points = scan
        .powers_w
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let band_power_w = band_power(p, k as u64 + 1)?;
            Ok(PowerScanPoint {
                power_w: p,
                band_power_w,
                excess_power_w: band_power_w - floor_power_w,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let x: Vec<f64> = points.iter().map(|p| p.power_w).collect();
    let y: Vec<f64> = points.iter().map(|p| p.excess_power_w).collect();
    Ok(PowerScan {
        linear: fit_linear_through_origin(&x, &y)?,
        quadratic: fit_quadratic_through_origin(&x, &y)?,
        points,
        floor_power_w,
    })
}
