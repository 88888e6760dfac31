//! One function per subcommand. Each writes its CSV (and JSON sidecar) into
//! the output directory and returns a one-line summary.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde_json::{json, Value};

use qnoise_core::controller::{run_until_balanced, write_trace_csv, BalanceEnvironment};
use qnoise_core::detector::{
    apply_detector, calibrate, clearance, measured_clearance, shot_noise_psd,
};
use qnoise_core::homodyne::LocalOscillator;
use qnoise_core::interferometer::InterferometerConfig;
use qnoise_core::qrng::{
    default_ratio, extract, min_entropy, quantize, randomness_checks, MIN_CHECK_BITS,
};
use qnoise_core::sampler::{derive_seed, generate_timeseries, NoiseTimeSeries, SamplerConfig};
use qnoise_core::scan::{fringe_sweep, phase_grid, power_scan, PowerScanConfig};
use qnoise_core::series_io::write_binary;
use qnoise_core::spectrum::{estimate_psd, PsdEstimate};
use qnoise_core::{Error, Result};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
    pub results: Value,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_sidecar(
    cfg: &RunConfig,
    dir: &Path,
    name: &str,
    command: &str,
    results: &Value,
) -> Result<Option<PathBuf>> {
    if !cfg.output.write_sidecars {
        return Ok(None);
    }
    let path = dir.join(name);
    let doc = json!({
        "command": command,
        "config": serde_json::to_value(cfg).expect("config serialises"),
        "results": results,
    });
    let mut out = create(&path)?;
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(Some(path))
}

fn finish(
    cfg: &RunConfig,
    dir: &Path,
    command: &str,
    mut files: Vec<PathBuf>,
    results: Value,
    summary: String,
) -> Result<CommandOutcome> {
    if let Some(p) = write_sidecar(cfg, dir, &format!("{command}.json"), command, &results)? {
        files.push(p);
    }
    Ok(CommandOutcome {
        summary,
        files,
        results,
    })
}

/// Difference-current record scaled to amperes, ready for the detector.
fn current_record(
    interferometer: &InterferometerConfig,
    lo: &LocalOscillator,
    sampler: &SamplerConfig,
    amperes_per_unit: f64,
) -> Result<NoiseTimeSeries> {
    Ok(generate_timeseries(interferometer, lo, sampler)?.scaled(amperes_per_unit))
}

fn centered(mut s: NoiseTimeSeries) -> NoiseTimeSeries {
    let m = s.mean();
    s.samples.iter_mut().for_each(|v| *v -= m);
    s
}

fn to_watts(mut psd: PsdEstimate, load: f64) -> PsdEstimate {
    psd.power.iter_mut().for_each(|p| *p *= load);
    psd
}

pub fn cmd_fringe(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let interferometer = cfg.interferometer()?;
    let lo = cfg.lo_oscillator()?;
    let sigma2 = if cfg.fringe.include_vacuum {
        cfg.sampler.sigma2_vac
    } else {
        0.0
    };
    let sweep = fringe_sweep(
        &interferometer,
        lo.intensity(),
        sigma2,
        &phase_grid(cfg.fringe.n_phases),
    )?;

    let path = dir.join("fringe.csv");
    let mut out = create(&path)?;
    writeln!(out, "phi_rad,output1,output2,difference")?;
    for p in &sweep.points {
        writeln!(
            out,
            "{},{},{},{}",
            p.phi, p.output1, p.output2, p.difference
        )?;
    }
    out.flush()?;

    let results = json!({
        "visibility": sweep.visibility,
        "difference_amplitude": sweep.difference_amplitude,
        "lo_intensity": lo.intensity(),
    });
    let summary = format!(
        "fringe: visibility {:.6}, difference amplitude {:.6}",
        sweep.visibility, sweep.difference_amplitude
    );
    finish(cfg, dir, "fringe", vec![path], results, summary)
}

pub fn cmd_balance(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let env = BalanceEnvironment::new(cfg.interferometer()?, cfg.lo_oscillator()?, cfg.sampler()?);
    let controller = cfg.controller();
    let path = dir.join("balance_trace.csv");
    let outcome = match run_until_balanced(&env, &controller) {
        Ok(o) => o,
        Err(Error::NotConverged { iterations, trace }) => {
            write_trace_csv(&trace, create(&path)?)?;
            return Err(Error::NotConverged { iterations, trace });
        }
        Err(e) => return Err(e),
    };
    write_trace_csv(&outcome.trace, create(&path)?)?;

    let phase = outcome.state.phase;
    let residual = env.residual_imbalance(phase)?;
    let offset_over_pi = (outcome.analytic_root - FRAC_PI_2) / PI;
    let results = json!({
        "converged": outcome.state.converged,
        "iterations": outcome.state.iteration,
        "final_phase_rad": phase,
        "final_voltage_v": outcome.state.control_voltage,
        "analytic_root_rad": outcome.analytic_root,
        "root_offset_over_pi": offset_over_pi,
        "phase_error_rad": phase - outcome.analytic_root,
        "residual_imbalance": residual,
    });
    let summary = format!(
        "balance: locked in {} iterations at phi = {:.9} rad (analytic root offset {:+.4e} pi), residual imbalance {:.3e}",
        outcome.state.iteration, phase, offset_over_pi, residual
    );
    finish(cfg, dir, "balance", vec![path], results, summary)
}

fn psd_self_test(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    // Symmetric lossless at the quadrature point gives j = -2 e' y: white,
    // unit variance for I = 1, sigma^2 = 1/4.
    let sampler = SamplerConfig {
        sigma2_vac: 0.25,
        rin: Default::default(),
        ..cfg.sampler()?
    };
    let series = generate_timeseries(
        &InterferometerConfig::symmetric(FRAC_PI_2),
        &LocalOscillator::real(1.0),
        &sampler,
    )?;
    let psd = estimate_psd(&series, cfg.psd.segment_length, cfg.psd.window.into())?;
    let expected = 2.0 / sampler.sample_rate;
    let last = psd.power.len() - 1;
    let devs: Vec<f64> = psd.power[1..last]
        .iter()
        .map(|p| p / expected - 1.0)
        .collect();
    let rms = (devs.iter().map(|d| d * d).sum::<f64>() / devs.len() as f64).sqrt();
    let max_dev = devs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let flat = rms < 0.05;

    let path = dir.join("psd_selftest.csv");
    let mut out = create(&path)?;
    writeln!(out, "frequency_hz,psd_per_hz,expected_per_hz")?;
    for (f, p) in psd.frequencies.iter().zip(&psd.power) {
        writeln!(out, "{f},{p},{expected}")?;
    }
    out.flush()?;

    let results = json!({
        "mode": "self_test",
        "n_averages": psd.n_averages,
        "rms_deviation": rms,
        "max_deviation": max_dev,
        "flat_within_5_percent": flat,
    });
    let summary = format!(
        "psd self-test: {} averages, rms deviation {:.2}% ({})",
        psd.n_averages,
        100.0 * rms,
        if flat { "flat" } else { "NOT flat" }
    );
    finish(cfg, dir, "psd", vec![path], results, summary)
}

pub fn cmd_psd(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    if cfg.psd.self_test {
        return psd_self_test(cfg, dir);
    }
    let interferometer = cfg.interferometer()?;
    let sampler = cfg.sampler()?;
    let det = cfg.detector()?;
    let p_opt = cfg.lo_power_w();
    let cal = calibrate(p_opt, &det, sampler.sample_rate, sampler.sigma2_vac)?;
    let window = cfg.psd.window.into();
    let seg = cfg.psd.segment_length;

    let on = apply_detector(
        &current_record(
            &interferometer,
            &cfg.lo_oscillator()?,
            &sampler,
            cal.amperes_per_unit,
        )?,
        &det,
    )?;
    let off_sampler = SamplerConfig {
        seed: derive_seed(sampler.seed, 1),
        ..sampler.clone()
    };
    let off = apply_detector(
        &current_record(
            &interferometer,
            &LocalOscillator::real(0.0),
            &off_sampler,
            cal.amperes_per_unit,
        )?,
        &det,
    )?;
    let mut files = Vec::new();
    if let Some(name) = &cfg.output.timeseries_file {
        let path = dir.join(name);
        write_binary(&on, create(&path)?)?;
        files.push(path);
    }

    let on_psd = to_watts(
        estimate_psd(&centered(on), seg, window)?,
        det.load_resistance,
    );
    let off_psd = to_watts(
        estimate_psd(&centered(off), seg, window)?,
        det.load_resistance,
    );
    let measured = measured_clearance(&on_psd, &off_psd, cfg.psd.threshold_db)?;

    let path = dir.join("psd.csv");
    let mut out = create(&path)?;
    writeln!(
        out,
        "frequency_hz,lo_on_w_per_hz,lo_off_w_per_hz,model_w_per_hz,clearance_db"
    )?;
    for i in 0..on_psd.frequencies.len() {
        let f = on_psd.frequencies[i];
        let model = shot_noise_psd(f, p_opt, &det)? + det.floor_psd();
        writeln!(
            out,
            "{f},{},{},{model},{}",
            on_psd.power[i], off_psd.power[i], measured.clearance_db[i]
        )?;
    }
    out.flush()?;
    files.push(path);

    let predicted = clearance(
        p_opt,
        &det,
        cfg.psd.band_ghz * 1e9,
        cfg.psd.n_points,
        cfg.psd.threshold_db,
    )?;
    let path = dir.join("clearance.csv");
    predicted.write_csv(create(&path)?)?;
    files.push(path);

    let results = json!({
        "mode": "detector",
        "n_averages": on_psd.n_averages,
        "n0_w_per_hz": shot_noise_psd(0.0, p_opt, &det)?,
        "floor_w_per_hz": det.floor_psd(),
        "threshold_db": cfg.psd.threshold_db,
        "predicted_band_limit_hz": predicted.band_limit_hz,
        "measured_band_limit_hz": measured.band_limit_hz,
    });
    info!(
        "LO-on and LO-off spectra estimated with {} averages",
        on_psd.n_averages
    );
    let summary = format!(
        "psd: {} dB clearance up to {:.3} GHz predicted, {:.3} GHz measured",
        cfg.psd.threshold_db,
        predicted.band_limit_hz / 1e9,
        measured.band_limit_hz / 1e9
    );
    finish(cfg, dir, "psd", files, results, summary)
}

pub fn cmd_power_scan(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let scan = PowerScanConfig {
        powers_w: cfg.power_scan.powers_mw.iter().map(|p| p * 1e-3).collect(),
        segment_length: cfg.psd.segment_length,
        window: cfg.psd.window.into(),
        band_hz: (
            cfg.power_scan.band_lo_ghz * 1e9,
            cfg.power_scan.band_hi_ghz * 1e9,
        ),
    };
    let result = power_scan(
        &cfg.interferometer()?,
        &cfg.sampler()?,
        &cfg.detector()?,
        &scan,
    )?;

    let path = dir.join("power_scan.csv");
    let mut out = create(&path)?;
    writeln!(out, "power_mw,band_power_w,excess_power_w")?;
    for p in &result.points {
        writeln!(
            out,
            "{},{},{}",
            p.power_w * 1e3,
            p.band_power_w,
            p.excess_power_w
        )?;
    }
    out.flush()?;

    let q = &result.quadratic;
    let results = json!({
        "floor_power_w": result.floor_power_w,
        "linear_slope_w_per_w": result.linear.slope,
        "linear_r_squared": result.linear.r_squared,
        "quadratic_linear_term": q.linear,
        "quadratic_term": q.quadratic,
        "quadratic_term_stderr": q.quadratic_stderr,
        "quadratic_term_t": q.quadratic_t(),
    });
    let summary = format!(
        "power-scan: linear R^2 = {:.6}, quadratic term t = {:.2}",
        result.linear.r_squared,
        q.quadratic_t()
    );
    finish(cfg, dir, "power_scan", vec![path], results, summary)
}

pub fn cmd_qrng(cfg: &RunConfig, dir: &Path) -> Result<CommandOutcome> {
    let adc = cfg.adc();
    let h_min = min_entropy(&adc, 1.0)?;
    let ratio = cfg
        .adc
        .extraction_ratio
        .unwrap_or_else(|| default_ratio(h_min, adc.bits));
    let n_bits = cfg.adc.n_bits;
    let n_samples = ((n_bits as f64 + 1.0) / (ratio * adc.bits as f64)).ceil() as usize;
    let sampler = SamplerConfig {
        n_samples: n_samples.max(1),
        ..cfg.sampler()?
    };
    let series = generate_timeseries(&cfg.interferometer()?, &cfg.lo_oscillator()?, &sampler)?;
    let codes = quantize(&series, &adc)?;
    let mut bits = extract(&codes, adc.bits, h_min, ratio, cfg.adc.extractor_seed)?;
    bits.truncate(n_bits);

    let path = dir.join("qrng_bits.bin");
    let mut out = create(&path)?;
    out.write_all(&bits.bytes)?;
    out.flush()?;

    let checks = if bits.len() >= MIN_CHECK_BITS {
        let r = randomness_checks(&bits)?;
        json!({
            "monobit_z": r.monobit_z,
            "runs_z": r.runs_z,
            "autocorrelation_z": r.autocorrelation_z,
            "pass": r.pass,
        })
    } else {
        Value::Null
    };
    let pass = checks.get("pass").and_then(Value::as_bool);
    let results = json!({
        "n_bits": bits.len(),
        "n_samples": n_samples,
        "min_entropy_bits_per_sample": h_min,
        "extraction_ratio": ratio,
        "bit_order": "msb_first",
        "checks": checks,
    });
    let summary = format!(
        "qrng: {} bits at {:.4} bits/sample min-entropy, ratio {:.4}, checks {}",
        bits.len(),
        h_min,
        ratio,
        match pass {
            Some(true) => "passed",
            Some(false) => "FAILED",
            None => "skipped (stream too short)",
        }
    );
    finish(cfg, dir, "qrng", vec![path], results, summary)
}
