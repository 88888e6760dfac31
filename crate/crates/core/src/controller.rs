//! Operating-point control loop.
//!
//! The loop reads only the averaged difference current and writes only the
//! arm phase, through a control voltage on the modulator electrodes:
//! `phase = phi0 + pi * V / V_pi`, where `phi0` is the bias phase at zero
//! volts. A PI law drives the normalised DC error
//! `e = dc / (I_lo * fringe amplitude)` to zero.
//!
//! Linearised around the null, with `a = pi / V_pi` (the normalised DC slope
//! is `-sin(phi) ~ -1` there), the phase error obeys
//! `z^2 + (a kp + a ki - 1) z - a kp = 0`. Both roots lie inside the unit
//! circle with a dominant positive root when `a (kp + ki) < 1` and
//! `kp < ki / 4`; the defaults (`kp = 0.1 V`, `ki = 0.6 V`, `V_pi = 5 V`)
//! give roots 0.66 and -0.10.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::homodyne::{analytic_moments, transfer_coeffs, LocalOscillator};
use crate::interferometer::{compose_transfer, InterferometerConfig};
use crate::sampler::{derive_seed, generate_timeseries, SamplerConfig};

/// Sign of `d(DC)/d(phase)` at the operating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LockPolarity {
    Negative,
    Positive,
    /// Taken from the analytic fringe slope at the bias phase.
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControllerConfig {
    /// Volts per pi of phase.
    pub v_pi: f64,
    /// Volts per unit normalised DC error.
    pub gain_p: f64,
    /// Volts per unit normalised DC error per iteration.
    pub gain_i: f64,
    /// Samples averaged per DC measurement.
    pub dc_window: usize,
    /// Normalised residual DC accepted as balanced.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Output rail, volts.
    pub v_max: f64,
    /// Consecutive in-tolerance measurements required to declare lock.
    pub settle_count: usize,
    pub polarity: LockPolarity,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            v_pi: 5.0,
            gain_p: 0.1,
            gain_i: 0.6,
            dc_window: 10_000,
            tolerance: 1e-3,
            max_iterations: 200,
            v_max: 10.0,
            settle_count: 3,
            polarity: LockPolarity::Auto,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_pi > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "v_pi must be positive, got {}",
                self.v_pi
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.dc_window == 0 {
            return Err(Error::InvalidConfig("dc_window must be at least 1".into()));
        }
        if !(self.v_max > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "v_max must be positive, got {}",
                self.v_max
            )));
        }
        if !(self.gain_p >= 0.0 && self.gain_i >= 0.0) {
            return Err(Error::InvalidConfig(
                "controller gains must be non-negative".into(),
            ));
        }
        if self.settle_count == 0 {
            return Err(Error::InvalidConfig(
                "settle_count must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerState {
    pub control_voltage: f64,
    pub phase: f64,
    /// Phase at zero volts.
    pub bias_phase: f64,
    /// Integral contribution to the control voltage, volts.
    pub integral_accumulator: f64,
    pub iteration: usize,
    pub in_tolerance: usize,
    pub converged: bool,
}

impl ControllerState {
    pub fn at_bias(bias_phase: f64) -> Self {
        Self {
            control_voltage: 0.0,
            phase: bias_phase,
            bias_phase,
            integral_accumulator: 0.0,
            iteration: 0,
            in_tolerance: 0,
            converged: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub voltage: f64,
    pub phase: f64,
    pub dc_mean: f64,
}

pub fn write_trace_csv<W: Write>(trace: &[TraceRecord], mut out: W) -> Result<()> {
    writeln!(out, "iteration,voltage_v,phase_rad,dc_mean")?;
    for r in trace {
        writeln!(
            out,
            "{},{:e},{:.15e},{:e}",
            r.iteration, r.voltage, r.phase, r.dc_mean
        )?;
    }
    Ok(())
}

/// Simulated plant: interferometer, local oscillator and noise settings.
/// The phase inside `interferometer` is the bias phase at zero volts.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceEnvironment {
    pub interferometer: InterferometerConfig,
    pub lo: LocalOscillator,
    pub sampler: SamplerConfig,
}

impl BalanceEnvironment {
    pub fn new(
        interferometer: InterferometerConfig,
        lo: LocalOscillator,
        sampler: SamplerConfig,
    ) -> Self {
        Self {
            interferometer,
            lo,
            sampler,
        }
    }

    fn intensity_coefficient(&self, phase: f64) -> Result<f64> {
        let u = compose_transfer(&self.interferometer.with_phase(phase))?;
        Ok(transfer_coeffs(&u).intensity_coefficient())
    }

    /// `(offset, amplitude)` of the intensity coefficient `offset + amplitude cos(phi)`.
    fn fringe(&self) -> Result<(f64, f64)> {
        let at0 = self.intensity_coefficient(0.0)?;
        let at_pi = self.intensity_coefficient(PI)?;
        Ok((0.5 * (at0 + at_pi), 0.5 * (at0 - at_pi)))
    }

    /// Normalisation of the DC error: `I_lo * |fringe amplitude|`.
    pub fn dc_scale(&self) -> Result<f64> {
        let (_, amp) = self.fringe()?;
        let scale = self.lo.intensity() * amp.abs();
        if !(scale > 0.0) {
            return Err(Error::Degenerate(
                "no phase-dependent intensity term to lock on",
            ));
        }
        Ok(scale)
    }

    /// Phase nulling the `I_lo` term, root nearest `pi/2`.
    pub fn analytic_root(&self) -> Result<f64> {
        let (offset, amp) = self.fringe()?;
        if amp.abs() < 1e-15 {
            return Err(Error::Degenerate("fringe amplitude vanishes"));
        }
        let required = -offset / amp;
        if required.abs() > 1.0 {
            return Err(Error::Unbalanceable { required });
        }
        Ok(required.acos())
    }

    /// Expected DC at `phase` (both the `I_lo` and the vacuum term).
    pub fn expected_dc(&self, phase: f64) -> Result<f64> {
        let u = compose_transfer(&self.interferometer.with_phase(phase))?;
        Ok(analytic_moments(&transfer_coeffs(&u), &self.lo, self.sampler.sigma2_vac)?.mean)
    }

    /// `|I_lo part of the DC| / (I_lo * fringe amplitude)` at `phase`.
    pub fn residual_imbalance(&self, phase: f64) -> Result<f64> {
        let (_, amp) = self.fringe()?;
        Ok((self.intensity_coefficient(phase)? / amp).abs())
    }

    fn slope_sign(&self, phase: f64) -> Result<f64> {
        let (_, amp) = self.fringe()?;
        let slope = -amp * phase.sin();
        Ok(if slope >= 0.0 { 1.0 } else { -1.0 })
    }
}

/// Mean of `dc_window` fresh difference-current samples at the current phase.
///
/// Measurement `k` uses seed `derive_seed(sampler.seed, k)` with `k` the
/// state's iteration count.
pub fn measure_dc(
    env: &BalanceEnvironment,
    state: &ControllerState,
    config: &ControllerConfig,
) -> Result<f64> {
    let sampler = SamplerConfig {
        seed: derive_seed(env.sampler.seed, state.iteration as u64),
        n_samples: config.dc_window,
        ..env.sampler.clone()
    };
    let series = generate_timeseries(
        &env.interferometer.with_phase(state.phase),
        &env.lo,
        &sampler,
    )?;
    Ok(series.mean())
}

/// PI law with a resolved polarity and DC normalisation.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceController {
    pub config: ControllerConfig,
    pub dc_scale: f64,
    /// Sign of `d(DC)/d(phase)` (+1 or -1).
    pub slope_sign: f64,
}

impl BalanceController {
    pub fn new(config: ControllerConfig, dc_scale: f64, slope_sign: f64) -> Self {
        Self {
            config,
            dc_scale,
            slope_sign: if slope_sign >= 0.0 { 1.0 } else { -1.0 },
        }
    }

    pub fn step(&self, state: &ControllerState, measured_dc: f64) -> ControllerState {
        let cfg = &self.config;
        let error = measured_dc / self.dc_scale;
        // Drive the voltage against dc * slope.
        let direction = -self.slope_sign;

        let integral = state.integral_accumulator + direction * cfg.gain_i * error;
        let unclamped = integral + direction * cfg.gain_p * error;
        let voltage = unclamped.clamp(-cfg.v_max, cfg.v_max);
        // Conditional integration: hold the integrator while on the rail.
        let integral_accumulator = if voltage == unclamped {
            integral
        } else {
            state.integral_accumulator
        };

        let in_tolerance = if error.abs() <= cfg.tolerance {
            state.in_tolerance + 1
        } else {
            0
        };

        ControllerState {
            control_voltage: voltage,
            phase: state.bias_phase + PI * voltage / cfg.v_pi,
            bias_phase: state.bias_phase,
            integral_accumulator,
            iteration: state.iteration + 1,
            in_tolerance,
            converged: in_tolerance >= cfg.settle_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceOutcome {
    pub state: ControllerState,
    pub trace: Vec<TraceRecord>,
    /// Root of the intensity-term null, for comparison.
    pub analytic_root: f64,
}

/// Runs the loop from the environment's bias phase until lock.
pub fn run_until_balanced(
    env: &BalanceEnvironment,
    config: &ControllerConfig,
) -> Result<BalanceOutcome> {
    config.validate()?;
    env.sampler.validate()?;
    let analytic_root = env.analytic_root()?;
    let bias = env.interferometer.phi.radians();
    let slope_sign = match config.polarity {
        LockPolarity::Negative => -1.0,
        LockPolarity::Positive => 1.0,
        LockPolarity::Auto => env.slope_sign(bias)?,
    };
    let controller = BalanceController::new(config.clone(), env.dc_scale()?, slope_sign);

    let mut state = ControllerState::at_bias(bias);
    let mut trace = Vec::new();
    while state.iteration < config.max_iterations {
        let dc = measure_dc(env, &state, config)?;
        trace.push(TraceRecord {
            iteration: state.iteration,
            voltage: state.control_voltage,
            phase: state.phase,
            dc_mean: dc,
        });
        state = controller.step(&state, dc);
        if state.converged {
            return Ok(BalanceOutcome {
                state,
                trace,
                analytic_root,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: state.iteration,
        trace,
    })
}
