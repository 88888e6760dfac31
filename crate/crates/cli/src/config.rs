//! JSON run configuration.
//!
//! One section per component; every key is optional and falls back to the
//! default shown in [`RunConfig::default`]. Unknown keys are rejected.
//! Physical quantities carry their unit in the key name.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use serde::{Deserialize, Serialize};

use qnoise_core::controller::{ControllerConfig, LockPolarity};
use qnoise_core::detector::{calibrate, BalancedDetectorConfig, PhotodiodeParams};
use qnoise_core::homodyne::LocalOscillator;
use qnoise_core::interferometer::{ArmLosses, InterferometerConfig, PhaseDelay, SplitterAngle};
use qnoise_core::qrng::AdcConfig;
use qnoise_core::sampler::{RinModel, SamplerConfig};
use qnoise_core::spectrum::Window;
use qnoise_core::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub interferometer: InterferometerSection,
    pub lo: LoSection,
    pub sampler: SamplerSection,
    pub detector: DetectorSection,
    pub controller: ControllerSection,
    pub adc: AdcSection,
    pub fringe: FringeSection,
    pub psd: PsdSection,
    pub power_scan: PowerScanSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterferometerSection {
    /// Power reflectance of the first splitter.
    pub r1_squared: f64,
    pub r2_squared: f64,
    /// Arm phase difference at zero control voltage.
    pub phase_rad: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl Default for InterferometerSection {
    fn default() -> Self {
        Self {
            r1_squared: 0.5,
            r2_squared: 0.5,
            phase_rad: FRAC_PI_2,
            eta1: 1.0,
            eta2: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoSection {
    pub power_mw: f64,
    /// Phase of the LO amplitude relative to the vacuum quadratures.
    pub phase_rad: f64,
}

impl Default for LoSection {
    fn default() -> Self {
        Self {
            power_mw: 1.0,
            phase_rad: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub seed: u64,
    pub sample_rate_ghz: f64,
    pub n_samples: usize,
    pub sigma2_vac: f64,
    /// `null` turns intensity noise off.
    pub rin_dbhz: Option<f64>,
    pub rin_bandwidth_ghz: f64,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            seed: 1,
            sample_rate_ghz: 20.0,
            n_samples: 1 << 18,
            sigma2_vac: 0.25,
            rin_dbhz: None,
            rin_bandwidth_ghz: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiodeSection {
    pub responsivity_a_per_w: f64,
    pub dark_current_na: f64,
    pub saturation_current_ma: f64,
    pub bandwidth_ghz: f64,
}

impl Default for DiodeSection {
    fn default() -> Self {
        Self {
            responsivity_a_per_w: 0.78,
            dark_current_na: 1000.0,
            saturation_current_ma: 30.0,
            bandwidth_ghz: 10.0,
        }
    }
}

impl DiodeSection {
    fn build(&self) -> PhotodiodeParams {
        PhotodiodeParams {
            responsivity: self.responsivity_a_per_w,
            dark_current: self.dark_current_na * 1e-9,
            saturation_current: self.saturation_current_ma * 1e-3,
            bandwidth: self.bandwidth_ghz * 1e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub diode_a: DiodeSection,
    pub diode_b: DiodeSection,
    pub load_ohm: f64,
    pub cutoff_ghz: f64,
    pub filter_order: u32,
    /// `null` for a noiseless amplifier.
    pub electronic_noise_dbm_hz: Option<f64>,
    pub balance_mismatch: f64,
    pub path_delay_ps: f64,
    pub cmrr_ceiling_db: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            diode_a: DiodeSection::default(),
            diode_b: DiodeSection::default(),
            load_ohm: 50.0,
            cutoff_ghz: 4.0,
            filter_order: 2,
            electronic_noise_dbm_hz: Some(-176.0),
            balance_mismatch: 1e-3,
            path_delay_ps: 5.0,
            cmrr_ceiling_db: 120.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Auto,
    Negative,
    Positive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    pub v_pi_v: f64,
    pub gain_p: f64,
    pub gain_i: f64,
    pub dc_window: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub v_max_v: f64,
    pub settle_count: usize,
    pub polarity: Polarity,
}

impl Default for ControllerSection {
    fn default() -> Self {
        let d = ControllerConfig::default();
        Self {
            v_pi_v: d.v_pi,
            gain_p: d.gain_p,
            gain_i: d.gain_i,
            dc_window: d.dc_window,
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            v_max_v: d.v_max,
            settle_count: d.settle_count,
            polarity: Polarity::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcSection {
    pub bits: u32,
    pub full_scale_sigma: f64,
    /// `null` uses 90 % of the min-entropy bound.
    pub extraction_ratio: Option<f64>,
    pub extractor_seed: u64,
    pub n_bits: usize,
}

impl Default for AdcSection {
    fn default() -> Self {
        Self {
            bits: 8,
            full_scale_sigma: 4.0,
            extraction_ratio: None,
            extractor_seed: 7,
            n_bits: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FringeSection {
    /// Points over `[0, 2 pi]`, ends included.
    pub n_phases: usize,
    /// Include the vacuum contribution to the mean outputs.
    pub include_vacuum: bool,
}

impl Default for FringeSection {
    fn default() -> Self {
        Self {
            n_phases: 361,
            include_vacuum: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowName {
    Hann,
    Rectangular,
}

impl From<WindowName> for Window {
    fn from(w: WindowName) -> Self {
        match w {
            WindowName::Hann => Window::Hann,
            WindowName::Rectangular => Window::Rectangular,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdSection {
    pub segment_length: usize,
    pub window: WindowName,
    pub threshold_db: f64,
    /// Clearance curve grid upper edge.
    pub band_ghz: f64,
    pub n_points: usize,
    /// Run the white-noise flatness check instead of the detector model.
    pub self_test: bool,
}

impl Default for PsdSection {
    fn default() -> Self {
        Self {
            segment_length: 1024,
            window: WindowName::Hann,
            threshold_db: 12.0,
            band_ghz: 10.0,
            n_points: 201,
            self_test: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerScanSection {
    pub powers_mw: Vec<f64>,
    pub band_lo_ghz: f64,
    pub band_hi_ghz: f64,
}

impl Default for PowerScanSection {
    fn default() -> Self {
        Self {
            powers_mw: (1..=10).map(f64::from).collect(),
            band_lo_ghz: 0.1,
            band_hi_ghz: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Written next to each CSV.
    pub write_sidecars: bool,
    /// Raw difference-current record from `psd` (binary layout), if set.
    pub timeseries_file: Option<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            write_sidecars: true,
            timeseries_file: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Builds every component once so that errors surface before any run.
    pub fn validate(&self) -> Result<()> {
        self.interferometer()?;
        self.sampler()?.validate()?;
        self.detector()?.validate()?;
        self.lo_oscillator()?;
        self.controller().validate()?;
        self.adc().validate()?;
        if let Some(r) = self.adc.extraction_ratio {
            if !(r > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "extraction_ratio must be positive, got {r}"
                )));
            }
        }
        if self.fringe.n_phases == 0 {
            return Err(Error::InvalidConfig(
                "fringe.n_phases must be at least 1".into(),
            ));
        }
        if self.psd.segment_length < 2 || self.psd.segment_length > self.sampler.n_samples {
            return Err(Error::InvalidConfig(format!(
                "psd.segment_length must lie in [2, n_samples], got {}",
                self.psd.segment_length
            )));
        }
        if !(self.psd.band_ghz > 0.0) || self.psd.n_points < 2 {
            return Err(Error::InvalidConfig(
                "psd clearance grid needs band_ghz > 0 and n_points >= 2".into(),
            ));
        }
        let ps = &self.power_scan;
        if !(ps.band_lo_ghz >= 0.0 && ps.band_hi_ghz > ps.band_lo_ghz) {
            return Err(Error::InvalidConfig(
                "power_scan band must satisfy 0 <= lo < hi".into(),
            ));
        }
        if ps.powers_mw.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::InvalidConfig(
                "power_scan.powers_mw must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }

    pub fn interferometer(&self) -> Result<InterferometerConfig> {
        let s = &self.interferometer;
        Ok(InterferometerConfig {
            alpha1: SplitterAngle::from_power_reflectance(s.r1_squared)?,
            alpha2: SplitterAngle::from_power_reflectance(s.r2_squared)?,
            phi: PhaseDelay::new(s.phase_rad),
            losses: ArmLosses::new(s.eta1, s.eta2)?,
        })
    }

    pub fn sampler(&self) -> Result<SamplerConfig> {
        let s = &self.sampler;
        let rin = match s.rin_dbhz {
            None => RinModel::Off,
            Some(rin_dbhz) => RinModel::On {
                rin_dbhz,
                bandwidth_hz: s.rin_bandwidth_ghz * 1e9,
            },
        };
        let cfg = SamplerConfig {
            seed: s.seed,
            sample_rate: s.sample_rate_ghz * 1e9,
            n_samples: s.n_samples,
            sigma2_vac: s.sigma2_vac,
            rin,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn detector(&self) -> Result<BalancedDetectorConfig> {
        let s = &self.detector;
        let cfg = BalancedDetectorConfig {
            diode_a: s.diode_a.build(),
            diode_b: s.diode_b.build(),
            load_resistance: s.load_ohm,
            transfer_cutoff: s.cutoff_ghz * 1e9,
            transfer_order: s.filter_order,
            electronic_noise_dbm_hz: s.electronic_noise_dbm_hz,
            balance_mismatch: s.balance_mismatch,
            path_delay_mismatch: s.path_delay_ps * 1e-12,
            cmrr_ceiling_db: s.cmrr_ceiling_db,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn lo_power_w(&self) -> f64 {
        self.lo.power_mw * 1e-3
    }

    /// LO in vacuum units (photoelectrons per sample).
    pub fn lo_oscillator(&self) -> Result<LocalOscillator> {
        let sampler = self.sampler()?;
        let cal = calibrate(
            self.lo_power_w(),
            &self.detector()?,
            sampler.sample_rate,
            sampler.sigma2_vac.max(f64::MIN_POSITIVE),
        )?;
        let amp = cal.lo_intensity.sqrt();
        let (s, c) = self.lo.phase_rad.sin_cos();
        Ok(LocalOscillator::new(amp * c, amp * s))
    }

    pub fn controller(&self) -> ControllerConfig {
        let s = &self.controller;
        ControllerConfig {
            v_pi: s.v_pi_v,
            gain_p: s.gain_p,
            gain_i: s.gain_i,
            dc_window: s.dc_window,
            tolerance: s.tolerance,
            max_iterations: s.max_iterations,
            v_max: s.v_max_v,
            settle_count: s.settle_count,
            polarity: match s.polarity {
                Polarity::Auto => LockPolarity::Auto,
                Polarity::Negative => LockPolarity::Negative,
                Polarity::Positive => LockPolarity::Positive,
            },
        }
    }

    pub fn adc(&self) -> AdcConfig {
        AdcConfig {
            bits: self.adc.bits,
            full_scale_sigma: self.adc.full_scale_sigma,
        }
    }
}
