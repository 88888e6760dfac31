//! Difference photocurrent `j1 - j2` of the balanced detector.
//!
//! Every configuration reduces to four scalars:
//!
//! ```text
//! j = c_sum  (I_lo + x^2 + y^2)
//!   + c_diff (I_lo - x^2 - y^2)
//!   + c_x    (e' x + e'' y)
//!   + c_y    (e' y - e'' x)
//! ```
//!
//! with `E_lo = e' + i e''` and `E_vac = x + i y`. For a real local oscillator
//! (`e'' = 0`) the last two terms are simply `c_x e' x` and `c_y e' y`.
//! Operator products are evaluated on classical quadrature samples.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::interferometer::{ArmLosses, PhaseDelay, SplitterAngle, TransferMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOscillator {
    eps_real: f64,
    eps_imag: f64,
    intensity: f64,
}

impl LocalOscillator {
    pub fn new(eps_real: f64, eps_imag: f64) -> Self {
        Self {
            eps_real,
            eps_imag,
            intensity: eps_real * eps_real + eps_imag * eps_imag,
        }
    }

    /// Real amplitude, `e'' = 0`.
    pub fn real(eps: f64) -> Self {
        Self::new(eps, 0.0)
    }

    /// Real local oscillator of the given intensity.
    pub fn from_intensity(intensity: f64) -> Self {
        Self::real(intensity.max(0.0).sqrt())
    }

    pub fn eps_real(&self) -> f64 {
        self.eps_real
    }

    pub fn eps_imag(&self) -> f64 {
        self.eps_imag
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }

    pub fn is_real(&self) -> bool {
        self.eps_imag == 0.0
    }

    pub fn amplitude(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.eps_real, self.eps_imag)
    }
}

/// One realisation of the vacuum quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadratureSample {
    pub x: f64,
    pub y: f64,
}

impl QuadratureSample {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DifferenceCurrentCoefficients {
    pub c_sum: f64,
    pub c_diff: f64,
    pub c_x: f64,
    pub c_y: f64,
}

impl DifferenceCurrentCoefficients {
    pub fn new(c_sum: f64, c_diff: f64, c_x: f64, c_y: f64) -> Self {
        Self {
            c_sum,
            c_diff,
            c_x,
            c_y,
        }
    }

    /// Coefficient of `I_lo` in the difference current.
    pub fn intensity_coefficient(&self) -> f64 {
        self.c_sum + self.c_diff
    }

    /// Coefficient of `x^2 + y^2`.
    pub fn vacuum_coefficient(&self) -> f64 {
        self.c_sum - self.c_diff
    }

    /// Squared gain of the generalised quadrature, `c_x^2 + c_y^2`.
    pub fn quadrature_gain_sqr(&self) -> f64 {
        self.c_x * self.c_x + self.c_y * self.c_y
    }
}

/// Lossless decomposition for arbitrary splitter angles.
///
/// With `a_pm = 2 (alpha1 +- alpha2)`; `c_sum` is identically zero here.
pub fn general_coeffs(
    alpha1: SplitterAngle,
    alpha2: SplitterAngle,
    phi: PhaseDelay,
) -> DifferenceCurrentCoefficients {
    let a_minus = 2.0 * (alpha1.radians() - alpha2.radians());
    let a_plus = 2.0 * (alpha1.radians() + alpha2.radians());
    let half = 0.5 * phi.radians();
    let cos2 = half.cos().powi(2);
    let sin2 = half.sin().powi(2);

    DifferenceCurrentCoefficients {
        c_sum: 0.0,
        c_diff: cos2 * a_minus.cos() + sin2 * a_plus.cos(),
        c_x: 2.0 * (cos2 * a_minus.sin() + sin2 * a_plus.sin()),
        c_y: -2.0 * phi.radians().sin() * (2.0 * alpha2.radians()).sin(),
    }
}

/// Decomposition with arm losses, first splitter fixed at 50/50 and a real
/// local oscillator.
pub fn lossy_coeffs(
    alpha2: SplitterAngle,
    phi: PhaseDelay,
    losses: ArmLosses,
) -> DifferenceCurrentCoefficients {
    let (s2, c2) = (2.0 * alpha2.radians()).sin_cos();
    let (e1, e2) = (losses.eta1(), losses.eta2());
    let phi = phi.radians();

    DifferenceCurrentCoefficients {
        c_sum: 0.5 * c2 * (e1 * e1 - e2 * e2),
        c_diff: e1 * e2 * s2 * phi.cos(),
        c_x: c2 * (e1 * e1 + e2 * e2),
        c_y: -2.0 * e1 * e2 * s2 * phi.sin(),
    }
}

/// Decomposition read off any transfer matrix (lossy or not, any LO phase).
///
/// `j = A I + B |v|^2 + 2 Re[K conj(E) v]` with `A = |u11|^2 - |u21|^2`,
/// `B = |u12|^2 - |u22|^2` and `K = conj(u11) u12 - conj(u21) u22`.
pub fn transfer_coeffs(u: &TransferMatrix) -> DifferenceCurrentCoefficients {
    let a = u.u11.norm_sqr() - u.u21.norm_sqr();
    let b = u.u12.norm_sqr() - u.u22.norm_sqr();
    let k = u.u11.conj() * u.u12 - u.u21.conj() * u.u22;
    DifferenceCurrentCoefficients {
        c_sum: 0.5 * (a + b),
        c_diff: 0.5 * (a - b),
        c_x: 2.0 * k.re,
        c_y: -2.0 * k.im,
    }
}

pub fn difference_current(
    coeffs: &DifferenceCurrentCoefficients,
    lo: &LocalOscillator,
    s: &QuadratureSample,
) -> f64 {
    let i_lo = lo.intensity();
    let n = s.norm_sqr();
    let (er, ei) = (lo.eps_real(), lo.eps_imag());
    coeffs.c_sum * (i_lo + n)
        + coeffs.c_diff * (i_lo - n)
        + coeffs.c_x * (er * s.x + ei * s.y)
        + coeffs.c_y * (er * s.y - ei * s.x)
}

/// Amplitude of the phase-dependent intensity term, `eta1 eta2 |sin 2 alpha2|`.
pub fn fringe_amplitude(alpha2: SplitterAngle, losses: ArmLosses) -> f64 {
    losses.eta1() * losses.eta2() * (2.0 * alpha2.radians()).sin().abs()
}

/// Value of `cos(phi)` that cancels the `I_lo` terms of [`lossy_coeffs`].
pub fn balance_cosine(alpha2: SplitterAngle, losses: ArmLosses) -> Result<f64> {
    let (s2, c2) = (2.0 * alpha2.radians()).sin_cos();
    let (e1, e2) = (losses.eta1(), losses.eta2());
    if e1 * e2 == 0.0 {
        return Err(Error::Degenerate("an arm is opaque (eta1 * eta2 = 0)"));
    }
    if s2.abs() < 1e-15 {
        return Err(Error::Degenerate(
            "sin(2 alpha2) = 0, the fringe term vanishes",
        ));
    }
    Ok(-(e1 * e1 - e2 * e2) * c2 / (2.0 * e1 * e2 * s2))
}

/// Phase that nulls the `I_lo`-proportional part of the difference current,
/// taking the root closest to quadrature (`pi/2`).
///
/// Requires `|cos(phi*)| <= 1`; larger loss asymmetry cannot be compensated
/// by the phase alone.
pub fn balance_phase(alpha2: SplitterAngle, losses: ArmLosses) -> Result<PhaseDelay> {
    let required = balance_cosine(alpha2, losses)?;
    if !required.is_finite() || required.abs() > 1.0 {
        return Err(Error::Unbalanceable { required });
    }
    // acos lands in [0, pi]; all other roots are further from pi/2.
    let phi = required.acos();
    debug_assert!((phi - FRAC_PI_2).abs() <= FRAC_PI_2);
    Ok(PhaseDelay::new(phi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of the difference current when `x` and `y` are
/// independent zero-mean Gaussians of variance `sigma2`.
pub fn analytic_moments(
    coeffs: &DifferenceCurrentCoefficients,
    lo: &LocalOscillator,
    sigma2: f64,
) -> Result<Moments> {
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "quadrature variance must be non-negative, got {sigma2}"
        )));
    }
    let vac = coeffs.vacuum_coefficient();
    let mean = coeffs.intensity_coefficient() * lo.intensity() + vac * 2.0 * sigma2;
    // Var(x^2 + y^2) = 2 * 2 sigma^4; the linear and quadratic parts are
    // uncorrelated for a zero-mean Gaussian.
    let variance =
        coeffs.quadrature_gain_sqr() * lo.intensity() * sigma2 + vac * vac * 4.0 * sigma2 * sigma2;
    Ok(Moments { mean, variance })
}
