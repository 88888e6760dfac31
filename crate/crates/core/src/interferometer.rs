//! Transfer-matrix model of the two-splitter Mach-Zehnder interferometer.
//!
//! Field ordering is `(local oscillator, vacuum)` on the input side and
//! `(output 1, output 2)` on the output side. The full transfer is
//! `M_bs(alpha2) * diag(eta1, eta2) * M_ph(phi) * M_bs(alpha1)`.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Splitter parameterised by a mixing angle: `t = cos(alpha)`, `r = sin(alpha)`.
///
/// Any real angle is accepted; no wrapping is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterAngle(f64);

impl SplitterAngle {
    /// The 50/50 splitter, `alpha = pi/4`.
    pub const SYMMETRIC: SplitterAngle = SplitterAngle(PI / 4.0);

    pub const fn new(alpha: f64) -> Self {
        Self(alpha)
    }

    /// Splitter whose power reflectance is `r2` (`0 <= r2 <= 1`).
    pub fn from_power_reflectance(r2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r2) {
            return Err(Error::InvalidConfig(format!(
                "power reflectance {r2} outside [0, 1]"
            )));
        }
        Ok(Self(r2.sqrt().asin()))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Amplitude transmission `t`.
    pub fn transmission(self) -> f64 {
        self.0.cos()
    }

    /// Amplitude reflection `r`.
    pub fn reflection(self) -> f64 {
        self.0.sin()
    }
}

/// Relative phase between the interferometer arms, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDelay(f64);

impl PhaseDelay {
    pub const fn new(phi: f64) -> Self {
        Self(phi)
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Principal value in `(-pi, pi]`. Only for reporting; the algebra always
    /// uses the raw value.
    pub fn canonical(self) -> f64 {
        let mut p = self.0.rem_euclid(2.0 * PI);
        if p > PI {
            p -= 2.0 * PI;
        }
        p
    }
}

/// Amplitude transmissions of the two arms, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmLosses {
    eta1: f64,
    eta2: f64,
}

impl ArmLosses {
    pub const LOSSLESS: ArmLosses = ArmLosses {
        eta1: 1.0,
        eta2: 1.0,
    };

    pub fn new(eta1: f64, eta2: f64) -> Result<Self> {
        check_eta("eta1", eta1)?;
        check_eta("eta2", eta2)?;
        Ok(Self { eta1, eta2 })
    }

    pub fn eta1(self) -> f64 {
        self.eta1
    }

    pub fn eta2(self) -> f64 {
        self.eta2
    }
}

impl Default for ArmLosses {
    fn default() -> Self {
        Self::LOSSLESS
    }
}

fn check_eta(name: &'static str, value: f64) -> Result<()> {
    // NaN fails the range check as well.
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidLoss { name, value })
    }
}

/// 2x2 complex matrix acting on `(E_lo, E_vac)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub u11: Complex64,
    pub u12: Complex64,
    pub u21: Complex64,
    pub u22: Complex64,
}

impl TransferMatrix {
    pub const fn new(u11: Complex64, u12: Complex64, u21: Complex64, u22: Complex64) -> Self {
        Self { u11, u12, u21, u22 }
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Self::real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.u11.conj(),
            self.u21.conj(),
            self.u12.conj(),
            self.u22.conj(),
        )
    }

    pub fn determinant(&self) -> Complex64 {
        self.u11 * self.u22 - self.u12 * self.u21
    }

    pub fn entries(&self) -> [Complex64; 4] {
        [self.u11, self.u12, self.u21, self.u22]
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &TransferMatrix) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(U^dagger U - I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> [f64; 2] {
        // Largest from the eigenvalues of U^dagger U; the smallest from
        // s_max * s_min = |det U|, which avoids cancellation.
        let g = self.adjoint() * *self;
        let half_trace = 0.5 * (g.u11.re + g.u22.re);
        let det = g.determinant().re;
        let disc = (half_trace * half_trace - det).max(0.0).sqrt();
        let hi = (half_trace + disc).max(0.0).sqrt();
        let lo = if hi > 0.0 {
            self.determinant().norm() / hi
        } else {
            0.0
        };
        [hi, lo]
    }
}

impl Mul for TransferMatrix {
    type Output = TransferMatrix;

    fn mul(self, rhs: TransferMatrix) -> TransferMatrix {
        TransferMatrix::new(
            self.u11 * rhs.u11 + self.u12 * rhs.u21,
            self.u11 * rhs.u12 + self.u12 * rhs.u22,
            self.u21 * rhs.u11 + self.u22 * rhs.u21,
            self.u21 * rhs.u12 + self.u22 * rhs.u22,
        )
    }
}

/// Complete description of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig {
    pub alpha1: SplitterAngle,
    pub alpha2: SplitterAngle,
    pub phi: PhaseDelay,
    pub losses: ArmLosses,
}

impl InterferometerConfig {
    /// Two 50/50 splitters, lossless arms.
    pub fn symmetric(phi: f64) -> Self {
        Self {
            alpha1: SplitterAngle::SYMMETRIC,
            alpha2: SplitterAngle::SYMMETRIC,
            phi: PhaseDelay::new(phi),
            losses: ArmLosses::LOSSLESS,
        }
    }

    pub fn with_phase(mut self, phi: f64) -> Self {
        self.phi = PhaseDelay::new(phi);
        self
    }
}

/// `[[cos a, sin a], [sin a, -cos a]]`.
pub fn bs_matrix(alpha: SplitterAngle) -> TransferMatrix {
    let (s, c) = alpha.radians().sin_cos();
    TransferMatrix::real(c, s, s, -c)
}

/// `diag(exp(i phi/2), exp(-i phi/2))`.
pub fn phase_matrix(phi: PhaseDelay) -> TransferMatrix {
    let half = 0.5 * phi.radians();
    TransferMatrix::new(
        Complex64::from_polar(1.0, half),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, -half),
    )
}

/// `diag(eta1, eta2)`.
pub fn loss_matrix(losses: ArmLosses) -> Result<TransferMatrix> {
    // Re-validate: ArmLosses can only be built through `new`, but keep the
    // contract local to this operation.
    check_eta("eta1", losses.eta1)?;
    check_eta("eta2", losses.eta2)?;
    Ok(TransferMatrix::real(losses.eta1, 0.0, 0.0, losses.eta2))
}

/// Full matrix product `M_bs2 * L * M_ph * M_bs1`.
pub fn compose_transfer(config: &InterferometerConfig) -> Result<TransferMatrix> {
    Ok(bs_matrix(config.alpha2)
        * loss_matrix(config.losses)?
        * phase_matrix(config.phi)
        * bs_matrix(config.alpha1))
}

/// Lossless transfer written out element by element.
pub fn closed_form_elements(
    alpha1: SplitterAngle,
    alpha2: SplitterAngle,
    phi: PhaseDelay,
) -> TransferMatrix {
    let (s1, c1) = alpha1.radians().sin_cos();
    let (s2, c2) = alpha2.radians().sin_cos();
    let phi = phi.radians();
    let pos_half = Complex64::from_polar(1.0, 0.5 * phi);
    let neg_half = Complex64::from_polar(1.0, -0.5 * phi);
    let pos_full = Complex64::from_polar(1.0, phi);
    let neg_full = Complex64::from_polar(1.0, -phi);

    TransferMatrix::new(
        pos_half * (c1 * c2 + neg_full * (s1 * s2)),
        pos_half * (s1 * c2 - neg_full * (c1 * s2)),
        pos_half * (c1 * s2 - neg_full * (s1 * c2)),
        neg_half * (c1 * c2 + pos_full * (s1 * s2)),
    )
}

/// Output fields for the given input amplitudes.
pub fn propagate(
    u: &TransferMatrix,
    lo_amplitude: Complex64,
    vac_amplitude: Complex64,
) -> (Complex64, Complex64) {
    (
        u.u11 * lo_amplitude + u.u12 * vac_amplitude,
        u.u21 * lo_amplitude + u.u22 * vac_amplitude,
    )
}
