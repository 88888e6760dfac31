//! Simulation and analysis toolkit for a broadband quantum-noise source built
//! from an electro-optically tunable Mach-Zehnder splitter followed by a
//! balanced homodyne detector.
//!
//! The crate is organised bottom-up:
//!
//! - [`interferometer`]: splitter, phase and loss matrices and their product.
//! - [`homodyne`]: closed-form decomposition of the difference photocurrent,
//!   its Gaussian moments and the phase that nulls the intensity term.
//! - [`sampler`]: seeded vacuum-quadrature and laser-intensity noise, and
//!   difference-current time series.
//! - [`spectrum`]: averaged-periodogram (Welch) spectral estimation.
//! - [`detector`]: balanced photodetector response, shot-noise spectral
//!   density, common-mode rejection and clearance over the electronic floor.
//! - [`controller`]: PI operating-point loop that trims the arm phase.
//! - [`qrng`]: quantisation, min-entropy accounting, Toeplitz extraction and
//!   sanity statistics.
//! - [`scan`]: fringe and optical-power sweeps built from the above.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod controller;
pub mod detector;
pub mod error;
pub mod homodyne;
pub mod interferometer;
pub mod qrng;
pub mod sampler;
pub mod scan;
pub mod series_io;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
