//! Spectral laboratory for the periodic fifth-order KdV equation
//!
//! ```text
//! u_t - u_xxxxx + a1 u^2 u_x + a2 u_x u_xx + a3 u u_xxx = 0,   x in [0, 2pi)
//! ```
//!
//! The crate is `no_std` (it needs `alloc`). It covers the Fourier-side
//! vector field in raw and renormalized form, exact integer resonance
//! functions, the gauge transform, exponential time integrators with
//! conservation monitors, dyadic short-time norms, the trilinear block
//! functional, the frequency-localized modified energy and the explicit
//! bilinear counterexample.
//!
//! Fourier coefficients follow `u^(n) = (2pi)^{-1/2} int e^{-inx} u(x) dx`,
//! so `u(x) = (2pi)^{-1/2} sum_n u^(n) e^{inx}` and every product of two
//! fields picks up one factor of [`KAPPA`].
#![no_std]
#![warn(missing_debug_implementations)]
// Float methods come from `num_traits::Float` here, but resolve inherently
// whenever std is part of the build graph (tests, std dependents).
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod counterexample;
pub mod dyadic;
pub mod energy;
pub mod equation;
mod error;
pub mod fft;
pub mod gauge;
pub mod integrator;
pub mod random;
pub mod resonance;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `1/sqrt(2pi)`: the normalization carried by one spatial convolution.
pub const KAPPA: f64 = 0.398_942_280_401_432_7;

/// `sqrt(2pi)`.
pub const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_7;
