//! Numerical instantiation of generalized Li-Yau inequalities on ℝⁿ.
//!
//! A positive heat-equation solution is built from nonnegative initial data
//! `g` (a constant plus a Gaussian mixture) through the heat-kernel
//! representation formula. Every derivative ratio `∂ᵅu/u` up to fourth order
//! is a polynomial moment of `x − y` under the normalized measure
//!
//! ```text
//! dν_{x,t}(y) = (4πt)^{-n/2} e^{-|x-y|²/4t} g(y) dy / u(x,t)
//! ```
//!
//! so the crate is organized around a [`MomentBundle`]:
//!
//! * [`initial_data`]: validated initial data and exact moments for Gaussian data.
//! * [`quadrature`]: Gauss–Hermite and trapezoid engines for the same moments.
//! * [`kernel_moments`]: derivative ratios from moments, and finite-difference oracles.
//! * [`inequalities`]: second- and fourth-order inequality checks with slack.
//! * [`probe`]: sweeps, slack minimization and sharpness curves.
//!
//! The crate is `no_std` and only needs `alloc`; IO lives in `liyau-cli`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod dd;
pub mod error;
pub mod initial_data;
pub mod inequalities;
pub mod kernel_moments;
pub mod linalg;
pub mod math;
pub mod probe;
pub mod quadrature;

pub use error::{Error, Result};
pub use initial_data::{GaussianComponent, InitialData, MomentBundle, RawInitialData};
pub use inequalities::{
    CheckOptions, CheckReport, FourthOrderParams, InequalityParams, PairForm, QuadraticFormCoeffs,
    SecondOrderParams, Theorem, Variant,
};
pub use kernel_moments::DerivativeRatios;
pub use linalg::SymMatrix;
pub use quadrature::{Engine, QuadEngine, QuadratureSpec};

/// Smallest time accepted by any evaluation; bounds scale like t⁻² and t⁻⁴.
pub const MIN_TIME: f64 = 1e-8;
