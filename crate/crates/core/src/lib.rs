//! Exact-in-law simulation of linear Gaussian SDEs on a skewed discrete torus,
//! their diffusive rescaling along drifting floor meshes, and the
//! stochastic-heat-equation reference objects they converge to.
//!
//! The crate is `no_std` with `alloc`; everything here is pure computation.

#![no_std]
// negated comparisons reject NaN inputs
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod drift;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod rescale;
pub mod rng;
pub mod she;
pub mod special;
pub mod spectral;
pub mod testfn;
pub mod torus;

pub use num_complex::Complex64 as C64;

pub use drift::{
    a_hat, build_whittaker_stencil, limit_coefficients, r_and_i, validate_assumptions,
    AssumptionReport, DriftStencil, LimitCoefficients, WhittakerParams,
};
pub use error::{Error, Result};
pub use linalg::{Mat2, Vec2};
pub use rescale::{
    cell_weights, ibp_check_1d, ibp_check_2d, modified_floor, s_delta, spectral_weight_transform,
    x_delta_sample, y_delta, RescaleScheme, WeightTable, XDeltaSampler,
};
pub use rng::RngStream;
pub use she::{
    heat_semigroup, she_kernel, y0_limit, z0_covariance, z0_covariance_kernel_form, LimitSpec,
    PolarQuadrature,
};
pub use spectral::{
    analytic_covariance_infinite, DualPairing, FieldPath, ModeState, ModeTransition, SpectralModel,
};
pub use testfn::{GaussianComponent, GaussianTestFunction};
pub use torus::{
    canonical_site, dual_frequencies, enumerate_sites, fourier_forward, fourier_inverse,
    ComplexField, Frequency, Site, Spectrum, Torus, TorusParams,
};
