//! Numerical laboratory for the Fefferman-Szegő metric on strictly
//! pseudoconvex domains.

#![allow(clippy::needless_range_loop, clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord)]

pub mod automorphism;
pub mod domain;
pub mod error;
pub mod experiments;
pub mod fefferman;
pub mod io;
pub mod jet;
pub mod kernels;
pub mod linalg;
pub mod metric;
pub mod quadrature;
pub mod scaling;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

/// Complex number in double precision.
pub type Cx = num_complex::Complex<f64>;
/// Domain description in double precision.
pub type Domain = domain::DomainSpec<f64>;
/// Closed-form ball kernel in double precision.
pub type BallKernel = kernels::ExactBallKernel<f64>;
/// Truncated monomial kernel series in double precision.
pub type KernelSeries = kernels::DiagonalKernelSeries<f64>;
