#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod boundary;
pub mod coefficients;
pub mod error;
pub mod ladder;
pub mod quadrature;
pub mod scalar;
pub mod special_fn;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Real = f64;
pub type Complex = num_complex::Complex<f64>;
pub type Rational = num_rational::BigRational;
