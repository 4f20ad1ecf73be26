//! Heat kernels of the complex and quaternionic projective spaces, evaluated
//! from their spectral series and from their integral representation over
//! theta-type series, with a suite of numerical identity checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod kernels;
pub mod orthopoly;
pub mod quadrature;
pub mod thetapsi;
pub mod verify;

pub use error::{Error, Result};
