//! Numerical laboratory for Brezis-Nirenberg type problems whose coefficient
//! minimum sits at a singular boundary point.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ball;
pub mod bubble;
pub mod config;
pub mod error;
pub mod geometry;
pub mod ode;
pub mod optim;
pub mod quadrature;
pub mod sobolev;
pub mod verifier;

pub use error::{LabError, Result};
