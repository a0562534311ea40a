// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod conjugate;
pub mod distributions;
pub mod error;
pub mod fit;
pub mod harm;
pub mod io;
pub mod likelihood;
pub mod posterior;
pub mod pseudo_gamma;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod study;
pub mod summary;

pub use error::{Error, Result};
