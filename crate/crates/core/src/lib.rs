#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimation;
pub mod fft;
pub mod harness;
pub mod linalg;
pub mod quadrature;
pub mod reference;
pub mod synthesis;
pub mod wavelet;

pub use error::{Error, Result};
