//! Fine-scale statistics of the quadratic sequences `beta (n - alpha)^2 / (2N) mod 1`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discrepancy;
pub mod error;
pub mod geometry;
pub mod numtheory;
pub mod oppenheim;
pub mod parallel;
pub mod quadrature;
pub mod real;
pub mod sequences;
pub mod statistics;
pub mod testfn;
pub mod theta;

pub use error::{Error, Result};
pub use real::ExtReal;
pub use testfn::{e, TestFunction};
