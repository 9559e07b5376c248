//! Numerical machinery for the amplified pre-trace formula and sup-norms of
//! holomorphic newforms of square-free level.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplifier;
pub mod arith;
pub mod atkin_lehner;
pub mod census;
pub mod error;
pub mod hyp;
pub mod lattice;
pub mod pretrace;
pub mod qseries;
pub mod quad;
pub mod scan;

pub use error::{Error, Result};
pub use hyp::{classify, moebius, u_value, HPoint, IntMat, MatClass};
pub use num_complex::Complex64;
