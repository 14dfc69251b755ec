//! Numerical engine relating equiaffine hypersurfaces in ℝⁿ⁺¹ to the split
//! quadrics of V = ℝⁿ⁺¹ ⊕ (ℝⁿ⁺¹)*.
//!
//! Every construction is evaluated on explicit charts and each identity is
//! reported as a residual that can be compared against a tolerance.

#![allow(clippy::needless_range_loop, clippy::type_complexity, clippy::neg_cmp_op_on_partial_ord, clippy::suspicious_arithmetic_impl)]

pub mod affine;
pub mod boundary;
pub mod error;
pub mod examples;
pub mod lift;
pub mod numeric;
pub mod sigma;
pub mod split;
pub mod suite;
pub mod symmetric;

pub use error::{Error, Result};
