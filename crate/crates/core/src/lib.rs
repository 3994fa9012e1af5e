//! Heavy-tailed mean estimation with p-stable multipliers, together with the
//! Abelian distribution and the Stirling-number bounds behind its tail.
//!
//! The main entry points are [`pstable::permutation_average`] for intervals,
//! [`abelian::AbelianParams`] for the distribution itself, and
//! [`experiments`] for the reproducible simulation studies.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abelian;
pub mod baselines;
pub mod ecdf;
pub mod error;
pub mod experiments;
pub mod numeric;
pub mod pstable;
pub mod rng;
pub mod stirling;

pub use error::{Error, Result};
