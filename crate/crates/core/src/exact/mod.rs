//! Exact arithmetic over ℚ and real quadratic fields.
//!
//! Every membership, slope and boundary decision in the crate goes through
//! these types; floats appear only in reporting and Monte-Carlo code.

mod linalg;
mod quad;
mod rational;

pub use linalg::{mat_apply, Mat2, Vec2};
pub use quad::{valid_field_tag, QuadVal};
pub use rational::Rational;

use std::cmp::Ordering;

use crate::error::Result;

/// Exact comparison of two field elements.
pub fn quad_cmp(u: &QuadVal, v: &QuadVal) -> Result<Ordering> {
    u.try_cmp(v)
}

/// Nearest double to an exact value.
pub fn to_float(v: &QuadVal) -> f64 {
    v.to_f64()
}
