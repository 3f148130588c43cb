//! Horocycle flow first-return maps on horizontally short lattice surfaces.
//!
//! The crate enumerates saddle-connection holonomies from Veech-group data,
//! iterates the return map to the horizontal transversal, computes expected
//! box counts exactly and by Monte-Carlo, and checks weak-mixing criteria.

pub mod counting;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod mc;
pub mod scalar;
pub mod section;
pub mod surface;
pub mod weakmix;

pub use error::{Error, Result};
pub use exact::{mat_apply, quad_cmp, to_float, Mat2, QuadVal, Rational, Vec2};
pub use scalar::Scalar;
pub use surface::SurfaceModel;
