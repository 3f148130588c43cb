//! The transversal `Ω_h` to the unstable horocycle flow and its first-return
//! map, in exact or floating-point arithmetic.

mod classical;
mod dynamics;
mod point;

pub use classical::bcz_classical;
pub use dynamics::{ExcursionProfile, SectionDynamics, MAX_GROWTHS};
pub use point::{reduce_t, OrbitTrace, ReturnRecord, SectionPoint};
