//! Finite windows of Λ = ⊔ Γ v_i, the height set J with its geometric totient
//! φ, and height-layered views used by the section dynamics.

mod enumerate;
mod heights;
mod layers;

pub use enumerate::{
    class_rep, enumerate_orbit, enumerate_orbit_with, EnumerationOptions, HolonomyWindow, DEFAULT_NODE_CAP,
};
pub use heights::{det_class_count, estimate_c_omega, heights_table, max_height_gap, weighted_height_sum, HeightTable};
pub use layers::{Layer, Layers};
