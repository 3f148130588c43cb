//! Box counts `W(s, t, A) = #(p_{s,t} Λ ∩ A)`, their exact average over
//! `Ω⁰ = {s ≥ s0}`, Monte-Carlo estimates, and the second moment.

mod expected;
mod moment;
mod periodic;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::Layers;
use crate::scalar::Scalar;
use crate::section::{SectionDynamics, SectionPoint};

pub use expected::{exact_expected_count, mc_expected_count, CountingReport, CountingSetup, ExpectedCount};
pub use moment::{second_moment_mc, MomentRow, MomentScaling};
pub use periodic::periodic_interval_average;

/// The box `[a, b) × (0, c)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxRegion<S> {
    pub a: S,
    pub b: S,
    pub c: S,
}

impl<S: Scalar> BoxRegion<S> {
    pub fn new(a: S, b: S, c: S) -> Result<Self> {
        if !a.lt(&b) || !c.is_pos() {
            return Err(Error::Domain(format!("box [{}, {}) x (0, {}) is empty", a.to_f64(), b.to_f64(), c.to_f64())));
        }
        Ok(BoxRegion { a, b, c })
    }

    pub fn width(&self) -> S {
        self.b.minus(&self.a)
    }

    pub fn to_f64(&self) -> BoxRegion<f64> {
        BoxRegion { a: self.a.to_f64(), b: self.b.to_f64(), c: self.c.to_f64() }
    }
}

/// `#(p_{s,t} Λ ∩ [a, b) × (0, c))` from layers covering heights below `c s`.
pub fn count_in_layers<S: Scalar>(layers: &Layers<S>, s: &S, t: &S, area: &BoxRegion<S>) -> Result<u64> {
    count_rows(layers, s, t, area, false)
}

/// `#(p_{s,t} Λ ∩ (a, b] × (0, c))`.
pub fn count_in_layers_right_closed<S: Scalar>(layers: &Layers<S>, s: &S, t: &S, area: &BoxRegion<S>) -> Result<u64> {
    count_rows(layers, s, t, area, true)
}

fn count_rows<S: Scalar>(layers: &Layers<S>, s: &S, t: &S, area: &BoxRegion<S>, right_closed: bool) -> Result<u64> {
    let y_bound = area.c.times(s);
    layers.require_cover(&y_bound)?;
    let alpha = &layers.alpha;
    let mut n: i64 = 0;
    for row in layers.below(&y_bound) {
        let step = alpha.times(s).times(&row.y);
        let ty = t.times(&row.y);
        for x0 in &row.xs {
            let x_base = s.times(x0).plus(&ty);
            let lo = area.a.minus(&x_base).over(&step);
            let hi = area.b.minus(&x_base).over(&step);
            // number of integers k in [lo, hi) or (lo, hi]
            let count = if right_closed {
                hi.floor_s().to_i64() - lo.floor_s().to_i64()
            } else {
                hi.ceil_s().to_i64() - lo.ceil_s().to_i64()
            };
            n += count.max(0);
        }
    }
    Ok(n as u64)
}

/// Counts `W(s, t, A)` for a section point, growing the engine's layers if needed.
pub fn count_in_box<S: Scalar>(dynamics: &SectionDynamics<S>, p: &SectionPoint<S>, area: &BoxRegion<S>) -> Result<u64> {
    dynamics.count_in_box(p, area)
}
