use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A point `(s, t)` of `Ω_h = {0 < s ≤ h, 1 − αs < t ≤ 1}`, standing for the
/// lattice `p_{s,t} Λ` with `p_{s,t} = [[s, t], [0, 1/s]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionPoint<S> {
    pub s: S,
    pub t: S,
    pub h: S,
}

impl<S: Scalar> SectionPoint<S> {
    pub fn new(s: S, t: S, h: S, alpha: &S) -> Result<Self> {
        let p = SectionPoint { s, t, h };
        p.validate(alpha)?;
        Ok(p)
    }

    /// Point at level 1.
    pub fn unit(s: S, t: S, alpha: &S) -> Result<Self> {
        Self::new(s, t, S::one(), alpha)
    }

    pub fn validate(&self, alpha: &S) -> Result<()> {
        let one = S::one();
        let lower = one.minus(&alpha.times(&self.s));
        let ok = self.s.is_pos() && self.s.le(&self.h) && self.h.le(&one) && lower.lt(&self.t) && self.t.le(&one);
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "(s, t) = ({}, {}) not in the level-{} section",
                self.s.to_f64(),
                self.t.to_f64(),
                self.h.to_f64()
            )))
        }
    }

    pub fn is_exact(&self) -> bool {
        S::EXACT
    }

    /// Same lattice viewed at another level `h ≥ s`.
    pub fn at_level(&self, h: S) -> Result<Self> {
        if !self.s.le(&h) || !h.le(&S::one()) {
            return Err(Error::Domain(format!("s = {} is not in (0, {}]", self.s.to_f64(), h.to_f64())));
        }
        Ok(SectionPoint { s: self.s.clone(), t: self.t.clone(), h })
    }

    pub fn to_f64(&self) -> SectionPoint<f64> {
        SectionPoint { s: self.s.to_f64(), t: self.t.to_f64(), h: self.h.to_f64() }
    }
}

/// One application of the return map.
#[derive(Clone, Debug)]
pub struct ReturnRecord<S> {
    pub start: SectionPoint<S>,
    /// Slope of the minimal-slope strip vector.
    pub return_time: S,
    pub next: SectionPoint<S>,
    /// The Λ vector `w` whose image `p_{s,t} w` realizes the return.
    pub witness: [S; 2],
}

#[derive(Clone, Debug)]
pub struct OrbitTrace<S> {
    pub records: Vec<ReturnRecord<S>>,
    pub cumulative_times: Vec<S>,
}

#[derive(Serialize)]
struct OrbitRow {
    step: usize,
    s: f64,
    t: f64,
    return_time: f64,
    cum_time: f64,
}

impl<S: Scalar> OrbitTrace<S> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_point(&self) -> Option<&SectionPoint<S>> {
        self.records.last().map(|r| &r.next)
    }

    /// One row per return; `s, t` are the coordinates reached at that step.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.is_empty() {
            w.write_record(["step", "s", "t", "return_time", "cum_time"])?;
        }
        for (i, (r, c)) in self.records.iter().zip(&self.cumulative_times).enumerate() {
            w.serialize(OrbitRow {
                step: i + 1,
                s: r.next.s.to_f64(),
                t: r.next.t.to_f64(),
                return_time: r.return_time.to_f64(),
                cum_time: c.to_f64(),
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reduce `t` modulo `α s` into `(1 − α s, 1]`.
pub fn reduce_t<S: Scalar>(t: &S, s: &S, alpha: &S) -> S {
    let one = S::one();
    let period = alpha.times(s);
    let m = one.minus(t).over(&period).floor_s();
    let mut out = t.plus(&m.times(&period));
    if !S::EXACT {
        // rounding can leave the result a hair outside the half-open interval
        if one.lt(&out) {
            out = out.minus(&period);
        } else if out.le(&one.minus(&period)) {
            out = out.plus(&period);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::QuadVal;

    #[test]
    fn validation() {
        let one = QuadVal::one();
        assert!(SectionPoint::unit(one.clone(), one.clone(), &one).is_ok());
        assert!(SectionPoint::unit(QuadVal::ratio(1, 2), QuadVal::ratio(1, 2), &one).is_err());
        assert!(SectionPoint::new(0.5, 0.9, 0.4, &1.0).is_err());
        assert!(SectionPoint::new(0.5, 0.9, 0.5, &1.0).is_ok());
    }

    #[test]
    fn reduction() {
        let r = reduce_t(&QuadVal::ratio(-3, 2), &QuadVal::ratio(1, 2), &QuadVal::one());
        assert_eq!(r, QuadVal::one());
        let r = reduce_t(&QuadVal::ratio(7, 3), &QuadVal::ratio(1, 2), &QuadVal::one());
        assert_eq!(r, QuadVal::ratio(5, 6));
    }
}
