//! Arithmetic shared by the exact and floating-point code paths.
//!
//! The section geometry is written once against [`Scalar`] and instantiated
//! with [`QuadVal`] for oracle checks and with `f64` for Monte-Carlo.

use std::cmp::Ordering;
use std::fmt::Debug;

use crate::exact::QuadVal;

pub trait Scalar: Clone + Debug + Send + Sync + 'static {
    const EXACT: bool;

    fn from_quad(q: &QuadVal) -> Self;
    fn from_i64(n: i64) -> Self;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn over(&self, o: &Self) -> Self;
    fn negate(&self) -> Self;
    /// Integer-valued floor.
    fn floor_s(&self) -> Self;
    fn cmp_s(&self, o: &Self) -> Ordering;
    fn to_f64(&self) -> f64;

    fn zero() -> Self {
        Self::from_i64(0)
    }
    fn one() -> Self {
        Self::from_i64(1)
    }
    fn ceil_s(&self) -> Self {
        self.negate().floor_s().negate()
    }
    fn lt(&self, o: &Self) -> bool {
        self.cmp_s(o) == Ordering::Less
    }
    fn le(&self, o: &Self) -> bool {
        self.cmp_s(o) != Ordering::Greater
    }
    fn is_pos(&self) -> bool {
        Self::zero().lt(self)
    }
    fn min_s(self, o: Self) -> Self {
        if o.lt(&self) {
            o
        } else {
            self
        }
    }
    fn max_s(self, o: Self) -> Self {
        if self.lt(&o) {
            o
        } else {
            self
        }
    }
    /// Integer value of an integer-valued scalar.
    fn to_i64(&self) -> i64 {
        self.to_f64().round() as i64
    }
}

impl Scalar for QuadVal {
    const EXACT: bool = true;

    fn from_quad(q: &QuadVal) -> Self {
        q.clone()
    }
    fn from_i64(n: i64) -> Self {
        QuadVal::int(n)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn floor_s(&self) -> Self {
        QuadVal::int(self.floor_i64())
    }
    fn cmp_s(&self, o: &Self) -> Ordering {
        self.cmp(o)
    }
    fn to_f64(&self) -> f64 {
        QuadVal::to_f64(self)
    }
    fn to_i64(&self) -> i64 {
        self.floor_i64()
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_quad(q: &QuadVal) -> Self {
        q.to_f64()
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn over(&self, o: &Self) -> Self {
        self / o
    }
    fn negate(&self) -> Self {
        -self
    }
    fn floor_s(&self) -> Self {
        self.floor()
    }
    fn cmp_s(&self, o: &Self) -> Ordering {
        self.total_cmp(o)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}
