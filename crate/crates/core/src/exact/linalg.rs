use std::fmt;
use std::ops::{Mul, Neg};

use super::QuadVal;

/// A plane vector with exact coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vec2 {
    pub x: QuadVal,
    pub y: QuadVal,
}

impl Vec2 {
    pub fn new(x: QuadVal, y: QuadVal) -> Self {
        Vec2 { x, y }
    }

    pub fn e1() -> Self {
        Vec2::new(QuadVal::one(), QuadVal::zero())
    }

    pub fn e2() -> Self {
        Vec2::new(QuadVal::zero(), QuadVal::one())
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Vec2::new(QuadVal::int(x), QuadVal::int(y))
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// `det(self, other)`.
    pub fn det(&self, other: &Vec2) -> QuadVal {
        &(&self.x * &other.y) - &(&self.y * &other.x)
    }

    pub fn scale(&self, k: &QuadVal) -> Vec2 {
        Vec2::new(&self.x * k, &self.y * k)
    }

    pub fn to_f64(&self) -> [f64; 2] {
        [self.x.to_f64(), self.y.to_f64()]
    }
}

impl Neg for &Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-&self.x, -&self.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        -&self
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A 2×2 matrix `[[e11, e12], [e21, e22]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub e11: QuadVal,
    pub e12: QuadVal,
    pub e21: QuadVal,
    pub e22: QuadVal,
}

impl Mat2 {
    pub fn new(e11: QuadVal, e12: QuadVal, e21: QuadVal, e22: QuadVal) -> Self {
        Mat2 { e11, e12, e21, e22 }
    }

    pub fn identity() -> Self {
        Mat2::new(QuadVal::one(), QuadVal::zero(), QuadVal::zero(), QuadVal::one())
    }

    pub fn minus_identity() -> Self {
        -&Mat2::identity()
    }

    /// Geodesic flow element `diag(t, 1/t)`.
    pub fn geodesic(t: &QuadVal) -> Self {
        Mat2::new(t.clone(), QuadVal::zero(), QuadVal::zero(), t.recip())
    }

    /// Stable horocycle `[[1, t], [0, 1]]`.
    pub fn stable_horocycle(t: &QuadVal) -> Self {
        Mat2::new(QuadVal::one(), t.clone(), QuadVal::zero(), QuadVal::one())
    }

    /// Unstable horocycle `[[1, 0], [−t, 1]]`.
    pub fn unstable_horocycle(t: &QuadVal) -> Self {
        Mat2::new(QuadVal::one(), QuadVal::zero(), -t, QuadVal::one())
    }

    /// Section chart element `[[s, t], [0, 1/s]]`.
    pub fn section(s: &QuadVal, t: &QuadVal) -> Self {
        Mat2::new(s.clone(), t.clone(), QuadVal::zero(), s.recip())
    }

    pub fn det(&self) -> QuadVal {
        &(&self.e11 * &self.e22) - &(&self.e12 * &self.e21)
    }

    pub fn is_identity(&self) -> bool {
        *self == Mat2::identity()
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_unimodular(&self) -> Self {
        debug_assert!(self.det() == QuadVal::one());
        Mat2::new(self.e22.clone(), -&self.e12, -&self.e21, self.e11.clone())
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        Vec2::new(&(&self.e11 * &v.x) + &(&self.e12 * &v.y), &(&self.e21 * &v.x) + &(&self.e22 * &v.y))
    }

    pub fn to_f64(&self) -> [[f64; 2]; 2] {
        [[self.e11.to_f64(), self.e12.to_f64()], [self.e21.to_f64(), self.e22.to_f64()]]
    }

    /// Largest singular value, in floating point.
    pub fn operator_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.to_f64();
        let s = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
    }
}

/// Exact matrix–vector product.
pub fn mat_apply(m: &Mat2, v: &Vec2) -> Vec2 {
    m.apply(v)
}

impl<'b> Mul<&'b Mat2> for &Mat2 {
    type Output = Mat2;
    fn mul(self, o: &'b Mat2) -> Mat2 {
        Mat2::new(
            &(&self.e11 * &o.e11) + &(&self.e12 * &o.e21),
            &(&self.e11 * &o.e12) + &(&self.e12 * &o.e22),
            &(&self.e21 * &o.e11) + &(&self.e22 * &o.e21),
            &(&self.e21 * &o.e12) + &(&self.e22 * &o.e22),
        )
    }
}

impl Mul<Mat2> for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        &self * &o
    }
}

impl<'b> Mul<&'b Vec2> for &Mat2 {
    type Output = Vec2;
    fn mul(self, v: &'b Vec2) -> Vec2 {
        self.apply(v)
    }
}

impl Neg for &Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        Mat2::new(-&self.e11, -&self.e12, -&self.e21, -&self.e22)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.e11, self.e12, self.e21, self.e22)
    }
}
