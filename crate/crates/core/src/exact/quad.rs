//! Elements `a + b√d` of a real quadratic field, with exact sign and order.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::Rational;
use crate::error::{Error, Result};

/// `a + b√d` with `d` a square-free field tag; `d = 0` marks plain rationals.
#[derive(Clone, Debug)]
pub struct QuadVal {
    a: Rational,
    b: Rational,
    d: u32,
}

/// Whether `d` is an admissible field tag (0, or square-free and > 1).
pub fn valid_field_tag(d: u32) -> bool {
    if d == 0 {
        return true;
    }
    if d == 1 {
        return false;
    }
    let mut p = 2u32;
    while p * p <= d {
        if d.is_multiple_of(p * p) {
            return false;
        }
        p += 1;
    }
    true
}

impl QuadVal {
    pub fn new(a: Rational, b: Rational, d: u32) -> Result<Self> {
        if !valid_field_tag(d) {
            return Err(Error::FieldTag(format!("{d} is not square-free")));
        }
        if d == 0 && !b.is_zero() {
            return Err(Error::FieldTag("irrational part with d = 0".into()));
        }
        Ok(QuadVal { a, b, d })
    }

    pub fn rational(a: Rational) -> Self {
        QuadVal { a, b: Rational::zero(), d: 0 }
    }

    pub fn int(n: i64) -> Self {
        Self::rational(Rational::from_int(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::rational(Rational::new(num, den))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// `√d` itself.
    pub fn sqrt(d: u32) -> Result<Self> {
        Self::new(Rational::zero(), Rational::one(), d)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    /// Field tag; rationals built inside a field keep that field's tag.
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.d == 0 || self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Tag of the field containing both operands.
    pub fn common_tag(&self, other: &Self) -> Result<u32> {
        if self.d == other.d || other.d == 0 {
            return Ok(self.d);
        }
        if self.d == 0 {
            return Ok(other.d);
        }
        if other.b.is_zero() {
            return Ok(self.d);
        }
        if self.b.is_zero() {
            return Ok(other.d);
        }
        Err(Error::FieldTag(format!("cannot mix Q(sqrt {}) with Q(sqrt {})", self.d, other.d)))
    }

    fn tag_or_panic(&self, other: &Self) -> u32 {
        match self.common_tag(other) {
            Ok(d) => d,
            Err(e) => panic!("{e}"),
        }
    }

    /// Exact sign of `a + b√d`: compare `a²` against `b²d` when the signs differ.
    pub fn signum(&self) -> i32 {
        let sa = self.a.signum();
        let sb = if self.d == 0 { 0 } else { self.b.signum() };
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let a2 = self.a.square();
        let b2d = &self.b.square() * &Rational::from_int(self.d as i64);
        match a2.cmp(&b2d) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact comparison; errors when the operands live in different fields.
    pub fn try_cmp(&self, other: &Self) -> Result<Ordering> {
        self.common_tag(other)?;
        Ok(match (self - other).signum() {
            -1 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }

    pub fn conj(&self) -> Self {
        QuadVal { a: self.a.clone(), b: -&self.b, d: self.d }
    }

    /// Field norm `a² − b²d`.
    pub fn norm(&self) -> Rational {
        &self.a.square() - &(&self.b.square() * &Rational::from_int(self.d as i64))
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        if self.b.is_zero() {
            return QuadVal { a: self.a.recip(), b: Rational::zero(), d: self.d };
        }
        let n = self.norm().recip();
        QuadVal { a: &self.a * &n, b: -(&self.b * &n), d: self.d }
    }

    pub fn floor(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor();
        }
        let approx = self.to_f64().floor();
        let mut n = if approx.is_finite() && approx.abs() < 9.0e15 {
            BigInt::from(approx as i64)
        } else {
            // far out of float range: start from the rational part floor
            (&self.a + &(&self.b * &Rational::from_int(isqrt_floor(self.d) as i64))).floor()
        };
        let one = BigInt::from(1);
        loop {
            let nq = QuadVal::rational(Rational::from_bigint(n.clone()));
            if (&nq - self).is_positive() {
                n -= &one;
                continue;
            }
            let next = QuadVal::rational(Rational::from_bigint(&n + &one));
            if !(&next - self).is_positive() {
                n += &one;
                continue;
            }
            return n;
        }
    }

    pub fn floor_i64(&self) -> i64 {
        if self.b.is_zero() {
            if let Some(f) = self.a.floor_i64() {
                return f;
            }
        }
        self.floor().to_i64().expect("floor out of i64 range")
    }

    pub fn ceil_i64(&self) -> i64 {
        -(-self).floor_i64()
    }

    pub fn from_i64_in(n: i64, d: u32) -> Self {
        QuadVal { a: Rational::from_int(n), b: Rational::zero(), d }
    }

    /// Nearest double. Reporting and Monte-Carlo only.
    pub fn to_f64(&self) -> f64 {
        if self.b.is_zero() {
            return self.a.to_f64();
        }
        let a = self.a.to_f64();
        let r = self.b.to_f64() * (self.d as f64).sqrt();
        // opposite signs cancel: use a + b√d = norm / (a − b√d) instead
        if (a < 0.0) != (r < 0.0) && a != 0.0 {
            self.norm().to_f64() / (a - r)
        } else {
            a + r
        }
    }
}

fn isqrt_floor(d: u32) -> u32 {
    let mut r = (d as f64).sqrt() as u32;
    while r * r > d {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= d {
        r += 1;
    }
    r
}

impl PartialEq for QuadVal {
    fn eq(&self, other: &Self) -> bool {
        if self.a != other.a || self.b != other.b {
            return false;
        }
        self.b.is_zero() || self.d == other.d
    }
}

impl Eq for QuadVal {}

impl Hash for QuadVal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        if !self.b.is_zero() {
            self.b.hash(state);
            self.d.hash(state);
        }
    }
}

/// Total order within one field. Panics on mixed fields; use
/// [`QuadVal::try_cmp`] when the operands are not known to agree.
impl Ord for QuadVal {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.try_cmp(other) {
            Ok(o) => o,
            Err(e) => panic!("{e}"),
        }
    }
}

impl PartialOrd for QuadVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'b> Add<&'b QuadVal> for &QuadVal {
    type Output = QuadVal;
    fn add(self, rhs: &'b QuadVal) -> QuadVal {
        let d = self.tag_or_panic(rhs);
        QuadVal { a: &self.a + &rhs.a, b: &self.b + &rhs.b, d }
    }
}

impl<'b> Sub<&'b QuadVal> for &QuadVal {
    type Output = QuadVal;
    fn sub(self, rhs: &'b QuadVal) -> QuadVal {
        let d = self.tag_or_panic(rhs);
        QuadVal { a: &self.a - &rhs.a, b: &self.b - &rhs.b, d }
    }
}

impl<'b> Mul<&'b QuadVal> for &QuadVal {
    type Output = QuadVal;
    fn mul(self, rhs: &'b QuadVal) -> QuadVal {
        let d = self.tag_or_panic(rhs);
        if self.b.is_zero() {
            return QuadVal { a: &self.a * &rhs.a, b: &self.a * &rhs.b, d };
        }
        if rhs.b.is_zero() {
            return QuadVal { a: &self.a * &rhs.a, b: &self.b * &rhs.a, d };
        }
        let bb = &(&self.b * &rhs.b) * &Rational::from_int(d as i64);
        QuadVal { a: &(&self.a * &rhs.a) + &bb, b: &(&self.a * &rhs.b) + &(&self.b * &rhs.a), d }
    }
}

impl<'b> Div<&'b QuadVal> for &QuadVal {
    type Output = QuadVal;
    fn div(self, rhs: &'b QuadVal) -> QuadVal {
        if rhs.b.is_zero() {
            let d = self.tag_or_panic(rhs);
            let r = rhs.a.recip();
            return QuadVal { a: &self.a * &r, b: &self.b * &r, d };
        }
        self * &rhs.recip()
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<QuadVal> for QuadVal {
            type Output = QuadVal;
            fn $m(self, rhs: QuadVal) -> QuadVal {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a QuadVal> for QuadVal {
            type Output = QuadVal;
            fn $m(self, rhs: &'a QuadVal) -> QuadVal {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<QuadVal> for &'a QuadVal {
            type Output = QuadVal;
            fn $m(self, rhs: QuadVal) -> QuadVal {
                self.$m(&rhs)
            }
        }
    )*};
}

owned_ops!(Add add, Sub sub, Mul mul, Div div);

impl Neg for &QuadVal {
    type Output = QuadVal;
    fn neg(self) -> QuadVal {
        QuadVal { a: -&self.a, b: -&self.b, d: self.d }
    }
}

impl Neg for QuadVal {
    type Output = QuadVal;
    fn neg(self) -> QuadVal {
        -&self
    }
}

impl From<Rational> for QuadVal {
    fn from(r: Rational) -> Self {
        QuadVal::rational(r)
    }
}

impl From<i64> for QuadVal {
    fn from(n: i64) -> Self {
        QuadVal::int(n)
    }
}

/// Exact encoding: `p/q` for rationals, `p/q+r/s*sqrt(d)` otherwise.
impl fmt::Display for QuadVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let mag = self.b.abs();
        let sign = if self.b.signum() < 0 { "-" } else { "+" };
        if !self.a.is_zero() {
            write!(f, "{}{sign}", self.a)?;
        } else if sign == "-" {
            f.write_str("-")?;
        }
        if mag == Rational::one() {
            write!(f, "sqrt({})", self.d)
        } else {
            write!(f, "{mag}*sqrt({})", self.d)
        }
    }
}

impl FromStr for QuadVal {
    type Err = Error;

    /// Parses the [`Display`](fmt::Display) encoding. Also accepts a bare
    /// `sqrt(d)` term and decimals for the rational coefficients.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(pos) = s.find("sqrt(") else {
            return Ok(QuadVal::rational(s.parse()?));
        };
        let bad = || Error::Parse(format!("not a quadratic value: {s:?}"));
        let close = s[pos..].find(')').ok_or_else(bad)? + pos;
        if close + 1 != s.len() {
            return Err(bad());
        }
        let d: u32 = s[pos + 5..close].parse().map_err(|_| bad())?;
        let head = &s[..pos];
        let head = head.strip_suffix('*').unwrap_or(head);
        // split "a+b" / "a-b" at the last sign that is not a leading sign
        let split = head.char_indices().skip(1).filter(|&(_, c)| c == '+' || c == '-').map(|(i, _)| i).last();
        let (a, b) = match split {
            Some(i) => (head[..i].parse()?, coeff(&head[i..])?),
            None => (Rational::zero(), coeff(head)?),
        };
        QuadVal::new(a, b, d)
    }
}

fn coeff(s: &str) -> Result<Rational> {
    match s {
        "" | "+" => Ok(Rational::one()),
        "-" => Ok(-Rational::one()),
        x => x.trim_start_matches('+').parse(),
    }
}
