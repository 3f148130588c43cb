use crate::error::{Error, Result};
use crate::exact::Rational;

/// Closed form of the return map for the square torus:
/// `(x, y) ↦ (y, −x + ⌊(1 + x)/y⌋ y)` on `{0 < x, y ≤ 1, x + y > 1}`.
pub fn bcz_classical(x: &Rational, y: &Rational) -> Result<(Rational, Rational)> {
    let zero = Rational::zero();
    let one = Rational::one();
    if *x <= zero || *x > one || *y <= zero || *y > one || (x + y) <= one {
        return Err(Error::Domain(format!("({x}, {y}) is outside the Farey triangle")));
    }
    let k = Rational::from_bigint(((&one + x) / y.clone()).floor());
    Ok((y.clone(), &(&k * y) - x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn examples() {
        assert_eq!(bcz_classical(&r(1, 1), &r(1, 1)).unwrap(), (r(1, 1), r(1, 1)));
        assert_eq!(bcz_classical(&r(1, 2), &r(1, 1)).unwrap(), (r(1, 1), r(1, 2)));
        assert_eq!(bcz_classical(&r(3, 5), &r(4, 5)).unwrap(), (r(4, 5), r(1, 1)));
        assert!(bcz_classical(&r(1, 2), &r(1, 2)).is_err());
        assert!(bcz_classical(&r(0, 1), &r(1, 1)).is_err());
    }
}
