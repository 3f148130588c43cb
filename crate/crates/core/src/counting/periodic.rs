use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Average number of points of `{s x_i + t j + α j n s : n ∈ ℤ}` in `[a, b)`
/// over `t ∈ [1 − αs, 1]`.
///
/// Returns `(k (b − a)/j, integral)`, the integral evaluated exactly from the
/// breakpoints of the step function in `t`.
pub fn periodic_interval_average<S: Scalar>(alpha: &S, j: &S, s: &S, xs: &[S], a: &S, b: &S) -> Result<(S, S)> {
    if !alpha.is_pos() || !j.is_pos() || !s.is_pos() {
        return Err(Error::Domain("alpha, j and s must be positive".into()));
    }
    let period = alpha.times(j);
    let ordered = xs.windows(2).all(|w| w[0].lt(&w[1]));
    let in_range = xs.first().is_none_or(|x| !x.lt(&S::zero())) && xs.last().is_none_or(|x| x.lt(&period));
    if !ordered || !in_range {
        return Err(Error::Hypothesis("need 0 ≤ x_1 < … < x_k < αj".into()));
    }
    let width = b.minus(a);
    if !width.is_pos() || !width.lt(&period.times(s)) {
        return Err(Error::Hypothesis(format!(
            "b − a < αjs fails: b − a = {}, αjs = {}",
            width.to_f64(),
            period.times(s).to_f64()
        )));
    }

    let exact = S::from_i64(xs.len() as i64).times(&width).over(j);

    let t_lo = S::one().minus(&alpha.times(s));
    let t_hi = S::one();
    let shift = alpha.times(s);
    let len = width.over(j);
    let mut integral = S::zero();
    for x in xs {
        // s x + t j + α j n s ∈ [a, b)  ⇔  t ∈ [base − n αs, base − n αs + (b − a)/j)
        let base = a.minus(&s.times(x)).over(j);
        let n0 = base.minus(&t_lo).over(&shift).floor_s().to_i64();
        for n in (n0 - 1)..=(n0 + 2) {
            let lo = base.minus(&S::from_i64(n).times(&shift));
            let hi = lo.plus(&len);
            let overlap = hi.min_s(t_hi.clone()).minus(&lo.max_s(t_lo.clone()));
            if overlap.is_pos() {
                integral = integral.plus(&overlap);
            }
        }
    }
    Ok((exact, integral))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::QuadVal;

    #[test]
    fn worked_example() {
        let (e, n) = periodic_interval_average(&1.0, &2.0, &0.5, &[0.3, 1.7], &0.0, &0.5).unwrap();
        assert!((e - 0.5).abs() < 1e-15 && (n - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_arithmetic_is_exact() {
        let q = QuadVal::ratio;
        let alpha: QuadVal = "1/2+1/2*sqrt(5)".parse().unwrap();
        let xs = [q(0, 1), q(1, 3), q(5, 2)];
        let (e, n) = periodic_interval_average(&alpha, &q(2, 1), &q(3, 4), &xs, &q(-7, 5), &q(-1, 2)).unwrap();
        assert_eq!(e, n);
        assert_eq!(e, q(27, 20));
    }

    #[test]
    fn empty_and_invalid() {
        let (e, n) = periodic_interval_average(&1.0, &2.0, &0.5, &[], &0.0, &0.5).unwrap();
        assert_eq!((e, n), (0.0, 0.0));
        assert!(periodic_interval_average(&1.0, &2.0, &0.5, &[0.3], &0.0, &1.5).is_err());
        assert!(periodic_interval_average(&1.0, &2.0, &0.5, &[2.5], &0.0, &0.5).is_err());
    }
}
