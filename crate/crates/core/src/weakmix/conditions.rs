use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{QuadVal, Rational};
use crate::mc::{self, MCEstimate, Moments};
use crate::scalar::Scalar;
use crate::section::{SectionDynamics, SectionPoint};

/// Denominator of the grid exact sample points are rounded to.
pub const SAMPLE_GRID: i64 = 1 << 20;

/// Float tolerance on the conjugacy defect.
pub const CONJUGACY_TOLERANCE: f64 = 1e-10;

/// Tolerance on the displacement formula over the triangle `Δ_a`.
pub const DISPLACEMENT_TOLERANCE: f64 = 1e-10;

/// Distance in the `(s, t)` chart, taking the identification
/// `t ~ t ± α s` at the second point into account.
pub fn chart_distance(alpha: f64, p: (f64, f64), q: (f64, f64)) -> f64 {
    let shift = alpha * q.0;
    let dt = [-1.0, 0.0, 1.0].iter().map(|k| (q.1 + k * shift - p.1).abs()).fold(f64::INFINITY, f64::min);
    (p.0 - q.0).hypot(dt)
}

fn check_level(a: f64) -> Result<()> {
    if 0.0 < a && a < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("level a = {a} not in (0, 1)")))
    }
}

/// `m(L_a)` against `a²`.
#[derive(Clone, Debug, Serialize)]
pub struct Condition1 {
    pub a: f64,
    pub claimed: f64,
    pub empirical: MCEstimate,
    /// Binomial standard deviation of the empirical fraction.
    pub sigma: f64,
    pub pass: bool,
}

/// Fraction of uniform points of `Ω` with `s ≤ a`; passes within 4σ of `a²`.
pub fn check_condition1(alpha: f64, a: f64, n: u64, seed: u64) -> Result<Condition1> {
    check_level(a)?;
    if n == 0 {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    let empirical = mc::estimate(n, seed, |rng| {
        let (s, _) = mc::sample_section(rng, alpha, 0.0, 1.0);
        f64::from(u8::from(s <= a))
    });
    let claimed = a * a;
    let sigma = (claimed * (1.0 - claimed) / n as f64).sqrt();
    Ok(Condition1 { a, claimed, empirical, sigma, pass: (empirical.mean - claimed).abs() <= 4.0 * sigma })
}

/// `φ_a ∘ T` against `T_a ∘ φ_a`.
#[derive(Clone, Debug, Serialize)]
pub struct Condition2 {
    pub a: f64,
    pub exact: bool,
    pub samples: u64,
    /// Largest chart distance between the two sides.
    pub max_defect: f64,
    /// Largest `|a² r_a(φ_a p) − r(p)|`.
    pub max_time_defect: f64,
    /// Samples where the two sides differ (exactly, for exact scalars).
    pub mismatches: u64,
    pub pass: bool,
}

/// Random section point on the `SAMPLE_GRID` grid, `s ∈ [s_lo, s_hi]`.
pub fn grid_point<S: Scalar, R: Rng>(rng: &mut R, alpha: &S, s_lo: f64, s_hi: f64) -> SectionPoint<S> {
    let a = alpha.to_f64();
    let (sf, tf) = mc::sample_section(rng, a, s_lo, s_hi);
    let snap = |x: f64| {
        let k = ((x * SAMPLE_GRID as f64).round() as i64).clamp(1, SAMPLE_GRID - 1);
        Rational::new(k, SAMPLE_GRID)
    };
    let s = if sf >= 1.0 { S::one() } else { S::from_quad(&QuadVal::rational(snap(sf))) };
    let v = S::from_quad(&QuadVal::rational(snap((1.0 - tf) / (a * sf))));
    let t = S::one().minus(&alpha.times(&s).times(&v));
    SectionPoint { s, t, h: S::one() }
}

/// Compares `φ_a(T p)` with `T_a(φ_a p)` on `n` grid points of `Ω`.
pub fn check_condition2<S: Scalar>(dynamics: &SectionDynamics<S>, a: &S, n: u64, seed: u64) -> Result<Condition2> {
    check_level(a.to_f64())?;
    let alpha = dynamics.alpha().clone();
    let af = alpha.to_f64();
    let a2 = a.times(a);

    let shards = mc::run_sharded(n, seed, |rng, count| -> Result<(f64, f64, u64)> {
        let (mut defect, mut time_defect, mut bad) = (0.0f64, 0.0f64, 0u64);
        for _ in 0..count {
            let p = grid_point(rng, &alpha, 0.0, 1.0);
            let step = dynamics.return_map(&p)?;
            let lhs = dynamics.conjugate(&step.next, a)?;
            let image = dynamics.conjugate(&p, a)?;
            let rhs_step = dynamics.return_map(&image)?;
            let rhs = rhs_step.next;
            let scaled = a2.times(&rhs_step.return_time);

            let d = chart_distance(af, (lhs.s.to_f64(), lhs.t.to_f64()), (rhs.s.to_f64(), rhs.t.to_f64()));
            let dt = (scaled.to_f64() - step.return_time.to_f64()).abs();
            let same = if S::EXACT {
                lhs.s.cmp_s(&rhs.s).is_eq() && lhs.t.cmp_s(&rhs.t).is_eq() && scaled.cmp_s(&step.return_time).is_eq()
            } else {
                d < CONJUGACY_TOLERANCE && dt < CONJUGACY_TOLERANCE * step.return_time.to_f64().max(1.0)
            };
            defect = defect.max(d);
            time_defect = time_defect.max(dt);
            bad += u64::from(!same);
        }
        Ok((defect, time_defect, bad))
    });
    let (mut max_defect, mut max_time_defect, mut mismatches) = (0.0f64, 0.0f64, 0u64);
    for shard in shards {
        let (d, t, b) = shard?;
        max_defect = max_defect.max(d);
        max_time_defect = max_time_defect.max(t);
        mismatches += b;
    }
    Ok(Condition2 {
        a: a.to_f64(),
        exact: S::EXACT,
        samples: n,
        max_defect,
        max_time_defect,
        mismatches,
        pass: mismatches == 0,
    })
}

/// Displacement `d(p, φ_a p)` over a sequence of levels.
#[derive(Clone, Debug, Serialize)]
pub struct Condition3 {
    pub a_seq: Vec<f64>,
    pub deltas: Vec<f64>,
    /// `fractions[i][k]`: share of samples displaced by more than `deltas[i]`
    /// at level `a_seq[k]`.
    pub fractions: Vec<Vec<f64>>,
    /// Empirical measure of `Δ_a` per level, next to `a⁴`.
    pub triangle_measure: Vec<(f64, f64)>,
    /// Largest gap between the direct squared displacement of points of
    /// `Δ_a` under `diag(a, 1/a)` and `(1 − a)²(x² + y²/a²)`.
    pub formula_max_error: f64,
    pub pass: bool,
}

/// Whether `(x, y)` is strictly inside the triangle with vertices
/// `(1, a)`, `(1 − a², a)`, `(1, a − αa²)`.
pub fn in_triangle(alpha: f64, a: f64, x: f64, y: f64) -> bool {
    // legs x = 1 and y = a, hypotenuse through (1 − a², a) and (1, a − αa²)
    x < 1.0 && y < a && (y - a) > -alpha * (x - (1.0 - a * a))
}

/// Uniform point strictly inside `Δ_a`.
fn triangle_point<R: Rng>(rng: &mut R, alpha: f64, a: f64) -> (f64, f64) {
    loop {
        let mut u: f64 = rng.random();
        let mut v: f64 = rng.random();
        if u + v > 1.0 {
            (u, v) = (1.0 - u, 1.0 - v);
        }
        // corner (1, a) plus u (−a², 0) plus v (0, −αa²)
        let x = 1.0 - u * a * a;
        let y = a - v * alpha * a * a;
        if in_triangle(alpha, a, x, y) {
            return (x, y);
        }
    }
}

pub fn check_condition3(alpha: f64, a_seq: &[f64], deltas: &[f64], n: u64, seed: u64) -> Result<Condition3> {
    if a_seq.is_empty() || deltas.is_empty() || n == 0 {
        return Err(Error::Domain("need levels, thresholds and samples".into()));
    }
    if a_seq.iter().any(|&a| !(0.0 < a && a <= 1.0)) || a_seq.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("levels must increase inside (0, 1]".into()));
    }
    if deltas.iter().any(|&d| d <= 0.0) {
        return Err(Error::Domain("thresholds must be positive".into()));
    }

    let (na, nd) = (a_seq.len(), deltas.len());
    let shards = mc::run_sharded(n, seed, |rng, count| {
        let mut exceed = vec![0u64; na * nd];
        let mut inside = vec![0u64; na];
        let mut worst = 0.0f64;
        for _ in 0..count {
            let (s, t) = mc::sample_section(rng, alpha, 0.0, 1.0);
            for (k, &a) in a_seq.iter().enumerate() {
                let s2 = a * s;
                let t2 = crate::section::reduce_t(&(a * t), &s2, &alpha);
                let d = chart_distance(alpha, (s, t), (s2, t2));
                for (i, &delta) in deltas.iter().enumerate() {
                    exceed[i * na + k] += u64::from(d > delta);
                }
                inside[k] += u64::from(in_triangle(alpha, a, s, t));

                let (x, y) = triangle_point(rng, alpha, a);
                let direct = (a * x - x).powi(2) + (y / a - y).powi(2);
                let formula = (1.0 - a).powi(2) * (x * x + y * y / (a * a));
                worst = worst.max((direct - formula).abs());
            }
        }
        (exceed, inside, worst)
    });

    let mut exceed = vec![0u64; na * nd];
    let mut inside = vec![0u64; na];
    let mut formula_max_error = 0.0f64;
    for (e, i, w) in shards {
        exceed.iter_mut().zip(e).for_each(|(x, y)| *x += y);
        inside.iter_mut().zip(i).for_each(|(x, y)| *x += y);
        formula_max_error = formula_max_error.max(w);
    }
    let nf = n as f64;
    let fractions: Vec<Vec<f64>> = (0..nd).map(|i| (0..na).map(|k| exceed[i * na + k] as f64 / nf).collect()).collect();
    let triangle_measure = a_seq.iter().zip(&inside).map(|(&a, &c)| (a.powi(4), c as f64 / nf)).collect();
    let decays =
        fractions.iter().all(|row| row.windows(2).all(|w| w[1] <= w[0]) && row.last().is_some_and(|&f| f < 0.01));
    Ok(Condition3 {
        a_seq: a_seq.to_vec(),
        deltas: deltas.to_vec(),
        fractions,
        triangle_measure,
        formula_max_error,
        pass: decays && formula_max_error < DISPLACEMENT_TOLERANCE,
    })
}

/// Tally of an indicator over samples.
pub(crate) fn indicator_estimate(hits: u64, n: u64, seed: u64) -> MCEstimate {
    Moments { n, sum: hits as f64, sum_sq: hits as f64 }.estimate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::SurfaceModel;

    #[test]
    fn condition1_quarter() {
        let c = check_condition1(1.0, 0.5, 200_000, 3).unwrap();
        assert_eq!(c.claimed, 0.25);
        assert!(c.pass, "{c:?}");
        assert!(check_condition1(1.0, 1.5, 10, 1).is_err());
    }

    #[test]
    fn condition1_near_one() {
        let c = check_condition1(1.618, 0.999, 100_000, 4).unwrap();
        assert!(c.empirical.mean > 0.99);
    }

    #[test]
    fn condition2_exact_on_torus() {
        let dynamics = SectionDynamics::<QuadVal>::new(&SurfaceModel::torus(), &QuadVal::int(8)).unwrap();
        let c = check_condition2(&dynamics, &QuadVal::ratio(9, 10), 300, 5).unwrap();
        assert!(c.pass && c.exact, "{c:?}");
        assert_eq!(c.max_defect, 0.0);
    }

    #[test]
    fn condition2_float_on_golden() {
        let dynamics = SectionDynamics::<f64>::new(&SurfaceModel::golden_l(), &QuadVal::int(8)).unwrap();
        let c = check_condition2(&dynamics, &0.95, 2000, 6).unwrap();
        assert!(c.pass, "{c:?}");
        assert!(c.max_defect < CONJUGACY_TOLERANCE);
    }

    #[test]
    fn condition3_decays() {
        let c = check_condition3(1.0, &[0.9, 0.99, 0.999], &[0.05], 50_000, 7).unwrap();
        assert!(c.pass, "{c:?}");
        let row = &c.fractions[0];
        assert!(row[0] > row[1] && row[1] >= row[2]);
        for (claimed, seen) in &c.triangle_measure {
            assert!((claimed - seen).abs() < 0.01);
        }
    }

    #[test]
    fn level_one_does_not_move() {
        let c = check_condition3(1.0, &[1.0], &[1e-9], 1000, 8).unwrap();
        assert_eq!(c.fractions[0][0], 0.0);
        assert_eq!(c.formula_max_error, 0.0);
    }

    #[test]
    fn chart_distance_wraps() {
        assert!(chart_distance(1.0, (0.5, 0.999), (0.5, 0.501)) < 0.01);
    }
}
