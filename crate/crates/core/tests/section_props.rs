use std::sync::OnceLock;

use horobcz_core::exact::{QuadVal, Rational};
use horobcz_core::section::{bcz_classical, SectionDynamics, SectionPoint};
use horobcz_core::SurfaceModel;
use proptest::prelude::*;

fn torus_exact() -> &'static SectionDynamics<QuadVal> {
    static D: OnceLock<SectionDynamics<QuadVal>> = OnceLock::new();
    D.get_or_init(|| SectionDynamics::new(&SurfaceModel::torus(), &QuadVal::int(16)).unwrap())
}

fn golden_float() -> &'static SectionDynamics<f64> {
    static D: OnceLock<SectionDynamics<f64>> = OnceLock::new();
    D.get_or_init(|| SectionDynamics::new(&SurfaceModel::golden_l(), &QuadVal::int(16)).unwrap())
}

/// Rational point of the torus section: `s = i/den`, `t ∈ (1 − s, 1]`.
fn torus_point() -> impl Strategy<Value = (Rational, Rational)> {
    (2i64..400).prop_flat_map(|den| {
        (1..=den).prop_flat_map(move |i| {
            // t = 1 − s v with v = k/den ∈ [0, 1)
            (0..den).prop_map(move |k| {
                let s = Rational::new(i, den);
                let v = Rational::new(k, den);
                let t = &Rational::one() - &(&s * &v);
                (s, t)
            })
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn torus_matches_closed_form((s, t) in torus_point()) {
        let d = torus_exact();
        let p = SectionPoint::unit(QuadVal::rational(s.clone()), QuadVal::rational(t.clone()), &QuadVal::one()).unwrap();
        let r = d.return_map(&p).unwrap();
        let (x, y) = bcz_classical(&s, &t).unwrap();
        prop_assert_eq!(&r.next.s, &QuadVal::rational(x));
        prop_assert_eq!(&r.next.t, &QuadVal::rational(y));
        // return time 1/(s s')
        prop_assert_eq!(&(&r.return_time * &p.s) * &r.next.s, QuadVal::one());
    }

    #[test]
    fn torus_conjugacy_is_exact((s, t) in torus_point(), k in 1i64..64) {
        let d = torus_exact();
        let a = QuadVal::ratio(64 + k, 128);
        let p = SectionPoint::unit(QuadVal::rational(s), QuadVal::rational(t), &QuadVal::one()).unwrap();
        let forward = d.return_map(&p).unwrap();
        let lhs = d.conjugate(&forward.next, &a).unwrap();
        let rhs = d.return_map(&d.conjugate(&p, &a).unwrap()).unwrap();
        prop_assert_eq!(&lhs, &rhs.next);
        prop_assert_eq!(&(&a * &a) * &rhs.return_time, forward.return_time);
    }

    #[test]
    fn golden_orbit_stays_in_section(u in 0.001f64..1.0, v in 0.0f64..0.999, level in 0.5f64..=1.0) {
        let d = golden_float();
        let alpha = *d.alpha();
        let s = u * level;
        let p = SectionPoint::new(s, 1.0 - alpha * s * v, level, &alpha).unwrap();
        let trace = d.orbit(&p, 20).unwrap();
        for r in &trace.records {
            prop_assert!(r.return_time > 0.0);
            prop_assert!(r.next.validate(&alpha).is_ok(), "{:?}", r.next);
        }
        prop_assert!(trace.cumulative_times.windows(2).all(|w| w[0] < w[1]));
    }
}
