use std::cmp::Ordering;

use horobcz_core::exact::{Mat2, QuadVal, Rational};
use horobcz_core::{quad_cmp, SurfaceModel};
use proptest::prelude::*;

/// Sign of `p/q + (r/u) √d` with plain i128 arithmetic.
fn oracle_sign(p: i128, q: i128, r: i128, u: i128, d: i128) -> Ordering {
    // multiply through by q u > 0: sign of p u + r q √d
    let a = p * u;
    let b = r * q;
    match (a.cmp(&0), b.cmp(&0)) {
        (Ordering::Equal, sb) => sb,
        (sa, Ordering::Equal) => sa,
        (sa, sb) if sa == sb => sa,
        (sa, _) => {
            // opposite signs: compare a² with b² d
            match (a * a).cmp(&(b * b * d)) {
                Ordering::Greater => sa,
                Ordering::Less => sa.reverse(),
                Ordering::Equal => Ordering::Equal,
            }
        }
    }
}

fn quad(p: i64, q: i64, r: i64, u: i64, d: u32) -> QuadVal {
    QuadVal::new(Rational::new(p, q), Rational::new(r, u), d).unwrap()
}

fn field() -> impl Strategy<Value = u32> {
    prop_oneof![Just(2u32), Just(3), Just(5), Just(6), Just(7)]
}

fn part() -> impl Strategy<Value = (i64, i64)> {
    (-2000i64..2000, 1i64..300)
}

proptest! {
    #[test]
    fn comparison_matches_oracle(d in field(), x in part(), y in part(), z in part(), w in part()) {
        let u = quad(x.0, x.1, y.0, y.1, d);
        let v = quad(z.0, z.1, w.0, w.1, d);
        // u − v = (x0/x1 − z0/z1) + (y0/y1 − w0/w1) √d
        let (p, q) = (i128::from(x.0) * i128::from(z.1) - i128::from(z.0) * i128::from(x.1), i128::from(x.1) * i128::from(z.1));
        let (r, s) = (i128::from(y.0) * i128::from(w.1) - i128::from(w.0) * i128::from(y.1), i128::from(y.1) * i128::from(w.1));
        prop_assert_eq!(quad_cmp(&u, &v).unwrap(), oracle_sign(p, q, r, s, i128::from(d)));
    }

    #[test]
    fn float_value_is_close(d in field(), x in part(), y in part()) {
        let u = quad(x.0, x.1, y.0, y.1, d);
        let expect = x.0 as f64 / x.1 as f64 + y.0 as f64 / y.1 as f64 * f64::from(d).sqrt();
        prop_assert!((u.to_f64() - expect).abs() <= 1e-9 * expect.abs().max(1.0));
    }

    #[test]
    fn field_laws(d in field(), x in part(), y in part(), z in part(), w in part()) {
        let u = quad(x.0, x.1, y.0, y.1, d);
        let v = quad(z.0, z.1, w.0, w.1, d);
        let k = quad(w.0, w.1, x.0, x.1, d);
        prop_assert_eq!(&(&u + &v) * &k, &(&u * &k) + &(&v * &k));
        prop_assert_eq!(&(&u - &v) + &v, u.clone());
        if !u.is_zero() {
            prop_assert_eq!(&u * &u.recip(), QuadVal::one());
        }
        prop_assert_eq!(u.norm(), (&u * &u.conj()).a().clone());
    }

    #[test]
    fn display_roundtrip(d in field(), x in part(), y in part()) {
        let u = quad(x.0, x.1, y.0, y.1, d);
        let back: QuadVal = u.to_string().parse().unwrap();
        prop_assert_eq!(back, u);
    }

    #[test]
    fn floor_brackets_value(x in part(), y in part()) {
        let u = quad(x.0, x.1, y.0, y.1, 5);
        let f = QuadVal::int(u.floor_i64());
        prop_assert!(f <= u && u < &f + &QuadVal::one());
    }

    #[test]
    fn generator_words_are_unimodular(name in prop_oneof![Just("torus"), Just("golden-l"), Just("hecke-sqrt2")],
                                      word in prop::collection::vec(0usize..16, 1..9)) {
        let surface = SurfaceModel::preset(name).unwrap();
        let gens = &surface.generators;
        let pick = |i: usize| &gens[i % gens.len()];
        let split = word.len() / 2;
        let product = |ws: &[usize]| ws.iter().fold(Mat2::identity(), |m, &i| &m * pick(i));
        let left = product(&word[..split]);
        let right = product(&word[split..]);
        let whole = product(&word);
        prop_assert_eq!(&left * &right, whole.clone());
        prop_assert_eq!(whole.det(), QuadVal::one());
        prop_assert!((&whole * &whole.inverse_unimodular()).is_identity());
    }
}
