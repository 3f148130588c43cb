use std::collections::HashMap;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::exact::{Mat2, QuadVal, Rational, Vec2};
use crate::surface::SurfaceModel;

pub const DEFAULT_NODE_CAP: usize = 10_000_000;

#[derive(Clone, Debug)]
pub struct EnumerationOptions {
    /// Breadth-first search keeps every state of height below
    /// `dilation · y_max`; values above 1 are used to cross-check completeness.
    pub dilation: f64,
    pub node_cap: usize,
    /// Also record, for each class representative `w`, the second column of
    /// some γ ∈ Γ with `γ e1 = w`.
    pub track_lifts: bool,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        EnumerationOptions { dilation: 1.0, node_cap: DEFAULT_NODE_CAP, track_lifts: false }
    }
}

/// Finite truncation of Λ to `|x| ≤ x_max`, `0 < y < y_max`, plus the
/// horizontal vectors `0 < x ≤ x_max`.
///
/// Vectors are stored modulo the parabolic `[[1, α], [0, 1]]`: one
/// representative per class, with `0 ≤ x < α y`. [`HolonomyWindow::vectors`]
/// expands them.
#[derive(Clone, Debug)]
pub struct HolonomyWindow {
    pub surface: Arc<SurfaceModel>,
    pub x_max: QuadVal,
    pub y_max: QuadVal,
    /// Class representatives sorted by `(y, x)`.
    classes: Vec<Vec2>,
    lifts: Option<Vec<Vec2>>,
    horizontals: Vec<Vec2>,
    states_visited: usize,
}

impl HolonomyWindow {
    pub fn classes(&self) -> &[Vec2] {
        &self.classes
    }

    /// Second lift columns parallel to [`Self::classes`], if tracked.
    pub fn lifts(&self) -> Option<&[Vec2]> {
        self.lifts.as_deref()
    }

    pub fn horizontals(&self) -> &[Vec2] {
        &self.horizontals
    }

    pub fn states_visited(&self) -> usize {
        self.states_visited
    }

    /// Every window vector, sorted by `(y, x)`.
    pub fn vectors(&self) -> Vec<Vec2> {
        let mut out: Vec<Vec2> = self.horizontals.iter().filter(|v| v.x <= self.x_max).cloned().collect();
        let alpha = &self.surface.alpha;
        let lo = -&self.x_max;
        for c in &self.classes {
            let step = alpha * &c.y;
            let k0 = (&(&lo - &c.x) / &step).ceil_i64();
            let mut x = &c.x + &(&step * &QuadVal::int(k0));
            while x <= self.x_max {
                out.push(Vec2::new(x.clone(), c.y.clone()));
                x = &x + &step;
            }
        }
        out
    }

    /// Number of window vectors, without materializing them.
    pub fn vector_count(&self) -> usize {
        let alpha = &self.surface.alpha;
        let lo = -&self.x_max;
        let mut n = self.horizontals.iter().filter(|v| v.x <= self.x_max).count();
        for c in &self.classes {
            let step = alpha * &c.y;
            let k0 = (&(&lo - &c.x) / &step).ceil_i64();
            let k1 = (&(&self.x_max - &c.x) / &step).floor_i64();
            n += (k1 - k0 + 1).max(0) as usize;
        }
        n
    }

    pub fn contains(&self, v: &Vec2) -> bool {
        if !v.y.is_positive() {
            return v.y.is_zero() && v.x.is_positive() && v.x <= self.x_max && self.horizontals.contains(v);
        }
        if v.y >= self.y_max || v.x.abs() > self.x_max {
            return false;
        }
        let rep = class_rep(v, &self.surface.alpha);
        self.classes.binary_search_by(|c| c.y.cmp(&rep.y).then_with(|| c.x.cmp(&rep.x))).is_ok()
    }
}

/// Representative of `±P^k v` with `y > 0` and `0 ≤ x < α y`, or `(|x|, 0)`.
pub fn class_rep(v: &Vec2, alpha: &QuadVal) -> Vec2 {
    let v = if v.y.is_negative() { -v } else { v.clone() };
    if v.y.is_zero() {
        return Vec2::new(v.x.abs(), v.y);
    }
    let step = alpha * &v.y;
    let m = (&v.x / &step).floor_i64();
    Vec2::new(&v.x - &(&step * &QuadVal::int(m)), v.y)
}

/// Breadth-first closure of `{±v_i}` under the generators, on classes modulo
/// the parabolic subgroup, keeping states of height below the dilated bound.
pub fn enumerate_orbit(surface: &Arc<SurfaceModel>, x_max: &QuadVal, y_max: &QuadVal) -> Result<HolonomyWindow> {
    enumerate_orbit_with(surface, x_max, y_max, &EnumerationOptions::default())
}

pub fn enumerate_orbit_with(
    surface: &Arc<SurfaceModel>,
    x_max: &QuadVal,
    y_max: &QuadVal,
    opts: &EnumerationOptions,
) -> Result<HolonomyWindow> {
    if !x_max.is_positive() || !y_max.is_positive() {
        return Err(Error::Domain("window bounds must be positive".into()));
    }
    if opts.dilation.is_nan() || opts.dilation < 1.0 {
        return Err(Error::Domain(format!("dilation {} must be at least 1", opts.dilation)));
    }
    if !surface.has_minus_id {
        return Err(Error::Preset("enumeration requires -Id in the Veech group".into()));
    }
    let alpha = &surface.alpha;
    let prune = y_max * &QuadVal::rational(Rational::approximate(opts.dilation, 1 << 20));
    let gens: Vec<Mat2> = surface.projective_generators().into_iter().filter(|g| !g.e21.is_zero()).collect();

    let mut states: IndexMap<Vec2, Option<Vec2>> = IndexMap::new();
    for v in &surface.reps {
        let rep = class_rep(v, alpha);
        let lift = opts.track_lifts.then(|| {
            // the identity lifts e1; other representatives carry no lift data
            if *v == Vec2::e1() {
                Vec2::e2()
            } else {
                Vec2::new(QuadVal::zero(), QuadVal::zero())
            }
        });
        if rep.y < prune {
            states.entry(rep).or_insert(lift);
        }
    }

    let mut next = 0;
    while next < states.len() {
        let (w, lift) = states.get_index(next).map(|(k, v)| (k.clone(), v.clone())).unwrap();
        next += 1;
        for g in &gens {
            // height of g·P^k·w is |A + kB|
            let a = &(&g.e21 * &w.x) + &(&g.e22 * &w.y);
            let b = &(alpha * &g.e21) * &w.y;
            if b.is_zero() {
                // w is horizontal: only k = 0 is a distinct state
                if a.abs() < prune {
                    let u = g.apply(&w);
                    push_state(&mut states, u, lift.as_ref().map(|c| g.apply(c)), alpha, opts.node_cap)?;
                }
                continue;
            }
            let e1 = &(&(-&prune) - &a) / &b;
            let e2 = &(&prune - &a) / &b;
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let k_lo = lo.floor_i64() + 1;
            let k_hi = hi.ceil_i64() - 1;
            if k_lo > k_hi {
                continue;
            }
            let shift = Vec2::new(alpha * &w.y, QuadVal::zero());
            let d = g.apply(&shift);
            let start = Vec2::new(&w.x + &(&shift.x * &QuadVal::int(k_lo)), w.y.clone());
            let mut u = g.apply(&start);
            let mut lift_u = lift.as_ref().map(|c| {
                let cs = Vec2::new(&c.x + &(&(alpha * &c.y) * &QuadVal::int(k_lo)), c.y.clone());
                g.apply(&cs)
            });
            let lift_d = lift.as_ref().map(|c| g.apply(&Vec2::new(alpha * &c.y, QuadVal::zero())));
            for _ in k_lo..=k_hi {
                push_state(&mut states, u.clone(), lift_u.clone(), alpha, opts.node_cap)?;
                u = Vec2::new(&u.x + &d.x, &u.y + &d.y);
                if let (Some(l), Some(dl)) = (lift_u.as_mut(), lift_d.as_ref()) {
                    *l = Vec2::new(&l.x + &dl.x, &l.y + &dl.y);
                }
            }
        }
    }
    let states_visited = states.len();

    let mut horizontals = Vec::new();
    let mut rows: Vec<(Vec2, Option<Vec2>)> = Vec::new();
    for (w, lift) in states {
        if w.y.is_zero() {
            horizontals.push(w);
        } else if w.y < *y_max {
            rows.push((w, lift));
        }
    }
    horizontals.sort_by(|a, b| a.x.cmp(&b.x));
    rows = visible_only(rows, alpha);
    rows.sort_by(|(a, _), (b, _)| a.y.cmp(&b.y).then_with(|| a.x.cmp(&b.x)));
    let (classes, lifts): (Vec<Vec2>, Vec<Option<Vec2>>) = rows.into_iter().unzip();
    let lifts =
        if opts.track_lifts { Some(lifts.into_iter().map(|l| l.expect("lift tracked")).collect()) } else { None };
    Ok(HolonomyWindow {
        surface: surface.clone(),
        x_max: x_max.clone(),
        y_max: y_max.clone(),
        classes,
        lifts,
        horizontals,
        states_visited,
    })
}

/// Insert the class of `u`, carrying the lift of `u` over to the representative.
fn push_state(
    states: &mut IndexMap<Vec2, Option<Vec2>>,
    u: Vec2,
    lift: Option<Vec2>,
    alpha: &QuadVal,
    cap: usize,
) -> Result<()> {
    let (sign, u) = if u.y.is_negative() || (u.y.is_zero() && u.x.is_negative()) { (true, -&u) } else { (false, u) };
    let (rep, m) = if u.y.is_zero() {
        (u, 0)
    } else {
        let step = alpha * &u.y;
        let m = (&u.x / &step).floor_i64();
        (Vec2::new(&u.x - &(&step * &QuadVal::int(m)), u.y), m)
    };
    if states.contains_key(&rep) {
        return Ok(());
    }
    if states.len() >= cap {
        return Err(Error::BudgetExceeded { cap });
    }
    let lift = lift.map(|c| {
        let c = if sign { -&c } else { c };
        // γ ↦ P^{-m} γ, then γ ↦ γ P^j to keep the column short
        let c = Vec2::new(&c.x - &(&(alpha * &c.y) * &QuadVal::int(m)), c.y);
        reduce_lift(&rep, c, alpha)
    });
    states.insert(rep, lift);
    Ok(())
}

/// Replace the lift column `c` by `c + j α w` with a bounded coordinate.
pub(crate) fn reduce_lift(w: &Vec2, c: Vec2, alpha: &QuadVal) -> Vec2 {
    let (num, den) = if w.y.is_zero() { (&c.x, alpha * &w.x) } else { (&c.y, alpha * &w.y) };
    let j = (num / &den).floor_i64();
    if j == 0 {
        return c;
    }
    let aw = w.scale(&(alpha * &QuadVal::int(j)));
    Vec2::new(&c.x - &aw.x, &c.y - &aw.y)
}

/// Keep one class per direction, the one of smallest height.
fn visible_only(rows: Vec<(Vec2, Option<Vec2>)>, alpha: &QuadVal) -> Vec<(Vec2, Option<Vec2>)> {
    let _ = alpha;
    let mut best: HashMap<QuadVal, usize> = HashMap::with_capacity(rows.len());
    let mut keep = vec![true; rows.len()];
    for (i, (w, _)) in rows.iter().enumerate() {
        let dir = &w.x / &w.y;
        match best.get(&dir) {
            Some(&j) if rows[j].0.y <= w.y => keep[i] = false,
            Some(&j) => {
                keep[j] = false;
                best.insert(dir, i);
            }
            None => {
                best.insert(dir, i);
            }
        }
    }
    rows.into_iter().zip(keep).filter_map(|(r, k)| k.then_some(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    fn primitive_count(x_max: i64, y_max: i64) -> usize {
        let mut n = 1; // (1, 0)
        for y in 1..y_max {
            for x in -x_max..=x_max {
                if x.gcd(&y) == 1 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn torus_small_window_is_primitive_vectors() {
        let torus = SurfaceModel::torus();
        let w = enumerate_orbit(&torus, &QuadVal::int(5), &QuadVal::int(6)).unwrap();
        let vs = w.vectors();
        for v in &vs {
            let x = v.x.floor_i64();
            let y = v.y.floor_i64();
            assert_eq!(x.gcd(&y), 1, "{v}");
        }
        assert_eq!(vs.len(), primitive_count(5, 6));
        assert_eq!(w.vector_count(), vs.len());
        assert!(w.contains(&Vec2::ints(-4, 5)));
        assert!(!w.contains(&Vec2::ints(2, 4)));
    }

    #[test]
    fn lifts_map_e1_to_representative() {
        for s in SurfaceModel::all_presets() {
            let opts = EnumerationOptions { track_lifts: true, ..Default::default() };
            let w = enumerate_orbit_with(&s, &QuadVal::int(8), &QuadVal::int(8), &opts).unwrap();
            for (c, l) in w.classes().iter().zip(w.lifts().unwrap()) {
                let g = Mat2::new(c.x.clone(), l.x.clone(), c.y.clone(), l.y.clone());
                assert_eq!(g.det(), QuadVal::one(), "{}: {c} {l}", s.name);
                assert!(!l.y.is_negative() && l.y < &s.alpha * &c.y);
            }
        }
    }

    #[test]
    fn node_cap_is_enforced() {
        let opts = EnumerationOptions { node_cap: 10, ..Default::default() };
        let err =
            enumerate_orbit_with(&SurfaceModel::torus(), &QuadVal::int(20), &QuadVal::int(20), &opts).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { cap: 10 }));
    }

    #[test]
    fn dilations_agree() {
        for s in SurfaceModel::all_presets() {
            let ys = QuadVal::int(12);
            let reps: Vec<_> = [1.0, 2.0, 3.0]
                .iter()
                .map(|&dilation| {
                    let opts = EnumerationOptions { dilation, ..Default::default() };
                    enumerate_orbit_with(&s, &QuadVal::int(12), &ys, &opts).unwrap().classes().to_vec()
                })
                .collect();
            assert_eq!(reps[0], reps[1], "{}", s.name);
            assert_eq!(reps[1], reps[2], "{}", s.name);
        }
    }

    #[test]
    fn window_contains_e1() {
        for s in SurfaceModel::all_presets() {
            let w = enumerate_orbit(&s, &QuadVal::ratio(1, 2), &QuadVal::ratio(1, 10)).unwrap();
            assert!(w.classes().is_empty());
            assert!(!w.contains(&Vec2::e1()));
            let w = enumerate_orbit(&s, &QuadVal::one(), &QuadVal::ratio(1, 10)).unwrap();
            assert_eq!(w.vectors(), vec![Vec2::e1()]);
        }
    }
}
