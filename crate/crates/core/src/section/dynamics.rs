use std::sync::{Arc, RwLock};

use serde::Serialize;

use crate::counting::{count_in_layers, count_in_layers_right_closed, BoxRegion};
use crate::error::{Error, Result};
use crate::exact::{Mat2, QuadVal};
use crate::lattice::Layers;
use crate::scalar::Scalar;
use crate::surface::SurfaceModel;

use super::point::{reduce_t, OrbitTrace, ReturnRecord, SectionPoint};

/// Cap on geometric window growths past the initial cover.
pub const MAX_GROWTHS: usize = 10;

/// Return-map engine over a height-layered copy of Λ with lifts.
///
/// Layers grow geometrically (cover ×2) when a query needs heights beyond
/// them; growth swaps in a new immutable value.
pub struct SectionDynamics<S: Scalar> {
    surface: Arc<SurfaceModel>,
    alpha: S,
    layers: RwLock<Arc<Layers<S>>>,
    base_cover: QuadVal,
    pub max_growths: usize,
}

struct Candidate<S> {
    slope: S,
    x: S,
    row: usize,
    col: usize,
    k: S,
}

enum Search<S> {
    Found(Candidate<S>),
    Grow,
}

/// Excursions of a level-1 orbit outside `L_h` before the N-th `L_h` return.
#[derive(Clone, Debug, Serialize)]
pub struct ExcursionProfile {
    /// Level-1 returns with `s > h`, counted along the orbit.
    pub orbit_count: u64,
    /// `#{h < X ≤ 1, 0 < Y < s_N X}` in `p_{s,t} Λ`.
    pub box_count: u64,
    /// Total time of the first N returns to `L_h`.
    pub s_n: f64,
    /// Whether the level-1 orbit reached the N-th `L_h` return at time `s_N`.
    pub times_agree: bool,
}

impl ExcursionProfile {
    pub fn flag(&self) -> bool {
        self.box_count == 1
    }

    pub fn counts_agree(&self) -> bool {
        self.orbit_count == self.box_count
    }
}

impl<S: Scalar> SectionDynamics<S> {
    pub fn new(surface: &Arc<SurfaceModel>, cover: &QuadVal) -> Result<Self> {
        Self::from_layers(Layers::build(surface, cover, true)?)
    }

    pub fn from_layers(layers: Layers<S>) -> Result<Self> {
        if !layers.has_lifts {
            return Err(Error::Domain("return map needs layers with lifts".into()));
        }
        Ok(SectionDynamics {
            surface: layers.surface.clone(),
            alpha: layers.alpha.clone(),
            base_cover: layers.cover_exact.clone(),
            layers: RwLock::new(Arc::new(layers)),
            max_growths: MAX_GROWTHS,
        })
    }

    pub fn surface(&self) -> &Arc<SurfaceModel> {
        &self.surface
    }

    pub fn alpha(&self) -> &S {
        &self.alpha
    }

    pub fn layers(&self) -> Arc<Layers<S>> {
        self.layers.read().expect("layers lock").clone()
    }

    /// Replace the layers by ones covering at least twice `seen`'s cover.
    fn grow(&self, seen: &Layers<S>) -> Result<Arc<Layers<S>>> {
        let mut guard = self.layers.write().expect("layers lock");
        if seen.cover.lt(&guard.cover) {
            return Ok(guard.clone());
        }
        let cap = (0..self.max_growths).fold(self.base_cover.clone(), |c, _| &c * &QuadVal::int(2));
        if seen.cover_exact >= cap {
            return Err(Error::WindowExhausted { growths: self.max_growths });
        }
        let cover = &seen.cover_exact * &QuadVal::int(2);
        let grown = Arc::new(Layers::build(&self.surface, &cover, true)?);
        *guard = grown.clone();
        Ok(grown)
    }

    /// Layers covering every height below `y`, growing up to the cap.
    fn layers_covering(&self, y: &S) -> Result<Arc<Layers<S>>> {
        let mut layers = self.layers();
        while layers.cover.lt(y) {
            layers = self.grow(&layers)?;
        }
        Ok(layers)
    }

    pub fn point(&self, s: S, t: S, h: S) -> Result<SectionPoint<S>> {
        SectionPoint::new(s, t, h, &self.alpha)
    }

    fn min_slope(&self, layers: &Layers<S>, p: &SectionPoint<S>) -> Search<S> {
        let (s, t, h) = (&p.s, &p.t, &p.h);
        let sh = s.times(h);
        let mut best: Option<Candidate<S>> = None;
        for (ri, row) in layers.rows.iter().enumerate() {
            // every vector of this row has slope at least y / (s h)
            if let Some(b) = &best {
                if b.slope.le(&row.y.over(&sh)) {
                    return Search::Found(best.unwrap());
                }
            }
            let step = self.alpha.times(s).times(&row.y);
            let ty = t.times(&row.y);
            for (ci, x0) in row.xs.iter().enumerate() {
                let x_base = s.times(x0).plus(&ty);
                let mut k = h.minus(&x_base).over(&step).floor_s();
                let mut x = x_base.plus(&k.times(&step));
                if !S::EXACT && h.lt(&x) {
                    k = k.minus(&S::one());
                    x = x.minus(&step);
                }
                if !x.is_pos() {
                    continue;
                }
                let slope = row.y.over(&s.times(&x));
                if best.as_ref().is_none_or(|b| slope.lt(&b.slope)) {
                    best = Some(Candidate { slope, x, row: ri, col: ci, k });
                }
            }
        }
        match best {
            Some(b) if b.slope.le(&layers.cover.over(&sh)) => Search::Found(b),
            _ => Search::Grow,
        }
    }

    /// First return to the level-`h` section along the unstable horocycle flow.
    pub fn return_map(&self, p: &SectionPoint<S>) -> Result<ReturnRecord<S>> {
        let mut layers = self.layers();
        let cand = loop {
            match self.min_slope(&layers, p) {
                Search::Found(c) => break c,
                Search::Grow => layers = self.grow(&layers)?,
            }
        };
        let row = &layers.rows[cand.row];
        let (g12, g22) = &row.lifts[cand.col];
        // lift of P^k w0 is P^k γ0
        let g12k = g12.plus(&cand.k.times(&self.alpha).times(g22));
        let t_raw = p.s.times(&g12k).plus(&p.t.times(g22));
        let s_next = cand.x.clone();
        let t_next = reduce_t(&t_raw, &s_next, &self.alpha);
        let witness_x = row.xs[cand.col].plus(&cand.k.times(&self.alpha).times(&row.y));
        Ok(ReturnRecord {
            start: p.clone(),
            return_time: cand.slope,
            next: SectionPoint { s: s_next, t: t_next, h: p.h.clone() },
            witness: [witness_x, row.y.clone()],
        })
    }

    pub fn orbit(&self, p: &SectionPoint<S>, n: usize) -> Result<OrbitTrace<S>> {
        if n == 0 {
            return Err(Error::Domain("orbit length must be at least 1".into()));
        }
        let mut records = Vec::with_capacity(n);
        let mut cumulative_times = Vec::with_capacity(n);
        let mut q = p.clone();
        let mut total = S::zero();
        for _ in 0..n {
            let r = self.return_map(&q)?;
            total = total.plus(&r.return_time);
            cumulative_times.push(total.clone());
            q = r.next.clone();
            records.push(r);
        }
        Ok(OrbitTrace { records, cumulative_times })
    }

    /// Total time of the first `n` returns, without keeping the records.
    pub fn return_time_sum(&self, p: &SectionPoint<S>, n: usize) -> Result<(S, SectionPoint<S>)> {
        let mut q = p.clone();
        let mut total = S::zero();
        for _ in 0..n {
            let r = self.return_map(&q)?;
            total = total.plus(&r.return_time);
            q = r.next;
        }
        Ok((total, q))
    }

    /// `φ_a`: the point of `Ω_a` representing `diag(a, 1/a) p_{s,t} Γ`.
    pub fn conjugate(&self, p: &SectionPoint<S>, a: &S) -> Result<SectionPoint<S>> {
        if !a.is_pos() || S::one().lt(a) {
            return Err(Error::Domain(format!("conjugation parameter {} not in (0, 1]", a.to_f64())));
        }
        let s = a.times(&p.s);
        let t = reduce_t(&a.times(&p.t), &s, &self.alpha);
        Ok(SectionPoint { s, t, h: a.times(&p.h) })
    }

    /// `#(p_{s,t} Λ ∩ [a, b) × (0, c))`.
    pub fn count_in_box(&self, p: &SectionPoint<S>, area: &BoxRegion<S>) -> Result<u64> {
        let layers = self.layers_covering(&area.c.times(&p.s))?;
        count_in_layers(&layers, &p.s, &p.t, area)
    }

    /// `#(p_{s,t} Λ ∩ (a, b] × (0, c))`.
    pub fn count_in_box_right_closed(&self, p: &SectionPoint<S>, area: &BoxRegion<S>) -> Result<u64> {
        let layers = self.layers_covering(&area.c.times(&p.s))?;
        count_in_layers_right_closed(&layers, &p.s, &p.t, area)
    }

    /// Slopes `Y/X` of the vectors of `p_{s,t} Λ` with `x_lo < X ≤ x_hi`,
    /// `Y > 0` and slope below `max_slope`, sorted.
    pub fn strip_slopes(&self, p: &SectionPoint<S>, x_lo: &S, x_hi: &S, max_slope: &S) -> Result<Vec<S>> {
        let mut out = Vec::new();
        self.for_each_in_wedge(p, x_lo, x_hi, max_slope, |slope| out.push(slope))?;
        out.sort_by(|a, b| a.cmp_s(b));
        Ok(out)
    }

    /// `#{x_lo < X ≤ x_hi, 0 < Y < max_slope · X}` in `p_{s,t} Λ`.
    pub fn count_in_wedge(&self, p: &SectionPoint<S>, x_lo: &S, x_hi: &S, max_slope: &S) -> Result<u64> {
        let mut n = 0;
        self.for_each_in_wedge(p, x_lo, x_hi, max_slope, |_| n += 1)?;
        Ok(n)
    }

    fn for_each_in_wedge(
        &self,
        p: &SectionPoint<S>,
        x_lo: &S,
        x_hi: &S,
        max_slope: &S,
        mut visit: impl FnMut(S),
    ) -> Result<()> {
        let y_bound = p.s.times(max_slope).times(x_hi);
        let layers = self.layers_covering(&y_bound)?;
        for row in layers.below(&y_bound) {
            let step = self.alpha.times(&p.s).times(&row.y);
            let ty = p.t.times(&row.y);
            let big_y = row.y.over(&p.s);
            // Y < max_slope X  ⇔  X > Y / max_slope
            let lo = x_lo.clone().max_s(big_y.over(max_slope));
            if !lo.lt(x_hi) {
                continue;
            }
            for x0 in &row.xs {
                let x_base = p.s.times(x0).plus(&ty);
                let mut k = lo.minus(&x_base).over(&step).floor_s().plus(&S::one());
                loop {
                    let x = x_base.plus(&k.times(&step));
                    if x_hi.lt(&x) {
                        break;
                    }
                    if lo.lt(&x) {
                        visit(big_y.over(&x));
                    }
                    k = k.plus(&S::one());
                }
            }
        }
        Ok(())
    }

    /// Compares the level-1 orbit of `p ∈ Ω_h` with the excursion box count
    /// over the first `n` returns to `L_h`.
    pub fn excursion_profile(&self, p: &SectionPoint<S>, n: usize, h: &S) -> Result<ExcursionProfile> {
        let p_h = p.at_level(h.clone())?;
        let (s_n, _) = self.return_time_sum(&p_h, n)?;

        let mut q = p.at_level(S::one())?;
        let mut inside = 0;
        let mut outside = 0u64;
        let mut time = S::zero();
        while inside < n {
            let r = self.return_map(&q)?;
            time = time.plus(&r.return_time);
            q = r.next;
            if h.lt(&q.s) {
                outside += 1;
            } else {
                inside += 1;
            }
        }
        let times_agree = if S::EXACT {
            time.cmp_s(&s_n).is_eq()
        } else {
            (time.to_f64() - s_n.to_f64()).abs() <= 1e-9 * s_n.to_f64().abs().max(1.0)
        };
        let box_count = if h.lt(&S::one()) { self.count_in_wedge(p, h, &S::one(), &s_n)? } else { 0 };
        Ok(ExcursionProfile { orbit_count: outside, box_count, s_n: s_n.to_f64(), times_agree })
    }
}

impl SectionDynamics<QuadVal> {
    /// The `(s, t)` with `g Γ = p_{s,t} Γ`, from the shortest horizontal vector
    /// of `g Λ` in `(0, 1]` (at level 1).
    pub fn normal_form(&self, g: &Mat2) -> Result<SectionPoint<QuadVal>> {
        if g.det() != QuadVal::one() {
            return Err(Error::Domain(format!("{g} does not have determinant 1")));
        }
        let one = QuadVal::one();
        let alpha = &self.alpha;
        // (X, 0) = g v forces v = X (g22, −g21), so |v_y| ≤ |g21| when X ≤ 1
        let y_bound = &g.e21.abs() + &one;
        let layers = self.layers_covering(&y_bound)?;
        let mut best: Option<(QuadVal, QuadVal)> = None;
        let mut consider = |x: QuadVal, t_raw: QuadVal| {
            let (x, t_raw) = if x.is_negative() { (-x, -t_raw) } else { (x, t_raw) };
            if x.is_positive() && x <= one && best.as_ref().is_none_or(|(bx, _)| x < *bx) {
                best = Some((x, t_raw));
            }
        };
        if g.e21.is_zero() {
            // g e1 with lift ±Id
            consider(g.e11.clone(), g.e12.clone());
        } else {
            for row in layers.below(&y_bound) {
                let x_star = -&(&(&g.e22 * &row.y) / &g.e21);
                let step = alpha * &row.y;
                let m = (&x_star / &step).floor_i64();
                let x_rep = &x_star - &(&step * &QuadVal::int(m));
                let Ok(ci) = row.xs.binary_search(&x_rep) else {
                    continue;
                };
                let (c1, c2) = &row.lifts[ci];
                let c1k = c1 + &(&(alpha * c2) * &QuadVal::int(m));
                let big_x = &(&g.e11 * &x_star) + &(&g.e12 * &row.y);
                let t_raw = &(&g.e11 * &c1k) + &(&g.e12 * c2);
                consider(big_x, t_raw);
            }
        }
        let (s, t_raw) =
            best.ok_or_else(|| Error::NotHorizontallyShort(format!("{g}: no horizontal vector of length <= 1")))?;
        let t = reduce_t(&t_raw, &s, alpha);
        Ok(SectionPoint { s, t, h: one })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Rational;
    use crate::section::bcz_classical;

    fn torus_exact() -> SectionDynamics<QuadVal> {
        SectionDynamics::new(&SurfaceModel::torus(), &QuadVal::int(16)).unwrap()
    }

    fn q(n: i64, d: i64) -> QuadVal {
        QuadVal::ratio(n, d)
    }

    #[test]
    fn fixed_point() {
        let dynm = torus_exact();
        let p = dynm.point(q(1, 1), q(1, 1), q(1, 1)).unwrap();
        let r = dynm.return_map(&p).unwrap();
        assert_eq!(r.next, p);
        assert_eq!(r.return_time, QuadVal::one());
        let tr = dynm.orbit(&p, 5).unwrap();
        let times: Vec<_> = tr.cumulative_times.iter().map(|t| t.floor_i64()).collect();
        assert_eq!(times, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn growth_cap_holds_across_queries() {
        let mut dynm = SectionDynamics::<QuadVal>::new(&SurfaceModel::torus(), &QuadVal::int(1)).unwrap();
        dynm.max_growths = 1;
        let mut exhausted = 0;
        for d in [5, 7, 40, 50] {
            let p = dynm.point(q(d - 1, d), q(2, d), q(1, 1)).unwrap();
            match dynm.return_map(&p) {
                Ok(_) => {}
                Err(Error::WindowExhausted { .. }) => exhausted += 1,
                Err(e) => panic!("{e}"),
            }
            assert!(dynm.layers().cover_exact <= QuadVal::int(2));
        }
        assert!(exhausted > 0);
    }

    #[test]
    fn matches_closed_form() {
        let dynm = torus_exact();
        for (s, t) in [((1, 2), (1, 1)), ((3, 5), (4, 5)), ((7, 9), (2, 7)), ((1, 13), (25, 26))] {
            let p = dynm.point(q(s.0, s.1), q(t.0, t.1), q(1, 1)).unwrap();
            let r = dynm.return_map(&p).unwrap();
            let (x, y) = bcz_classical(&Rational::new(s.0, s.1), &Rational::new(t.0, t.1)).unwrap();
            assert_eq!(r.next.s, QuadVal::rational(x));
            assert_eq!(r.next.t, QuadVal::rational(y));
            assert_eq!(r.return_time, (&p.s * &p.t).recip());
        }
    }

    #[test]
    fn grows_on_demand() {
        let dynm = SectionDynamics::<QuadVal>::new(&SurfaceModel::torus(), &QuadVal::int(2)).unwrap();
        // s t small: return time 1/(s t) needs deep layers
        let p = dynm.point(q(1, 1), q(1, 50), q(1, 1)).unwrap();
        let r = dynm.return_map(&p).unwrap();
        assert_eq!(r.return_time, QuadVal::int(50));
        assert!(dynm.layers().cover > QuadVal::int(2));
    }

    #[test]
    fn normal_forms() {
        let dynm = torus_exact();
        let one = QuadVal::one();
        assert_eq!(
            dynm.normal_form(&Mat2::identity()).unwrap(),
            dynm.point(one.clone(), one.clone(), one.clone()).unwrap()
        );
        for golden in [false, true] {
            let surface = if golden { SurfaceModel::golden_l() } else { SurfaceModel::torus() };
            let d = SectionDynamics::<QuadVal>::new(&surface, &QuadVal::int(8)).unwrap();
            let alpha = surface.alpha.clone();
            let (s, t) = (q(3, 4), q(9, 10));
            let p = d.point(s.clone(), t.clone(), one.clone()).unwrap();
            assert_eq!(d.normal_form(&Mat2::section(&s, &t)).unwrap(), p);
            let shifted = &t + &(&alpha * &s);
            assert_eq!(d.normal_form(&Mat2::section(&s, &shifted)).unwrap(), p);
            // p_{s,t} γ for γ ∈ Γ is the same point
            let g = &Mat2::section(&s, &t) * &surface.generators[0];
            assert_eq!(d.normal_form(&g).unwrap(), p);
            // the return map agrees with renormalizing u_r p_{s,t}
            let r = d.return_map(&p).unwrap();
            let u = &Mat2::unstable_horocycle(&r.return_time) * &Mat2::section(&s, &t);
            assert_eq!(d.normal_form(&u).unwrap(), r.next.at_level(one.clone()).unwrap());
        }
    }

    #[test]
    fn conjugacy_exact() {
        let dynm = torus_exact();
        let a = q(9, 10);
        let p = dynm.point(q(3, 5), q(4, 5), q(1, 1)).unwrap();
        let lhs = dynm.conjugate(&dynm.return_map(&p).unwrap().next, &a).unwrap();
        let pa = dynm.conjugate(&p, &a).unwrap();
        let ra = dynm.return_map(&pa).unwrap();
        assert_eq!(lhs, ra.next);
        let rp = dynm.return_map(&p).unwrap();
        assert_eq!(ra.return_time, &rp.return_time / &(&a * &a));
    }

    #[test]
    fn excursions() {
        let dynm = torus_exact();
        let p = dynm.point(q(1, 2), q(3, 4), q(1, 1)).unwrap();
        let prof = dynm.excursion_profile(&p, 3, &QuadVal::one()).unwrap();
        assert_eq!((prof.orbit_count, prof.box_count, prof.flag()), (0, 0, false));
        for h in [q(9, 10), q(6, 10), q(1, 2)] {
            let prof = dynm.excursion_profile(&p, 6, &h).unwrap();
            assert!(prof.counts_agree() && prof.times_agree, "{h}: {prof:?}");
        }
    }

    #[test]
    fn box_counts() {
        let dynm = torus_exact();
        let p = dynm.point(q(1, 1), q(1, 1), q(1, 1)).unwrap();
        assert_eq!(dynm.count_in_box(&p, &BoxRegion::new(q(1, 1), q(3, 2), q(2, 1)).unwrap()).unwrap(), 1);
        assert_eq!(dynm.count_in_box(&p, &BoxRegion::new(q(1, 2), q(1, 1), q(2, 1)).unwrap()).unwrap(), 0);
        assert_eq!(dynm.count_in_box(&p, &BoxRegion::new(q(0, 1), q(5, 1), q(1, 2)).unwrap()).unwrap(), 0);
    }

    #[test]
    fn strip_slopes_are_cumulative_times() {
        let dynm = torus_exact();
        let p = dynm.point(q(5, 7), q(3, 5), q(1, 1)).unwrap();
        let tr = dynm.orbit(&p, 8).unwrap();
        let last = tr.cumulative_times.last().unwrap();
        let slopes =
            dynm.strip_slopes(&p, &QuadVal::zero(), &QuadVal::one(), &(last + &QuadVal::ratio(1, 1000))).unwrap();
        assert_eq!(slopes, tr.cumulative_times);
    }
}
