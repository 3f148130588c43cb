use serde::Serialize;

use crate::counting::BoxRegion;
use crate::error::{Error, Result};
use crate::mc::{self, MCEstimate, Moments};
use crate::section::{SectionDynamics, SectionPoint};

use super::conditions::indicator_estimate;

/// One-sided 95% normal quantile.
const Z95: f64 = 1.644_853_626_951_472_2;

/// `N = ⌊β / (1 − a)⌋`, robust to the rounding of `1 − a`.
pub fn excursion_count(a: f64, beta: f64) -> u64 {
    let c = beta / (1.0 - a);
    (c + 1e-9).floor().max(0.0) as u64
}

/// Window `[lo N, hi N]` for the N-th return time to `L_a`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReturnWindow {
    pub label: String,
    pub lo: f64,
    pub hi: f64,
}

impl ReturnWindow {
    pub fn new(label: &str, lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 < lo && lo < hi && hi.is_finite()) {
            return Err(Error::Domain(format!("return window [{lo}, {hi}] is empty")));
        }
        Ok(ReturnWindow { label: label.to_string(), lo, hi })
    }

    /// `[μ/2, 2μ]` around a measured mean return time `μ`.
    pub fn calibrated(mean_return: f64) -> Result<Self> {
        Self::new("calibrated", mean_return / 2.0, 2.0 * mean_return)
    }

    /// `[c_ω, 4 c_ω]`.
    pub fn literal(c_omega: f64) -> Result<Self> {
        Self::new("literal", c_omega, 4.0 * c_omega)
    }

    /// Scales both ends by `1 ± margin` outward.
    pub fn widened(&self, margin: f64) -> Result<Self> {
        Self::new(&self.label, self.lo * (1.0 - margin), self.hi * (1.0 + margin))
    }
}

/// Mean return time of the level-1 map along sampled orbits.
#[derive(Clone, Debug, Serialize)]
pub struct MeanReturn {
    /// Mean of the per-orbit averages.
    pub measured: MCEstimate,
    /// `α / c_ω`, when `c_ω` is known.
    pub predicted: Option<f64>,
    /// Smallest return time seen.
    pub min_observed: f64,
    pub orbits: u64,
    pub steps: usize,
}

/// Runs `orbits` orbits of `steps` returns from random starts.
pub fn measure_mean_return(
    dynamics: &SectionDynamics<f64>,
    orbits: u64,
    steps: usize,
    c_omega: Option<f64>,
    seed: u64,
) -> Result<MeanReturn> {
    if orbits < 2 || steps == 0 {
        return Err(Error::Domain("need at least two orbits of positive length".into()));
    }
    let alpha = *dynamics.alpha();
    let shards = mc::run_sharded(orbits, seed, |rng, count| -> Result<(Moments, f64)> {
        let mut m = Moments::default();
        let mut min_r = f64::INFINITY;
        for _ in 0..count {
            let (s, t) = mc::sample_section(rng, alpha, 0.0, 1.0);
            let mut q = SectionPoint { s, t, h: 1.0 };
            let mut total = 0.0;
            for _ in 0..steps {
                let r = dynamics.return_map(&q)?;
                total += r.return_time;
                min_r = min_r.min(r.return_time);
                q = r.next;
            }
            m.push(total / steps as f64);
        }
        Ok((m, min_r))
    });
    let mut m = Moments::default();
    let mut min_observed = f64::INFINITY;
    for shard in shards {
        let (part, r) = shard?;
        m = m.merge(part);
        min_observed = min_observed.min(r);
    }
    Ok(MeanReturn { measured: m.estimate(seed), predicted: c_omega.map(|c| alpha / c), min_observed, orbits, steps })
}

/// Inputs of the condition-4 estimate.
#[derive(Clone, Debug, Serialize)]
pub struct Condition4Setup {
    pub a: f64,
    pub beta: f64,
    pub s0: f64,
    /// The first window decides the pass; the rest are reported for comparison.
    pub windows: Vec<ReturnWindow>,
}

/// Box heights and memberships under one return window.
#[derive(Clone, Debug, Serialize)]
pub struct WindowOutcome {
    pub window: ReturnWindow,
    /// Height of `B₁ = (a, 1] × (0, a lo N)`, inside every excursion wedge
    /// allowed by the window.
    pub inner_height: f64,
    /// Height of `B₂ = (a, 1] × (0, hi c)`, containing every such wedge.
    pub outer_height: f64,
    pub d0: MCEstimate,
    pub d1: MCEstimate,
    pub d2: MCEstimate,
    /// `m(D₀ ∩ D₁ ∩ D₂)`.
    pub intersection: MCEstimate,
    /// Lower end of the one-sided 95% interval.
    pub lower_95: f64,
    /// `∫ F₁ − ∫ F₂(F₂ − 1)`, a lower bound for `m(D₁ ∩ D₂)`.
    pub bonferroni_proxy: MCEstimate,
    /// Members of the intersection whose excursion box count is not 1.
    pub implication_violations: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Condition4 {
    pub setup: Condition4Setup,
    /// `β / (1 − a)`.
    pub c: f64,
    pub n_returns: u64,
    /// `m(Ω⁰ ∩ Ω_a) = a² − s0²`, the measure the estimates are scaled by.
    pub domain_measure: f64,
    pub samples: u64,
    pub outcomes: Vec<WindowOutcome>,
    /// `m({R^N = N + 1})` restricted to the sampled domain.
    pub excursion_measure: MCEstimate,
    /// Samples where the orbit count of excursions differs from the box count.
    pub lemma_disagreements: u64,
    /// Samples where the level-1 orbit did not reach the N-th return at `s_N`.
    pub time_disagreements: u64,
    /// Samples dropped because an orbit exhausted the window budget.
    pub failed_samples: u64,
    pub partial: bool,
    pub pass: bool,
}

#[derive(Clone, Default)]
struct Tally {
    d0: Vec<u64>,
    d1: Vec<u64>,
    d2: Vec<u64>,
    all: Vec<u64>,
    proxy: Vec<Moments>,
    violations: Vec<u64>,
    excursion: u64,
    disagree: u64,
    time_disagree: u64,
    failed: u64,
}

impl Tally {
    fn new(windows: usize) -> Self {
        Tally {
            d0: vec![0; windows],
            d1: vec![0; windows],
            d2: vec![0; windows],
            all: vec![0; windows],
            proxy: vec![Moments::default(); windows],
            violations: vec![0; windows],
            ..Default::default()
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        let add = |a: &mut Vec<u64>, b: Vec<u64>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.d0, o.d0);
        add(&mut self.d1, o.d1);
        add(&mut self.d2, o.d2);
        add(&mut self.all, o.all);
        add(&mut self.violations, o.violations);
        self.proxy = self.proxy.into_iter().zip(o.proxy).map(|(a, b)| a.merge(b)).collect();
        self.excursion += o.excursion;
        self.disagree += o.disagree;
        self.time_disagree += o.time_disagree;
        self.failed += o.failed;
        self
    }
}

struct Boxes {
    window: ReturnWindow,
    inner: Option<BoxRegion<f64>>,
    outer: BoxRegion<f64>,
}

/// Samples whose orbits outgrow the window budget are dropped; more than one
/// in this many aborts the run.
const MAX_FAILED_RECIPROCAL: u64 = 100;

/// Estimates `m(D₀ ∩ D₁ ∩ D₂)` over `Ω⁰ ∩ Ω_a` and checks, sample by sample,
/// that the excursion count along the orbit equals the box count.
pub fn check_condition4(
    dynamics: &SectionDynamics<f64>,
    setup: &Condition4Setup,
    n: u64,
    seed: u64,
) -> Result<Condition4> {
    let Condition4Setup { a, beta, s0, .. } = *setup;
    let valid = 0.0 < a && a < 1.0 && 0.0 <= s0 && s0 < a && beta > 0.0;
    if !valid {
        return Err(Error::Domain(format!("need 0 ≤ s0 < a < 1 and β > 0, got s0 = {s0}, a = {a}, β = {beta}")));
    }
    if setup.windows.is_empty() || n == 0 {
        return Err(Error::Domain("need a return window and samples".into()));
    }
    let c = beta / (1.0 - a);
    let big_n = excursion_count(a, beta);
    let nf = big_n as f64;
    let boxes: Vec<Boxes> = setup
        .windows
        .iter()
        .map(|w| {
            Ok(Boxes {
                window: w.clone(),
                inner: (big_n > 0).then(|| BoxRegion::new(a, 1.0, a * w.lo * nf)).transpose()?,
                outer: BoxRegion::new(a, 1.0, w.hi * c)?,
            })
        })
        .collect::<Result<_>>()?;
    let alpha = *dynamics.alpha();
    let windows = boxes.len();

    let tally = mc::run_sharded(n, seed, |rng, count| {
        let mut tally = Tally::new(windows);
        for _ in 0..count {
            let (s, t) = mc::sample_section(rng, alpha, s0, a);
            let p = SectionPoint { s, t, h: 1.0 };
            match sample(dynamics, &p, a, big_n, &boxes, &mut tally) {
                Ok(()) => {}
                Err(Error::WindowExhausted { .. } | Error::BudgetExceeded { .. }) => tally.failed += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(tally)
    })
    .into_iter()
    .try_fold(Tally::new(windows), |acc, t| t.map(|t| acc.merge(t)))?;

    let measure = mc::section_measure(s0, a);
    if tally.failed * MAX_FAILED_RECIPROCAL > n {
        return Err(Error::WindowExhausted { growths: dynamics.max_growths });
    }
    let used = n - tally.failed;
    let est = |hits: u64| indicator_estimate(hits, used, seed).scaled(measure);
    let outcomes: Vec<WindowOutcome> = boxes
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let intersection = est(tally.all[i]);
            WindowOutcome {
                window: b.window.clone(),
                inner_height: b.inner.as_ref().map_or(0.0, |r| r.c),
                outer_height: b.outer.c,
                d0: est(tally.d0[i]),
                d1: est(tally.d1[i]),
                d2: est(tally.d2[i]),
                lower_95: intersection.mean - Z95 * intersection.stderr,
                intersection,
                bonferroni_proxy: tally.proxy[i].estimate(seed).scaled(measure),
                implication_violations: tally.violations[i],
            }
        })
        .collect();
    let head = &outcomes[0];
    let pass = head.lower_95 > 0.0
        && tally.disagree == 0
        && tally.time_disagree == 0
        && outcomes.iter().all(|o| o.implication_violations == 0);
    Ok(Condition4 {
        setup: setup.clone(),
        c,
        n_returns: big_n,
        domain_measure: measure,
        samples: n,
        excursion_measure: est(tally.excursion),
        lemma_disagreements: tally.disagree,
        time_disagreements: tally.time_disagree,
        failed_samples: tally.failed,
        partial: tally.failed > 0,
        pass,
        outcomes,
    })
}

fn sample(
    dynamics: &SectionDynamics<f64>,
    p: &SectionPoint<f64>,
    a: f64,
    big_n: u64,
    boxes: &[Boxes],
    tally: &mut Tally,
) -> Result<()> {
    let (s_n, excursions) = if big_n == 0 {
        (0.0, None)
    } else {
        let profile = dynamics.excursion_profile(p, big_n as usize, &a)?;
        (profile.s_n, Some(profile))
    };
    if let Some(pr) = &excursions {
        tally.excursion += u64::from(pr.orbit_count == 1);
        tally.disagree += u64::from(!pr.counts_agree());
        tally.time_disagree += u64::from(!pr.times_agree);
    }
    let nf = big_n as f64;
    for (i, b) in boxes.iter().enumerate() {
        let in_d0 = big_n > 0 && b.window.lo * nf <= s_n && s_n <= b.window.hi * nf;
        let f1 = match &b.inner {
            Some(r) => dynamics.count_in_box_right_closed(p, r)?,
            None => 0,
        };
        let f2 = dynamics.count_in_box_right_closed(p, &b.outer)?;
        let member = in_d0 && f1 == 1 && f2 == 1;
        tally.d0[i] += u64::from(in_d0);
        tally.d1[i] += u64::from(f1 == 1);
        tally.d2[i] += u64::from(f2 == 1);
        tally.all[i] += u64::from(member);
        tally.proxy[i].push(f1 as f64 - (f2 * f2.saturating_sub(1)) as f64);
        if member && excursions.as_ref().is_some_and(|pr| pr.box_count != 1) {
            tally.violations[i] += 1;
        }
    }
    Ok(())
}

/// Intersection measure for each `β`, and the log-log slope over the
/// positive ones.
#[derive(Clone, Debug, Serialize)]
pub struct BetaScaling {
    pub betas: Vec<f64>,
    pub measures: Vec<MCEstimate>,
    pub exponent: Option<f64>,
}

pub fn condition4_beta_scaling(
    dynamics: &SectionDynamics<f64>,
    a: f64,
    s0: f64,
    window: &ReturnWindow,
    betas: &[f64],
    n: u64,
    seed: u64,
) -> Result<BetaScaling> {
    let mut measures = Vec::with_capacity(betas.len());
    for &beta in betas {
        let setup = Condition4Setup { a, beta, s0, windows: vec![window.clone()] };
        measures.push(check_condition4(dynamics, &setup, n, seed)?.outcomes[0].intersection);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        betas.iter().zip(&measures).filter(|(_, m)| m.mean > 0.0).map(|(b, m)| (b.ln(), m.mean.ln())).unzip();
    Ok(BetaScaling { betas: betas.to_vec(), measures, exponent: (xs.len() >= 2).then(|| mc::linear_fit(&xs, &ys).0) })
}
