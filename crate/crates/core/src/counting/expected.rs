use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::QuadVal;
use crate::lattice::{HeightTable, Layers};
use crate::mc::{self, MCEstimate};
use crate::surface::SurfaceModel;

use super::{count_in_layers, BoxRegion};

/// A box `A = [a, b) × (0, c)` averaged over `Ω⁰ = {(s, t) ∈ Ω: s ≥ s0}`.
#[derive(Clone, Debug)]
pub struct CountingSetup {
    pub surface: Arc<SurfaceModel>,
    pub s0: QuadVal,
    pub area: BoxRegion<QuadVal>,
    /// Heights up to and including the first one above `c`.
    pub table: Arc<HeightTable>,
}

impl CountingSetup {
    pub fn new(surface: &Arc<SurfaceModel>, s0: QuadVal, area: BoxRegion<QuadVal>) -> Result<Self> {
        let mut extra = QuadVal::int(2);
        let table = loop {
            let cutoff = &area.c + &extra;
            let t = HeightTable::compute(surface, &cutoff)?;
            if t.heights.last().is_some_and(|h| *h > area.c) {
                break t;
            }
            extra = &extra * &QuadVal::int(2);
        };
        Self::with_table(surface, s0, area, Arc::new(table))
    }

    pub fn with_table(
        surface: &Arc<SurfaceModel>,
        s0: QuadVal,
        area: BoxRegion<QuadVal>,
        table: Arc<HeightTable>,
    ) -> Result<Self> {
        if !s0.is_positive() || s0 >= QuadVal::one() {
            return Err(Error::Domain(format!("s0 = {s0} not in (0, 1)")));
        }
        if !table.heights.last().is_some_and(|h| *h > area.c) {
            return Err(Error::UndersizedWindow(format!("height table must reach past c = {}", area.c)));
        }
        let zeta1 = &table.heights[0];
        let bound = &(zeta1 * &surface.alpha) * &s0;
        let width = area.width();
        if width >= bound {
            return Err(Error::Hypothesis(format!(
                "b − a < ζ₁ α s₀ fails: b − a = {} but ζ₁ α s₀ = {} (≈ {:.6})",
                width,
                bound,
                bound.to_f64()
            )));
        }
        Ok(CountingSetup { surface: surface.clone(), s0, area, table })
    }

    /// `m(Ω⁰) = 1 − s0²`.
    pub fn domain_measure(&self) -> f64 {
        mc::section_measure(self.s0.to_f64(), 1.0)
    }
}

/// Exact average of `W` over `Ω⁰` split as `(2(b − a)/α)(I1 + I2 + I3)`.
#[derive(Clone, Debug, Serialize)]
pub struct ExpectedCount {
    /// `k′ = #{k: ζ_k ≤ c s0}`.
    pub k_lo: usize,
    /// `k″ = #{k: ζ_k ≤ c}`.
    pub k_hi: usize,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub total: f64,
    /// `(2(b − a)/α) I2`.
    pub lower_bound: f64,
    /// `I1` with the height sum over `j < c s0` strictly; differs from `i1`
    /// only when `c s0` is itself a height.
    pub i1_strict: f64,
    /// `c⁻¹ (Σ_{ℓ<k″} (ζ_{k″} − ζ_ℓ) g_ℓ − Σ_{ℓ≤k′} (ζ_{k′} − ζ_ℓ) g_ℓ)` with
    /// `g = φ(ζ)/ζ`, times `c`.
    pub i2_telescoped_as_printed: f64,
    /// The same with `ζ_{k′+1}` in the second sum, which equals `i2`.
    pub i2_telescoped: f64,
    /// `∫_{s0}^1 Σ_{j < cs} φ(j)/j ds` evaluated piecewise at the breakpoints.
    pub breakpoint_integral: f64,
}

impl ExpectedCount {
    pub fn telescoping_gap(&self) -> f64 {
        self.i2_telescoped_as_printed - self.i2
    }
}

pub fn exact_expected_count(setup: &CountingSetup) -> ExpectedCount {
    let table = &setup.table;
    let c = &setup.area.c;
    let cs0 = c * &setup.s0;
    let k_lo = table.heights.partition_point(|h| *h <= cs0);
    let k_hi = table.heights.partition_point(|h| h <= c);
    let zeta: Vec<f64> = table.heights_f64();
    let g: Vec<f64> = zeta.iter().zip(&table.phi).map(|(z, p)| *p as f64 / z).collect();
    // prefix[ℓ] = Σ_{i ≤ ℓ} g_i (1-based), prefix[0] = 0
    let mut prefix = vec![0.0; g.len() + 1];
    for (i, gi) in g.iter().enumerate() {
        prefix[i + 1] = prefix[i] + gi;
    }
    let z = |k: usize| if k == 0 { 0.0 } else { zeta[k - 1] };
    let cf = c.to_f64();
    let cs0f = cs0.to_f64();

    let i1 = (z(k_lo + 1) - cs0f) / cf * prefix[k_lo];
    let strict_lo = table.heights.partition_point(|h| *h < cs0);
    let i1_strict = (z(k_lo + 1) - cs0f) / cf * prefix[strict_lo];

    let piece = |l: usize| (z(l + 1) - z(l)) / cf * prefix[l];
    let first: f64 = (1..k_hi).map(piece).sum();
    let second: f64 = (1..=k_lo).map(piece).sum();
    let i2 = first - second;
    let i3 = (cf - z(k_hi)) / cf * prefix[k_hi];

    let tele = |top: f64, upto: usize| -> f64 { (1..=upto).map(|l| (top - z(l)) * g[l - 1]).sum() };
    let head = tele(z(k_hi), k_hi.saturating_sub(1));
    let i2_telescoped_as_printed = (head - tele(z(k_lo), k_lo)) / cf;
    let i2_telescoped = (head - tele(z(k_lo + 1), k_lo)) / cf;

    // breakpoints s = ζ_k / c inside (s0, 1)
    let mut breakpoint_integral = 0.0;
    let mut left = setup.s0.to_f64();
    let mut below = k_lo;
    for (k, zk) in zeta[..k_hi].iter().enumerate().skip(k_lo) {
        let right = zk / cf;
        breakpoint_integral += (right - left) * prefix[below];
        left = right;
        below = k + 1;
    }
    breakpoint_integral += (1.0 - left) * prefix[below];

    let scale = 2.0 * setup.area.width().to_f64() / setup.surface.alpha_f64();
    ExpectedCount {
        k_lo,
        k_hi,
        i1,
        i2,
        i3,
        total: scale * (i1 + i2 + i3),
        lower_bound: scale * i2,
        i1_strict,
        i2_telescoped_as_printed,
        i2_telescoped,
        breakpoint_integral,
    }
}

/// Monte-Carlo estimate of `∫_{Ω⁰} W(s, t, A) dm`.
pub fn mc_expected_count(setup: &CountingSetup, n: u64, seed: u64) -> Result<MCEstimate> {
    if n < 1000 {
        return Err(Error::Domain(format!("{n} samples is below the minimum of 1000")));
    }
    let layers = Layers::<f64>::build(&setup.surface, &setup.area.c, false)?;
    mc_expected_count_with(setup, &layers, n, seed)
}

/// As [`mc_expected_count`], reusing prebuilt layers that cover heights below `c`.
pub fn mc_expected_count_with(setup: &CountingSetup, layers: &Layers<f64>, n: u64, seed: u64) -> Result<MCEstimate> {
    let area = setup.area.to_f64();
    layers.require_cover(&area.c)?;
    let alpha = setup.surface.alpha_f64();
    let s0 = setup.s0.to_f64();
    let est = mc::estimate(n, seed, |rng| {
        let (s, t) = mc::sample_section(rng, alpha, s0, 1.0);
        count_in_layers(layers, &s, &t, &area).expect("cover checked") as f64
    });
    Ok(est.scaled(setup.domain_measure()))
}

/// Serializable summary of one counting run.
#[derive(Clone, Debug, Serialize)]
pub struct CountingReport {
    pub surface: String,
    pub s0: f64,
    pub s0_exact: String,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub box_exact: [String; 3],
    pub expected: ExpectedCount,
    pub monte_carlo: Option<MCEstimate>,
}

impl CountingReport {
    pub fn new(setup: &CountingSetup, expected: ExpectedCount, monte_carlo: Option<MCEstimate>) -> Self {
        let area = &setup.area;
        CountingReport {
            surface: setup.surface.name.clone(),
            s0: setup.s0.to_f64(),
            s0_exact: setup.s0.to_string(),
            a: area.a.to_f64(),
            b: area.b.to_f64(),
            c: area.c.to_f64(),
            box_exact: [area.a.to_string(), area.b.to_string(), area.c.to_string()],
            expected,
            monte_carlo,
        }
    }
}
