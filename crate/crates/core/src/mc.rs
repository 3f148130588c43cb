//! Seeded, shard-parallel Monte-Carlo over the section.
//!
//! Work is split into a fixed number of shards; shard `i` draws from a
//! ChaCha8 stream `i` keyed by the seed, so results are bitwise identical for
//! any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Shard count used by every estimator.
pub const SHARDS: u64 = 64;

/// Width of the band around section boundaries inside which samples are redrawn.
pub const GUARD_BAND: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
}

impl MCEstimate {
    pub fn scaled(self, k: f64) -> Self {
        MCEstimate { mean: self.mean * k, stderr: self.stderr * k.abs(), ..self }
    }

    /// `|mean − x| / stderr`, infinite for a zero stderr and a mismatch.
    pub fn z_score(&self, x: f64) -> f64 {
        let d = (self.mean - x).abs();
        if d == 0.0 {
            0.0
        } else if self.stderr == 0.0 {
            f64::INFINITY
        } else {
            d / self.stderr
        }
    }
}

/// Running count, sum and sum of squares.
#[derive(Clone, Copy, Debug, Default)]
pub struct Moments {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(self, o: Moments) -> Moments {
        Moments { n: self.n + o.n, sum: self.sum + o.sum, sum_sq: self.sum_sq + o.sum_sq }
    }

    pub fn estimate(&self, seed: u64) -> MCEstimate {
        let n = self.n.max(1) as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 { ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        MCEstimate { mean, stderr: (var / n).sqrt(), n: self.n, seed }
    }
}

pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Runs `body(rng, count)` on every shard in parallel and returns the
/// per-shard results in shard order.
pub fn run_sharded<T, F>(n: u64, seed: u64, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync,
{
    (0..SHARDS)
        .into_par_iter()
        .map(|i| {
            let count = n / SHARDS + u64::from(i < n % SHARDS);
            let mut rng = shard_rng(seed, i);
            body(&mut rng, count)
        })
        .collect()
}

/// Sharded mean of `f(rng)` over `n` draws; the reduction is in shard order.
pub fn estimate<F>(n: u64, seed: u64, f: F) -> MCEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    run_sharded(n, seed, |rng, count| {
        let mut m = Moments::default();
        for _ in 0..count {
            m.push(f(rng));
        }
        m
    })
    .into_iter()
    .fold(Moments::default(), Moments::merge)
    .estimate(seed)
}

/// Uniform point of `{(s, t): s_lo ≤ s ≤ s_hi, 1 − αs < t ≤ 1}` for the
/// measure `ds dt`, away from the boundary by the guard band.
pub fn sample_section<R: Rng>(rng: &mut R, alpha: f64, s_lo: f64, s_hi: f64) -> (f64, f64) {
    let (lo2, hi2) = (s_lo * s_lo, s_hi * s_hi);
    loop {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let s = (lo2 + u * (hi2 - lo2)).sqrt();
        let t = 1.0 - alpha * s * v;
        let near_edge = s < GUARD_BAND
            || (s_hi - s).abs() < GUARD_BAND
            || (1.0 - t) < GUARD_BAND
            || (t - (1.0 - alpha * s)) < GUARD_BAND;
        if !near_edge {
            return (s, t);
        }
    }
}

/// Measure of `{s_lo ≤ s ≤ s_hi}` for the normalized measure `(2/α) ds dt`.
pub fn section_measure(s_lo: f64, s_hi: f64) -> f64 {
    s_hi * s_hi - s_lo * s_lo
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
