use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{QuadVal, Rational};
use crate::lattice::Layers;
use crate::mc::{self, MCEstimate, Moments};
use crate::surface::SurfaceModel;

use super::{count_in_layers, BoxRegion};

#[derive(Clone, Debug, Serialize)]
pub struct MomentRow {
    pub beta: f64,
    /// `c_n = β / (1 − a_n)`.
    pub c: f64,
    /// `∫_{Ω⁰} W² − W dm`.
    pub second: MCEstimate,
    /// `∫_{Ω⁰} W dm` from the same samples.
    pub first: MCEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentScaling {
    pub a_n: f64,
    pub s0: f64,
    pub rows: Vec<MomentRow>,
    /// Least-squares slope of `log ∫(W² − W)` against `log β` over rows with
    /// a positive estimate.
    pub slope: Option<f64>,
}

impl MomentScaling {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["beta", "c", "second_mean", "second_stderr", "first_mean", "first_stderr", "n", "seed"])?;
        for r in &self.rows {
            w.write_record([
                r.beta.to_string(),
                r.c.to_string(),
                r.second.mean.to_string(),
                r.second.stderr.to_string(),
                r.first.mean.to_string(),
                r.first.stderr.to_string(),
                r.second.n.to_string(),
                r.second.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Monte-Carlo second moment of box counts for `B = [a_n, 1) × (0, β/(1 − a_n))`
/// over `Ω⁰`, one estimate per `β`.
pub fn second_moment_mc(
    surface: &Arc<SurfaceModel>,
    s0: f64,
    betas: &[f64],
    a_n: f64,
    n: u64,
    seed: u64,
) -> Result<MomentScaling> {
    if !(0.0..1.0).contains(&s0) || !(0.0 < a_n && a_n < 1.0) {
        return Err(Error::Domain(format!("need 0 ≤ s0 < 1 and 0 < a_n < 1, got {s0}, {a_n}")));
    }
    if betas.iter().any(|b| b.is_nan() || *b <= 0.0) {
        return Err(Error::Domain("beta values must be positive".into()));
    }
    let c_max = betas.iter().cloned().fold(0.0, f64::max) / (1.0 - a_n);
    let cover = QuadVal::rational(Rational::from_int(c_max.ceil() as i64 + 1));
    let layers = Layers::<f64>::build(surface, &cover, false)?;
    let alpha = surface.alpha_f64();
    let measure = mc::section_measure(s0, 1.0);

    let mut rows = Vec::with_capacity(betas.len());
    for &beta in betas {
        let c = beta / (1.0 - a_n);
        let area = BoxRegion::new(a_n, 1.0, c)?;
        let shards = mc::run_sharded(n, seed, |rng, count| {
            let mut first = Moments::default();
            let mut second = Moments::default();
            for _ in 0..count {
                let (s, t) = mc::sample_section(rng, alpha, s0, 1.0);
                let w = count_in_layers(&layers, &s, &t, &area).expect("cover checked") as f64;
                first.push(w);
                second.push(w * w - w);
            }
            (first, second)
        });
        let (first, second) = shards
            .into_iter()
            .fold((Moments::default(), Moments::default()), |(f, s), (f2, s2)| (f.merge(f2), s.merge(s2)));
        rows.push(MomentRow {
            beta,
            c,
            second: second.estimate(seed).scaled(measure),
            first: first.estimate(seed).scaled(measure),
        });
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.second.mean > 0.0).map(|r| (r.beta.ln(), r.second.mean.ln())).unzip();
    let slope = (xs.len() >= 2).then(|| mc::linear_fit(&xs, &ys).0);
    Ok(MomentScaling { a_n, s0, rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_boxes_are_empty() {
        let m = second_moment_mc(&SurfaceModel::torus(), 0.5, &[0.001], 0.9, 2000, 1).unwrap();
        assert_eq!(m.rows[0].second.mean, 0.0);
        assert_eq!(m.rows[0].first.mean, 0.0);
        assert!(m.slope.is_none());
    }

    #[test]
    fn nonnegative_and_reproducible() {
        let s = SurfaceModel::torus();
        let a = second_moment_mc(&s, 0.5, &[0.5, 1.0], 0.9, 5000, 9).unwrap();
        assert!(a.rows.iter().all(|r| r.second.mean >= 0.0));
        let b = second_moment_mc(&s, 0.5, &[0.5, 1.0], 0.9, 5000, 9).unwrap();
        assert_eq!(a.rows[1].second, b.rows[1].second);
    }
}
