use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mc;
use crate::section::{SectionDynamics, SectionPoint};

/// Catalog of observables on `Ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Observable {
    Constant,
    CoordS,
    CoordT,
    /// Indicator of `{s > threshold}`.
    SAbove(f64),
    /// Indicator of `[s_lo, s_hi) × [t_lo, t_hi)`.
    Rect {
        s_lo: f64,
        s_hi: f64,
        t_lo: f64,
        t_hi: f64,
    },
}

impl Observable {
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match *self {
            Observable::Constant => 1.0,
            Observable::CoordS => s,
            Observable::CoordT => t,
            Observable::SAbove(x) => f64::from(u8::from(s > x)),
            Observable::Rect { s_lo, s_hi, t_lo, t_hi } => {
                f64::from(u8::from(s_lo <= s && s < s_hi && t_lo <= t && t < t_hi))
            }
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Constant => write!(f, "const"),
            Observable::CoordS => write!(f, "s"),
            Observable::CoordT => write!(f, "t"),
            Observable::SAbove(x) => write!(f, "s>{x}"),
            Observable::Rect { s_lo, s_hi, t_lo, t_hi } => write!(f, "rect:{s_lo},{s_hi},{t_lo},{t_hi}"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(id: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown observable {id:?}"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        match id.trim() {
            "const" => Ok(Observable::Constant),
            "s" => Ok(Observable::CoordS),
            "t" => Ok(Observable::CoordT),
            other => {
                if let Some(x) = other.strip_prefix("s>") {
                    return Ok(Observable::SAbove(num(x)?));
                }
                let parts = other.strip_prefix("rect:").ok_or_else(bad)?;
                let v = parts.split(',').map(num).collect::<Result<Vec<_>>>()?;
                match v[..] {
                    [s_lo, s_hi, t_lo, t_hi] => Ok(Observable::Rect { s_lo, s_hi, t_lo, t_hi }),
                    _ => Err(bad()),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrelationDiagnostic {
    pub observable: String,
    pub orbit_len: usize,
    pub seed: u64,
    pub lags: Vec<usize>,
    /// `(1/L) Σ_{l=1..L} |corr(f ∘ T^l, f)|` for each `L` in `lags`.
    pub cesaro_abs_corr: Vec<f64>,
    /// Whether the last average is below the first.
    pub decreasing: bool,
}

/// Cesàro averages of absolute autocorrelations along one orbit from a
/// seeded random start. Each lag uses the first `orbit_len` terms.
pub fn correlation_diagnostic(
    dynamics: &SectionDynamics<f64>,
    observable: Observable,
    orbit_len: usize,
    lags: &[usize],
    seed: u64,
) -> Result<CorrelationDiagnostic> {
    if lags.is_empty() || lags[0] == 0 || lags.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("lags must be positive and increasing".into()));
    }
    if orbit_len < 2 {
        return Err(Error::Domain("orbit length must be at least 2".into()));
    }
    let max_lag = *lags.last().expect("nonempty");
    let alpha = *dynamics.alpha();
    let mut rng = mc::shard_rng(seed, 0);
    let (s, t) = mc::sample_section(&mut rng, alpha, 0.0, 1.0);
    let mut q = SectionPoint { s, t, h: 1.0 };
    let mut values = Vec::with_capacity(orbit_len + max_lag);
    for _ in 0..orbit_len + max_lag {
        values.push(observable.eval(q.s, q.t));
        q = dynamics.return_map(&q)?.next;
    }

    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let centered: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let var = centered[..orbit_len].iter().map(|v| v * v).sum::<f64>() / orbit_len as f64;
    let abs_corr: Vec<f64> = (1..=max_lag)
        .map(|l| {
            if var <= 0.0 {
                return 0.0;
            }
            let cov = centered[..orbit_len].iter().zip(&centered[l..l + orbit_len]).map(|(x, y)| x * y).sum::<f64>()
                / orbit_len as f64;
            (cov / var).abs()
        })
        .collect();

    let mut prefix = 0.0;
    let mut sums = Vec::with_capacity(max_lag);
    for c in &abs_corr {
        prefix += c;
        sums.push(prefix);
    }
    let cesaro_abs_corr: Vec<f64> = lags.iter().map(|&l| sums[l - 1] / l as f64).collect();
    let decreasing = cesaro_abs_corr.last() < cesaro_abs_corr.first();
    Ok(CorrelationDiagnostic {
        observable: observable.to_string(),
        orbit_len,
        seed,
        lags: lags.to_vec(),
        cesaro_abs_corr,
        decreasing,
    })
}
