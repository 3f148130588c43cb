use horobcz_core::counting::second_moment_mc;
use horobcz_core::lattice::{estimate_c_omega, weighted_height_sum, HeightTable};
use horobcz_core::mc;
use horobcz_core::section::SectionDynamics;
use horobcz_core::QuadVal;
use serde::Serialize;

use crate::commands::write_rows;
use crate::config::{parse_list, parse_quad, Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Sink;
use crate::Status;

pub const KINDS: &[&str] = &["gaps", "beta", "convergence"];

#[derive(Serialize)]
struct BinRow {
    bin_lo: f64,
    bin_hi: f64,
    count: u64,
    fraction: f64,
}

#[derive(Serialize)]
struct ConvergenceRow {
    cutoff: f64,
    cutoff_exact: String,
    heights: usize,
    c_omega: f64,
    weighted_over_c_omega: f64,
}

pub fn plotdata(cfg: &RunConfig, kind: &str) -> CliResult<Status> {
    match kind {
        "gaps" => gaps(cfg)?,
        "beta" => beta(cfg)?,
        "convergence" => convergence(cfg)?,
        other => return Err(CliError::Usage(format!("unknown plot {other:?}; expected one of {}", KINDS.join(", ")))),
    }
    Ok(Status::Pass)
}

/// Histogram of return times along orbits from random starts in `Ω`. The last
/// row collects everything above `--x-max`.
fn gaps(cfg: &RunConfig) -> CliResult<()> {
    let surface = cfg.surface()?;
    let orbits = cfg.samples_or(64)?;
    let steps = cfg.steps_or(1000)?;
    let bins = cfg.bins_or(50)?;
    let upper = parse_quad("x-max", cfg.x_max.as_deref().unwrap_or("10"))?.to_f64();
    if upper.is_nan() || upper <= 0.0 {
        return Err(CliError::Usage("--x-max must be positive".into()));
    }
    let seed = cfg.seed("plotdata gaps")?;
    let dynamics = SectionDynamics::<f64>::new(&surface, &QuadVal::int(16))?;
    let alpha = surface.alpha_f64();
    let width = upper / bins as f64;

    let shards = mc::run_sharded(orbits, seed, |rng, count| -> horobcz_core::Result<Vec<u64>> {
        let mut hist = vec![0u64; bins + 1];
        for _ in 0..count {
            let (s, t) = mc::sample_section(rng, alpha, 0.0, 1.0);
            let mut p = dynamics.point(s, t, 1.0)?;
            for _ in 0..steps {
                let r = dynamics.return_map(&p)?;
                hist[((r.return_time / width) as usize).min(bins)] += 1;
                p = r.next;
            }
        }
        Ok(hist)
    });
    let mut hist = vec![0u64; bins + 1];
    for shard in shards {
        for (h, k) in hist.iter_mut().zip(shard?) {
            *h += k;
        }
    }
    let total = hist.iter().sum::<u64>() as f64;
    let rows: Vec<BinRow> = hist
        .iter()
        .enumerate()
        .map(|(i, &count)| BinRow {
            bin_lo: i as f64 * width,
            bin_hi: if i == bins { f64::INFINITY } else { (i + 1) as f64 * width },
            count,
            fraction: count as f64 / total,
        })
        .collect();
    Sink::new("plotdata gaps", cfg)
        .emit(&rows, |out| write_rows(out, &["bin_lo", "bin_hi", "count", "fraction"], &rows))
}

/// Second moment of box counts against β.
fn beta(cfg: &RunConfig) -> CliResult<()> {
    let surface = cfg.surface()?;
    let m = second_moment_mc(
        &surface,
        cfg.s0_f64("1/2")?,
        &cfg.betas_or(&[0.025, 0.05, 0.1, 0.2, 0.4])?,
        cfg.level_a(0.99)?,
        cfg.samples_or(200_000)?,
        cfg.seed("plotdata beta")?,
    )?;
    let sink = Sink::new("plotdata beta", cfg);
    match cfg.format() {
        Format::Csv => sink.csv(|out| Ok(m.write_csv(out)?)),
        Format::Json => sink.json(&m),
    }
}

/// `c_ω` and the weighted height sum ratio against the height cutoff.
fn convergence(cfg: &RunConfig) -> CliResult<()> {
    let surface = cfg.surface()?;
    let cutoffs: Vec<String> = parse_list("cutoffs", cfg.cutoffs.as_deref().unwrap_or("50,100,200,500,1000,2000"))?;
    let mut cutoffs = cutoffs.iter().map(|c| parse_quad("cutoffs", c)).collect::<CliResult<Vec<QuadVal>>>()?;
    if cutoffs.iter().any(|c| !c.is_positive()) {
        return Err(CliError::Usage("--cutoffs must be positive".into()));
    }
    cutoffs.sort();
    cutoffs.dedup();
    let largest = cutoffs.last().expect("parse_list rejects empty lists");
    let full = HeightTable::compute(&surface, largest)?;
    let rows = cutoffs
        .iter()
        .map(|r| {
            let table = full.truncated(r)?;
            let c_omega = estimate_c_omega(&table);
            Ok(ConvergenceRow {
                cutoff: r.to_f64(),
                cutoff_exact: r.to_string(),
                heights: table.len(),
                c_omega,
                weighted_over_c_omega: weighted_height_sum(&table) / c_omega,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Sink::new("plotdata convergence", cfg).emit(&rows, |out| {
        write_rows(out, &["cutoff", "cutoff_exact", "heights", "c_omega", "weighted_over_c_omega"], &rows)
    })
}
