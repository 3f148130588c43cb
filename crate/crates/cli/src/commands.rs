use std::io::Write;

use horobcz_core::lattice::{enumerate_orbit, HeightTable};
use horobcz_core::mc::shard_rng;
use horobcz_core::section::{OrbitTrace, SectionDynamics, SectionPoint};
use horobcz_core::weakmix::{grid_point, run_criterion_report, HarnessConfig};
use horobcz_core::{QuadVal, Scalar};
use serde::Serialize;

use crate::config::{parse_quad, Format, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Sink;
use crate::Status;

/// Initial enumeration cover for the return map; it grows on demand.
const SECTION_COVER: i64 = 16;

#[derive(Serialize)]
struct VectorRow {
    x: f64,
    y: f64,
    x_exact: String,
    y_exact: String,
}

#[derive(Serialize)]
struct HeightRow {
    zeta: f64,
    zeta_exact: String,
    phi: u64,
}

#[derive(Serialize)]
struct OrbitRow {
    step: usize,
    s: f64,
    t: f64,
    return_time: f64,
    cum_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_exact: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_exact: Option<String>,
}

/// Window vectors with `|x| ≤ x_max`, `0 ≤ y < y_max`.
pub fn enumerate(cfg: &RunConfig) -> CliResult<Status> {
    let surface = cfg.surface()?;
    let y_max = parse_quad("y-max", cfg.y_max.as_deref().unwrap_or("10"))?;
    let x_max = match &cfg.x_max {
        Some(text) => parse_quad("x-max", text)?,
        None => &surface.alpha * &y_max,
    };
    let window = enumerate_orbit(&surface, &x_max, &y_max)?;
    let rows: Vec<VectorRow> = window
        .vectors()
        .into_iter()
        .map(|v| VectorRow { x: v.x.to_f64(), y: v.y.to_f64(), x_exact: v.x.to_string(), y_exact: v.y.to_string() })
        .collect();
    Sink::new("enumerate", cfg).emit(&rows, |out| write_rows(out, &["x", "y", "x_exact", "y_exact"], &rows))?;
    Ok(Status::Pass)
}

/// Heights below the cutoff with their totients.
pub fn heights(cfg: &RunConfig) -> CliResult<Status> {
    let surface = cfg.surface()?;
    let table = HeightTable::compute(&surface, &cfg.cutoff_or(100)?)?;
    let sink = Sink::new("heights", cfg);
    match cfg.format() {
        Format::Csv => sink.csv(|out| Ok(table.write_csv(out)?))?,
        Format::Json => {
            let rows: Vec<HeightRow> = table
                .heights
                .iter()
                .zip(&table.phi)
                .map(|(h, p)| HeightRow { zeta: h.to_f64(), zeta_exact: h.to_string(), phi: *p })
                .collect();
            sink.json(&rows)?;
        }
    }
    Ok(Status::Pass)
}

pub fn orbit(cfg: &RunConfig) -> CliResult<Status> {
    let surface = cfg.surface()?;
    let steps = cfg.steps_or(100)?;
    let level = parse_quad("level", cfg.level.as_deref().unwrap_or("1"))?;
    let random = cfg.random.unwrap_or(false);
    let exact = cfg.exact.unwrap_or(false);
    let start = if random {
        if cfg.s.is_some() || cfg.t.is_some() {
            return Err(CliError::Usage("--random conflicts with --s/--t".into()));
        }
        let seed = cfg.seed("a random starting point")?;
        let unit: SectionPoint<QuadVal> = grid_point(&mut shard_rng(seed, 0), &surface.alpha, 0.0, 1.0);
        // the grid point lies in Ω_1; (s, 1 − t) scales linearly into Ω_h
        let one = QuadVal::one();
        (&unit.s * &level, &one - &(&level * &(&one - &unit.t)))
    } else {
        let (Some(s), Some(t)) = (&cfg.s, &cfg.t) else {
            return Err(CliError::Usage("orbit needs --s and --t, or --random with --seed".into()));
        };
        (parse_quad("s", s)?, parse_quad("t", t)?)
    };

    let sink = Sink::new("orbit", cfg);
    if exact {
        let dynamics = SectionDynamics::<QuadVal>::new(&surface, &QuadVal::int(SECTION_COVER))?;
        let p = dynamics.point(start.0, start.1, level)?;
        let trace = dynamics.orbit(&p, steps)?;
        write_trace(&sink, cfg, &trace, true)?;
    } else {
        let dynamics = SectionDynamics::<f64>::new(&surface, &QuadVal::int(SECTION_COVER))?;
        let p = dynamics.point(start.0.to_f64(), start.1.to_f64(), level.to_f64())?;
        let trace = dynamics.orbit(&p, steps)?;
        write_trace(&sink, cfg, &trace, false)?;
    }
    Ok(Status::Pass)
}

fn write_trace<S: Scalar + std::fmt::Display>(
    sink: &Sink,
    cfg: &RunConfig,
    trace: &OrbitTrace<S>,
    exact: bool,
) -> CliResult<()> {
    match cfg.format() {
        Format::Csv => sink.csv(|out| Ok(trace.write_csv(out)?)),
        Format::Json => {
            let rows: Vec<OrbitRow> = trace
                .records
                .iter()
                .zip(&trace.cumulative_times)
                .enumerate()
                .map(|(i, (r, c))| OrbitRow {
                    step: i + 1,
                    s: r.next.s.to_f64(),
                    t: r.next.t.to_f64(),
                    return_time: r.return_time.to_f64(),
                    cum_time: c.to_f64(),
                    s_exact: exact.then(|| r.next.s.to_string()),
                    t_exact: exact.then(|| r.next.t.to_string()),
                })
                .collect();
            sink.json(&rows)
        }
    }
}

/// Full weak-mixing criterion run: summary table on stdout, JSON to `--out`.
pub fn report(cfg: &RunConfig) -> CliResult<Status> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Usage("report is written as JSON only".into()));
    }
    let surface = cfg.surface()?;
    let defaults = HarnessConfig::default();
    let harness = HarnessConfig {
        a: cfg.level_a(defaults.a)?,
        beta: cfg.beta_or(defaults.beta)?,
        s0: cfg.s0_f64("1/2")?,
        samples: cfg.samples_or(defaults.samples)?,
        seed: cfg.seed("report")?,
        ..defaults
    };
    let report = run_criterion_report(&surface, &harness)?;
    print!("{}", report.summary());
    if cfg.out.is_some() {
        Sink::new("report", cfg).json(&report)?;
    }
    Ok(Status::from(report.pass))
}

/// Header row first, so an empty table is still a valid CSV file.
pub fn write_rows<T: Serialize>(out: &mut dyn Write, header: &[&str], rows: &[T]) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
