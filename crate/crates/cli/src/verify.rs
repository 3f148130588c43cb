use std::f64::consts::PI;

use horobcz_core::counting::{
    exact_expected_count, mc_expected_count, periodic_interval_average, second_moment_mc, BoxRegion, CountingReport,
    CountingSetup,
};
use horobcz_core::exact::Rational;
use horobcz_core::lattice::{
    det_class_count, enumerate_orbit, estimate_c_omega, heights_table, weighted_height_sum, HeightTable,
};
use horobcz_core::mc::shard_rng;
use horobcz_core::section::{bcz_classical, SectionDynamics, SectionPoint};
use horobcz_core::weakmix::{run_criterion_report, HarnessConfig};
use horobcz_core::QuadVal;
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::commands::write_rows;
use crate::config::{parse_quad, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::Sink;
use crate::Status;

pub const SUITES: &[&str] = &["theorem12", "lemma32", "abel", "conditions", "secondmoment", "detclass", "oracle-bcz"];

#[derive(Serialize)]
pub struct Check {
    pub name: String,
    pub value: String,
    pub target: String,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, value: impl ToString, target: impl ToString, pass: bool) -> Self {
        Check { name: name.to_string(), value: value.to_string(), target: target.to_string(), pass }
    }
}

#[derive(Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub surface: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    pub details: Value,
}

pub fn verify(cfg: &RunConfig, suite: &str) -> CliResult<Status> {
    let run = match suite {
        "theorem12" => theorem12,
        "lemma32" => lemma32,
        "abel" => abel,
        "conditions" => conditions,
        "secondmoment" => secondmoment,
        "detclass" => detclass,
        "oracle-bcz" => oracle_bcz,
        other => {
            return Err(CliError::Usage(format!("unknown suite {other:?}; expected one of {}", SUITES.join(", "))))
        }
    };
    let surface = cfg.surface()?.name.clone();
    let (checks, details) = run(cfg)?;
    let report =
        SuiteReport { suite: suite.to_string(), surface, pass: checks.iter().all(|c| c.pass), checks, details };
    for c in &report.checks {
        eprintln!("{:<6} {}: {} (target {})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.target);
    }
    Sink::new(&format!("verify {suite}"), cfg)
        .emit(&report, |out| write_rows(out, &["name", "value", "target", "pass"], &report.checks))?;
    Ok(Status::from(report.pass))
}

type SuiteOutput = (Vec<Check>, Value);

fn parse_box(text: &str) -> CliResult<BoxRegion<QuadVal>> {
    let parts: Vec<&str> = text.split(',').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(CliError::Usage(format!("--box wants a,b,c, got {text:?}")));
    };
    Ok(BoxRegion::new(parse_quad("box", a)?, parse_quad("box", b)?, parse_quad("box", c)?)?)
}

/// Exact expected count against Monte-Carlo, plus its internal identities.
fn theorem12(cfg: &RunConfig) -> CliResult<SuiteOutput> {
    let surface = cfg.surface()?;
    let area = parse_box(cfg.area.as_deref().unwrap_or("0,1/4,10"))?;
    let setup = CountingSetup::new(&surface, cfg.s0_exact("1/2")?, area)?;
    let n = cfg.samples_or(1_000_000)?;
    let seed = cfg.seed("theorem12")?;
    let exact = exact_expected_count(&setup);
    let mc = mc_expected_count(&setup, n, seed)?;
    let z = mc.z_score(exact.total);
    let pieces = exact.i1 + exact.i2 + exact.i3;
    let tol = |x: f64| 1e-9 * x.abs().max(1.0);
    let checks = vec![
        Check::new("mc_z_score", format!("{z:.3}"), "<= 3", z <= 3.0),
        Check::new(
            "lower_bound",
            exact.lower_bound,
            format!("<= total {}", exact.total),
            exact.lower_bound <= exact.total + 1e-12,
        ),
        Check::new(
            "i2_telescoped",
            exact.i2_telescoped,
            format!("i2 {}", exact.i2),
            (exact.i2_telescoped - exact.i2).abs() <= tol(exact.i2),
        ),
        Check::new(
            "breakpoint_integral",
            exact.breakpoint_integral,
            format!("i1 + i2 + i3 = {pieces}"),
            (pieces - exact.breakpoint_integral).abs() <= tol(pieces),
        ),
    ];
    let details = serde_json::to_value(CountingReport::new(&setup, exact, Some(mc)))?;
    Ok((checks, details))
}

/// Averages of a periodic interval count over random configurations.
fn lemma32(cfg: &RunConfig) -> CliResult<SuiteOutput> {
    let alpha = cfg.surface()?.alpha_f64();
    let draws = cfg.samples_or(100)?;
    let mut rng = shard_rng(cfg.seed("lemma32")?, 0);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let j: f64 = rng.random_range(0.5..20.0);
        let s: f64 = rng.random_range(0.01..1.0);
        let period = alpha * j;
        let k = rng.random_range(0..8);
        let mut xs: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..period)).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let a: f64 = rng.random_range(-3.0..3.0);
        let b = a + rng.random_range(0.01..0.99) * period * s;
        let (exact, integral) = periodic_interval_average(&alpha, &j, &s, &xs, &a, &b)?;
        worst = worst.max((exact - integral).abs());
    }
    let checks = vec![Check::new("max_abs_error", format!("{worst:.3e}"), "< 1e-10", worst < 1e-10)];
    Ok((checks, json!({ "alpha": alpha, "draws": draws, "max_abs_error": worst })))
}

/// `c_ω` from the height table and the weighted sum that should approach `2 c_ω`.
fn abel(cfg: &RunConfig) -> CliResult<SuiteOutput> {
    let surface = cfg.surface()?;
    let cutoff = cfg.cutoff_or(1000)?;
    let table = HeightTable::compute(&surface, &cutoff)?;
    let c_omega = estimate_c_omega(&table);
    let ratio = weighted_height_sum(&table) / c_omega;
    let mut checks =
        vec![Check::new("weighted_over_c_omega", format!("{ratio:.6}"), "2 within 3%", (ratio - 2.0).abs() < 0.06)];
    if surface.name == "torus" {
        let reference = 3.0 / (PI * PI);
        let rel = (c_omega - reference).abs() / reference;
        checks.push(Check::new(
            "c_omega_vs_3_over_pi2",
            format!("{c_omega:.6}"),
            format!("{reference:.6} within 2%"),
            rel < 0.02,
        ));
    }
    let details = json!({
        "cutoff": cutoff.to_string(),
        "heights": table.len(),
        "c_omega": c_omega,
        "weighted_over_c_omega": ratio,
    });
    Ok((checks, details))
}

fn conditions(cfg: &RunConfig) -> CliResult<SuiteOutput> {
    let surface = cfg.surface()?;
    let defaults = HarnessConfig::default();
    let harness = HarnessConfig {
        a: cfg.level_a(defaults.a)?,
        beta: cfg.beta_or(defaults.beta)?,
        s0: cfg.s0_f64("1/2")?,
        samples: cfg.samples_or(defaults.samples)?,
        seed: cfg.seed("conditions")?,
        ..defaults
    };
    let r = run_criterion_report(&surface, &harness)?;
    let head = &r.cond4.outcomes[0];
    let mut checks = vec![
        Check::new(
            "cond1_measure",
            format!("{:.6}", r.cond1.empirical.mean),
            format!("{:.6} within 4 sigma", r.cond1.claimed),
            r.cond1.pass,
        ),
        Check::new("cond2_conjugacy", format!("max defect {:.3e}", r.cond2.max_defect), "<= 1e-10", r.cond2.pass),
    ];
    if let Some(c2) = &r.cond2_exact {
        checks.push(Check::new("cond2_exact", format!("{} mismatches", c2.mismatches), "0", c2.pass));
    }
    checks.push(Check::new(
        "cond3_displacement",
        format!("formula error {:.3e}", r.cond3.formula_max_error),
        "fractions shrink with a",
        r.cond3.pass,
    ));
    checks.push(Check::new(
        "cond4_intersection",
        format!("{:.5} (95% lower {:.5})", head.intersection.mean, head.lower_95),
        "lower bound > 0, no lemma disagreements",
        r.cond4.pass,
    ));
    Ok((checks, serde_json::to_value(&r)?))
}

/// Second moment of box counts, expected to scale like `β²`.
fn secondmoment(cfg: &RunConfig) -> CliResult<SuiteOutput> {
    let surface = cfg.surface()?;
    let betas = cfg.betas_or(&[0.05, 0.1, 0.2, 0.4])?;
    let m = second_moment_mc(
        &surface,
        cfg.s0_f64("1/2")?,
        &betas,
        cfg.level_a(0.99)?,
        cfg.samples_or(1_000_000)?,
        cfg.seed("secondmoment")?,
    )?;
    let slope = m.slope.unwrap_or(f64::NAN);
    let checks = vec![Check::new("log_log_slope", format!("{slope:.4}"), "2 ± 0.3", (slope - 2.0).abs() <= 0.3)];
    Ok((checks, serde_json::to_value(&m)?))
}

/// Determinant classes at each height against twice the totient.
fn detclass(cfg: &RunConfig) -> CliResult<SuiteOutput> {
    let surface = cfg.surface()?;
    let cutoff = cfg.cutoff_or(100)?;
    let y_max = &cutoff + &QuadVal::int(2);
    let window = enumerate_orbit(&surface, &(&surface.alpha * &y_max), &y_max)?;
    let table = heights_table(&window, &(&cutoff + &QuadVal::one()))?;
    let mut checked = 0;
    let mut bad = Vec::new();
    for (j, phi) in table.heights.iter().zip(&table.phi) {
        if *j > cutoff {
            continue;
        }
        let n = det_class_count(&window, j)?;
        checked += 1;
        if n != 2 * phi {
            bad.push(json!({ "height": j.to_string(), "classes": n, "twice_phi": 2 * phi }));
        }
    }
    let checks = vec![Check::new(
        "classes_equal_twice_phi",
        format!("{} mismatches of {checked}", bad.len()),
        "0",
        bad.is_empty(),
    )];
    Ok((checks, json!({ "cutoff": cutoff.to_string(), "heights": checked, "mismatches": bad })))
}

/// The geometric return map on rational points against the closed form.
fn oracle_bcz(cfg: &RunConfig) -> CliResult<SuiteOutput> {
    let surface = cfg.surface()?;
    if surface.alpha != QuadVal::one() {
        return Err(CliError::Usage(format!(
            "oracle-bcz compares against the unit-square closed form; {} has α = {}",
            surface.name, surface.alpha
        )));
    }
    let dynamics = SectionDynamics::<QuadVal>::new(&surface, &QuadVal::int(16))?;
    let n = cfg.samples_or(10_000)?;
    let mut rng = shard_rng(cfg.seed("oracle-bcz")?, 0);
    let mut agree = 0u64;
    let mut first_miss = None;
    for _ in 0..n {
        let den = rng.random_range(2i64..=2000);
        let u: f64 = rng.random();
        // s has density proportional to s on (0, 1]
        let i = ((u.sqrt() * den as f64).ceil() as i64).clamp(1, den);
        let s = Rational::new(i, den);
        let den_v = rng.random_range(2i64..=2000);
        let v = Rational::new(rng.random_range(0..den_v), den_v);
        let t = &Rational::one() - &(&s * &v);
        let p = SectionPoint::unit(QuadVal::rational(s.clone()), QuadVal::rational(t.clone()), &QuadVal::one())?;
        let geometric = dynamics.return_map(&p)?.next;
        let (x, y) = bcz_classical(&s, &t)?;
        if geometric.s == QuadVal::rational(x) && geometric.t == QuadVal::rational(y) {
            agree += 1;
        } else if first_miss.is_none() {
            first_miss = Some(format!("({s}, {t})"));
        }
    }
    let checks = vec![Check::new("exact_agreement", format!("{agree}/{n}"), format!("{n}/{n}"), agree == n)];
    Ok((checks, json!({ "points": n, "agree": agree, "first_miss": first_miss })))
}
