use std::path::Path;

use szego_lab::domain::DomainSpec;
use szego_lab::experiments::{
    default_schedule, emit_report, probe_directions, run_localization_suite, run_limit_suite, LimitExperimentReport,
    SuiteMetadata,
};
use szego_lab::io::{curvature_csv, scaling_csv};
use szego_lab::kernels::{build_series_pair, DiagonalKernelSeries, ExactBallKernel, KernelEvaluator, KernelKind};
use szego_lab::metric::{curvature_report, RICCI_STEP};
use szego_lab::scaling::scaling_sequence;
use szego_lab::{Cx, Error};

use crate::config::{parse_point, RunConfig};
use crate::error::CliError;

/// Limit tolerance when the closed-form ball kernel is used.
const EXACT_LIMIT_TOL: f64 = 1e-3;
/// Limit tolerance when a truncated series is used.
const SERIES_LIMIT_TOL: f64 = 2e-2;
const DEFAULT_RESIDUAL_FACTOR: f64 = 3.0;
const DEFAULT_ETA_RATIO_TOL: f64 = 1e-2;
const SCALE_STEPS: i32 = 10;

/// Eight significant digits, switching to exponent form far from unity.
pub fn sig8(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.7e}");
    let mag: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-4..8).contains(&mag) {
        format!("{:.*}", (7 - mag) as usize, x)
    } else {
        sci
    }
}

fn fmt_c(z: Cx) -> String {
    if z.im == 0.0 {
        sig8(z.re)
    } else {
        format!("{}{}{}i", sig8(z.re), if z.im < 0.0 { "-" } else { "+" }, sig8(z.im.abs()))
    }
}

fn fmt_v(v: &[Cx]) -> String {
    format!("({})", v.iter().map(|c| fmt_c(*c)).collect::<Vec<_>>().join(", "))
}

fn uses_closed_form(cfg: &RunConfig) -> bool {
    cfg.domain.is_ball() && !cfg.series
}

fn require_reinhardt(spec: &DomainSpec<f64>) -> Result<(), CliError> {
    if spec.is_reinhardt() {
        Ok(())
    } else {
        Err(Error::UnsupportedSpec(format!("kernels are only available on bounded Reinhardt domains, not {}", spec.name())).into())
    }
}

/// Truncated Szegő and Bergman series for the configured domain.
fn series_pair(cfg: &RunConfig) -> Result<(DiagonalKernelSeries<f64>, DiagonalKernelSeries<f64>), CliError> {
    require_reinhardt(&cfg.domain)?;
    let n = cfg.domain.dim();
    if cfg.domain.is_ball() {
        return Ok((
            DiagonalKernelSeries::unit_ball(n, KernelKind::Szego, cfg.degree, cfg.c_n)?,
            DiagonalKernelSeries::unit_ball(n, KernelKind::Bergman, cfg.degree, cfg.c_n)?,
        ));
    }
    let (s, k) = build_series_pair(&cfg.domain, cfg.degree, cfg.c_n)?;
    Ok((s.with_ball_reference(), k.with_ball_reference()))
}

fn szego_kernel(cfg: &RunConfig) -> Result<Box<dyn KernelEvaluator<f64>>, CliError> {
    if uses_closed_form(cfg) {
        Ok(Box::new(ExactBallKernel::szego(cfg.domain.dim(), cfg.c_n)))
    } else {
        Ok(Box::new(series_pair(cfg)?.0))
    }
}

fn check_interior(spec: &DomainSpec<f64>, z: &[Cx]) -> Result<(), CliError> {
    let r = spec.value(z)?;
    if r < 0.0 {
        Ok(())
    } else {
        Err(Error::NotInterior { value: r }.into())
    }
}

fn metadata(cfg: &RunConfig, series: bool) -> SuiteMetadata {
    SuiteMetadata {
        domain: cfg.domain.name().to_string(),
        n: cfg.domain.dim(),
        epsilon: cfg.domain.epsilon(),
        degree: series.then_some(cfg.degree),
        c_n: cfg.c_n,
    }
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn kernel(cfg: &RunConfig, z: &str, w: Option<&str>) -> Result<(), CliError> {
    let n = cfg.domain.dim();
    let z = parse_point(z, n)?;
    let w = match w {
        Some(w) => parse_point(w, n)?,
        None => z.clone(),
    };
    check_interior(&cfg.domain, &z)?;
    check_interior(&cfg.domain, &w)?;
    let (s, k) = series_pair(cfg)?;
    println!("domain {} n = {n} degree = {} c_n = {}", cfg.domain.name(), cfg.degree, sig8(cfg.c_n));
    for (label, ker) in [("S", &s), ("K", &k)] {
        let v = ker.eval(&z, &w)?;
        let tail = (ker.tail_bound(&z) * ker.tail_bound(&w)).sqrt();
        println!("{label}(z, w) = {}  tail <= {}", fmt_c(v), sig8(tail));
    }
    if cfg.domain.is_ball() {
        let s = ExactBallKernel::szego(n, cfg.c_n).eval(&z, &w)?;
        let k = ExactBallKernel::<f64>::bergman(n).eval(&z, &w)?;
        println!("closed form: S = {}  K = {}", fmt_c(s), fmt_c(k));
    }
    Ok(())
}

pub fn metric(cfg: &RunConfig, z: &str, x: Option<&str>) -> Result<(), CliError> {
    let n = cfg.domain.dim();
    let z = parse_point(z, n)?;
    let x = match x {
        Some(x) => parse_point(x, n)?,
        None => {
            let mut e = vec![Cx::new(0.0, 0.0); n];
            e[0] = Cx::new(1.0, 0.0);
            e
        }
    };
    check_interior(&cfg.domain, &z)?;
    let kernel = szego_kernel(cfg)?;
    let report = curvature_report(kernel.as_ref(), &z, &x, RICCI_STEP)?;
    println!("z = {}  X = {}", fmt_v(&z), fmt_v(&x));
    println!("tau  = {}", sig8(report.tau));
    println!("g    = {}", sig8(report.g));
    println!("beta = {}", sig8(report.beta));
    println!("R    = {}", sig8(report.r));
    println!("Ric  = {}", sig8(report.ric));
    println!("tail <= {}", sig8(report.tail_bound));
    ensure_out(&cfg.out)?;
    std::fs::write(cfg.out.join("metric.csv"), curvature_csv(&[(z, x, report)]))?;
    Ok(())
}

fn print_reports(reports: &[LimitExperimentReport<f64>], tol: f64) -> Vec<String> {
    println!("{:<14} {:>16} {:>16} {:>12}  status", "experiment", "L_hat", "L_star", "rel_err");
    let mut failed = Vec::new();
    for r in reports {
        let ok = r.passes(tol);
        println!(
            "{:<14} {:>16} {:>16} {:>12}  {}{}",
            r.experiment,
            sig8(r.fit.limit),
            sig8(r.target),
            sig8(r.rel_err),
            if ok { "ok" } else { "FAIL" },
            if r.fit.noise_warning { " (noisy)" } else { "" }
        );
        if !r.refused.is_empty() {
            println!("    refused deltas: {:?}", r.refused);
        }
        if let Some(note) = &r.note {
            println!("    note: {note}");
        }
        if !ok {
            failed.push(r.experiment.clone());
        }
    }
    failed
}

fn tolerance_outcome(failed: Vec<String>, tol: f64) -> Result<(), CliError> {
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!("{} exceeded {}", failed.join(", "), sig8(tol))))
    }
}

pub fn limits(cfg: &RunConfig, p0: Option<&str>, x: Option<&str>) -> Result<(), CliError> {
    require_reinhardt(&cfg.domain)?;
    let n = cfg.domain.dim();
    let dir = match p0 {
        Some(p) => parse_point(p, n)?,
        None => {
            let mut e = vec![Cx::new(0.0, 0.0); n];
            e[0] = Cx::new(1.0, 0.0);
            e
        }
    };
    let p0 = cfg.domain.boundary_point_along(&dir)?;
    let x = match x {
        Some(x) => parse_point(x, n)?,
        None => {
            let mut v = vec![Cx::new(0.0, 0.0); n];
            v[0] = Cx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            v[1] = Cx::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            v
        }
    };
    let deltas = cfg.deltas.clone().unwrap_or_else(default_schedule);
    let kernel = szego_kernel(cfg)?;
    let reports = run_limit_suite(&cfg.domain, kernel.as_ref(), &p0, &x, &deltas)?;
    let tol = cfg
        .tol
        .limit
        .unwrap_or(if uses_closed_form(cfg) { EXACT_LIMIT_TOL } else { SERIES_LIMIT_TOL });
    println!("boundary point {}  X = {}", fmt_v(&p0), fmt_v(&x));
    let failed = print_reports(&reports, tol);
    emit_report(&reports, &metadata(cfg, !uses_closed_form(cfg)), &cfg.out.join("limits.csv"))?;
    tolerance_outcome(failed, tol)
}

pub fn localize(cfg: &RunConfig) -> Result<(), CliError> {
    require_reinhardt(&cfg.domain)?;
    let n = cfg.domain.dim();
    let outer = DomainSpec::unit_ball(n)?;
    let outer_kernel = ExactBallKernel::szego(n, cfg.c_n);
    let inner = szego_kernel(cfg)?;
    let mut p0 = vec![Cx::new(0.0, 0.0); n];
    p0[0] = Cx::new(1.0, 0.0);
    let deltas = cfg.deltas.clone().unwrap_or_else(default_schedule);
    let mut reports = Vec::new();
    for (i, x) in probe_directions::<f64>(n).iter().enumerate() {
        reports.extend(run_localization_suite(
            &outer,
            &outer_kernel,
            &cfg.domain,
            inner.as_ref(),
            &p0,
            x,
            &deltas,
            &format!("X{}", i + 1),
        )?);
    }
    let tol = cfg.tol.limit.unwrap_or(SERIES_LIMIT_TOL);
    println!("{} against the unit ball at {}", cfg.domain.name(), fmt_v(&p0));
    let failed = print_reports(&reports, tol);
    emit_report(&reports, &metadata(cfg, !uses_closed_form(cfg)), &cfg.out.join("localize.csv"))?;
    tolerance_outcome(failed, tol)
}

/// `|∇_{z̄} r|` at the boundary point on the last coordinate axis, the limit
/// of `η/δ` along the scaling sequence.
fn normal_gradient_at_axis_point(spec: &DomainSpec<f64>) -> Result<f64, CliError> {
    let n = spec.dim();
    let mut axis = vec![Cx::new(0.0, 0.0); n];
    axis[n - 1] = Cx::new(1.0, 0.0);
    let p0 = if spec.is_reinhardt() {
        spec.boundary_point_along(&axis)?
    } else {
        vec![Cx::new(0.0, 0.0); n]
    };
    Ok(spec.evaluate_jet(&p0)?.grad_zbar().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
}

pub fn scale(cfg: &RunConfig) -> Result<(), CliError> {
    let indexed: Vec<(usize, f64)> = match &cfg.deltas {
        Some(d) => d.iter().enumerate().map(|(i, d)| (i + 1, *d)).collect(),
        None => {
            let reach = cfg.domain.tubular_radius();
            (1..=SCALE_STEPS)
                .map(|j| (j as usize, 0.5f64.powi(j)))
                .filter(|(_, d)| *d < reach)
                .collect()
        }
    };
    let rows = scaling_sequence(&cfg.domain, &indexed)?;
    println!("{:>3} {:>14} {:>14} {:>14} {:>14}", "j", "delta", "eta", "residual", "|Q - I|");
    for r in &rows {
        println!(
            "{:>3} {:>14} {:>14} {:>14} {:>14}",
            r.j,
            sig8(r.delta),
            sig8(r.eta),
            sig8(r.residual),
            sig8(r.q_deviation)
        );
    }
    ensure_out(&cfg.out)?;
    std::fs::write(cfg.out.join("scale.csv"), scaling_csv(&rows))?;

    let factor = cfg.tol.residual_factor.unwrap_or(DEFAULT_RESIDUAL_FACTOR);
    let ratio_tol = cfg.tol.ratio.unwrap_or(DEFAULT_ETA_RATIO_TOL);
    let mut problems = Vec::new();
    for w in rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let needed = factor.powf((a.delta / b.delta).log10());
        if b.residual > 0.0 && a.residual / b.residual < needed {
            problems.push(format!("residual decreased by less than {} at j = {}", sig8(needed), b.j));
        }
        if b.q_deviation > a.q_deviation * (1.0 + 1e-9) + 1e-15 {
            problems.push(format!("|Q - I| increased at j = {}", b.j));
        }
    }
    if let Some(last) = rows.last() {
        let target = normal_gradient_at_axis_point(&cfg.domain)?;
        let ratio = last.eta / last.delta;
        if (ratio / target - 1.0).abs() > ratio_tol {
            problems.push(format!("eta/delta = {} at j = {}, expected {}", sig8(ratio), last.j, sig8(target)));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Tolerance(problems.join("; ")))
    }
}
