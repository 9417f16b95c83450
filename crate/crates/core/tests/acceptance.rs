//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line; the test
//! fails if any criterion fails.

mod common;

use std::io::Write;
use std::time::Instant;

use common::*;
use szego_lab::automorphism::{transform_kernel, BallAutomorphism, BranchedMap};
use szego_lab::domain::{DomainSpec, SmoothFactor};
use szego_lab::experiments::{default_schedule, probe_directions, run_localization_suite, run_limit_suite};
use szego_lab::fefferman::independence_check;
use szego_lab::kernels::{build_series, sk_invariant, DiagonalKernelSeries, ExactBallKernel, KernelEvaluator, KernelKind};
use szego_lab::linalg::CMatrix;
use szego_lab::metric::{
    beta_invariant, log_kernel_jet, metric_length, metric_tensor, ricci_curvature, sectional_curvature, RICCI_STEP,
};
use szego_lab::quadrature::trace_profile_curve;
use szego_lab::scaling::{cayley, scaling_sequence};
use szego_lab::{Cx, Error};

type Outcome = Result<(bool, String), Error>;

fn report(k: usize, outcome: Outcome) -> bool {
    let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let line = format!("criterion {k:>2}: {}  {detail}\n", if ok { "PASS" } else { "FAIL" });
    // Written to the process stdout so the line survives output capture.
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    ok
}

fn c(re: f64, im: f64) -> Cx {
    Cx::new(re, im)
}

fn rel(a: Cx, b: Cx) -> f64 {
    (a - b).norm() / b.norm()
}

fn to_cmatrix(m: &nalgebra::DMatrix<Cx>) -> CMatrix<f64> {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Truncated ball Szegő series against the closed form on `|z|, |w| <= 0.6`.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let series = DiagonalKernelSeries::<f64>::unit_ball(2, KernelKind::Szego, 40, 1.0)?;
    let mut r = rng(1);
    let worst = pool.install(|| -> Result<f64, Error> {
        let mut worst = 0.0f64;
        for _ in 0..500 {
            let z = random_point(&mut r, 2, 0.6);
            let w = random_point(&mut r, 2, 0.6);
            worst = worst.max(rel(series.eval(&z, &w)?, ball_szego(2, 1.0, &z, &w)));
        }
        let edge = [c(0.6, 0.0), c(0.0, 0.0)];
        worst = worst.max(rel(series.eval(&edge, &edge)?, ball_szego(2, 1.0, &edge, &edge)));
        Ok(worst)
    })?;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst < 1e-10 && secs < 10.0,
        format!("max rel err {worst:.2e} (< 1e-10), {secs:.2} s (< 10 s)"),
    ))
}

/// Hardy norm of `1` on the sphere and independence of the defining function.
fn criterion_2() -> Outcome {
    let ball = DomainSpec::<f64>::unit_ball(2)?;
    let curve = trace_profile_curve(&ball, 8, 4)?;
    let mut worst = 0.0f64;
    for c_n in [1.0, 2.0, 0.5] {
        let norm = curve.hardy_norm([0, 0], c_n)?;
        worst = worst.max((norm / (c_n * PI * PI) - 1.0).abs());
        let s0 = build_series(&ball, KernelKind::Szego, 4, c_n)?.eval(&[c(0.0, 0.0); 2], &[c(0.0, 0.0); 2])?;
        worst = worst.max(rel(s0, c(1.0 / (c_n * PI * PI), 0.0)));
    }
    let bumped = DomainSpec::<f64>::bumped_ball(2, 0.05)?;
    let sample = bumped.boundary_grid(12)?;
    let ind = [
        SmoothFactor::RadialQuadratic { index: 0, coeff: 0.7 },
        SmoothFactor::ExpRealPart { index: 1 },
    ]
    .iter()
    .map(|h| independence_check(&bumped, h, &sample))
    .collect::<Result<Vec<_>, _>>()?
    .into_iter()
    .fold(0.0f64, f64::max);
    Ok((
        worst < 1e-10 && ind < 1e-10,
        format!("norm and S(0) rel err {worst:.2e}, independence {ind:.2e} (< 1e-10)"),
    ))
}

/// `g(0) = 4`, `β = 4π³` over 50 points and `R = -1` on the ball.
fn criterion_3() -> Outcome {
    let kernel = ExactBallKernel::szego(2, 1.0);
    let origin = [c(0.0, 0.0); 2];
    let g0 = metric_tensor(&log_kernel_jet(&kernel, &origin)?)?.det;
    let oracle_g0 = ball_metric(&origin).determinant().re;
    let target_beta = 4.0 * PI.powi(3);
    let mut r = rng(3);
    let (mut bmin, mut bmax, mut rworst, mut oracle_beta) = (f64::MAX, f64::MIN, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let z = random_point(&mut r, 2, 0.9);
        let x = random_unit(&mut r, 2);
        let jet = log_kernel_jet(&kernel, &z)?;
        let beta = beta_invariant(&metric_tensor(&jet)?);
        bmin = bmin.min(beta);
        bmax = bmax.max(beta);
        let s = ball_szego(2, 1.0, &z, &z).re;
        oracle_beta = oracle_beta.max((ball_metric(&z).determinant().re / s.powf(1.5) / target_beta - 1.0).abs());
        rworst = rworst.max((sectional_curvature(&jet, &x)? + 1.0).abs());
    }
    let spread = (bmax - bmin) / target_beta;
    let beta_err = (bmax.max(bmin) / target_beta - 1.0).abs().max((bmin / target_beta - 1.0).abs());
    let fd_r = sectional_curvature_fd(&ball_metric, &[c(0.3, 0.1), c(-0.2, 0.25)], &[c(0.6, 0.0), c(0.0, 0.8)], 1e-4);
    let ok = (g0 - 4.0).abs() < 1e-9
        && (oracle_g0 - 4.0).abs() < 1e-12
        && spread < 1e-7
        && beta_err < 1e-7
        && oracle_beta < 1e-12
        && rworst < 1e-9
        && (fd_r + 1.0).abs() < 1e-6;
    Ok((
        ok,
        format!(
            "g(0) = {g0:.12}, beta spread {spread:.1e}, |beta/4pi^3 - 1| {beta_err:.1e}, max |R + 1| {rworst:.1e}, \
             finite-difference R {fd_r:.8}"
        ),
    ))
}

/// Finite-difference Ricci against `-∂∂̄ log g (X, X) / τ²` on the ball.
fn criterion_4() -> Outcome {
    let kernel = ExactBallKernel::szego(2, 1.0);
    let mut r = rng(4);
    let mut worst = 0.0f64;
    let mut values = Vec::new();
    for _ in 0..20 {
        let z = random_point(&mut r, 2, 0.7);
        for _ in 0..10 {
            let x = random_unit(&mut r, 2);
            let est = ricci_curvature(&kernel, &z, &x, RICCI_STEP)?;
            let oracle = ball_ricci(&z, &x);
            worst = worst.max((est.value - oracle).abs());
            values.push(oracle);
        }
    }
    let oracle_spread = values.iter().fold(0.0f64, |m, v| m.max((v + 1.5).abs()));
    Ok((
        worst < 1e-6 && oracle_spread < 1e-12,
        format!(
            "max |Ric - oracle| {worst:.2e} (< 1e-6), oracle constant -1.5 (spread {oracle_spread:.1e}); \
             differs from the stated -1/n = -0.5 and from -1"
        ),
    ))
}

fn random_automorphism(r: &mut rand::rngs::StdRng, radius: f64) -> Result<BallAutomorphism<f64>, Error> {
    let a = random_point(r, 2, radius);
    BallAutomorphism::new(a, to_cmatrix(&random_unitary(r, 2)))
}

/// Kernel transformation law, metric pullback and the `SK` constant.
fn criterion_5() -> Outcome {
    let exact = ExactBallKernel::szego(2, 1.0);
    let series = DiagonalKernelSeries::<f64>::unit_ball(2, KernelKind::Szego, 40, 1.0)?;
    let bergman = ExactBallKernel::<f64>::bergman(2);
    let mut r = rng(5);
    let (mut law_exact, mut law_series, mut pullback, mut sk) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let f = random_automorphism(&mut r, 0.3)?;
        for _ in 0..50 {
            let z = random_point(&mut r, 2, 0.3);
            let w = random_point(&mut r, 2, 0.3);
            let oracle = ball_szego(2, 1.0, &z, &w);
            law_exact = law_exact.max(rel(transform_kernel(&f, &exact, &z, &w)?, oracle));
            law_series = law_series.max(rel(transform_kernel(&f, &series, &z, &w)?, oracle));
        }
        let z = random_point(&mut r, 2, 0.5);
        let j = f.jacobian(&z)?;
        let gz = metric_tensor(&log_kernel_jet(&exact, &z)?)?.g;
        let gf = metric_tensor(&log_kernel_jet(&exact, &f.apply(&z)?)?)?.g;
        let pulled = j.transpose().mul(&gf).mul(&j.conj());
        pullback = pullback.max(pulled.max_abs_diff(&gz) / gz.max_abs());
    }
    let target = 1.0 / (4.0 * PI * PI);
    for _ in 0..50 {
        let z = random_point(&mut r, 2, 0.8);
        sk = sk.max((sk_invariant(&exact, &bergman, &z)? / target - 1.0).abs());
    }
    let ok = law_exact < 1e-12 && law_series < 1e-8 && pullback < 1e-9 && sk < 1e-8;
    Ok((
        ok,
        format!(
            "law exact {law_exact:.1e} (< 1e-12), truncated {law_series:.1e} (< 1e-8), pullback {pullback:.1e} (< 1e-9), \
             SK {sk:.1e} (< 1e-8)"
        ),
    ))
}

/// Closed-form targets of the six limits, computed here for `n = 2`, `c_n = 1`.
fn limit_targets() -> [(&'static str, f64); 6] {
    let n = 2.0f64;
    [
        ("a", n.powf(n) / 2f64.powf(n + 1.0)),
        ("b", n.sqrt() / 2.0),
        ("c", 1.0),
        ("d", n.powf(n) * PI.powf(n + 1.0)),
        ("e", -2.0 / n),
        ("f", -(n + 1.0) / n),
    ]
}

fn p0_and_x() -> ([Cx; 2], [Cx; 2]) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ([c(1.0, 0.0), c(0.0, 0.0)], [c(s, 0.0), c(s, 0.0)])
}

fn check_limits(
    spec: &DomainSpec<f64>,
    kernel: &dyn KernelEvaluator<f64>,
    tol: f64,
    budget: f64,
    start: Instant,
) -> Outcome {
    let (p0, x) = p0_and_x();
    let reports = run_limit_suite(spec, kernel, &p0, &x, &default_schedule())?;
    let secs = start.elapsed().as_secs_f64();
    let mut ok = secs < budget && reports.len() == 6;
    let mut parts = Vec::new();
    for (rep, (id, target)) in reports.iter().zip(limit_targets()) {
        let err = (rep.fit.limit - target).abs() / target.abs();
        ok &= rep.experiment == id && (rep.target - target).abs() <= 1e-12 * target.abs() && err < tol;
        parts.push(format!("{id} {err:.1e}"));
    }
    Ok((ok, format!("{} (< {tol}), {secs:.2} s (< {budget} s)", parts.join(", "))))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let ball = DomainSpec::<f64>::unit_ball(2)?;
    check_limits(&ball, &ExactBallKernel::szego(2, 1.0), 1e-3, 30.0, start)
}

fn bumped_kernel() -> Result<(DomainSpec<f64>, DiagonalKernelSeries<f64>), Error> {
    let bumped = DomainSpec::<f64>::bumped_ball(2, 0.05)?;
    let series = build_series(&bumped, KernelKind::Szego, 40, 1.0)?.with_ball_reference();
    Ok((bumped, series))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let (bumped, series) = bumped_kernel()?;
    check_limits(&bumped, &series, 2e-2, 300.0, start)
}

/// Ratios between the bumped ball and the ball near the shared point `(1, 0)`.
fn criterion_8() -> Outcome {
    let ball = DomainSpec::<f64>::unit_ball(2)?;
    let exact = ExactBallKernel::szego(2, 1.0);
    let (bumped, series) = bumped_kernel()?;
    let (p0, _) = p0_and_x();
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, x) in probe_directions::<f64>(2).iter().enumerate() {
        for rep in run_localization_suite(&ball, &exact, &bumped, &series, &p0, x, &default_schedule(), &format!("X{i}"))? {
            worst = worst.max((rep.fit.limit - 1.0).abs());
            count += 1;
        }
    }
    Ok((count == 25 && worst < 2e-2, format!("{count} ratios, max |ratio - 1| {worst:.2e} (< 2e-2)")))
}

/// Scaling sequence on the ball and the Cayley map.
fn criterion_9() -> Outcome {
    let ball = DomainSpec::<f64>::unit_ball(2)?;
    let seq: Vec<(usize, f64)> = (1..=10).map(|j| (j, 0.5f64.powi(j as i32))).collect();
    let rows = scaling_sequence(&ball, &seq)?;
    let last = rows.last().unwrap();
    let eta_ok = (last.eta / last.delta - 1.0).abs() < 1e-3;
    let q_ok = rows.windows(2).all(|w| w[1].q_deviation < w[0].q_deviation) && last.q_deviation < 1e-2;
    let per_step = 3f64.powf(2f64.log10());
    let worst_ratio = rows
        .windows(2)
        .map(|w| w[0].residual / w[1].residual)
        .fold(f64::MAX, f64::min);
    let res_ok = worst_ratio >= per_step;

    let mut r = rng(9);
    let mut involution = 0.0f64;
    for _ in 0..100 {
        let z = random_point(&mut r, 2, 3.0);
        if (z[1] - c(1.0, 0.0)).norm() < 1e-3 {
            continue;
        }
        let back = cayley(&cayley(&z)?)?;
        let scale = z.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
        involution = involution.max(z.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale);
    }
    let origin = cayley(&[c(0.0, 0.0), c(-1.0, 0.0)])?;
    let centre = origin.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let ok = eta_ok && q_ok && res_ok && involution < 1e-12 && centre < 1e-12;
    Ok((
        ok,
        format!(
            "eta/delta {:.6}, |Q - I| {:.2e} decreasing {q_ok}, min residual ratio per step {worst_ratio:.3} (>= {per_step:.3}), \
             involution {involution:.1e}, |K(b*)| {centre:.1e}",
            last.eta / last.delta,
            last.q_deviation
        ),
    ))
}

/// Compact deterministic versions of the property suites.
fn criterion_10() -> Outcome {
    let specs = [
        DomainSpec::<f64>::unit_ball(2)?,
        DomainSpec::bumped_ball(2, 0.05)?,
        DomainSpec::siegel(2)?,
    ];
    let mut r = rng(10);
    let mut jet_err = 0.0f64;
    for spec in &specs {
        for _ in 0..10 {
            let z = random_point(&mut r, 2, 0.9);
            let jet = spec.evaluate_jet(&z)?;
            let f = |w: &[Cx]| c(spec.value(w).unwrap(), 0.0);
            for i in 0..2 {
                jet_err = jet_err.max((wirtinger(&f, &z, i, 1e-5) - jet.grad_z[i]).norm());
                for j in 0..2 {
                    jet_err = jet_err.max((wirtinger_mixed(&f, &z, i, j, 1e-4) - jet.hess_mixed[(i, j)]).norm());
                    jet_err = jet_err.max((wirtinger_holo(&f, &z, i, j, 1e-4) - jet.hess_holo[(i, j)]).norm());
                }
            }
        }
    }
    let (_, series) = bumped_kernel()?;
    let exact = ExactBallKernel::szego(2, 1.0);
    let mut metric_err = 0.0f64;
    let mut herm = 0.0f64;
    let mut max_r = f64::MIN;
    let mut homog = 0.0f64;
    for k in 0..10 {
        let z = random_point(&mut r, 2, 0.8);
        let x = random_unit(&mut r, 2);
        let kernel: &dyn KernelEvaluator<f64> = if k % 2 == 0 { &series } else { &exact };
        let jet = log_kernel_jet(kernel, &z)?;
        let block = jet.metric_block();
        herm = herm.max(block.hermitian_defect());
        let logs = |w: &[Cx]| c(kernel.diagonal(w).unwrap().ln(), 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let fd = wirtinger_mixed(&logs, &z, i, j, 1e-4);
                metric_err = metric_err.max((fd - block[(i, j)]).norm() / block.max_abs());
            }
        }
        let tensor = metric_tensor(&jet)?;
        let rx = sectional_curvature(&jet, &x)?;
        max_r = max_r.max(rx);
        let lambda = c(-1.7, 0.6);
        let lx: Vec<Cx> = x.iter().map(|v| v * lambda).collect();
        homog = homog.max((metric_length(&tensor, &lx) / (lambda.norm() * metric_length(&tensor, &x)) - 1.0).abs());
        homog = homog.max((sectional_curvature(&jet, &lx)? - rx).abs());
        let ric = ricci_curvature(kernel, &z, &x, RICCI_STEP)?.value;
        homog = homog.max((ricci_curvature(kernel, &z, &lx, RICCI_STEP)?.value - ric).abs());
    }
    let ok = jet_err < 1e-6 && metric_err < 1e-6 && herm < 1e-13 && max_r < 2.0 && homog < 1e-12;
    Ok((
        ok,
        format!(
            "jet vs finite differences {jet_err:.1e} / metric {metric_err:.1e} (< 1e-6), Hermitian defect {herm:.1e} (< 1e-13), \
             max R {max_r:.3} (< 2), homogeneity {homog:.1e} (< 1e-12)"
        ),
    ))
}

#[test]
fn acceptance_criteria() {
    let criteria: [fn() -> Outcome; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let failed: Vec<usize> = criteria
        .iter()
        .enumerate()
        .filter_map(|(i, f)| (!report(i + 1, f())).then_some(i + 1))
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
