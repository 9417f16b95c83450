//! Boundary-approach experiments: normal-ray sampling, first-order limit
//! extrapolation, the six boundary limits of the metric invariants and the
//! five localization ratios between two domains sharing a boundary piece.

use serde::{Deserialize, Serialize};

use crate::domain::{orthogonal_complement, BoundaryFrame, DomainSpec};
use crate::error::{Error, Result};
use crate::kernels::KernelEvaluator;
use crate::metric::{
    beta_ball, beta_invariant, log_kernel_jet, metric_length, metric_tensor, ricci_curvature, sectional_curvature,
    RICCI_STEP, TAIL_GUARD,
};
use crate::scalar::{inner, norm, re, sub, Cplx, Real};

/// Number of trailing samples used by [`limit_estimate`].
pub const FIT_WINDOW: usize = 3;

/// Relative size of sample fluctuations treated as numerical noise, matching
/// the Ricci finite-difference target.
const NOISE_FLOOR: f64 = 1e-7;

/// Default schedule `δ_k = 0.2 · 2^{-k}`, `k = 0..=7`.
pub fn default_schedule<T: Real>() -> Vec<T> {
    (0..8).map(|k| T::lit(0.2) * T::lit(0.5).powi(k)).collect()
}

fn check_schedule<T: Real>(deltas: &[T]) -> Result<()> {
    if deltas.is_empty() {
        return Err(Error::InvalidSpec("empty delta schedule".into()));
    }
    if deltas.iter().any(|d| !(*d > T::zero())) || deltas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidSpec("delta schedule must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// Frames with interior points `z_k = p⁰ - δ_k ν`, each verified to project
/// back to `p⁰`. With a kernel, stops at the first `δ` whose tail bound
/// exceeds the guard and reports how many samples were admissible.
pub fn normal_ray_samples<T: Real>(
    spec: &DomainSpec<T>,
    p0: &[Cplx<T>],
    deltas: &[T],
    kernel: Option<&dyn KernelEvaluator<T>>,
) -> Result<Vec<BoundaryFrame<T>>> {
    check_schedule(deltas)?;
    let mut out = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let frame = verified_frame(spec, p0, delta)?;
        if let Some(k) = kernel {
            let (tail, limit) = guard_values(k, &frame.interior)?;
            if !(tail <= limit) {
                return Err(Error::GuardViolation {
                    delta: delta.as_f64(),
                    tail: tail.as_f64(),
                    limit: limit.as_f64(),
                    admissible: out.len(),
                });
            }
        }
        out.push(frame);
    }
    Ok(out)
}

fn verified_frame<T: Real>(spec: &DomainSpec<T>, p0: &[Cplx<T>], delta: T) -> Result<BoundaryFrame<T>> {
    let frame = spec.frame_at(p0, delta)?;
    let back = spec.nearest_boundary_point(&frame.interior)?;
    let drift = norm(&sub(&back.base, p0));
    if !(drift <= T::lit(1e-8)) {
        return Err(Error::AmbiguousProjection {
            delta: delta.as_f64(),
            radius: spec.tubular_radius().as_f64(),
        });
    }
    Ok(frame)
}

fn guard_values<T: Real>(kernel: &dyn KernelEvaluator<T>, z: &[Cplx<T>]) -> Result<(T, T)> {
    let s = kernel.diagonal(z)?;
    Ok((kernel.tail_bound(z), T::lit(TAIL_GUARD) * s))
}

/// Frames of the schedule that pass the tail guard of every kernel, and the
/// `δ` values that were refused.
pub fn admissible_samples<T: Real>(
    spec: &DomainSpec<T>,
    p0: &[Cplx<T>],
    deltas: &[T],
    kernels: &[&dyn KernelEvaluator<T>],
) -> Result<(Vec<BoundaryFrame<T>>, Vec<T>)> {
    check_schedule(deltas)?;
    let mut kept = Vec::new();
    let mut refused = Vec::new();
    for &delta in deltas {
        let frame = verified_frame(spec, p0, delta)?;
        let mut ok = true;
        for k in kernels {
            let (tail, limit) = guard_values(*k, &frame.interior)?;
            ok &= tail <= limit;
        }
        if ok {
            kept.push(frame);
        } else {
            refused.push(delta);
        }
    }
    Ok((kept, refused))
}

/// Least-squares fit `value ≈ L + a δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitFit<T> {
    pub limit: T,
    pub slope: T,
    /// Root-mean-square fit residual.
    pub residual: T,
    pub noise_warning: bool,
}

/// Extrapolates `δ → 0` from the last [`FIT_WINDOW`] samples (all of them if
/// fewer). Samples are `(δ, value)` in schedule order.
pub fn limit_estimate<T: Real>(samples: &[(T, T)]) -> Result<LimitFit<T>> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let tail = &samples[samples.len() - FIT_WINDOW.min(samples.len())..];
    let m = T::from_usize_lossy(tail.len());
    let sx: T = tail.iter().map(|s| s.0).sum();
    let sy: T = tail.iter().map(|s| s.1).sum();
    let sxx: T = tail.iter().map(|s| s.0 * s.0).sum();
    let sxy: T = tail.iter().map(|s| s.0 * s.1).sum();
    let den = m * sxx - sx * sx;
    let slope = if den.abs() > T::zero() { (m * sxy - sx * sy) / den } else { T::zero() };
    let limit = (sy - slope * sx) / m;
    let residual = (tail
        .iter()
        .map(|s| (s.1 - limit - slope * s.0).powi(2))
        .sum::<T>()
        / m)
        .sqrt();
    let change = (tail[tail.len() - 1].1 - tail[0].1).abs();
    let scale = limit.abs().max(T::min_positive_value());
    let noisy_fit = residual > T::lit(0.1) * change && residual > T::lit(NOISE_FLOOR) * scale;
    Ok(LimitFit {
        limit,
        slope,
        residual,
        noise_warning: noisy_fit || !monotone_after_third(samples),
    })
}

fn monotone_after_third<T: Real>(samples: &[(T, T)]) -> bool {
    if samples.len() < 4 {
        return true;
    }
    let diffs: Vec<T> = samples[2..].windows(2).map(|w| w[1].1 - w[0].1).collect();
    let tol = T::lit(NOISE_FLOOR) * samples.iter().fold(T::zero(), |m, s| m.max(s.1.abs()));
    diffs.iter().all(|&d| d >= -tol) || diffs.iter().all(|&d| d <= tol)
}

/// One sample of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub delta: T,
    pub value: T,
    pub tail_bound: T,
}

/// Where the target constant comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetSource {
    /// Closed-form constant of the limit statement.
    ClosedForm,
    /// Exact differentiation of the ball volume density.
    BallOracle,
    /// Ratio limit `1` of the localization statement.
    Unity,
}

impl TargetSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            TargetSource::ClosedForm => "closed-form",
            TargetSource::BallOracle => "ball-oracle",
            TargetSource::Unity => "unity",
        }
    }
}

/// Samples, extrapolated limit and comparison with the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitExperimentReport<T> {
    pub experiment: String,
    pub description: String,
    pub boundary_point: Vec<Cplx<T>>,
    pub direction: Vec<Cplx<T>>,
    pub samples: Vec<Sample<T>>,
    /// `δ` values dropped because a kernel tail bound exceeded the guard.
    pub refused: Vec<T>,
    pub fit: LimitFit<T>,
    pub target: T,
    pub rel_err: T,
    pub source: TargetSource,
    pub note: Option<String>,
}

impl<T: Real> LimitExperimentReport<T> {
    /// `|L̂ - L*| / |L*|`, or the absolute error when `L* = 0`.
    pub fn error_of(limit: T, target: T) -> T {
        if target == T::zero() {
            limit.abs()
        } else {
            (limit - target).abs() / target.abs()
        }
    }

    pub fn passes(&self, tol: T) -> bool {
        self.rel_err <= tol
    }
}

struct Spec<'a, T: Real> {
    id: &'a str,
    description: &'a str,
    target: T,
    source: TargetSource,
    note: Option<String>,
}

fn assemble<T: Real>(
    spec: Spec<'_, T>,
    p0: &[Cplx<T>],
    x: &[Cplx<T>],
    samples: Vec<Sample<T>>,
    refused: &[T],
) -> Result<LimitExperimentReport<T>> {
    let pairs: Vec<(T, T)> = samples.iter().map(|s| (s.delta, s.value)).collect();
    let fit = limit_estimate(&pairs)?;
    Ok(LimitExperimentReport {
        experiment: spec.id.to_string(),
        description: spec.description.to_string(),
        boundary_point: p0.to_vec(),
        direction: x.to_vec(),
        samples,
        refused: refused.to_vec(),
        rel_err: LimitExperimentReport::error_of(fit.limit, spec.target),
        fit,
        target: spec.target,
        source: spec.source,
        note: spec.note,
    })
}

/// Metric quantities at one interior point.
#[derive(Debug, Clone, Copy)]
struct PointValues<T> {
    g: T,
    beta: T,
    tau_x: T,
    tau_normal: T,
    tau_tangent: T,
    r: T,
    ric: T,
    tail: T,
}

/// Finite-difference step for Ricci at distance `δ` from the boundary.
pub fn ricci_step<T: Real>(delta: T) -> T {
    T::lit(RICCI_STEP).min(delta * T::lit(1e-2))
}

fn point_values<T: Real>(
    kernel: &dyn KernelEvaluator<T>,
    frame: &BoundaryFrame<T>,
    x: &[Cplx<T>],
    tangent: &[Cplx<T>],
) -> Result<PointValues<T>> {
    let z = &frame.interior;
    let jet = log_kernel_jet(kernel, z)?;
    let tensor = metric_tensor(&jet)?;
    Ok(PointValues {
        g: tensor.det,
        beta: beta_invariant(&tensor),
        tau_x: metric_length(&tensor, x),
        tau_normal: metric_length(&tensor, &frame.normal),
        tau_tangent: metric_length(&tensor, tangent),
        r: sectional_curvature(&jet, x)?,
        ric: ricci_curvature(kernel, z, x, ricci_step(frame.delta))?.value,
        tail: jet.tail_bound,
    })
}

/// Unit tangential direction: the normalized tangential part of `X`, or the
/// first vector of a tangent basis when `X` is normal.
pub fn unit_tangent<T: Real>(normal: &[Cplx<T>], x: &[Cplx<T>]) -> Vec<Cplx<T>> {
    let c = inner(x, normal);
    let xh: Vec<Cplx<T>> = x.iter().zip(normal).map(|(a, v)| a - c * v).collect();
    let hn = norm(&xh);
    if hn > T::lit(1e-8) * norm(x).max(T::one()) {
        xh.iter().map(|a| a.unscale(hn)).collect()
    } else {
        orthogonal_complement(normal).swap_remove(0)
    }
}

/// Levi form at `p⁰` on `X_H`, for the defining function rescaled to
/// `|∂r/∂z̄| = 1`.
pub fn normalized_levi<T: Real>(spec: &DomainSpec<T>, p0: &[Cplx<T>], xh: &[Cplx<T>]) -> Result<T> {
    let jet = spec.evaluate_jet(p0)?;
    Ok(jet.levi_form(xh) / norm(&jet.grad_z))
}

/// Oracle constant `-(n+1)/n` for the Ricci curvature of the ball metric.
pub fn ricci_ball_constant<T: Real>(n: usize) -> T {
    let nn = T::from_usize_lossy(n);
    -(nn + T::one()) / nn
}

/// The six boundary limits along the inward normal at `p⁰`:
/// `δ^{n+1} g`, `δ τ(ν)`, `√δ τ(X_H)`, `β`, `R(X)` and `Ric(X)`.
pub fn run_limit_suite<T: Real>(
    spec: &DomainSpec<T>,
    kernel: &dyn KernelEvaluator<T>,
    p0: &[Cplx<T>],
    x: &[Cplx<T>],
    deltas: &[T],
) -> Result<Vec<LimitExperimentReport<T>>> {
    if !(norm(x) > T::zero()) {
        return Err(Error::ZeroVector);
    }
    let n = spec.dim();
    let nn = T::from_usize_lossy(n);
    let (frames, refused) = admissible_samples(spec, p0, deltas, &[kernel])?;
    if frames.len() < 3 {
        return Err(Error::TooFewSamples(frames.len()));
    }
    let normal = frames[0].normal.clone();
    let tangent = unit_tangent(&normal, x);
    let values = frames
        .iter()
        .map(|f| point_values(kernel, f, x, &tangent))
        .collect::<Result<Vec<_>>>()?;
    let series = |f: &dyn Fn(&BoundaryFrame<T>, &PointValues<T>) -> T| -> Vec<Sample<T>> {
        frames
            .iter()
            .zip(&values)
            .map(|(fr, v)| Sample {
                delta: fr.delta,
                value: f(fr, v),
                tail_bound: v.tail,
            })
            .collect()
    };
    let levi = normalized_levi(spec, p0, &tangent)?;
    let c_n = kernel.c_n();
    let two = T::lit(2.0);
    let mut reports = Vec::with_capacity(6);
    reports.push(assemble(
        Spec {
            id: "a",
            description: "delta^(n+1) g -> n^n / 2^(n+1)",
            target: nn.powi(n as i32) / two.powi(n as i32 + 1),
            source: TargetSource::ClosedForm,
            note: None,
        },
        p0,
        x,
        series(&|f, v| f.delta.powi(n as i32 + 1) * v.g),
        &refused,
    )?);
    reports.push(assemble(
        Spec {
            id: "b",
            description: "delta tau(z, nu) -> sqrt(n)/2 |nu|",
            target: nn.sqrt() / two,
            source: TargetSource::ClosedForm,
            note: None,
        },
        p0,
        &normal,
        series(&|f, v| f.delta * v.tau_normal),
        &refused,
    )?);
    reports.push(assemble(
        Spec {
            id: "c",
            description: "sqrt(delta) tau(z, X_H) -> sqrt((n/2) L(p0, X_H)), |dr/dzbar| = 1",
            target: (nn / two * levi).sqrt(),
            source: TargetSource::ClosedForm,
            note: None,
        },
        p0,
        &tangent,
        series(&|f, v| f.delta.sqrt() * v.tau_tangent),
        &refused,
    )?);
    reports.push(assemble(
        Spec {
            id: "d",
            description: "beta -> (c_n/(n-1)!)^((n+1)/n) n^n pi^(n+1)",
            target: beta_ball(n, c_n),
            source: TargetSource::ClosedForm,
            note: None,
        },
        p0,
        x,
        series(&|_, v| v.beta),
        &refused,
    )?);
    reports.push(assemble(
        Spec {
            id: "e",
            description: "R(z, X) -> -2/n",
            target: -two / nn,
            source: TargetSource::ClosedForm,
            note: None,
        },
        p0,
        x,
        series(&|_, v| v.r),
        &refused,
    )?);
    reports.push(assemble(
        Spec {
            id: "f",
            description: "Ric(z, X) -> -(n+1)/n",
            target: ricci_ball_constant(n),
            source: TargetSource::BallOracle,
            note: Some(format!(
                "reference constants -1/n = {:.8} and -1 disagree with the ball oracle -(n+1)/n = {:.8}",
                (-T::one() / nn).as_f64(),
                ricci_ball_constant::<T>(n).as_f64()
            )),
        },
        p0,
        x,
        series(&|_, v| v.ric),
        &refused,
    )?);
    Ok(reports)
}

/// Whether two defining functions agree on a sample of the ball of radius
/// `radius` about `p⁰`, up to `tol`.
pub fn shares_boundary_germ<T: Real>(a: &DomainSpec<T>, b: &DomainSpec<T>, p0: &[Cplx<T>], radius: T, tol: T) -> Result<bool> {
    let n = p0.len();
    let steps = 6;
    for k in 0..n {
        for s in 0..steps {
            let th = T::TAU() * T::from_usize_lossy(s) / T::from_usize_lossy(steps);
            for scale in [T::lit(0.5), T::one()] {
                let mut z = p0.to_vec();
                z[k] += Cplx::from_polar(radius * scale, th);
                if (a.value(&z)? - b.value(&z)?).abs() > tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Radius of the neighbourhood of `p⁰` on which the two domains must agree.
pub const GERM_RADIUS: f64 = 0.05;

/// The five ratios `inner / outer` of `g`, `β`, `τ(X)`, `2 - R(X)` and
/// `n + 1 - Ric(X)` for domains sharing the boundary near `p⁰`.
#[allow(clippy::too_many_arguments)]
pub fn run_localization_suite<T: Real>(
    outer: &DomainSpec<T>,
    outer_kernel: &dyn KernelEvaluator<T>,
    inner_spec: &DomainSpec<T>,
    inner_kernel: &dyn KernelEvaluator<T>,
    p0: &[Cplx<T>],
    x: &[Cplx<T>],
    deltas: &[T],
    label: &str,
) -> Result<Vec<LimitExperimentReport<T>>> {
    if !(norm(x) > T::zero()) {
        return Err(Error::ZeroVector);
    }
    if !shares_boundary_germ(outer, inner_spec, p0, T::lit(GERM_RADIUS), T::lit(1e-13))? {
        return Err(Error::InvalidSpec("boundary point is not in a shared boundary piece".into()));
    }
    let n1 = T::from_usize_lossy(outer.dim() + 1);
    let (frames, refused) = admissible_samples(outer, p0, deltas, &[outer_kernel, inner_kernel])?;
    if frames.len() < 3 {
        return Err(Error::TooFewSamples(frames.len()));
    }
    let tangent = unit_tangent(&frames[0].normal, x);
    let pairs = frames
        .iter()
        .map(|f| {
            let inner_frame = verified_frame(inner_spec, p0, f.delta)?;
            Ok((
                point_values(outer_kernel, f, x, &tangent)?,
                point_values(inner_kernel, &inner_frame, x, &tangent)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let series = |f: &dyn Fn(&PointValues<T>, &PointValues<T>) -> T| -> Vec<Sample<T>> {
        frames
            .iter()
            .zip(&pairs)
            .map(|(fr, (o, i))| Sample {
                delta: fr.delta,
                value: f(o, i),
                tail_bound: o.tail.max(i.tail),
            })
            .collect()
    };
    let two = T::lit(2.0);
    let items: [(&str, &str, &dyn Fn(&PointValues<T>, &PointValues<T>) -> T); 5] = [
        ("a", "g ratio", &|o, i| i.g / o.g),
        ("b", "beta ratio", &|o, i| i.beta / o.beta),
        ("c", "tau(X) ratio", &|o, i| i.tau_x / o.tau_x),
        ("d", "(2 - R) ratio", &|o, i| (two - i.r) / (two - o.r)),
        ("e", "(n + 1 - Ric) ratio", &|o, i| (n1 - i.ric) / (n1 - o.ric)),
    ];
    items
        .iter()
        .map(|(id, desc, f)| {
            let id = if label.is_empty() {
                format!("loc-{id}")
            } else {
                format!("loc-{id}[{label}]")
            };
            assemble(
                Spec {
                    id: &id,
                    description: desc,
                    target: T::one(),
                    source: TargetSource::Unity,
                    note: None,
                },
                p0,
                x,
                series(*f),
                &refused,
            )
        })
        .collect()
}

/// Five unit directions at `p⁰ = (1, 0, …)`: normal, tangential and mixed.
pub fn probe_directions<T: Real>(n: usize) -> Vec<Vec<Cplx<T>>> {
    let unit = |v: Vec<Cplx<T>>| {
        let m = norm(&v);
        v.into_iter().map(|c| c.unscale(m)).collect::<Vec<_>>()
    };
    let mut e0 = vec![re(T::zero()); n];
    e0[0] = re(T::one());
    let mut e1 = vec![re(T::zero()); n];
    e1[1] = re(T::one());
    let mix = |a: T, b: Cplx<T>| {
        let mut v = vec![re(T::zero()); n];
        v[0] = re(a);
        v[1] = b;
        unit(v)
    };
    vec![
        e0,
        e1,
        mix(T::one(), re(T::one())),
        mix(T::one(), Cplx::new(T::zero(), T::lit(2.0))),
        mix(T::lit(0.3), Cplx::new(T::lit(-0.5), T::lit(0.8))),
    ]
}

/// Descriptive data written next to the report rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteMetadata {
    pub domain: String,
    pub n: usize,
    pub epsilon: Option<f64>,
    pub degree: Option<usize>,
    pub c_n: f64,
}

/// Contents of the JSON summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary<T> {
    pub metadata: SuiteMetadata,
    pub reports: Vec<LimitExperimentReport<T>>,
}

pub const CSV_HEADER: &str = "experiment,delta,value,tail_bound,L_hat,L_star,rel_err,provenance";

/// CSV text, one row per sample, with 17 significant digits.
pub fn reports_csv<T: Real>(reports: &[LimitExperimentReport<T>]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        for s in &r.samples {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                r.experiment,
                s.delta.as_f64(),
                s.value.as_f64(),
                s.tail_bound.as_f64(),
                r.fit.limit.as_f64(),
                r.target.as_f64(),
                r.rel_err.as_f64(),
                r.source.as_str()
            ));
        }
    }
    out
}

/// Writes `path` (CSV) and `path` with extension `json` (summary).
pub fn emit_report<T: Real + Serialize>(
    reports: &[LimitExperimentReport<T>],
    metadata: &SuiteMetadata,
    path: &std::path::Path,
) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, reports_csv(reports))?;
    let summary = ReportSummary {
        metadata: metadata.clone(),
        reports: reports.to_vec(),
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(path.with_extension("json"), json)?;
    Ok(())
}

/// Parses a JSON summary written by [`emit_report`].
pub fn parse_summary(text: &str) -> Result<ReportSummary<f64>> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}
