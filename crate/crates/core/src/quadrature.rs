//! Hardy-space and Bergman-space monomial norms on complete Reinhardt domains
//! in `C^2`.
//!
//! A complete Reinhardt domain is a torus bundle over the profile curve
//! `t -> R(t) (cos t, sin t)`, `t ∈ [0, π/2]`, where `R(t)^2` is the root of
//! `ρ(R^2 cos^2 t, R^2 sin^2 t) = 0`. Integrating out the two torus angles
//! reduces every monomial norm to a one-dimensional integral in `t`:
//!
//! * Hardy: `4π^2 ∫ x^{2α_1} y^{2α_2} w x y |γ'| dt`, with `w` the Fefferman
//!   density and `x y |γ'|` the Euclidean surface Jacobian;
//! * Bergman: `4π^2 ∫ cos^{2α_1+1} sin^{2α_2+1} R^{2|α|+4} / (2|α|+4) dt`,
//!   after integrating the radial variable in closed form.
//!
//! The `t` integrals use a composite Gauss-Kronrod (10, 21) rule on panels
//! graded quadratically toward both endpoints, split at the knots of the
//! profile, and refined until the embedded error estimate of every monomial up
//! to the degree cap is below the relative tolerance.

use rayon::prelude::*;

use crate::domain::{DomainKind, DomainSpec, BUMP_END, BUMP_HEIGHT, BUMP_START};
use crate::error::{Error, Result};
use crate::fefferman::fefferman_density;
use crate::scalar::{re, Real};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

/// Gauss weights for the abscissae `XGK[1], XGK[3], ..., XGK[9]`.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Nodes and weights of the 21-point Kronrod rule on `[a, b]`, plus the
/// 10-point Gauss weights at the shared nodes (zero elsewhere).
fn kronrod_rule<T: Real>(a: T, b: T) -> Vec<(T, T, T)> {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let mut out = Vec::with_capacity(21);
    for k in 0..11 {
        let wg = if k % 2 == 1 { T::lit(WG[k / 2]) } else { T::zero() };
        let x = T::lit(XGK[k]);
        let wk = T::lit(WGK[k]);
        out.push((mid - half * x, wk * half, wg * half));
        if k < 10 {
            out.push((mid + half * x, wk * half, wg * half));
        }
    }
    out
}

/// Integrates `f` over `[a, b]` with adaptive Gauss-Kronrod bisection until
/// the estimated error is below `max(abs_tol, rel_tol |I|)`.
pub fn integrate_adaptive<T: Real>(f: impl Fn(T) -> T, a: T, b: T, abs_tol: T, rel_tol: T) -> Result<(T, T)> {
    let panel = |lo: T, hi: T| -> (T, T) {
        let (mut k, mut g) = (T::zero(), T::zero());
        for (x, wk, wg) in kronrod_rule(lo, hi) {
            let fx = f(x);
            k += wk * fx;
            g += wg * fx;
        }
        (k, (k - g).abs())
    };
    let mut panels = vec![(a, b, panel(a, b))];
    for _ in 0..2000 {
        let total: T = panels.iter().map(|p| p.2 .0).sum();
        let err: T = panels.iter().map(|p| p.2 .1).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.partial_cmp(&y.1 .2 .1).expect("finite error"))
            .expect("nonempty");
        let (lo, hi, _) = panels.swap_remove(idx);
        let mid = (lo + hi) * T::lit(0.5);
        panels.push((lo, mid, panel(lo, mid)));
        panels.push((mid, hi, panel(mid, hi)));
    }
    let total: T = panels.iter().map(|p| p.2 .0).sum();
    let err: T = panels.iter().map(|p| p.2 .1).sum();
    Err(Error::QuadratureNonconvergence {
        estimate: err.as_f64(),
        tolerance: abs_tol.max(rel_tol * total.abs()).as_f64(),
    })
}

/// Geometry of the profile curve at one quadrature node.
#[derive(Debug, Clone, Copy)]
pub struct CurveNode<T> {
    pub t: T,
    pub radius: T,
    pub x: T,
    pub y: T,
    /// `|γ'(t)|`.
    pub speed: T,
    /// Fefferman density for `c_n = 1`.
    pub density: T,
    pub kronrod_weight: T,
    pub gauss_weight: T,
}

impl<T: Real> CurveNode<T> {
    fn hardy_factor(&self) -> T {
        self.density * self.x * self.y * self.speed
    }

    fn hardy_integrand(&self, a: [usize; 2]) -> T {
        self.x.powi(2 * a[0] as i32) * self.y.powi(2 * a[1] as i32) * self.hardy_factor()
    }

    fn bergman_integrand(&self, a: [usize; 2]) -> T {
        let (c, s) = (self.t.cos(), self.t.sin());
        let k = a[0] + a[1];
        c.powi(2 * a[0] as i32 + 1) * s.powi(2 * a[1] as i32 + 1) * self.radius.powi(2 * k as i32 + 4)
            / T::from_usize_lossy(2 * k + 4)
    }
}

/// Profile curve of a complete Reinhardt domain in `C^2`, discretized as a
/// composite Gauss-Kronrod rule.
#[derive(Debug, Clone)]
pub struct ProfileCurve<T: Real> {
    spec: DomainSpec<T>,
    panels: Vec<(T, T, Vec<CurveNode<T>>)>,
    rel_tol: T,
}

/// Default relative tolerance per monomial norm.
pub const DEFAULT_REL_TOL: f64 = 1e-13;

/// All multi-indices in two variables of total degree at most `d`, ordered by
/// degree and then by the first exponent.
pub fn multi_indices(d: usize) -> Vec<[usize; 2]> {
    (0..=d).flat_map(|k| (0..=k).map(move |a| [k - a, a])).collect()
}

fn breakpoints<T: Real>(spec: &DomainSpec<T>) -> Vec<T> {
    match spec.kind() {
        DomainKind::BumpedBall { epsilon } => {
            let mut out = Vec::new();
            let s2 = T::lit(BUMP_START);
            out.push((s2 / (T::one() - s2)).sqrt().atan());
            let s2 = T::lit(BUMP_END);
            let s1 = T::one() - s2 - *epsilon * T::lit(BUMP_HEIGHT);
            if s1 > T::zero() {
                out.push((s2 / s1).sqrt().atan());
            }
            out
        }
        _ => Vec::new(),
    }
}

fn graded_node<T: Real>(u: T) -> T {
    let quarter = T::FRAC_PI_4();
    let two = T::lit(2.0);
    if u <= T::lit(0.5) {
        quarter * (two * u) * (two * u)
    } else {
        let v = two * (T::one() - u);
        T::FRAC_PI_2() - quarter * v * v
    }
}

impl<T: Real> ProfileCurve<T> {
    pub fn spec(&self) -> &DomainSpec<T> {
        &self.spec
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &CurveNode<T>> {
        self.panels.iter().flat_map(|p| p.2.iter())
    }

    fn node(spec: &DomainSpec<T>, t: T, wk: T, wg: T) -> Result<CurveNode<T>> {
        let (c, s) = (t.cos(), t.sin());
        let tau = spec.radial_root(&[c * c, s * s])?;
        let radius = tau.sqrt();
        let (x, y) = (radius * c, radius * s);
        let pj = spec.profile_jet(&[x * x, y * y]).ok_or(Error::RootFindingFailure)?;
        let (r1, r2) = (pj.grad[0], pj.grad[1]);
        let dr = radius * c * s * (r1 - r2) / (r1 * c * c + r2 * s * s);
        let speed = (radius * radius + dr * dr).sqrt();
        let jet = spec.evaluate_jet(&[re(x), re(y)])?;
        let density = fefferman_density(&jet, T::one())?.density;
        Ok(CurveNode {
            t,
            radius,
            x,
            y,
            speed,
            density,
            kronrod_weight: wk,
            gauss_weight: wg,
        })
    }

    fn panel(spec: &DomainSpec<T>, a: T, b: T) -> Result<(T, T, Vec<CurveNode<T>>)> {
        let nodes = kronrod_rule(a, b)
            .into_iter()
            .map(|(t, wk, wg)| Self::node(spec, t, wk, wg))
            .collect::<Result<Vec<_>>>()?;
        Ok((a, b, nodes))
    }

    /// Largest relative Gauss/Kronrod discrepancy contributed by each panel
    /// over all monomials of degree at most `d`, together with the total.
    fn panel_errors(&self, d: usize) -> (Vec<T>, T) {
        let alphas = multi_indices(d);
        let integrals: Vec<(T, T)> = alphas.iter().map(|&a| (self.raw_hardy(a).0, self.raw_bergman(a).0)).collect();
        let per_panel: Vec<Vec<(T, T)>> = self
            .panels
            .par_iter()
            .map(|(_, _, nodes)| {
                alphas
                    .iter()
                    .zip(&integrals)
                    .map(|(&a, &(ih, ib))| {
                        let (mut kh, mut gh, mut kb, mut gb) = (T::zero(), T::zero(), T::zero(), T::zero());
                        for nd in nodes {
                            let h = nd.hardy_integrand(a);
                            let b = nd.bergman_integrand(a);
                            kh += nd.kronrod_weight * h;
                            gh += nd.gauss_weight * h;
                            kb += nd.kronrod_weight * b;
                            gb += nd.gauss_weight * b;
                        }
                        ((kh - gh).abs() / ih, (kb - gb).abs() / ib)
                    })
                    .collect()
            })
            .collect();
        let worst_panel = per_panel
            .iter()
            .map(|v| v.iter().fold(T::zero(), |m, &(h, b)| m.max(h).max(b)))
            .collect();
        let mut worst_total = T::zero();
        for k in 0..alphas.len() {
            let (mut eh, mut eb) = (T::zero(), T::zero());
            for p in &per_panel {
                eh += p[k].0;
                eb += p[k].1;
            }
            worst_total = worst_total.max(eh).max(eb);
        }
        (worst_panel, worst_total)
    }

    fn raw_hardy(&self, a: [usize; 2]) -> (T, T) {
        let (mut k, mut g) = (T::zero(), T::zero());
        for nd in self.nodes() {
            let f = nd.hardy_integrand(a);
            k += nd.kronrod_weight * f;
            g += nd.gauss_weight * f;
        }
        (k, g)
    }

    fn raw_bergman(&self, a: [usize; 2]) -> (T, T) {
        let (mut k, mut g) = (T::zero(), T::zero());
        for nd in self.nodes() {
            let f = nd.bergman_integrand(a);
            k += nd.kronrod_weight * f;
            g += nd.gauss_weight * f;
        }
        (k, g)
    }

    fn checked(&self, (k, g): (T, T), scale: T) -> Result<T> {
        let sum_err = (k - g).abs();
        let tol = self.rel_tol * k.abs();
        if !(sum_err <= tol) {
            return Err(Error::QuadratureNonconvergence {
                estimate: (sum_err * scale).as_f64(),
                tolerance: (tol * scale).as_f64(),
            });
        }
        Ok(k * scale)
    }

    /// `||z^α||^2` in the Hardy space of the Fefferman measure.
    pub fn hardy_norm(&self, alpha: [usize; 2], c_n: T) -> Result<T> {
        let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
        self.checked(self.raw_hardy(alpha), four_pi2 * c_n)
    }

    /// `||z^α||^2` in the Bergman space.
    pub fn bergman_norm(&self, alpha: [usize; 2]) -> Result<T> {
        let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
        self.checked(self.raw_bergman(alpha), four_pi2)
    }

    /// `|<z^α, z^β>|` in the Hardy space, with the torus angles integrated by
    /// a trapezoid rule that is exact for the characters involved.
    pub fn hardy_inner_product_modulus(&self, alpha: [usize; 2], beta: [usize; 2], c_n: T) -> T {
        let m = 2 * (alpha[0] + alpha[1] + beta[0] + beta[1]) + 3;
        let mut torus = num_complex::Complex::<T>::new(T::zero(), T::zero());
        let k1 = alpha[0] as i64 - beta[0] as i64;
        let k2 = alpha[1] as i64 - beta[1] as i64;
        let step = T::lit(2.0) * T::PI() / T::from_usize_lossy(m);
        for i in 0..m {
            for j in 0..m {
                let ang = step * (T::lit(k1 as f64) * T::from_usize_lossy(i) + T::lit(k2 as f64) * T::from_usize_lossy(j));
                torus += num_complex::Complex::new(ang.cos(), ang.sin());
            }
        }
        let torus = torus.scale(T::lit(4.0) * T::PI() * T::PI() / T::from_usize_lossy(m * m));
        let mut radial = T::zero();
        for nd in self.nodes() {
            let f = nd.x.powi((alpha[0] + beta[0]) as i32) * nd.y.powi((alpha[1] + beta[1]) as i32) * nd.hardy_factor();
            radial += nd.kronrod_weight * f;
        }
        (torus.scale(radial * c_n)).norm()
    }
}

/// Traces the profile curve of a complete Reinhardt domain in `C^2` starting
/// from `resolution` graded panels, refined until every Hardy and Bergman
/// monomial norm of degree at most `degree` meets the relative tolerance.
pub fn trace_profile_curve<T: Real>(spec: &DomainSpec<T>, resolution: usize, degree: usize) -> Result<ProfileCurve<T>> {
    trace_profile_curve_with_tol(spec, resolution, degree, T::lit(DEFAULT_REL_TOL))
}

pub fn trace_profile_curve_with_tol<T: Real>(
    spec: &DomainSpec<T>,
    resolution: usize,
    degree: usize,
    rel_tol: T,
) -> Result<ProfileCurve<T>> {
    if spec.dim() != 2 || !spec.is_reinhardt() {
        return Err(Error::UnsupportedSpec(
            "profile quadrature needs a complete Reinhardt domain in C^2".into(),
        ));
    }
    let m = resolution.max(2);
    let mut cuts: Vec<T> = (0..=m)
        .map(|k| graded_node(T::from_usize_lossy(k) / T::from_usize_lossy(m)))
        .collect();
    cuts.extend(breakpoints(spec));
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup_by(|a, b| (*a - *b).abs() < T::lit(1e-14));
    let panels = cuts
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| ProfileCurve::panel(spec, w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    let mut curve = ProfileCurve {
        spec: spec.clone(),
        panels,
        rel_tol,
    };
    let budget = rel_tol * T::lit(0.1);
    for _ in 0..40 {
        let (per_panel, total) = curve.panel_errors(degree);
        if total <= budget {
            return Ok(curve);
        }
        let threshold = budget / T::from_usize_lossy(curve.panels.len());
        let old = std::mem::take(&mut curve.panels);
        let refined: Vec<Result<Vec<_>>> = old
            .into_par_iter()
            .zip(per_panel)
            .map(|(panel, err)| {
                if err > threshold {
                    let mid = (panel.0 + panel.1) * T::lit(0.5);
                    Ok(vec![
                        ProfileCurve::panel(spec, panel.0, mid)?,
                        ProfileCurve::panel(spec, mid, panel.1)?,
                    ])
                } else {
                    Ok(vec![panel])
                }
            })
            .collect();
        for r in refined {
            curve.panels.extend(r?);
        }
        curve.panels.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    }
    let (_, total) = curve.panel_errors(degree);
    Err(Error::QuadratureNonconvergence {
        estimate: total.as_f64(),
        tolerance: budget.as_f64(),
    })
}

/// Hardy and Bergman norms of every monomial up to a degree cap.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialNormTable<T> {
    pub degree: usize,
    /// `(α, ||z^α||^2_H, ||z^α||^2_{L^2})`, ordered as [`multi_indices`].
    pub entries: Vec<([usize; 2], T, T)>,
}

impl<T: Real> MonomialNormTable<T> {
    /// Quadrature-based table for a complete Reinhardt domain in `C^2`.
    pub fn compute(curve: &ProfileCurve<T>, degree: usize, c_n: T) -> Result<Self> {
        let entries = multi_indices(degree)
            .into_par_iter()
            .map(|a| Ok((a, curve.hardy_norm(a, c_n)?, curve.bergman_norm(a)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { degree, entries })
    }

    /// Closed-form table for the unit ball in `C^2`.
    pub fn unit_ball(degree: usize, c_n: T) -> Self {
        let entries = multi_indices(degree)
            .into_iter()
            .map(|a| (a, ball_hardy_norm(&a, c_n), ball_bergman_norm(&a)))
            .collect();
        Self { degree, entries }
    }

    pub fn get(&self, alpha: [usize; 2]) -> Option<(T, T)> {
        let k = alpha[0] + alpha[1];
        if k > self.degree {
            return None;
        }
        let pos = k * (k + 1) / 2 + alpha[1];
        self.entries.get(pos).map(|e| (e.1, e.2))
    }

    /// Checks positivity and that along each coordinate axis the norms are
    /// eventually decreasing.
    pub fn sanity_check(&self) -> bool {
        let positive = self.entries.iter().all(|e| e.1 > T::zero() && e.2 > T::zero());
        let axis_decreasing = |pick: fn(usize) -> [usize; 2], col: fn(&(T, T)) -> T| {
            let vals: Vec<T> = (0..=self.degree).filter_map(|k| self.get(pick(k))).map(|v| col(&v)).collect();
            match vals.iter().position(|_| true) {
                None => true,
                Some(_) => {
                    let peak = vals
                        .iter()
                        .enumerate()
                        .fold((0, T::neg_infinity()), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
                        .0;
                    vals[peak..].windows(2).all(|w| w[1] < w[0])
                }
            }
        };
        positive
            && axis_decreasing(|k| [k, 0], |v| v.0)
            && axis_decreasing(|k| [0, k], |v| v.0)
            && axis_decreasing(|k| [k, 0], |v| v.1)
            && axis_decreasing(|k| [0, k], |v| v.1)
    }
}

/// `||z^α||^2` on the unit sphere of `C^n` with the Fefferman measure:
/// `c_n π^n α! / (n - 1 + |α|)!`, i.e. the Euclidean value `2π^n α!/(n-1+|α|)!`
/// times the constant density `c_n / 2`.
pub fn ball_hardy_norm<T: Real>(alpha: &[usize], c_n: T) -> T {
    let n = alpha.len();
    let k: usize = alpha.iter().sum();
    let num: T = alpha.iter().map(|&a| crate::scalar::ln_factorial::<T>(a)).sum();
    c_n * T::PI().powi(n as i32) * (num - crate::scalar::ln_factorial::<T>(n - 1 + k)).exp()
}

/// `||z^α||^2` in the Bergman space of the unit ball: `π^n α! / (n + |α|)!`.
pub fn ball_bergman_norm<T: Real>(alpha: &[usize]) -> T {
    let n = alpha.len();
    let k: usize = alpha.iter().sum();
    let num: T = alpha.iter().map(|&a| crate::scalar::ln_factorial::<T>(a)).sum();
    T::PI().powi(n as i32) * (num - crate::scalar::ln_factorial::<T>(n + k)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_degree_31() {
        let rule = kronrod_rule(0.0f64, 1.0);
        let k: f64 = rule.iter().map(|(x, wk, _)| wk * x.powi(31)).sum();
        let g: f64 = rule.iter().map(|(x, _, wg)| wg * x.powi(19)).sum();
        assert!((k - 1.0 / 32.0).abs() < 1e-15);
        assert!((g - 1.0 / 20.0).abs() < 1e-15);
        let wsum: f64 = rule.iter().map(|r| r.1).sum();
        assert!((wsum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_integration_of_a_peak() {
        let (v, _) = integrate_adaptive(|x: f64| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-14, 1e-13).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn multi_index_layout() {
        let m = multi_indices(2);
        assert_eq!(m, vec![[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]]);
        let t = MonomialNormTable::<f64>::unit_ball(5, 1.0);
        assert_eq!(t.get([2, 3]).map(|v| v.0), Some(ball_hardy_norm(&[2, 3], 1.0)));
        assert!(t.get([3, 3]).is_none());
    }

    #[test]
    fn ball_closed_forms() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((ball_hardy_norm(&[0, 0], 1.0) - pi2).abs() < 1e-14);
        assert!((ball_hardy_norm(&[1, 1], 1.0) - pi2 / 6.0).abs() < 1e-14);
        assert!((ball_bergman_norm::<f64>(&[1, 0]) - pi2 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn ball_table_is_sane() {
        assert!(MonomialNormTable::<f64>::unit_ball(20, 1.0).sanity_check());
    }
}
