//! Szegő and Bergman kernels: truncated diagonal series on complete Reinhardt
//! domains, closed forms on the unit ball, and the `SK` invariant.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::jet::{BiJet, JetLayout};
use crate::quadrature::{self, MonomialNormTable};
use crate::scalar::{inner, ln_factorial, re, Cplx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Szego,
    Bergman,
}

impl KernelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelKind::Szego => "szego",
            KernelKind::Bergman => "bergman",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "szego" => Ok(KernelKind::Szego),
            "bergman" => Ok(KernelKind::Bergman),
            other => Err(Error::Parse(format!("unknown kernel kind '{other}'"))),
        }
    }
}

/// Anything that evaluates a reproducing kernel and its diagonal jet.
pub trait KernelEvaluator<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn kind(&self) -> KernelKind;

    fn c_n(&self) -> T;

    /// `K(z, w)`, holomorphic in `z` and antiholomorphic in `w`.
    fn eval(&self, z: &[Cplx<T>], w: &[Cplx<T>]) -> Result<Cplx<T>>;

    /// Jet of `ε -> K(z + ε, z + ε)` through bidegree `(2, 2)`.
    fn diagonal_jet(&self, z: &[Cplx<T>]) -> Result<BiJet<T>>;

    /// Jet of `log K(z + ε, z + ε)`.
    fn log_jet(&self, z: &[Cplx<T>]) -> Result<BiJet<T>> {
        let jet = self.diagonal_jet(z)?;
        if !(jet.value().re > T::zero()) {
            return Err(Error::KernelNonpositive);
        }
        Ok(jet.ln())
    }

    /// Bound on the omitted part of `K(z, z)`; zero for closed forms.
    fn tail_bound(&self, _z: &[Cplx<T>]) -> T {
        T::zero()
    }

    /// `K(z, z)` as a real number.
    fn diagonal(&self, z: &[Cplx<T>]) -> Result<T> {
        let v = self.eval(z, z)?;
        if !(v.re > T::zero()) {
            return Err(Error::KernelNonpositive);
        }
        Ok(v.re)
    }
}

fn check_len<T>(n: usize, z: &[T]) -> Result<()> {
    if z.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: z.len(),
        });
    }
    Ok(())
}

/// Closed-form Szegő (Fefferman measure) or Bergman kernel of the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactBallKernel<T> {
    pub kind: KernelKind,
    pub n: usize,
    pub c_n: T,
}

impl<T: Real> ExactBallKernel<T> {
    pub fn szego(n: usize, c_n: T) -> Self {
        Self {
            kind: KernelKind::Szego,
            n,
            c_n,
        }
    }

    pub fn bergman(n: usize) -> Self {
        Self {
            kind: KernelKind::Bergman,
            n,
            c_n: T::one(),
        }
    }

    /// `K = C / (1 - <z, w>)^p`: returns `(C, p)`.
    pub fn constant_and_power(&self) -> (T, usize) {
        let n = self.n;
        let pin = T::PI().powi(n as i32);
        match self.kind {
            KernelKind::Szego => (ln_factorial::<T>(n - 1).exp() / (self.c_n * pin), n),
            KernelKind::Bergman => (ln_factorial::<T>(n).exp() / pin, n + 1),
        }
    }

    /// Coefficient of `z^α conj(w)^α` in the expansion of the closed form.
    pub fn coefficient(&self, alpha: &[usize]) -> T {
        let (c, p) = self.constant_and_power();
        let k: usize = alpha.iter().sum();
        let multinomial = ln_factorial::<T>(p - 1 + k) - ln_factorial::<T>(p - 1)
            - alpha.iter().map(|&a| ln_factorial::<T>(a)).sum::<T>();
        c * multinomial.exp()
    }
}

impl<T: Real> KernelEvaluator<T> for ExactBallKernel<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn kind(&self) -> KernelKind {
        self.kind
    }

    fn c_n(&self) -> T {
        self.c_n
    }

    fn eval(&self, z: &[Cplx<T>], w: &[Cplx<T>]) -> Result<Cplx<T>> {
        check_len(self.n, z)?;
        check_len(self.n, w)?;
        let u = re(T::one()) - inner(z, w);
        if u.norm() < T::lit(1e-12) {
            return Err(Error::PoleProximity {
                distance: u.norm().as_f64(),
            });
        }
        let (c, p) = self.constant_and_power();
        Ok(re(c) / u.powi(p as i32))
    }

    fn diagonal_jet(&self, z: &[Cplx<T>]) -> Result<BiJet<T>> {
        Ok(self.log_jet(z)?.exp())
    }

    fn log_jet(&self, z: &[Cplx<T>]) -> Result<BiJet<T>> {
        check_len(self.n, z)?;
        let layout = JetLayout::new(self.n);
        let u = ball_defect_jet(&layout, z);
        if !(u.value().re > T::lit(1e-12)) {
            return Err(Error::PoleProximity {
                distance: u.value().re.as_f64(),
            });
        }
        let (c, p) = self.constant_and_power();
        let mut out = u.ln().scale(re(-T::from_usize_lossy(p)));
        out.set(0, 0, out.value() + re(c.ln()));
        Ok(out)
    }
}

/// Jet of `1 - |z + ε|^2`.
fn ball_defect_jet<T: Real>(layout: &Arc<JetLayout>, z: &[Cplx<T>]) -> BiJet<T> {
    let mut u = BiJet::constant(layout, re(T::one()));
    for i in 0..z.len() {
        let a = BiJet::holomorphic_coordinate(layout, z, i);
        let b = BiJet::antiholomorphic_coordinate(layout, z, i);
        u = u.sub(&a.mul(&b));
    }
    u
}

/// Estimate of the omitted part of a series, from a geometric majorant of the
/// last computed shells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate<T> {
    pub bound: T,
    /// Largest ratio of consecutive shells among the last few degrees.
    pub ratio: T,
    /// Whether the shell ratios were nonincreasing over that window, the
    /// condition under which the majorant is guaranteed.
    pub log_convex: bool,
}

/// Number of trailing shells used to estimate the geometric ratio.
const TAIL_WINDOW: usize = 5;

fn geometric_tail<T: Real>(shells: &[T]) -> TailEstimate<T> {
    let d = shells.len() - 1;
    let last = shells[d];
    if last == T::zero() {
        return TailEstimate {
            bound: T::zero(),
            ratio: T::zero(),
            log_convex: true,
        };
    }
    let start = d.saturating_sub(TAIL_WINDOW);
    let ratios: Vec<T> = (start..d)
        .filter(|&k| shells[k] > T::zero())
        .map(|k| shells[k + 1] / shells[k])
        .collect();
    let q = ratios.iter().fold(T::zero(), |m, &r| m.max(r));
    let log_convex = ratios.windows(2).all(|w| w[1] <= w[0] * (T::one() + T::lit(1e-12)));
    let bound = if q < T::one() && !ratios.is_empty() {
        last * q / (T::one() - q)
    } else {
        T::infinity()
    };
    TailEstimate {
        bound,
        ratio: q,
        log_convex,
    }
}

/// Truncated diagonal series `Σ_{|α| <= D} c_α z^α conj(w)^α` of a kernel on a
/// complete Reinhardt domain.
///
/// With a reference kernel attached the stored coefficients are differences
/// from the reference and evaluation adds the reference closed form back.
#[derive(Debug, Clone)]
pub struct DiagonalKernelSeries<T: Real> {
    kind: KernelKind,
    n: usize,
    degree: usize,
    c_n: T,
    domain: String,
    terms: Vec<(Vec<usize>, T)>,
    reference: Option<ExactBallKernel<T>>,
    layout: Arc<JetLayout>,
}

impl<T: Real> DiagonalKernelSeries<T> {
    /// Series with the given coefficients, one per multi-index.
    pub fn from_coefficients(
        kind: KernelKind,
        n: usize,
        c_n: T,
        domain: impl Into<String>,
        terms: Vec<(Vec<usize>, T)>,
    ) -> Result<Self> {
        if terms.iter().any(|(a, _)| a.len() != n) {
            return Err(Error::InvalidSpec("multi-index length differs from dimension".into()));
        }
        let degree = terms.iter().map(|(a, _)| a.iter().sum::<usize>()).max().unwrap_or(0);
        Ok(Self {
            kind,
            n,
            degree,
            c_n,
            domain: domain.into(),
            terms,
            reference: None,
            layout: JetLayout::new(n),
        })
    }

    /// Series from a monomial norm table of a domain in `C^2`.
    pub fn from_table(table: &MonomialNormTable<T>, kind: KernelKind, c_n: T, domain: impl Into<String>) -> Result<Self> {
        let terms = table
            .entries
            .iter()
            .map(|(a, h, b)| {
                let norm = match kind {
                    KernelKind::Szego => *h,
                    KernelKind::Bergman => *b,
                };
                (a.to_vec(), T::one() / norm)
            })
            .collect();
        Self::from_coefficients(kind, 2, c_n, domain, terms)
    }

    /// Closed-form coefficients of the unit ball kernel in any dimension.
    pub fn unit_ball(n: usize, kind: KernelKind, degree: usize, c_n: T) -> Result<Self> {
        let exact = match kind {
            KernelKind::Szego => ExactBallKernel::szego(n, c_n),
            KernelKind::Bergman => ExactBallKernel::bergman(n),
        };
        let terms = all_multi_indices(n, degree)
            .into_iter()
            .map(|a| {
                let c = exact.coefficient(&a);
                (a, c)
            })
            .collect();
        Self::from_coefficients(kind, n, c_n, "unit-ball", terms)
    }

    /// Replaces the coefficients by their differences from the unit ball
    /// kernel of the same kind and adds the ball closed form at evaluation.
    /// Evaluation is unchanged up to the truncation, but the omitted tail is
    /// that of the difference series.
    pub fn with_ball_reference(&self) -> Self {
        if self.reference.is_some() {
            return self.clone();
        }
        let exact = self.ball_kernel();
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| (a.clone(), *c - exact.coefficient(a)))
            .collect();
        Self {
            terms,
            reference: Some(exact),
            ..self.clone()
        }
    }

    fn ball_kernel(&self) -> ExactBallKernel<T> {
        match self.kind {
            KernelKind::Szego => ExactBallKernel::szego(self.n, self.c_n),
            KernelKind::Bergman => ExactBallKernel::bergman(self.n),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn domain_name(&self) -> &str {
        &self.domain
    }

    pub fn has_reference(&self) -> bool {
        self.reference.is_some()
    }

    /// Full coefficient `c_α` (reference included).
    pub fn coefficient(&self, alpha: &[usize]) -> Option<T> {
        let stored = self.terms.iter().find(|(a, _)| a.as_slice() == alpha)?.1;
        Some(match &self.reference {
            Some(r) => stored + r.coefficient(alpha),
            None => stored,
        })
    }

    /// Stored terms: full coefficients, or differences when a reference is
    /// attached.
    pub fn terms(&self) -> &[(Vec<usize>, T)] {
        &self.terms
    }

    fn powers(&self, x: &[Cplx<T>]) -> Vec<Vec<Cplx<T>>> {
        x.iter()
            .map(|&xi| {
                let mut v = Vec::with_capacity(self.degree + 1);
                let mut acc = re(T::one());
                for _ in 0..=self.degree {
                    v.push(acc);
                    acc *= xi;
                }
                v
            })
            .collect()
    }

    fn sum_terms(&self, z: &[Cplx<T>], w: &[Cplx<T>]) -> Cplx<T> {
        let prod: Vec<Cplx<T>> = z.iter().zip(w).map(|(a, b)| a * b.conj()).collect();
        let pw = self.powers(&prod);
        let mut acc = re(T::zero());
        for (a, c) in &self.terms {
            let mut m = re(*c);
            for (i, &ai) in a.iter().enumerate() {
                m *= pw[i][ai];
            }
            acc += m;
        }
        acc
    }

    /// Shell sums `T_k = Σ_{|α| = k} |c_α| |z^α|^2` of the stored terms.
    fn shells(&self, z: &[Cplx<T>]) -> Vec<T> {
        let s: Vec<Cplx<T>> = z.iter().map(|c| re(c.norm_sqr())).collect();
        let pw = self.powers(&s);
        let mut shells = vec![T::zero(); self.degree + 1];
        for (a, c) in &self.terms {
            let mut m = c.abs();
            for (i, &ai) in a.iter().enumerate() {
                m *= pw[i][ai].re;
            }
            shells[a.iter().sum::<usize>()] += m;
        }
        shells
    }

    /// Tail estimate of `Σ_{|α| > D} c_α ρ^{2|α|}`-type sums for all points
    /// with `|z| <= ρ`, from the shell maxima `max_{|α|=k} |c_α| α!/k!`.
    pub fn truncation_tail_bound(&self, rho: T) -> TailEstimate<T> {
        let mut maxima = vec![T::zero(); self.degree + 1];
        for (a, c) in &self.terms {
            let k: usize = a.iter().sum();
            let w = (a.iter().map(|&ai| ln_factorial::<T>(ai)).sum::<T>() - ln_factorial::<T>(k)).exp();
            maxima[k] = maxima[k].max(c.abs() * w);
        }
        let shells: Vec<T> = maxima
            .iter()
            .enumerate()
            .map(|(k, &m)| m * rho.powi(2 * k as i32))
            .collect();
        geometric_tail(&shells)
    }

    /// Tail estimate at a specific point from the shells of `K(z, z)`.
    pub fn point_tail(&self, z: &[Cplx<T>]) -> TailEstimate<T> {
        geometric_tail(&self.shells(z))
    }
}

impl<T: Real> KernelEvaluator<T> for DiagonalKernelSeries<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn kind(&self) -> KernelKind {
        self.kind
    }

    fn c_n(&self) -> T {
        self.c_n
    }

    fn eval(&self, z: &[Cplx<T>], w: &[Cplx<T>]) -> Result<Cplx<T>> {
        check_len(self.n, z)?;
        check_len(self.n, w)?;
        let base = match &self.reference {
            Some(r) => r.eval(z, w)?,
            None => re(T::zero()),
        };
        Ok(base + self.sum_terms(z, w))
    }

    fn diagonal_jet(&self, z: &[Cplx<T>]) -> Result<BiJet<T>> {
        check_len(self.n, z)?;
        let mut jet = match &self.reference {
            Some(r) => r.diagonal_jet(z)?,
            None => BiJet::zero(&self.layout),
        };
        for (a, c) in &self.terms {
            let h = self.layout.monomial_shift(a, z);
            jet.accumulate_outer(*c, &h);
        }
        Ok(jet)
    }

    fn tail_bound(&self, z: &[Cplx<T>]) -> T {
        self.point_tail(z).bound
    }
}

/// All multi-indices in `n` variables with `|α| <= d`, ordered by degree.
pub fn all_multi_indices(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 0..=d {
        let mut level = Vec::new();
        compositions(n, k, &mut Vec::new(), &mut level);
        out.extend(level);
    }
    out
}

fn compositions(n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() == n - 1 {
        let mut a = prefix.clone();
        a.push(k);
        out.push(a);
        return;
    }
    for first in (0..=k).rev() {
        prefix.push(first);
        compositions(n, k - first, prefix, out);
        prefix.pop();
    }
}

/// Builds the truncated series of the requested kind on a complete Reinhardt
/// domain in `C^2` from profile quadrature.
pub fn build_series<T: Real>(spec: &DomainSpec<T>, kind: KernelKind, degree: usize, c_n: T) -> Result<DiagonalKernelSeries<T>> {
    let table = norm_table(spec, degree, c_n)?;
    DiagonalKernelSeries::from_table(&table, kind, c_n, spec.name())
}

/// Szegő and Bergman series sharing one norm table.
pub fn build_series_pair<T: Real>(
    spec: &DomainSpec<T>,
    degree: usize,
    c_n: T,
) -> Result<(DiagonalKernelSeries<T>, DiagonalKernelSeries<T>)> {
    let table = norm_table(spec, degree, c_n)?;
    Ok((
        DiagonalKernelSeries::from_table(&table, KernelKind::Szego, c_n, spec.name())?,
        DiagonalKernelSeries::from_table(&table, KernelKind::Bergman, c_n, spec.name())?,
    ))
}

/// Quadrature resolution (initial panel count) used by [`build_series`].
pub const DEFAULT_RESOLUTION: usize = 8;

/// Monomial norm table by profile quadrature.
pub fn norm_table<T: Real>(spec: &DomainSpec<T>, degree: usize, c_n: T) -> Result<MonomialNormTable<T>> {
    let curve = quadrature::trace_profile_curve(spec, DEFAULT_RESOLUTION, degree)?;
    MonomialNormTable::compute(&curve, degree, c_n)
}

/// `SK = S^{n+1} / K^n` at `z`.
pub fn sk_invariant<T: Real>(szego: &dyn KernelEvaluator<T>, bergman: &dyn KernelEvaluator<T>, z: &[Cplx<T>]) -> Result<T> {
    let n = szego.dim() as i32;
    let s = szego.diagonal(z)?;
    let k = bergman.diagonal(z)?;
    Ok(s.powi(n + 1) / k.powi(n))
}

/// `SK` of the unit ball: `(n-1)! / (c_n^{n+1} (nπ)^n)`.
pub fn sk_ball<T: Real>(n: usize, c_n: T) -> T {
    ln_factorial::<T>(n - 1).exp() / (c_n.powi(n as i32 + 1) * (T::from_usize_lossy(n) * T::PI()).powi(n as i32))
}

/// Evaluates `K` at many point pairs in parallel.
pub fn eval_many<T: Real>(kernel: &dyn KernelEvaluator<T>, pairs: &[(Vec<Cplx<T>>, Vec<Cplx<T>>)]) -> Result<Vec<Cplx<T>>> {
    pairs.par_iter().map(|(z, w)| kernel.eval(z, w)).collect()
}
