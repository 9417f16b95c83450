//! The Kähler metric with potential `log S(z, z)` and its invariants: vector
//! lengths, volume density, the β-invariant, holomorphic sectional curvature
//! and Ricci curvature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::BiJet;
use crate::kernels::KernelEvaluator;
use crate::linalg::CMatrix;
use crate::scalar::{norm, re, Cplx, Real};

/// Ratio of the kernel tail bound to `S(z)` above which metric quantities are
/// refused.
pub const TAIL_GUARD: f64 = 1e-8;

/// Derivatives `∂^a ∂̄^b log S` at a base point through bidegree `(2, 2)`.
#[derive(Debug, Clone)]
pub struct LogKernelJet<T: Real> {
    pub base: Vec<Cplx<T>>,
    pub jet: BiJet<T>,
    pub tail_bound: T,
}

impl<T: Real> LogKernelJet<T> {
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// `∂^a ∂̄^b log S` for multi-indices given by layout positions.
    pub fn derivative(&self, a: usize, b: usize) -> Cplx<T> {
        self.jet.derivative(a, b)
    }

    /// `S(z, z)`.
    pub fn kernel_value(&self) -> T {
        self.jet.value().re.exp()
    }

    /// The `(1,1)` block `g_{αβ̄} = ∂_α ∂̄_β log S`.
    pub fn metric_block(&self) -> CMatrix<T> {
        let l = self.jet.layout();
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| self.jet.coeff(l.unit(i), l.unit(j)))
    }
}

/// Jet of `log S` at `z`, refusing points where the kernel tail bound exceeds
/// [`TAIL_GUARD`] times `S(z)`.
pub fn log_kernel_jet<T: Real>(kernel: &dyn KernelEvaluator<T>, z: &[Cplx<T>]) -> Result<LogKernelJet<T>> {
    log_kernel_jet_guarded(kernel, z, T::lit(TAIL_GUARD))
}

pub fn log_kernel_jet_guarded<T: Real>(kernel: &dyn KernelEvaluator<T>, z: &[Cplx<T>], guard: T) -> Result<LogKernelJet<T>> {
    let jet = kernel.log_jet(z)?;
    let s = jet.value().re.exp();
    let tail = kernel.tail_bound(z);
    if !(tail <= guard * s) {
        return Err(Error::Divergence {
            tail: tail.as_f64(),
            tolerance: (guard * s).as_f64(),
        });
    }
    Ok(LogKernelJet {
        base: z.to_vec(),
        jet,
        tail_bound: tail,
    })
}

/// Metric tensor `G = (g_{αβ̄})` with its inverse and determinant.
#[derive(Debug, Clone)]
pub struct MetricTensor<T: Real> {
    pub g: CMatrix<T>,
    pub inverse: CMatrix<T>,
    pub det: T,
    pub kernel_value: T,
}

impl<T: Real> MetricTensor<T> {
    pub fn dim(&self) -> usize {
        self.g.rows()
    }

    /// `τ(z, X) = sqrt(Σ g_{αβ̄} X_α conj(X_β))`.
    pub fn length(&self, x: &[Cplx<T>]) -> T {
        metric_length(self, x)
    }
}

pub fn metric_tensor<T: Real>(jet: &LogKernelJet<T>) -> Result<MetricTensor<T>> {
    let raw = jet.metric_block();
    // average with the adjoint to remove rounding asymmetry
    let g = raw.add(&raw.adjoint()).scaled(re(T::lit(0.5)));
    let eig = g.hermitian_eigen();
    let min = *eig.values.last().expect("n >= 1");
    if !(min > T::zero()) {
        return Err(Error::IndefiniteMetric {
            min_eigenvalue: min.as_f64(),
        });
    }
    let det = eig.values.iter().fold(T::one(), |acc, &v| acc * v);
    let inverse = g.inverse().ok_or(Error::IndefiniteMetric {
        min_eigenvalue: min.as_f64(),
    })?;
    Ok(MetricTensor {
        g,
        inverse,
        det,
        kernel_value: jet.kernel_value(),
    })
}

pub fn metric_length<T: Real>(tensor: &MetricTensor<T>, x: &[Cplx<T>]) -> T {
    quadratic_form(&tensor.g, x).max(T::zero()).sqrt()
}

/// `Re Σ A_{ij} X_i conj(X_j)`.
pub fn quadratic_form<T: Real>(a: &CMatrix<T>, x: &[Cplx<T>]) -> T {
    let n = x.len();
    let mut acc = re(T::zero());
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * x[i] * x[j].conj();
        }
    }
    acc.re
}

/// `β = det G / S^{(n+1)/n}`.
pub fn beta_invariant<T: Real>(tensor: &MetricTensor<T>) -> T {
    let n = T::from_usize_lossy(tensor.dim());
    tensor.det / tensor.kernel_value.powf((n + T::one()) / n)
}

/// `β` of the unit ball: `(c_n/(n-1)!)^{(n+1)/n} n^n π^{n+1}`.
pub fn beta_ball<T: Real>(n: usize, c_n: T) -> T {
    let nn = T::from_usize_lossy(n);
    let fact = crate::scalar::factorial::<T>(n - 1);
    (c_n / fact).powf((nn + T::one()) / nn) * nn.powi(n as i32) * T::PI().powi(n as i32 + 1)
}

/// Products `X^a` for the degree-two multi-indices of the jet layout.
fn quadratic_monomials<T: Real>(jet: &LogKernelJet<T>, x: &[Cplx<T>]) -> Vec<(usize, Cplx<T>)> {
    let l = jet.jet.layout();
    l.of_degree(2)
        .map(|k| {
            let a = l.multi_index(k);
            let mut v = re(T::one());
            for (i, &ai) in a.iter().enumerate() {
                v *= x[i].powu(ai as u32);
            }
            (k, v)
        })
        .collect()
}

/// Holomorphic sectional curvature
/// `R(z, X) = R_{ᾱβγδ̄} conj(X_α) X_β X_γ conj(X_δ) / τ^4` with
/// `R_{ᾱβγδ̄} = -∂_γ ∂̄_δ g_{βᾱ} + g^{νμ̄} ∂_γ g_{βμ̄} ∂̄_δ g_{νᾱ}`.
pub fn sectional_curvature<T: Real>(jet: &LogKernelJet<T>, x: &[Cplx<T>]) -> Result<T> {
    let n = jet.dim();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if !(norm(x) > T::zero()) {
        return Err(Error::ZeroVector);
    }
    let tensor = metric_tensor(jet)?;
    let l = jet.jet.layout().clone();
    let quad = quadratic_monomials(jet, x);
    let two = re(T::lit(2.0));
    // Jet coefficients carry 1/(a! b!); summing X^a over |a| = 2 with the
    // multinomial weight 2/a! turns each contraction into 2 Σ_a X^a coeff.
    let mut fourth = re(T::zero());
    for &(a, xa) in &quad {
        for &(b, xb) in &quad {
            fourth += jet.jet.coeff(a, b) * xa * xb.conj();
        }
    }
    let term1 = -(fourth * re(T::lit(4.0)));
    let v: Vec<Cplx<T>> = (0..n)
        .map(|m| quad.iter().map(|&(a, xa)| xa * jet.jet.coeff(a, l.unit(m))).sum::<Cplx<T>>() * two)
        .collect();
    let w: Vec<Cplx<T>> = (0..n)
        .map(|m| quad.iter().map(|&(b, xb)| xb.conj() * jet.jet.coeff(l.unit(m), b)).sum::<Cplx<T>>() * two)
        .collect();
    let ginv_w = tensor.inverse.mul_vec(&w);
    let term2: Cplx<T> = v.iter().zip(&ginv_w).map(|(a, b)| a * b).sum();
    let tau2 = quadratic_form(&tensor.g, x);
    Ok((term1 + term2).re / (tau2 * tau2))
}

/// Result of the finite-difference Ricci computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicciEstimate<T> {
    /// `Ric(z, X) = Σ Ric_{αβ̄} X_α conj(X_β) / τ^2`.
    pub value: T,
    /// `|Rich(h) - Rich(h/2)|` for the accepted step.
    pub residual: T,
    pub step: T,
    /// Set when the residual target was not reached before the minimum step.
    pub precision_warning: bool,
}

/// Default finite-difference step relative to the domain scale.
pub const RICCI_STEP: f64 = 1e-3;
/// Relative residual target for the Ricci step halving.
pub const RICCI_RESIDUAL: f64 = 1e-7;
/// Smallest step tried, relative to the initial one.
const RICCI_MIN_STEP_RATIO: f64 = 1e-2;

fn log_det_metric<T: Real>(kernel: &dyn KernelEvaluator<T>, z: &[Cplx<T>]) -> Result<T> {
    let jet = log_kernel_jet(kernel, z)?;
    Ok(metric_tensor(&jet)?.det.ln())
}

/// `-(1/4) Δ_ζ log det G(z + ζ u)` at `ζ = 0` from the five-point Laplacian.
fn ricci_numerator<T: Real>(kernel: &dyn KernelEvaluator<T>, z: &[Cplx<T>], u: &[Cplx<T>], f0: T, h: T) -> Result<T> {
    let mut acc = -T::lit(4.0) * f0;
    for dir in [re(T::one()), re(-T::one()), Cplx::new(T::zero(), T::one()), Cplx::new(T::zero(), -T::one())] {
        let p: Vec<Cplx<T>> = z.iter().zip(u).map(|(zi, ui)| zi + ui * dir.scale(h)).collect();
        acc += log_det_metric(kernel, &p)?;
    }
    Ok(-acc / (T::lit(4.0) * h * h))
}

/// Directions `e_a`, `e_a + e_b` and `e_a + i e_b` (`a < b`) whose second
/// derivatives determine a Hermitian matrix by polarization.
fn polarization_lines<T: Real>(n: usize) -> Vec<Vec<Cplx<T>>> {
    let unit = |a: usize| {
        let mut v = vec![re(T::zero()); n];
        v[a] = re(T::one());
        v
    };
    let mut lines: Vec<Vec<Cplx<T>>> = (0..n).map(unit).collect();
    for a in 0..n {
        for b in a + 1..n {
            let mut u = unit(a);
            u[b] = re(T::one());
            lines.push(u);
            let mut v = unit(a);
            v[b] = Cplx::new(T::zero(), T::one());
            lines.push(v);
        }
    }
    lines
}

/// Hermitian matrix from its values on [`polarization_lines`].
fn polarized_matrix<T: Real>(n: usize, values: &[T]) -> CMatrix<T> {
    let mut m = CMatrix::zeros(n, n);
    for a in 0..n {
        m[(a, a)] = re(values[a]);
    }
    let mut k = n;
    for a in 0..n {
        for b in a + 1..n {
            let diag = values[a] + values[b];
            let entry = Cplx::new((values[k] - diag) / T::lit(2.0), (values[k + 1] - diag) / T::lit(2.0));
            m[(a, b)] = entry;
            m[(b, a)] = entry.conj();
            k += 2;
        }
    }
    m
}

/// Ricci curvature `Ric_{αβ̄} = -∂_α ∂̄_β log det G` contracted with `X` and
/// normalized by `τ^2`. The matrix `Ric_{αβ̄}` comes from central differences
/// of `log det G` along fixed coordinate lines with Richardson extrapolation,
/// so the quotient depends on `X` only through its complex line. The step is
/// halved until successive extrapolations of the contraction agree to
/// [`RICCI_RESIDUAL`] relative.
pub fn ricci_curvature<T: Real>(kernel: &dyn KernelEvaluator<T>, z: &[Cplx<T>], x: &[Cplx<T>], h: T) -> Result<RicciEstimate<T>> {
    if !(norm(x) > T::zero()) {
        return Err(Error::ZeroVector);
    }
    let n = z.len();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    let jet = log_kernel_jet(kernel, z)?;
    let tensor = metric_tensor(&jet)?;
    let tau2 = quadratic_form(&tensor.g, x);
    let f0 = tensor.det.ln();
    let lines = polarization_lines::<T>(n);
    let numerators = |step: T| -> Result<Vec<T>> {
        lines.iter().map(|u| ricci_numerator(kernel, z, u, f0, step)).collect()
    };
    let rich = |l_h: &[T], l_h2: &[T]| {
        let v: Vec<T> = l_h
            .iter()
            .zip(l_h2)
            .map(|(&a, &b)| (T::lit(4.0) * b - a) / T::lit(3.0))
            .collect();
        quadratic_form(&polarized_matrix(n, &v), x)
    };
    let min_step = h * T::lit(RICCI_MIN_STEP_RATIO);
    let mut step = h;
    let mut l1 = numerators(step)?;
    let mut l2 = numerators(step * T::lit(0.5))?;
    let mut l4 = numerators(step * T::lit(0.25))?;
    loop {
        let r1 = rich(&l1, &l2);
        let r2 = rich(&l2, &l4);
        let residual = (r1 - r2).abs() / tau2;
        let value = r2 / tau2;
        let converged = residual <= T::lit(RICCI_RESIDUAL) * value.abs().max(T::one());
        if converged || step * T::lit(0.5) < min_step {
            return Ok(RicciEstimate {
                value,
                residual,
                step,
                precision_warning: !converged,
            });
        }
        step *= T::lit(0.5);
        l1 = l2;
        l2 = l4;
        l4 = numerators(step * T::lit(0.25))?;
    }
}

/// One row of metric output at a point and direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureReport<T> {
    pub tau: T,
    pub g: T,
    pub beta: T,
    pub r: T,
    pub ric: T,
    pub tail_bound: T,
}

pub fn curvature_report<T: Real>(kernel: &dyn KernelEvaluator<T>, z: &[Cplx<T>], x: &[Cplx<T>], h: T) -> Result<CurvatureReport<T>> {
    if !(norm(x) > T::zero()) {
        return Err(Error::ZeroVector);
    }
    let jet = log_kernel_jet(kernel, z)?;
    let tensor = metric_tensor(&jet)?;
    Ok(CurvatureReport {
        tau: metric_length(&tensor, x),
        g: tensor.det,
        beta: beta_invariant(&tensor),
        r: sectional_curvature(&jet, x)?,
        ric: ricci_curvature(kernel, z, x, h)?.value,
        tail_bound: jet.tail_bound,
    })
}
