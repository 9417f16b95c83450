//! Scaling of a boundary germ onto the Siegel model
//! `Ω_∞ = {2 Re z_n + |'z|^2 < 0}` and the Cayley map onto the ball.
//!
//! The composite is `S = T ∘ φ₃ ∘ φ₂ ∘ φ₁ ∘ C`, where `C` is a fixed chart
//! (translation and rotation at a reference boundary point), `φ₁` the affine
//! normalization at the nearest boundary point, `φ₂` the quadratic shear, `φ₃`
//! the Levi normalization and `T` the anisotropic dilation.

use serde::{Deserialize, Serialize};

use crate::domain::{orthogonal_complement, BoundaryFrame, DefiningFunctionJet, DomainSpec};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{add, norm, re, sub, Cplx, Real};

/// Affine chart `w = V (z - p⁰)` sending `p⁰` to the origin and the outward
/// normal at `p⁰` to `('0, 1)`.
#[derive(Debug, Clone)]
pub struct Chart<T: Real> {
    pub origin: Vec<Cplx<T>>,
    pub rotation: CMatrix<T>,
}

impl<T: Real> Chart<T> {
    /// Chart at a boundary point of `spec`.
    pub fn at(spec: &DomainSpec<T>, p0: &[Cplx<T>]) -> Result<Self> {
        let jet = spec.evaluate_jet(p0)?;
        let g = jet.grad_zbar();
        let gn = norm(&g);
        if !(gn > T::zero()) {
            return Err(Error::NonSmoothPoint);
        }
        let nu: Vec<Cplx<T>> = g.iter().map(|c| c.unscale(gn)).collect();
        let mut rows: Vec<Vec<Cplx<T>>> = orthogonal_complement(&nu)
            .into_iter()
            .map(|t| t.iter().map(|c| c.conj()).collect())
            .collect();
        rows.push(nu.iter().map(|c| c.conj()).collect());
        Ok(Self {
            origin: p0.to_vec(),
            rotation: CMatrix::from_rows(&rows),
        })
    }

    pub fn to_chart(&self, z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        self.rotation.mul_vec(&sub(z, &self.origin))
    }

    pub fn from_chart(&self, w: &[Cplx<T>]) -> Vec<Cplx<T>> {
        add(&self.rotation.adjoint().mul_vec(w), &self.origin)
    }

    /// Jet of the defining function in chart coordinates at the chart image
    /// of `z`.
    pub fn jet(&self, spec: &DomainSpec<T>, z: &[Cplx<T>]) -> Result<DefiningFunctionJet<T>> {
        Ok(spec.evaluate_jet(z)?.pullback_linear(&self.rotation.adjoint()))
    }
}

/// `φ₁(z) = P (z - p)`.
#[derive(Debug, Clone)]
pub struct AffineNormalization<T: Real> {
    pub base: Vec<Cplx<T>>,
    pub p: CMatrix<T>,
    pub p_inv: CMatrix<T>,
}

impl<T: Real> AffineNormalization<T> {
    pub fn apply(&self, z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        self.p.mul_vec(&sub(z, &self.base))
    }

    pub fn inverse(&self, w: &[Cplx<T>]) -> Vec<Cplx<T>> {
        add(&self.p_inv.mul_vec(w), &self.base)
    }
}

/// The matrix with diagonal `∂r/∂z̄_n`, last column `-∂r/∂z̄_i` and last row
/// `∂r/∂z_i`, which sends `∇_{z̄} r(p)` to `('0, |∇_{z̄} r(p)|^2)`.
pub fn build_p_matrix<T: Real>(jet: &DefiningFunctionJet<T>, base: &[Cplx<T>]) -> Result<AffineNormalization<T>> {
    let n = jet.dim();
    let gn = jet.grad_z[n - 1];
    let scale = norm(&jet.grad_z);
    if !(gn.norm() > T::lit(1e-12) * scale.max(T::one())) {
        return Err(Error::NormalComponentVanishes { value: gn.norm().as_f64() });
    }
    let p = CMatrix::from_fn(n, n, |i, j| {
        if i == n - 1 {
            jet.grad_z[j]
        } else if j == n - 1 {
            -jet.grad_z[i].conj()
        } else if i == j {
            gn.conj()
        } else {
            re(T::zero())
        }
    });
    let p_inv = p.inverse().ok_or(Error::NormalComponentVanishes { value: gn.norm().as_f64() })?;
    Ok(AffineNormalization {
        base: base.to_vec(),
        p,
        p_inv,
    })
}

/// Second-order coefficients after `φ₁`: `r∘φ₁⁻¹ = 2 Re(z_n + Σ a¹ z z) + Σ b¹ z z̄ + …`.
#[derive(Debug, Clone)]
pub struct SecondOrder<T: Real> {
    /// Complex symmetric, `½ ∂²(r∘φ₁⁻¹)/∂z_μ∂z_ν`.
    pub a1: CMatrix<T>,
    /// Hermitian, `∂²(r∘φ₁⁻¹)/∂z_μ∂z̄_ν`.
    pub b1: CMatrix<T>,
}

pub fn second_order_coeffs<T: Real>(jet: &DefiningFunctionJet<T>, affine: &AffineNormalization<T>) -> Result<SecondOrder<T>> {
    let pulled = jet.pullback_linear(&affine.p_inv);
    let n = jet.dim();
    let b1 = pulled.hess_mixed;
    let tangential = b1.leading_block(n - 1);
    let min = tangential
        .hermitian_eigen()
        .values
        .last()
        .copied()
        .unwrap_or(T::one());
    if !(min > T::zero()) {
        return Err(Error::DegenerateLeviBlock { min_eigenvalue: min.as_f64() });
    }
    Ok(SecondOrder {
        a1: pulled.hess_holo.scaled(re(T::lit(0.5))),
        b1,
    })
}

/// `φ₂(z) = ('z, z_n + Σ_{μ,ν<n} a¹_{μν} z_μ z_ν)`.
#[derive(Debug, Clone)]
pub struct ShearMap<T: Real> {
    pub a1: CMatrix<T>,
}

impl<T: Real> ShearMap<T> {
    fn quadratic(&self, z: &[Cplx<T>]) -> Cplx<T> {
        let m = z.len() - 1;
        let mut acc = re(T::zero());
        for i in 0..m {
            for j in 0..m {
                acc += self.a1[(i, j)] * z[i] * z[j];
            }
        }
        acc
    }

    pub fn apply(&self, z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut w = z.to_vec();
        let n = z.len();
        w[n - 1] += self.quadratic(z);
        w
    }

    pub fn inverse(&self, w: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut z = w.to_vec();
        let n = w.len();
        z[n - 1] -= self.quadratic(w);
        z
    }

    /// Unipotent lower-triangular Jacobian.
    pub fn jacobian(&self, z: &[Cplx<T>]) -> CMatrix<T> {
        let n = z.len();
        let mut j = CMatrix::identity(n);
        for g in 0..n - 1 {
            let mut acc = re(T::zero());
            for m in 0..n - 1 {
                acc += (self.a1[(m, g)] + self.a1[(g, m)]) * z[m];
            }
            j[(n - 1, g)] = acc;
        }
        j
    }
}

/// Levi normalization on the first `n - 1` coordinates: the Hermitian form
/// `M = (b¹_{νμ})` of the tangential block is diagonalized as `M = U Λ U*` and
/// `A = U Λ^{-1/2} U*` satisfies `A* M A = I`. The forward map is
/// `φ₃('z, z_n) = (A⁻¹ 'z, z_n)`. Rotating back by `U*` makes `A` independent
/// of the eigenvector choice inside degenerate eigenspaces.
#[derive(Debug, Clone)]
pub struct LeviLinearMap<T: Real> {
    pub unitary: CMatrix<T>,
    /// Descending.
    pub eigenvalues: Vec<T>,
    pub a: CMatrix<T>,
    pub a_inv: CMatrix<T>,
}

impl<T: Real> LeviLinearMap<T> {
    pub fn from_block(b1: &CMatrix<T>) -> Result<Self> {
        let m = b1.rows() - 1;
        let form = b1.leading_block(m).transpose();
        let eig = form.hermitian_eigen();
        if let Some(&min) = eig.values.last() {
            if !(min > T::zero()) {
                return Err(Error::DegenerateLeviBlock { min_eigenvalue: min.as_f64() });
            }
        }
        let u = &eig.vectors;
        let weighted = |f: &dyn Fn(T) -> T| {
            CMatrix::from_fn(m, m, |i, j| {
                (0..m)
                    .map(|k| u[(i, k)] * u[(j, k)].conj() * re(f(eig.values[k])))
                    .sum()
            })
        };
        let a = weighted(&|l: T| T::one() / l.sqrt());
        let a_inv = weighted(&|l: T| l.sqrt());
        Ok(Self {
            unitary: eig.vectors,
            eigenvalues: eig.values,
            a,
            a_inv,
        })
    }

    /// `A* M A`, the identity up to rounding.
    pub fn normalized_block(&self, b1: &CMatrix<T>) -> CMatrix<T> {
        let m = self.a.rows();
        let form = b1.leading_block(m).transpose();
        self.a.adjoint().mul(&form).mul(&self.a)
    }

    fn embed(&self, block: &CMatrix<T>) -> CMatrix<T> {
        let m = block.rows();
        CMatrix::from_fn(m + 1, m + 1, |i, j| {
            if i < m && j < m {
                block[(i, j)]
            } else if i == j {
                re(T::one())
            } else {
                re(T::zero())
            }
        })
    }

    /// Matrix of `φ₃`.
    pub fn forward_matrix(&self) -> CMatrix<T> {
        self.embed(&self.a_inv)
    }

    pub fn inverse_matrix(&self) -> CMatrix<T> {
        self.embed(&self.a)
    }
}

/// Composite scaling map at an interior anchor `ζ`.
#[derive(Debug, Clone)]
pub struct ScalingMap<T: Real> {
    pub chart: Chart<T>,
    pub frame: BoundaryFrame<T>,
    pub affine: AffineNormalization<T>,
    pub shear: ShearMap<T>,
    pub levi: LeviLinearMap<T>,
    pub second_order: SecondOrder<T>,
    pub eta: T,
    pub delta: T,
    /// Derivative of `φ₃ ∘ φ₂ ∘ φ₁` at the anchor, in chart coordinates.
    pub q: CMatrix<T>,
    pub anchor: Vec<Cplx<T>>,
}

/// Builds the scaling map at `ζ` with the chart taken at the nearest boundary
/// point of `ζ`.
pub fn build_scaling<T: Real>(spec: &DomainSpec<T>, zeta: &[Cplx<T>]) -> Result<ScalingMap<T>> {
    let frame = spec.nearest_boundary_point(zeta)?;
    let chart = Chart::at(spec, &frame.base)?;
    build_scaling_with_frame(spec, chart, frame)
}

/// Builds the scaling map at `ζ` in a fixed chart, as for a sequence of
/// anchors approaching the chart origin.
pub fn build_scaling_in_chart<T: Real>(spec: &DomainSpec<T>, chart: Chart<T>, zeta: &[Cplx<T>]) -> Result<ScalingMap<T>> {
    let frame = spec.nearest_boundary_point(zeta)?;
    build_scaling_with_frame(spec, chart, frame)
}

fn build_scaling_with_frame<T: Real>(spec: &DomainSpec<T>, chart: Chart<T>, frame: BoundaryFrame<T>) -> Result<ScalingMap<T>> {
    let n = spec.dim();
    let jet = chart.jet(spec, &frame.base)?;
    let p_chart = chart.to_chart(&frame.base);
    let affine = build_p_matrix(&jet, &p_chart)?;
    let second_order = second_order_coeffs(&jet, &affine)?;
    let shear = ShearMap {
        a1: second_order.a1.clone(),
    };
    let levi = LeviLinearMap::from_block(&second_order.b1)?;
    let eta = frame.delta * norm(&jet.grad_z);
    let anchor = frame.interior.clone();
    let w1 = affine.apply(&chart.to_chart(&anchor));
    let q = levi
        .forward_matrix()
        .mul(&shear.jacobian(&w1))
        .mul(&affine.p)
        .mul(&chart.rotation);
    debug_assert_eq!(q.rows(), n);
    Ok(ScalingMap {
        delta: frame.delta,
        chart,
        frame,
        affine,
        shear,
        levi,
        second_order,
        eta,
        q,
        anchor,
    })
}

impl<T: Real> ScalingMap<T> {
    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    /// Derivative of `ψ = φ₃ ∘ φ₂ ∘ φ₁ ∘ C` at the anchor.
    pub fn q(&self) -> &CMatrix<T> {
        &self.q
    }

    /// `‖Q - I‖` in operator norm.
    pub fn q_deviation(&self) -> T {
        self.q.sub(&CMatrix::identity(self.dim())).op_norm()
    }

    fn dilation(&self) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|i| if i + 1 == n { T::one() / self.eta } else { T::one() / self.eta.sqrt() })
            .collect()
    }

    /// `ψ(z)` without the dilation.
    pub fn normalize(&self, z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let w = self.affine.apply(&self.chart.to_chart(z));
        let w = self.shear.apply(&w);
        self.levi.forward_matrix().mul_vec(&w)
    }

    pub fn apply(&self, z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        self.normalize(z)
            .iter()
            .zip(self.dilation())
            .map(|(c, d)| c.scale(d))
            .collect()
    }

    pub fn inverse(&self, w: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let u: Vec<Cplx<T>> = w.iter().zip(self.dilation()).map(|(c, d)| c.unscale(d)).collect();
        let u = self.levi.inverse_matrix().mul_vec(&u);
        let u = self.shear.inverse(&u);
        self.chart.from_chart(&self.affine.inverse(&u))
    }

    /// `S'(z) = T ψ'(z)`.
    pub fn jacobian(&self, z: &[Cplx<T>]) -> CMatrix<T> {
        let w1 = self.affine.apply(&self.chart.to_chart(z));
        let psi = self
            .levi
            .forward_matrix()
            .mul(&self.shear.jacobian(&w1))
            .mul(&self.affine.p)
            .mul(&self.chart.rotation);
        let d: Vec<Cplx<T>> = self.dilation().into_iter().map(re).collect();
        CMatrix::diagonal(&d).mul(&psi)
    }

    /// `det T = η^{-(n+1)/2}`.
    pub fn dilation_det(&self) -> T {
        let n = T::from_usize_lossy(self.dim());
        self.eta.powf(-(n + T::one()) / T::lit(2.0))
    }
}

/// Model defining function `2 Re w_n + |'w|^2`.
pub fn siegel_defining<T: Real>(w: &[Cplx<T>]) -> T {
    let n = w.len();
    let tang: T = w[..n - 1].iter().map(|c| c.norm_sqr()).sum();
    T::lit(2.0) * w[n - 1].re + tang
}

/// Points of the polydisc `{|w_k| <= radius}` on a polar grid with `m` radii
/// and `m` angles per coordinate.
pub fn polydisc_grid<T: Real>(n: usize, radius: T, m: usize) -> Vec<Vec<Cplx<T>>> {
    let m = m.max(1);
    let mut per_coord = vec![re(T::zero())];
    for ri in 1..=m {
        let r = radius * T::from_usize_lossy(ri) / T::from_usize_lossy(m);
        for ai in 0..m {
            let th = T::TAU() * T::from_usize_lossy(ai) / T::from_usize_lossy(m);
            per_coord.push(Cplx::from_polar(r, th));
        }
    }
    let mut out: Vec<Vec<Cplx<T>>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                per_coord.iter().map(move |c| {
                    let mut v = prefix.clone();
                    v.push(*c);
                    v
                })
            })
            .collect();
    }
    out
}

/// `max |η⁻¹ r(S⁻¹ w) - (2 Re w_n + |'w|^2)|` over the grid.
pub fn scaled_defining_residual<T: Real>(spec: &DomainSpec<T>, map: &ScalingMap<T>, grid: &[Vec<Cplx<T>>]) -> Result<T> {
    let mut worst = T::zero();
    for w in grid {
        let z = map.inverse(w);
        let r = spec.value(&z).map_err(|_| Error::ChartExit)?;
        if !r.is_finite() {
            return Err(Error::ChartExit);
        }
        worst = worst.max((r / map.eta - siegel_defining(w)).abs());
    }
    Ok(worst)
}

/// The Cayley map `K('z, z_n) = (-√2 'z/(1 - z_n), -(1 + z_n)/(1 - z_n))`, an
/// involution sending `Ω_∞` onto the unit ball and `b* = ('0, -1)` to `0`.
#[derive(Debug, Clone, Copy)]
pub struct CayleyMap {
    pub n: usize,
}

/// Poles closer than this to `z_n = 1` are refused.
const CAYLEY_POLE: f64 = 1e-12;

pub fn cayley<T: Real>(z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
    let n = z.len();
    let d = re(T::one()) - z[n - 1];
    if d.norm() < T::lit(CAYLEY_POLE) {
        return Err(Error::Pole);
    }
    let s2 = T::lit(2.0).sqrt();
    let mut w: Vec<Cplx<T>> = z[..n - 1].iter().map(|c| -c.scale(s2) / d).collect();
    w.push(-(re(T::one()) + z[n - 1]) / d);
    Ok(w)
}

pub fn cayley_jacobian<T: Real>(z: &[Cplx<T>]) -> Result<CMatrix<T>> {
    let n = z.len();
    let d = re(T::one()) - z[n - 1];
    if d.norm() < T::lit(CAYLEY_POLE) {
        return Err(Error::Pole);
    }
    let s2 = re(T::lit(2.0).sqrt());
    Ok(CMatrix::from_fn(n, n, |i, j| {
        if i + 1 == n {
            if j + 1 == n {
                -re(T::lit(2.0)) / (d * d)
            } else {
                re(T::zero())
            }
        } else if j + 1 == n {
            -s2 * z[i] / (d * d)
        } else if i == j {
            -s2 / d
        } else {
            re(T::zero())
        }
    }))
}

/// Maps usable with [`pushforward_point`].
pub trait PointMap<T: Real> {
    fn push(&self, z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>>;
}

impl<T: Real> PointMap<T> for ScalingMap<T> {
    fn push(&self, z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        Ok(self.apply(z))
    }
}

impl<T: Real> PointMap<T> for CayleyMap {
    fn push(&self, z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: z.len() });
        }
        cayley(z)
    }
}

pub fn pushforward_point<T: Real>(map: &dyn PointMap<T>, z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
    map.push(z)
}

/// One row of a scaling sequence report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow<T> {
    pub j: usize,
    pub delta: T,
    pub eta: T,
    pub residual: T,
    pub q_deviation: T,
}

/// Grid resolution used for scaling residuals.
pub const RESIDUAL_GRID: usize = 4;

/// Scaling sequence approaching the boundary point `p⁰` on the last
/// coordinate axis. Anchor `j` sits at distance `δ_j` from the boundary point
/// reached by tilting the axis direction by the angle `δ_j` towards the first
/// coordinate, so the base points drift to `p⁰` along the boundary while the
/// anchors approach it.
pub fn scaling_sequence<T: Real>(spec: &DomainSpec<T>, deltas: &[(usize, T)]) -> Result<Vec<ScalingRow<T>>> {
    let n = spec.dim();
    let mut axis = vec![re(T::zero()); n];
    axis[n - 1] = re(T::one());
    let p0 = if spec.is_reinhardt() {
        spec.boundary_point_along(&axis)?
    } else {
        vec![re(T::zero()); n]
    };
    let chart = Chart::at(spec, &p0)?;
    let grid = polydisc_grid(n, T::one(), RESIDUAL_GRID);
    deltas
        .iter()
        .map(|&(j, delta)| {
            let p = if spec.is_reinhardt() {
                let mut dir = axis.clone();
                dir[0] = re(delta.sin());
                dir[n - 1] = re(delta.cos());
                spec.boundary_point_along(&dir)?
            } else {
                let mut p = p0.clone();
                p[0] = re(delta);
                p[n - 1] = re(-delta * delta / T::lit(2.0));
                p
            };
            let zeta = spec.frame_at(&p, delta)?.interior;
            let map = build_scaling_in_chart(spec, chart.clone(), &zeta)?;
            Ok(ScalingRow {
                j,
                delta: map.delta,
                eta: map.eta,
                residual: scaled_defining_residual(spec, &map, &grid)?,
                q_deviation: map.q_deviation(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cplx<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn cayley_is_an_involution_fixing_the_anchor() {
        let b = [c(0.0, 0.0), c(-1.0, 0.0)];
        assert!(norm(&cayley(&b).unwrap()) < 1e-16);
        let z = [c(0.2, 0.1), c(-0.4, 0.3)];
        let back = cayley(&cayley(&z).unwrap()).unwrap();
        assert!(back.iter().zip(&z).all(|(a, b)| (a - b).norm() < 1e-15));
        let j = cayley_jacobian(&b).unwrap();
        assert!((j[(0, 0)] + c(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
        assert!((j[(1, 1)] + c(0.5, 0.0)).norm() < 1e-15);
        assert!((j.det() - c(2f64.powf(-1.5), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cayley_pole() {
        assert!(matches!(cayley(&[c(0.0, 0.0), c(1.0, 0.0)]), Err(Error::Pole)));
    }

    #[test]
    fn p_matrix_is_identity_on_models() {
        let s = DomainSpec::<f64>::siegel(2).unwrap();
        let jet = s.evaluate_jet(&[c(0.0, 0.0); 2]).unwrap();
        let a = build_p_matrix(&jet, &[c(0.0, 0.0); 2]).unwrap();
        assert!(a.p.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
        let b = DomainSpec::<f64>::unit_ball(2).unwrap();
        let jet = b.evaluate_jet(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let a = build_p_matrix(&jet, &[c(0.0, 0.0); 2]).unwrap();
        assert!(a.p.max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn siegel_anchor_is_pure_dilation() {
        let s = DomainSpec::<f64>::siegel(2).unwrap();
        let t = 0.05;
        let map = build_scaling(&s, &[c(0.0, 0.0), c(-t, 0.0)]).unwrap();
        assert!((map.eta - t).abs() < 1e-14);
        let b = map.apply(&map.anchor);
        assert!((b[0]).norm() < 1e-14 && (b[1] - c(-1.0, 0.0)).norm() < 1e-13);
        let grid = polydisc_grid(2, 1.0, 3);
        assert!(scaled_defining_residual(&s, &map, &grid).unwrap() < 1e-12);
    }

    #[test]
    fn levi_normalization() {
        let b1 = CMatrix::from_rows(&[
            vec![c(2.0, 0.0), c(0.3, 0.4), c(0.0, 0.0)],
            vec![c(0.3, -0.4), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        let l = LeviLinearMap::from_block(&b1).unwrap();
        assert!(l.normalized_block(&b1).max_abs_diff(&CMatrix::identity(2)) < 1e-13);
        assert!(l.eigenvalues[0] >= l.eigenvalues[1]);
    }
}
