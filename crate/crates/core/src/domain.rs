//! Strictly pseudoconvex domains given by defining functions with exact jets,
//! and the boundary-distance geometry built on them.
//!
//! Supported domains:
//!
//! * the unit ball `|z|^2 - 1 < 0`;
//! * the bumped ball `|z|^2 - 1 + ε χ(|z_n|^2) < 0`, a complete Reinhardt
//!   domain contained in the ball that shares the boundary piece
//!   `{|z_n|^2 < 1/4}` with it;
//! * a complete Reinhardt domain in `C^2` given by a polynomial profile
//!   `ρ(|z_1|^2, |z_2|^2)`;
//! * the Siegel model `2 Re z_n + |'z|^2 < 0`.

use crate::error::{Error, Result};
use crate::linalg::{solve_real, CMatrix};
use crate::scalar::{cx, inner, norm, re, Cplx, Real};

/// Where the bump starts: `χ(s) = 0` for `s <= BUMP_START`.
pub const BUMP_START: f64 = 0.25;
/// Where the bump reaches its plateau.
pub const BUMP_END: f64 = 0.5;
/// Plateau height of `χ`.
pub const BUMP_HEIGHT: f64 = 0.5;

/// The bump profile `χ` and its first two derivatives.
///
/// `χ(s) = h S((s - 1/4) / (1/4))` with the quintic smoothstep
/// `S(u) = 10u^3 - 15u^4 + 6u^5` on `[0, 1]`, clamped to `0` below and `h`
/// above. It is `C^2`, nondecreasing, vanishes for `s <= 1/4` and is positive
/// for `s > 1/4`.
pub fn bump<T: Real>(s: T) -> (T, T, T) {
    let start = T::lit(BUMP_START);
    let width = T::lit(BUMP_END - BUMP_START);
    let h = T::lit(BUMP_HEIGHT);
    let u = (s - start) / width;
    if u <= T::zero() {
        return (T::zero(), T::zero(), T::zero());
    }
    if u >= T::one() {
        return (h, T::zero(), T::zero());
    }
    let u2 = u * u;
    let u3 = u2 * u;
    let v = u3 * (T::lit(10.0) + u * (T::lit(-15.0) + T::lit(6.0) * u));
    let d1 = T::lit(30.0) * u2 * (u - T::one()) * (u - T::one()) / width;
    let d2 = T::lit(60.0) * u * (u - T::one()) * (T::lit(2.0) * u - T::one()) / (width * width);
    (h * v, h * d1, h * d2)
}

/// Polynomial profile `ρ(s_1, s_2) = Σ c_ab s_1^a s_2^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialProfile<T: Real> {
    pub terms: Vec<(usize, usize, T)>,
}

impl<T: Real> PolynomialProfile<T> {
    pub fn new(terms: Vec<(usize, usize, T)>) -> Self {
        Self { terms }
    }

    fn jet(&self, s1: T, s2: T) -> ProfileJet<T> {
        let pw = |x: T, k: usize| if k == 0 { T::one() } else { x.powi(k as i32) };
        let k = |a: usize| T::from_usize_lossy(a);
        let mut j = ProfileJet::zero(2);
        for &(a, b, c) in &self.terms {
            j.value += c * pw(s1, a) * pw(s2, b);
            if a >= 1 {
                j.grad[0] += c * k(a) * pw(s1, a - 1) * pw(s2, b);
            }
            if b >= 1 {
                j.grad[1] += c * k(b) * pw(s1, a) * pw(s2, b - 1);
            }
            if a >= 2 {
                j.hess[0][0] += c * k(a) * k(a - 1) * pw(s1, a - 2) * pw(s2, b);
            }
            if b >= 2 {
                j.hess[1][1] += c * k(b) * k(b - 1) * pw(s1, a) * pw(s2, b - 2);
            }
            if a >= 1 && b >= 1 {
                let v = c * k(a) * k(b) * pw(s1, a - 1) * pw(s2, b - 1);
                j.hess[0][1] += v;
                j.hess[1][0] += v;
            }
        }
        j
    }
}

/// Value, gradient and Hessian of a Reinhardt profile in the variables
/// `s_i = |z_i|^2`.
#[derive(Debug, Clone)]
pub struct ProfileJet<T: Real> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Vec<Vec<T>>,
}

impl<T: Real> ProfileJet<T> {
    fn zero(n: usize) -> Self {
        Self {
            value: T::zero(),
            grad: vec![T::zero(); n],
            hess: vec![vec![T::zero(); n]; n],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind<T: Real> {
    UnitBall,
    BumpedBall { epsilon: T },
    ReinhardtProfile(PolynomialProfile<T>),
    SiegelModel,
}

/// A strictly pseudoconvex domain `{r < 0}` in `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec<T: Real> {
    kind: DomainKind<T>,
    n: usize,
    diameter: Option<T>,
}

/// Value, complex gradient and both complex Hessians of a defining function.
#[derive(Debug, Clone)]
pub struct DefiningFunctionJet<T: Real> {
    pub value: T,
    /// `∂r/∂z_i`.
    pub grad_z: Vec<Cplx<T>>,
    /// `∂²r/∂z_i∂z_j`.
    pub hess_holo: CMatrix<T>,
    /// `∂²r/∂z_i∂z̄_j`.
    pub hess_mixed: CMatrix<T>,
}

impl<T: Real> DefiningFunctionJet<T> {
    pub fn dim(&self) -> usize {
        self.grad_z.len()
    }

    /// `∂r/∂z̄_i`, the entrywise conjugate of `grad_z`.
    pub fn grad_zbar(&self) -> Vec<Cplx<T>> {
        self.grad_z.iter().map(|c| c.conj()).collect()
    }

    /// Euclidean norm of the full real gradient, `2 |∂r/∂z|`.
    pub fn real_gradient_norm(&self) -> T {
        T::lit(2.0) * norm(&self.grad_z)
    }

    /// Real gradient in the ordering `(x_1..x_n, y_1..y_n)`.
    pub fn real_gradient(&self) -> Vec<T> {
        let two = T::lit(2.0);
        let mut g: Vec<T> = self.grad_z.iter().map(|c| two * c.re).collect();
        g.extend(self.grad_z.iter().map(|c| -two * c.im));
        g
    }

    /// Real Hessian in the ordering `(x_1..x_n, y_1..y_n)`.
    pub fn real_hessian(&self) -> Vec<Vec<T>> {
        let n = self.dim();
        let two = T::lit(2.0);
        let mut h = vec![vec![T::zero(); 2 * n]; 2 * n];
        for j in 0..n {
            for k in 0..n {
                let holo = self.hess_holo[(j, k)];
                let mixed = self.hess_mixed[(j, k)];
                h[j][k] = two * (holo.re + mixed.re);
                h[n + j][n + k] = two * (mixed.re - holo.re);
                h[j][n + k] = two * (mixed.im - holo.im);
            }
        }
        for j in 0..n {
            for k in 0..n {
                h[n + k][j] = h[j][n + k];
            }
        }
        h
    }

    /// Levi form `Σ r_{ij̄} X_i conj(X_j)`.
    pub fn levi_form(&self, x: &[Cplx<T>]) -> T {
        levi_form(self, x)
    }

    /// Jet of `c r`.
    pub fn scaled(&self, c: T) -> Self {
        Self {
            value: self.value * c,
            grad_z: self.grad_z.iter().map(|g| g.scale(c)).collect(),
            hess_holo: self.hess_holo.scaled(re(c)),
            hess_mixed: self.hess_mixed.scaled(re(c)),
        }
    }

    /// Jet of `w -> r(base + A w)` at `w = A^{-1}(z - base)`.
    pub fn pullback_linear(&self, a: &CMatrix<T>) -> Self {
        let grad = a.transpose().mul_vec(&self.grad_z);
        Self {
            value: self.value,
            grad_z: grad,
            hess_holo: a.transpose().mul(&self.hess_holo).mul(a),
            hess_mixed: a.transpose().mul(&self.hess_mixed).mul(&a.conj()),
        }
    }

    /// Product rule: jet of `h r` from the jets of `h` and `r`.
    pub fn times(&self, h: &DefiningFunctionJet<T>) -> Self {
        let n = self.dim();
        let r = self;
        let rv = re(r.value);
        let hv = re(h.value);
        let grad_z = (0..n).map(|i| h.grad_z[i] * rv + hv * r.grad_z[i]).collect();
        let hess_holo = CMatrix::from_fn(n, n, |i, j| {
            h.hess_holo[(i, j)] * rv
                + h.grad_z[i] * r.grad_z[j]
                + h.grad_z[j] * r.grad_z[i]
                + hv * r.hess_holo[(i, j)]
        });
        let hess_mixed = CMatrix::from_fn(n, n, |i, j| {
            h.hess_mixed[(i, j)] * rv
                + h.grad_z[i] * r.grad_z[j].conj()
                + h.grad_z[j].conj() * r.grad_z[i]
                + hv * r.hess_mixed[(i, j)]
        });
        Self {
            value: h.value * r.value,
            grad_z,
            hess_holo,
            hess_mixed,
        }
    }
}

/// Levi form `Σ r_{ij̄} X_i conj(X_j)` of a jet.
pub fn levi_form<T: Real>(jet: &DefiningFunctionJet<T>, x: &[Cplx<T>]) -> T {
    let n = jet.dim();
    let mut acc = Cplx::<T>::new(T::zero(), T::zero());
    for i in 0..n {
        for j in 0..n {
            acc += jet.hess_mixed[(i, j)] * x[i] * x[j].conj();
        }
    }
    acc.re
}

/// Orthonormal basis of the orthogonal complement of `v` in `C^n`.
pub fn orthogonal_complement<T: Real>(v: &[Cplx<T>]) -> Vec<Vec<Cplx<T>>> {
    let n = v.len();
    let vn = norm(v);
    let unit: Vec<Cplx<T>> = v.iter().map(|c| c.unscale(vn)).collect();
    let mut basis: Vec<Vec<Cplx<T>>> = vec![unit];
    for k in 0..n {
        let mut e = vec![Cplx::new(T::zero(), T::zero()); n];
        e[k] = re(T::one());
        for b in &basis {
            let c = inner(&e, b);
            for i in 0..n {
                e[i] -= c * b[i];
            }
        }
        let en = norm(&e);
        if en > T::lit(1e-6) {
            basis.push(e.iter().map(|c| c.unscale(en)).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Levi form restricted to the complex tangent space `{Σ r_i X_i = 0}`,
/// expressed in an orthonormal basis of that space.
pub fn tangential_levi_matrix<T: Real>(jet: &DefiningFunctionJet<T>) -> CMatrix<T> {
    let basis = orthogonal_complement(&jet.grad_zbar());
    let m = basis.len();
    CMatrix::from_fn(m, m, |k, l| {
        let n = jet.dim();
        let mut acc = Cplx::new(T::zero(), T::zero());
        for i in 0..n {
            for j in 0..n {
                acc += jet.hess_mixed[(i, j)] * basis[k][i] * basis[l][j].conj();
            }
        }
        acc
    })
}

/// Nearest boundary point of an interior point, with the unit outward normal.
#[derive(Debug, Clone)]
pub struct BoundaryFrame<T: Real> {
    pub base: Vec<Cplx<T>>,
    /// `∇_{z̄} r(p) / |∇_{z̄} r(p)|`.
    pub normal: Vec<Cplx<T>>,
    pub delta: T,
    /// `p - δ ν`.
    pub interior: Vec<Cplx<T>>,
}

impl<T: Real> BoundaryFrame<T> {
    /// Splits `X` into the components tangent (`X_H`) and normal (`X_N`) to the
    /// boundary at the base point.
    pub fn split(&self, x: &[Cplx<T>]) -> (Vec<Cplx<T>>, Vec<Cplx<T>>) {
        split_tangential_normal(self, x)
    }
}

/// `X = X_H + X_N` with `X_N = <X, ν> ν`.
pub fn split_tangential_normal<T: Real>(
    frame: &BoundaryFrame<T>,
    x: &[Cplx<T>],
) -> (Vec<Cplx<T>>, Vec<Cplx<T>>) {
    let c = inner(x, &frame.normal);
    let xn: Vec<Cplx<T>> = frame.normal.iter().map(|v| c * v).collect();
    let xh = x.iter().zip(&xn).map(|(a, b)| a - b).collect();
    (xh, xn)
}

const NEWTON_MAX_ITER: usize = 50;

impl<T: Real> DomainSpec<T> {
    pub fn unit_ball(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            kind: DomainKind::UnitBall,
            n,
            diameter: Some(T::lit(2.0)),
        })
    }

    pub fn siegel(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            kind: DomainKind::SiegelModel,
            n,
            diameter: None,
        })
    }

    /// Bumped ball; strict pseudoconvexity is certified on a boundary grid.
    pub fn bumped_ball(n: usize, epsilon: T) -> Result<Self> {
        check_dim(n)?;
        if !(epsilon > T::zero()) || !epsilon.is_finite() {
            return Err(Error::InvalidSpec(format!("bumped-ball needs epsilon > 0, got {epsilon}")));
        }
        let spec = Self::bumped_ball_unchecked(n, epsilon);
        let levi_min = spec.levi_min_check(&spec.boundary_grid(CERTIFY_GRID)?)?;
        if !(levi_min > T::zero()) {
            return Err(Error::NotPseudoconvex {
                levi_min: levi_min.as_f64(),
            });
        }
        Ok(spec)
    }

    pub(crate) fn bumped_ball_unchecked(n: usize, epsilon: T) -> Self {
        Self {
            kind: DomainKind::BumpedBall { epsilon },
            n,
            diameter: Some(T::lit(2.0)),
        }
    }

    /// Complete Reinhardt domain in `C^2` given by a polynomial profile.
    pub fn reinhardt_profile(profile: PolynomialProfile<T>) -> Result<Self> {
        let mut spec = Self {
            kind: DomainKind::ReinhardtProfile(profile),
            n: 2,
            diameter: None,
        };
        let origin = spec.profile_jet(&[T::zero(), T::zero()]).expect("reinhardt");
        if !(origin.value < T::zero()) {
            return Err(Error::InvalidSpec("profile must be negative at the origin".into()));
        }
        let grid = spec.boundary_grid(CERTIFY_GRID)?;
        let mut rmax = T::zero();
        for p in &grid {
            rmax = rmax.max(norm(p));
            // monotonicity on the boundary and along the ray to it
            for k in 0..=4 {
                let t = T::from_usize_lossy(k) / T::lit(4.0);
                let s: Vec<T> = p.iter().map(|c| c.norm_sqr() * t * t).collect();
                let j = spec.profile_jet(&s).expect("reinhardt");
                if j.grad.iter().any(|g| !(*g > T::zero())) {
                    return Err(Error::InvalidSpec(
                        "profile must be strictly increasing in each |z_i|^2".into(),
                    ));
                }
            }
        }
        spec.diameter = Some(T::lit(2.0) * rmax);
        let levi_min = spec.levi_min_check(&grid)?;
        if !(levi_min > T::zero()) {
            return Err(Error::NotPseudoconvex {
                levi_min: levi_min.as_f64(),
            });
        }
        Ok(spec)
    }

    pub fn kind(&self) -> &DomainKind<T> {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> Option<T> {
        match self.kind {
            DomainKind::BumpedBall { epsilon } => Some(epsilon),
            _ => None,
        }
    }

    /// Short identifier used in reports.
    pub fn name(&self) -> &'static str {
        match self.kind {
            DomainKind::UnitBall => "unit-ball",
            DomainKind::BumpedBall { .. } => "bumped-ball",
            DomainKind::ReinhardtProfile(_) => "reinhardt-profile",
            DomainKind::SiegelModel => "siegel-model",
        }
    }

    pub fn is_reinhardt(&self) -> bool {
        !matches!(self.kind, DomainKind::SiegelModel)
    }

    pub fn is_ball(&self) -> bool {
        matches!(self.kind, DomainKind::UnitBall)
    }

    /// Radius of the tube around the boundary inside which nearest-point
    /// projection is attempted: `0.2 * diameter` for bounded domains and `1/2`
    /// (half the focal radius at the vertex) for the Siegel model.
    pub fn tubular_radius(&self) -> T {
        if let DomainKind::UnitBall = self.kind {
            // every point but the centre has a unique nearest boundary point
            return T::one();
        }
        match self.diameter {
            Some(d) => T::lit(0.2) * d,
            None => T::lit(0.5),
        }
    }

    /// Profile `ρ(s)` with `s_i = |z_i|^2`, for Reinhardt kinds.
    pub fn profile_jet(&self, s: &[T]) -> Option<ProfileJet<T>> {
        let n = self.n;
        match &self.kind {
            DomainKind::UnitBall => {
                let mut j = ProfileJet::zero(n);
                j.value = s.iter().copied().sum::<T>() - T::one();
                j.grad = vec![T::one(); n];
                Some(j)
            }
            DomainKind::BumpedBall { epsilon } => {
                let mut j = ProfileJet::zero(n);
                let (c0, c1, c2) = bump(s[n - 1]);
                j.value = s.iter().copied().sum::<T>() - T::one() + *epsilon * c0;
                j.grad = vec![T::one(); n];
                j.grad[n - 1] += *epsilon * c1;
                j.hess[n - 1][n - 1] = *epsilon * c2;
                Some(j)
            }
            DomainKind::ReinhardtProfile(p) => Some(p.jet(s[0], s[1])),
            DomainKind::SiegelModel => None,
        }
    }

    fn check_point(&self, z: &[Cplx<T>]) -> Result<()> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::PointOutsideChart);
        }
        Ok(())
    }

    /// Value of the defining function.
    pub fn value(&self, z: &[Cplx<T>]) -> Result<T> {
        self.check_point(z)?;
        Ok(match &self.kind {
            DomainKind::SiegelModel => siegel_value(z),
            _ => {
                let s: Vec<T> = z.iter().map(|c| c.norm_sqr()).collect();
                self.profile_jet(&s).expect("reinhardt").value
            }
        })
    }

    /// Exact value, gradient and Hessians of the defining function at `z`.
    pub fn evaluate_jet(&self, z: &[Cplx<T>]) -> Result<DefiningFunctionJet<T>> {
        self.check_point(z)?;
        let n = self.n;
        if let DomainKind::SiegelModel = self.kind {
            let mut grad_z: Vec<Cplx<T>> = z.iter().map(|c| c.conj()).collect();
            grad_z[n - 1] = re(T::one());
            let hess_mixed = CMatrix::from_fn(n, n, |i, j| {
                if i == j && i < n - 1 {
                    re(T::one())
                } else {
                    re(T::zero())
                }
            });
            return Ok(DefiningFunctionJet {
                value: siegel_value(z),
                grad_z,
                hess_holo: CMatrix::zeros(n, n),
                hess_mixed,
            });
        }
        let s: Vec<T> = z.iter().map(|c| c.norm_sqr()).collect();
        let pj = self.profile_jet(&s).expect("reinhardt");
        let zb: Vec<Cplx<T>> = z.iter().map(|c| c.conj()).collect();
        let grad_z = (0..n).map(|i| zb[i].scale(pj.grad[i])).collect();
        let hess_holo = CMatrix::from_fn(n, n, |i, j| (zb[i] * zb[j]).scale(pj.hess[i][j]));
        let hess_mixed = CMatrix::from_fn(n, n, |i, j| {
            let mut v = (zb[i] * z[j]).scale(pj.hess[i][j]);
            if i == j {
                v += re(pj.grad[i]);
            }
            v
        });
        Ok(DefiningFunctionJet {
            value: pj.value,
            grad_z,
            hess_holo,
            hess_mixed,
        })
    }

    /// Boundary point on the ray through `direction` (Reinhardt kinds only).
    pub fn boundary_point_along(&self, direction: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        self.check_point(direction)?;
        if !self.is_reinhardt() {
            return Err(Error::UnsupportedSpec("radial boundary search needs a Reinhardt domain".into()));
        }
        let dn = norm(direction);
        if !(dn > T::zero()) {
            return Err(Error::ZeroVector);
        }
        let w: Vec<T> = direction.iter().map(|c| c.norm_sqr() / (dn * dn)).collect();
        let tau = self.radial_root(&w)?;
        let radius = tau.sqrt() / dn;
        Ok(direction.iter().map(|c| c.scale(radius)).collect())
    }

    /// Solves `ρ(τ w) = 0` for `τ > 0` where `Σ w_i = 1`.
    pub fn radial_root(&self, w: &[T]) -> Result<T> {
        let g = |tau: T| -> (T, T) {
            let s: Vec<T> = w.iter().map(|&wi| wi * tau).collect();
            let j = self.profile_jet(&s).expect("reinhardt");
            let d: T = j.grad.iter().zip(w).map(|(a, b)| *a * *b).sum();
            (j.value, d)
        };
        let mut lo = T::zero();
        let mut hi = T::one();
        let mut guard = 0;
        while g(hi).0 < T::zero() {
            lo = hi;
            hi *= T::lit(2.0);
            guard += 1;
            if guard > 60 {
                return Err(Error::RootFindingFailure);
            }
        }
        if !(g(lo).0 < T::zero()) {
            return Err(Error::RootFindingFailure);
        }
        let mut tau = (lo + hi) * T::lit(0.5);
        for _ in 0..200 {
            let (v, d) = g(tau);
            if v == T::zero() {
                return Ok(tau);
            }
            if v < T::zero() {
                lo = tau;
            } else {
                hi = tau;
            }
            let newton = tau - v / d;
            let next = if d > T::zero() && newton > lo && newton < hi {
                newton
            } else {
                (lo + hi) * T::lit(0.5)
            };
            let moved = (next - tau).abs();
            tau = next;
            if moved <= T::epsilon() * T::lit(4.0) * tau || hi - lo <= T::epsilon() * T::lit(4.0) * hi {
                return Ok(tau);
            }
        }
        Err(Error::RootFindingFailure)
    }

    /// Deterministic sample of boundary points.
    ///
    /// For Reinhardt domains the Levi form is invariant under the torus
    /// action, so real points suffice: directions are spread over the positive
    /// orthant of the sphere. For the Siegel model the sample covers
    /// `{r = 0, |'z| <= 1, |Im z_n| <= 1}`.
    pub fn boundary_grid(&self, m: usize) -> Result<Vec<Vec<Cplx<T>>>> {
        let m = m.max(2);
        let n = self.n;
        if let DomainKind::SiegelModel = self.kind {
            let mut out = Vec::new();
            for k in 0..m {
                let rad = T::from_usize_lossy(k) / T::from_usize_lossy(m - 1);
                let ang = T::lit(2.0) * T::PI() * T::from_usize_lossy(k) / T::from_usize_lossy(m);
                let imag = T::lit(2.0) * T::from_usize_lossy(k % 7) / T::lit(6.0) - T::one();
                let mut z = vec![re(T::zero()); n];
                let mut s = T::zero();
                for (i, zi) in z.iter_mut().enumerate().take(n - 1) {
                    let phase = ang * T::from_usize_lossy(i + 1);
                    *zi = cx(phase.cos(), phase.sin()).scale(rad / T::from_usize_lossy(n - 1).sqrt());
                    s += zi.norm_sqr();
                }
                z[n - 1] = cx(-s * T::lit(0.5), imag);
                out.push(z);
            }
            return Ok(out);
        }
        let mut dirs: Vec<Vec<T>> = Vec::new();
        if n == 2 {
            for k in 0..m {
                let t = T::FRAC_PI_2() * T::from_usize_lossy(k) / T::from_usize_lossy(m - 1);
                dirs.push(vec![t.cos(), t.sin()]);
            }
        } else {
            // compositions of a fixed level spread over the simplex of |u_i|^2
            let level = ((m as f64).powf(1.0 / (n as f64 - 1.0)).ceil() as usize).max(2);
            let mut stack = vec![(Vec::<usize>::new(), level)];
            while let Some((prefix, rest)) = stack.pop() {
                if prefix.len() == n - 1 {
                    let mut w: Vec<T> = prefix.iter().map(|&k| T::from_usize_lossy(k)).collect();
                    w.push(T::from_usize_lossy(rest));
                    let total = T::from_usize_lossy(level);
                    dirs.push(w.iter().map(|&x| (x / total).sqrt()).collect());
                    continue;
                }
                for k in 0..=rest {
                    let mut p = prefix.clone();
                    p.push(k);
                    stack.push((p, rest - k));
                }
            }
        }
        dirs.iter()
            .map(|u| {
                let d: Vec<Cplx<T>> = u.iter().map(|&x| re(x)).collect();
                self.boundary_point_along(&d)
            })
            .collect()
    }

    /// Minimum over the grid of the smallest eigenvalue of the Levi form
    /// restricted to the complex tangent space (orthonormal basis). A positive
    /// value certifies strict pseudoconvexity on the sample.
    pub fn levi_min_check(&self, grid: &[Vec<Cplx<T>>]) -> Result<T> {
        if grid.is_empty() {
            return Err(Error::InvalidSpec("empty boundary grid".into()));
        }
        let mut worst = T::infinity();
        for p in grid {
            let jet = self.evaluate_jet(p)?;
            let gn = norm(&jet.grad_z);
            if !(gn > T::lit(1e-12)) || !gn.is_finite() {
                return Err(Error::NonSmoothPoint);
            }
            let levi = tangential_levi_matrix(&jet);
            let eig = levi.hermitian_eigen();
            let smallest = *eig.values.last().expect("n >= 2");
            worst = worst.min(smallest);
        }
        Ok(worst)
    }

    /// Nearest boundary point of an interior point by damped Newton on the
    /// Lagrange system `r(p) = 0`, `p - z = λ ∇r(p)`.
    pub fn nearest_boundary_point(&self, z: &[Cplx<T>]) -> Result<BoundaryFrame<T>> {
        self.check_point(z)?;
        let rz = self.value(z)?;
        if !(rz < T::zero()) {
            return Err(Error::NotInterior { value: rz.as_f64() });
        }
        let n = self.n;
        let radius = self.tubular_radius();
        let start = match self.kind {
            DomainKind::SiegelModel => {
                let mut p = z.to_vec();
                p[n - 1] -= re(rz * T::lit(0.5));
                p
            }
            _ => {
                if !(norm(z) > T::lit(1e-12)) {
                    return Err(Error::AmbiguousProjection {
                        delta: f64::NAN,
                        radius: radius.as_f64(),
                    });
                }
                let p = self.boundary_point_along(z)?;
                let d = norm(&crate::scalar::sub(&p, z));
                if d >= radius * T::lit(1.5) {
                    return Err(Error::AmbiguousProjection {
                        delta: d.as_f64(),
                        radius: radius.as_f64(),
                    });
                }
                p
            }
        };
        let zr: Vec<T> = z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect();
        let to_complex = |x: &[T]| -> Vec<Cplx<T>> { (0..n).map(|k| cx(x[k], x[n + k])).collect() };
        let mut x: Vec<T> = start.iter().map(|c| c.re).chain(start.iter().map(|c| c.im)).collect();
        let jet0 = self.evaluate_jet(&start)?;
        let g0 = jet0.real_gradient();
        let gg: T = g0.iter().map(|v| *v * *v).sum();
        let mut lambda: T = x.iter().zip(&zr).zip(&g0).map(|((a, b), g)| (*a - *b) * *g).sum::<T>() / gg;

        let residual = |x: &[T], lambda: T| -> Result<(Vec<T>, DefiningFunctionJet<T>)> {
            let jet = self.evaluate_jet(&to_complex(x))?;
            let g = jet.real_gradient();
            let mut f: Vec<T> = (0..2 * n).map(|k| x[k] - zr[k] - lambda * g[k]).collect();
            f.push(jet.value);
            Ok((f, jet))
        };
        let inf_norm = |f: &[T]| f.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tol = T::lit(1e-12).max(T::epsilon() * T::lit(100.0));
        let (mut f, mut jet) = residual(&x, lambda)?;
        let mut converged = false;
        let mut iterations = 0;
        while iterations < NEWTON_MAX_ITER {
            iterations += 1;
            let g = jet.real_gradient();
            let h = jet.real_hessian();
            let dim = 2 * n + 1;
            let mut a = vec![vec![T::zero(); dim]; dim];
            for i in 0..2 * n {
                for j in 0..2 * n {
                    a[i][j] = -lambda * h[i][j];
                }
                a[i][i] += T::one();
                a[i][2 * n] = -g[i];
                a[2 * n][i] = g[i];
            }
            let rhs: Vec<T> = f.iter().map(|v| -*v).collect();
            let step = solve_real(&a, &rhs).ok_or(Error::NoConvergence {
                iterations,
                residual: inf_norm(&f).as_f64(),
            })?;
            let f_norm = inf_norm(&f);
            let mut alpha = T::one();
            let mut accepted = None;
            for _ in 0..30 {
                let xn: Vec<T> = (0..2 * n).map(|k| x[k] + alpha * step[k]).collect();
                let ln = lambda + alpha * step[2 * n];
                if let Ok((fnew, jnew)) = residual(&xn, ln) {
                    if inf_norm(&fnew) < f_norm || inf_norm(&fnew) <= tol {
                        accepted = Some((xn, ln, fnew, jnew));
                        break;
                    }
                }
                alpha *= T::lit(0.5);
            }
            let Some((xn, ln, fnew, jnew)) = accepted else {
                break;
            };
            let step_size = (0..2 * n).fold(T::zero(), |m, k| m.max((xn[k] - x[k]).abs()));
            x = xn;
            lambda = ln;
            f = fnew;
            jet = jnew;
            if inf_norm(&f) <= tol && step_size <= T::lit(1e-10).max(tol) {
                converged = true;
                break;
            }
        }
        if !converged && inf_norm(&f) > tol {
            return Err(Error::NoConvergence {
                iterations,
                residual: inf_norm(&f).as_f64(),
            });
        }
        let p = to_complex(&x);
        let diff = crate::scalar::sub(&p, z);
        let delta = norm(&diff);
        if delta >= radius {
            return Err(Error::AmbiguousProjection {
                delta: delta.as_f64(),
                radius: radius.as_f64(),
            });
        }
        if !(lambda > T::zero()) {
            return Err(Error::AmbiguousProjection {
                delta: delta.as_f64(),
                radius: radius.as_f64(),
            });
        }
        // second-order condition: I - λ Hess r positive on the real tangent space
        let g = jet.real_gradient();
        let gn2: T = g.iter().map(|v| *v * *v).sum();
        let h = jet.real_hessian();
        let dim = 2 * n;
        let proj = |i: usize, j: usize| {
            let id = if i == j { T::one() } else { T::zero() };
            id - g[i] * g[j] / gn2
        };
        let a = CMatrix::from_fn(dim, dim, |i, j| {
            let mut acc = T::zero();
            for k in 0..dim {
                for l in 0..dim {
                    let m = if k == l { T::one() } else { T::zero() } - lambda * h[k][l];
                    acc += proj(i, k) * m * proj(l, j);
                }
            }
            re(acc + g[i] * g[j] / gn2)
        });
        let min_eig = *a.hermitian_eigen().values.last().expect("dim > 0");
        if !(min_eig > T::zero()) {
            return Err(Error::AmbiguousProjection {
                delta: delta.as_f64(),
                radius: radius.as_f64(),
            });
        }
        Ok(self.frame_at_with_jet(p, &jet, delta))
    }

    /// Frame with base point `p` on the boundary and interior point `p - δν`.
    pub fn frame_at(&self, p: &[Cplx<T>], delta: T) -> Result<BoundaryFrame<T>> {
        let jet = self.evaluate_jet(p)?;
        if !(norm(&jet.grad_z) > T::zero()) {
            return Err(Error::NonSmoothPoint);
        }
        Ok(self.frame_at_with_jet(p.to_vec(), &jet, delta))
    }

    fn frame_at_with_jet(&self, p: Vec<Cplx<T>>, jet: &DefiningFunctionJet<T>, delta: T) -> BoundaryFrame<T> {
        let gz = jet.grad_zbar();
        let gn = norm(&gz);
        let normal: Vec<Cplx<T>> = gz.iter().map(|c| c.unscale(gn)).collect();
        let interior = p.iter().zip(&normal).map(|(a, v)| a - v.scale(delta)).collect();
        BoundaryFrame {
            base: p,
            normal,
            delta,
            interior,
        }
    }
}

/// Grid size used when certifying strict pseudoconvexity at construction.
pub const CERTIFY_GRID: usize = 257;

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

fn siegel_value<T: Real>(z: &[Cplx<T>]) -> T {
    let n = z.len();
    T::lit(2.0) * z[n - 1].re + z[..n - 1].iter().map(|c| c.norm_sqr()).sum::<T>()
}

/// First bumped-ball parameter at which the Levi check on a boundary grid of
/// `grid` points stops being positive.
///
/// The parameter is swept upward from `step` in increments of `step` up to
/// `hi`; the first failing bracket is then refined by bisection to width
/// `tol`. Returns `None` when every swept value is certified.
pub fn bumped_ball_epsilon_max<T: Real>(n: usize, step: T, hi: T, grid: usize, tol: T) -> Result<Option<T>> {
    let certified = |eps: T| -> Result<bool> {
        let spec = DomainSpec::bumped_ball_unchecked(n, eps);
        Ok(spec.levi_min_check(&spec.boundary_grid(grid)?)? > T::zero())
    };
    let mut a = T::zero();
    let mut b = step;
    while b <= hi {
        if !certified(b)? {
            while b - a > tol {
                let mid = (a + b) * T::lit(0.5);
                if certified(mid)? {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(Some(b));
        }
        a = b;
        b += step;
    }
    Ok(None)
}

/// Smooth positive factors `h` used to change the defining function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SmoothFactor<T: Real> {
    One,
    /// `1 + c |z_k|^2`.
    RadialQuadratic { index: usize, coeff: T },
    /// `exp(Re z_k)`.
    ExpRealPart { index: usize },
}

impl<T: Real> SmoothFactor<T> {
    pub fn jet(&self, z: &[Cplx<T>]) -> DefiningFunctionJet<T> {
        let n = z.len();
        let zero = || CMatrix::zeros(n, n);
        match *self {
            SmoothFactor::One => DefiningFunctionJet {
                value: T::one(),
                grad_z: vec![re(T::zero()); n],
                hess_holo: zero(),
                hess_mixed: zero(),
            },
            SmoothFactor::RadialQuadratic { index, coeff } => {
                let mut grad_z = vec![re(T::zero()); n];
                grad_z[index] = z[index].conj().scale(coeff);
                let mut hm = zero();
                hm[(index, index)] = re(coeff);
                DefiningFunctionJet {
                    value: T::one() + coeff * z[index].norm_sqr(),
                    grad_z,
                    hess_holo: zero(),
                    hess_mixed: hm,
                }
            }
            SmoothFactor::ExpRealPart { index } => {
                let e = z[index].re.exp();
                let mut grad_z = vec![re(T::zero()); n];
                grad_z[index] = re(e * T::lit(0.5));
                let mut hh = zero();
                hh[(index, index)] = re(e * T::lit(0.25));
                let mut hm = zero();
                hm[(index, index)] = re(e * T::lit(0.25));
                DefiningFunctionJet {
                    value: e,
                    grad_z,
                    hess_holo: hh,
                    hess_mixed: hm,
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cplx<f64>;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn ball_jet_at_origin() {
        let ball = DomainSpec::<f64>::unit_ball(2).unwrap();
        let j = ball.evaluate_jet(&[c(0.0), c(0.0)]).unwrap();
        assert_eq!(j.value, -1.0);
        assert!(j.grad_z.iter().all(|g| g.norm() == 0.0));
        assert!(j.hess_mixed.max_abs_diff(&CMatrix::identity(2)) == 0.0);
    }

    #[test]
    fn ball_jet_at_pole() {
        let ball = DomainSpec::<f64>::unit_ball(2).unwrap();
        let j = ball.evaluate_jet(&[c(0.0), c(1.0)]).unwrap();
        assert_eq!(j.grad_z, vec![c(0.0), c(1.0)]);
        assert_eq!(j.hess_holo.max_abs(), 0.0);
        assert_eq!(j.levi_form(&[c(1.0), c(0.0)]), 1.0);
        assert_eq!(j.levi_form(&[c(0.0), c(0.0)]), 0.0);
    }

    #[test]
    fn siegel_jet() {
        let s = DomainSpec::<f64>::siegel(2).unwrap();
        let j = s.evaluate_jet(&[c(0.0), c(-1.0)]).unwrap();
        assert_eq!(j.value, -2.0);
        assert_eq!(j.grad_z, vec![c(0.0), c(1.0)]);
        let expected = CMatrix::diagonal(&[c(1.0), c(0.0)]);
        assert_eq!(j.hess_mixed.max_abs_diff(&expected), 0.0);
    }

    #[test]
    fn dimension_one_is_rejected() {
        assert!(matches!(DomainSpec::<f64>::unit_ball(1), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn bump_is_c2_at_the_knots() {
        for knot in [BUMP_START, BUMP_END] {
            let (a0, a1, a2) = bump(knot - 1e-9);
            let (b0, b1, b2) = bump(knot + 1e-9);
            assert!((a0 - b0).abs() < 1e-8);
            assert!((a1 - b1).abs() < 1e-6);
            assert!((a2 - b2).abs() < 1e-5);
        }
        assert_eq!(bump(0.2f64).0, 0.0);
        assert!(bump(0.5f64).0 > 0.0);
    }

    #[test]
    fn ball_nearest_point() {
        let ball = DomainSpec::<f64>::unit_ball(2).unwrap();
        let f = ball.nearest_boundary_point(&[c(0.7), c(0.0)]).unwrap();
        assert!((f.base[0] - c(1.0)).norm() < 1e-12 && f.base[1].norm() < 1e-12);
        assert!((f.delta - 0.3).abs() < 1e-12);
    }

    #[test]
    fn deep_points_are_ambiguous() {
        let bumped = DomainSpec::<f64>::bumped_ball(2, 0.05).unwrap();
        assert!(matches!(
            bumped.nearest_boundary_point(&[c(0.5), c(0.0)]),
            Err(Error::AmbiguousProjection { .. })
        ));
        let ball = DomainSpec::<f64>::unit_ball(2).unwrap();
        assert!((ball.nearest_boundary_point(&[c(0.5), c(0.0)]).unwrap().delta - 0.5).abs() < 1e-12);
        assert!(matches!(
            ball.nearest_boundary_point(&[c(0.0), c(0.0)]),
            Err(Error::AmbiguousProjection { .. })
        ));
    }

    #[test]
    fn exterior_points_are_rejected() {
        let ball = DomainSpec::<f64>::unit_ball(2).unwrap();
        assert!(matches!(
            ball.nearest_boundary_point(&[c(1.2), c(0.0)]),
            Err(Error::NotInterior { .. })
        ));
    }

    #[test]
    fn split_example() {
        let frame = BoundaryFrame {
            base: vec![c(0.0), c(1.0)],
            normal: vec![c(0.0), c(1.0)],
            delta: 0.0,
            interior: vec![c(0.0), c(1.0)],
        };
        let (h, nn) = frame.split(&[c(1.0), c(2.0)]);
        assert_eq!(h, vec![c(1.0), c(0.0)]);
        assert_eq!(nn, vec![c(0.0), c(2.0)]);
        let (h, nn) = frame.split(&frame.normal.clone());
        assert!(norm(&h) == 0.0 && nn == frame.normal);
    }

    #[test]
    fn ball_and_siegel_levi_minimum() {
        let ball = DomainSpec::<f64>::unit_ball(2).unwrap();
        let grid = ball.boundary_grid(33).unwrap();
        assert!((ball.levi_min_check(&grid).unwrap() - 1.0).abs() < 1e-13);
        let ball3 = DomainSpec::<f64>::unit_ball(3).unwrap();
        let grid = ball3.boundary_grid(30).unwrap();
        assert!((ball3.levi_min_check(&grid).unwrap() - 1.0).abs() < 1e-13);
        let s = DomainSpec::<f64>::siegel(2).unwrap();
        let origin = vec![vec![c(0.0), c(0.0)]];
        assert!((s.levi_min_check(&origin).unwrap() - 1.0).abs() < 1e-15);
        assert!(s.levi_min_check(&[]).is_err());
    }

    #[test]
    fn siegel_levi_minimum_on_unit_disc_grid() {
        // orthonormal tangent frame: eigenvalue 1/(1 + |'z|^2), worst at |'z| = 1
        let s = DomainSpec::<f64>::siegel(2).unwrap();
        let grid = s.boundary_grid(40).unwrap();
        assert!((s.levi_min_check(&grid).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn polynomial_profile_matches_ball() {
        let p = PolynomialProfile::new(vec![(1, 0, 1.0), (0, 1, 1.0), (0, 0, -1.0)]);
        let spec = DomainSpec::reinhardt_profile(p).unwrap();
        let z = [C::new(0.3, 0.2), C::new(-0.1, 0.5)];
        let a = spec.evaluate_jet(&z).unwrap();
        let b = DomainSpec::<f64>::unit_ball(2).unwrap().evaluate_jet(&z).unwrap();
        assert!((a.value - b.value).abs() < 1e-15);
        assert!(a.hess_mixed.max_abs_diff(&b.hess_mixed) < 1e-15);
        assert!((spec.tubular_radius() - 0.4).abs() < 1e-12);
    }

    #[test]
    fn nonincreasing_profile_is_rejected() {
        // ρ = s1 - s2 ... decreasing in s2
        let p = PolynomialProfile::new(vec![(1, 0, 1.0), (0, 1, -0.5), (0, 2, 1.0), (0, 0, -1.0)]);
        assert!(DomainSpec::reinhardt_profile(p).is_err());
    }
}
