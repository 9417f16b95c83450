//! Automorphisms of the unit ball and the kernel transformation law.

use crate::error::{Error, Result};
use crate::kernels::KernelEvaluator;
use crate::linalg::CMatrix;
use crate::scalar::{inner, norm, re, Cplx, Real};

/// Holomorphic map with a fixed branch of `(det J)^{n/(n+1)}`.
pub trait BranchedMap<T: Real> {
    fn dim(&self) -> usize;

    fn apply(&self, z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>>;

    fn jacobian(&self, z: &[Cplx<T>]) -> Result<CMatrix<T>>;

    /// `(det J(z))^{n/(n+1)}` on the branch fixed by the map.
    fn jacobian_power(&self, z: &[Cplx<T>]) -> Result<Cplx<T>>;
}

/// `F = U ∘ φ_a`, where `φ_a` is the involutive automorphism of the ball
/// exchanging `0` and `a`, and `U` is unitary. With `a = 0` the map is `U`.
#[derive(Debug, Clone)]
pub struct BallAutomorphism<T: Real> {
    a: Vec<Cplx<T>>,
    u: CMatrix<T>,
}

/// Number of segments used to continue the determinant branch from the origin.
const BRANCH_STEPS: usize = 64;

impl<T: Real> BallAutomorphism<T> {
    pub fn new(a: Vec<Cplx<T>>, u: CMatrix<T>) -> Result<Self> {
        let n = a.len();
        if u.rows() != n || u.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.rows(),
            });
        }
        if !(norm(&a) < T::one()) {
            return Err(Error::InvalidSpec("automorphism centre must lie in the ball".into()));
        }
        let defect = u.adjoint().mul(&u).max_abs_diff(&CMatrix::identity(n));
        if defect > T::lit(1e-10) {
            return Err(Error::InvalidSpec(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(Self { a, u })
    }

    /// The involution exchanging `0` and `a`.
    pub fn involution(a: Vec<Cplx<T>>) -> Result<Self> {
        let n = a.len();
        Self::new(a, CMatrix::identity(n))
    }

    pub fn unitary(u: CMatrix<T>) -> Result<Self> {
        let n = u.rows();
        Self::new(vec![re(T::zero()); n], u)
    }

    pub fn centre(&self) -> &[Cplx<T>] {
        &self.a
    }

    fn is_linear(&self) -> bool {
        norm(&self.a) == T::zero()
    }

    /// `P_a + s_a Q_a` with `s_a = sqrt(1 - |a|^2)`.
    fn linear_part(&self) -> CMatrix<T> {
        let n = self.a.len();
        let a2 = norm(&self.a).powi(2);
        let s = (T::one() - a2).sqrt();
        CMatrix::from_fn(n, n, |i, j| {
            let p = self.a[i] * self.a[j].conj() / re(a2);
            let id = if i == j { re(T::one()) } else { re(T::zero()) };
            p + (id - p).scale(s)
        })
    }

    fn denominator(&self, z: &[Cplx<T>]) -> Result<Cplx<T>> {
        let d = re(T::one()) - inner(z, &self.a);
        if d.norm() < T::lit(1e-12) {
            return Err(Error::Pole);
        }
        Ok(d)
    }

    fn det_jacobian(&self, z: &[Cplx<T>]) -> Result<Cplx<T>> {
        Ok(self.jacobian(z)?.det())
    }
}

impl<T: Real> BranchedMap<T> for BallAutomorphism<T> {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn apply(&self, z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        if self.is_linear() {
            return Ok(self.u.mul_vec(z));
        }
        let d = self.denominator(z)?;
        let m = self.linear_part().mul_vec(z);
        let phi: Vec<Cplx<T>> = self.a.iter().zip(&m).map(|(a, mz)| (a - mz) / d).collect();
        Ok(self.u.mul_vec(&phi))
    }

    fn jacobian(&self, z: &[Cplx<T>]) -> Result<CMatrix<T>> {
        if self.is_linear() {
            return Ok(self.u.clone());
        }
        let n = self.dim();
        let d = self.denominator(z)?;
        let m = self.linear_part();
        let mz = m.mul_vec(z);
        let num: Vec<Cplx<T>> = self.a.iter().zip(&mz).map(|(a, v)| a - v).collect();
        let j = CMatrix::from_fn(n, n, |i, k| (-m[(i, k)] * d + num[i] * self.a[k].conj()) / (d * d));
        Ok(self.u.mul(&j))
    }

    fn jacobian_power(&self, z: &[Cplx<T>]) -> Result<Cplx<T>> {
        let n = self.dim();
        let p = T::from_usize_lossy(n) / T::from_usize_lossy(n + 1);
        let mut prev = self.det_jacobian(&vec![re(T::zero()); n])?;
        let mut arg = prev.arg();
        for k in 1..=BRANCH_STEPS {
            let t = T::from_usize_lossy(k) / T::from_usize_lossy(BRANCH_STEPS);
            let zt: Vec<Cplx<T>> = z.iter().map(|c| c.scale(t)).collect();
            let cur = self.det_jacobian(&zt)?;
            if cur.norm() == T::zero() {
                return Err(Error::BranchAmbiguity);
            }
            let step = (cur / prev).arg();
            if step.abs() > T::FRAC_PI_3() {
                return Err(Error::BranchAmbiguity);
            }
            arg += step;
            prev = cur;
        }
        let modulus = prev.norm().powf(p);
        Ok(Cplx::from_polar(modulus, arg * p))
    }
}

/// `S(F z, F w) (det J(z))^{n/(n+1)} conj((det J(w))^{n/(n+1)})`.
pub fn transform_kernel<T: Real>(
    map: &dyn BranchedMap<T>,
    target: &dyn KernelEvaluator<T>,
    z: &[Cplx<T>],
    w: &[Cplx<T>],
) -> Result<Cplx<T>> {
    let fz = map.apply(z)?;
    let fw = map.apply(w)?;
    let s = target.eval(&fz, &fw)?;
    Ok(s * map.jacobian_power(z)? * map.jacobian_power(w)?.conj())
}

/// Identity map, the trivial case of the transformation law.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap {
    pub n: usize,
}

impl<T: Real> BranchedMap<T> for IdentityMap {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, z: &[Cplx<T>]) -> Result<Vec<Cplx<T>>> {
        Ok(z.to_vec())
    }

    fn jacobian(&self, _z: &[Cplx<T>]) -> Result<CMatrix<T>> {
        Ok(CMatrix::identity(self.n))
    }

    fn jacobian_power(&self, _z: &[Cplx<T>]) -> Result<Cplx<T>> {
        Ok(re(T::one()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ExactBallKernel;

    type C = Cplx<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn involution_exchanges_centre_and_origin() {
        let a = vec![c(0.4, 0.0), c(0.0, 0.0)];
        let f = BallAutomorphism::involution(a.clone()).unwrap();
        let fa = f.apply(&a).unwrap();
        let f0 = f.apply(&[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(norm(&fa) < 1e-15);
        assert!((f0[0] - a[0]).norm() < 1e-15 && f0[1].norm() < 1e-15);
        let z = vec![c(0.1, 0.2), c(-0.3, 0.1)];
        let back = f.apply(&f.apply(&z).unwrap()).unwrap();
        assert!(back.iter().zip(&z).all(|(x, y)| (x - y).norm() < 1e-14));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let f = BallAutomorphism::involution(vec![c(0.2, 0.3), c(-0.1, 0.4)]).unwrap();
        let z = [c(0.1, -0.2), c(0.3, 0.1)];
        let j = f.jacobian(&z).unwrap();
        let h = 1e-6;
        for k in 0..2 {
            let mut zp = z;
            let mut zm = z;
            zp[k] += c(h, 0.0);
            zm[k] -= c(h, 0.0);
            let fp = f.apply(&zp).unwrap();
            let fm = f.apply(&zm).unwrap();
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / c(2.0 * h, 0.0);
                assert!((fd - j[(i, k)]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn identity_and_rotation_leave_kernel_unchanged() {
        let s = ExactBallKernel::szego(2, 1.0);
        let z = [c(0.1, 0.2), c(0.0, -0.3)];
        let w = [c(-0.2, 0.1), c(0.4, 0.0)];
        let v = transform_kernel(&IdentityMap { n: 2 }, &s, &z, &w).unwrap();
        assert!((v - s.eval(&z, &w).unwrap()).norm() < 1e-16);
        let phase = C::from_polar(1.0, 0.7);
        let u = CMatrix::diagonal(&[phase, phase.conj()]);
        let rot = BallAutomorphism::unitary(u).unwrap();
        let o = [c(0.0, 0.0); 2];
        let v0 = transform_kernel(&rot, &s, &o, &o).unwrap();
        assert!((v0 - s.eval(&o, &o).unwrap()).norm() < 1e-16);
    }

    #[test]
    fn non_unitary_matrix_is_rejected() {
        let u = CMatrix::diagonal(&[c(2.0, 0.0), c(1.0, 0.0)]);
        assert!(BallAutomorphism::unitary(u).is_err());
    }
}
