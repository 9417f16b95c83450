//! Small dense complex matrices.
//!
//! Everything in this crate works in dimension `n` or `n + 1` with `n` of
//! order 2-4, so the routines below favour clarity over blocking: LU with
//! partial pivoting, Gauss-Jordan inversion and a cyclic Jacobi eigensolver
//! for Hermitian matrices.

use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};

use crate::scalar::{cx, re, Cplx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    rows: usize,
    cols: usize,
    data: Vec<Cplx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cplx::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Cplx::one() } else { Cplx::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cplx<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Cplx<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn diagonal(d: &[Cplx<T>]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |i, j| if i == j { d[i] } else { Cplx::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, alpha: Cplx<T>) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| alpha * self[(i, j)])
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * other[(k, j)]).sum()
        })
    }

    pub fn mul_vec(&self, v: &[Cplx<T>]) -> Vec<Cplx<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect()
    }

    /// Leading `k x k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        Self::from_fn(k, k, |i, j| self[(i, j)])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.sub(other).max_abs()
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> T {
        self.max_abs_diff(&self.adjoint())
    }

    /// Largest deviation from complex symmetry.
    pub fn symmetric_defect(&self) -> T {
        self.max_abs_diff(&self.transpose())
    }

    /// LU factorisation with partial pivoting. Returns `None` for an exactly
    /// singular pivot.
    fn lu(&self) -> Option<(Self, Vec<usize>, bool)> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let (piv, best) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == T::zero() {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                odd = !odd;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        Some((a, perm, odd))
    }

    pub fn det(&self) -> Cplx<T> {
        match self.lu() {
            None => Cplx::zero(),
            Some((lu, _, odd)) => {
                let d: Cplx<T> = (0..self.rows).map(|i| lu[(i, i)]).product();
                if odd {
                    -d
                } else {
                    d
                }
            }
        }
    }

    pub fn solve(&self, b: &[Cplx<T>]) -> Option<Vec<Cplx<T>>> {
        let n = self.rows;
        let (lu, perm, _) = self.lu()?;
        let mut y: Vec<Cplx<T>> = perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                let l = lu[(i, k)];
                let yk = y[k];
                y[i] -= l * yk;
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = lu[(i, k)];
                let yk = y[k];
                y[i] -= u * yk;
            }
            y[i] /= lu[(i, i)];
        }
        Some(y)
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for j in 0..n {
            let mut e = vec![Cplx::zero(); n];
            e[j] = Cplx::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        if inv.data.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return None;
        }
        Some(inv)
    }

    /// Spectral norm, via the largest eigenvalue of `A* A`.
    pub fn op_norm(&self) -> T {
        let gram = self.adjoint().mul(self);
        let eig = gram.hermitian_eigen();
        eig.values
            .first()
            .copied()
            .unwrap_or_else(T::zero)
            .max(T::zero())
            .sqrt()
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues are sorted in descending order; each
    /// eigenvector column is rotated so its first non-negligible entry is real
    /// and positive.
    pub fn hermitian_eigen(&self) -> HermitianEigen<T> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        // symmetrise away rounding noise
        for i in 0..n {
            a[(i, i)] = re(a[(i, i)].re);
            for j in i + 1..n {
                let avg = (a[(i, j)] + a[(j, i)].conj()).scale(T::lit(0.5));
                a[(i, j)] = avg;
                a[(j, i)] = avg.conj();
            }
        }
        let mut v = Self::identity(n);
        let scale = a.frobenius().max(T::min_positive_value());
        let tol = T::epsilon() * scale;
        for _sweep in 0..64 {
            let off: T = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)].norm_sqr())
                .sum::<T>()
                .sqrt();
            if off <= tol {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let mag = apq.norm();
                    if mag <= T::min_positive_value() {
                        continue;
                    }
                    let phase = apq / re(mag);
                    let tau = (a[(q, q)].re - a[(p, p)].re) / (T::lit(2.0) * mag);
                    let t = if tau >= T::zero() {
                        T::one() / (tau + (T::one() + tau * tau).sqrt())
                    } else {
                        -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                    };
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    let mut j = Self::identity(n);
                    j[(p, p)] = re(c);
                    j[(q, q)] = re(c);
                    j[(p, q)] = phase.scale(s);
                    j[(q, p)] = -phase.conj().scale(s);
                    a = j.adjoint().mul(&a).mul(&j);
                    a[(p, q)] = Cplx::zero();
                    a[(q, p)] = Cplx::zero();
                    v = v.mul(&j);
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).expect("finite"));
        let values: Vec<T> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vectors = Self::from_fn(n, n, |i, k| v[(i, order[k])]);
        let small = T::epsilon().sqrt();
        for k in 0..n {
            if let Some(i) = (0..n).find(|&i| vectors[(i, k)].norm() > small) {
                let entry = vectors[(i, k)];
                let fix = entry.conj() / re(entry.norm());
                for r in 0..n {
                    vectors[(r, k)] *= fix;
                }
                vectors[(i, k)] = re(vectors[(i, k)].re);
            }
        }
        HermitianEigen { values, vectors }
    }
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = Cplx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cplx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cplx<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Result of [`CMatrix::hermitian_eigen`]: `A = V diag(values) V*`.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Real> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

/// Solves a small real linear system by Gaussian elimination with partial
/// pivoting.
pub fn solve_real<T: Real>(a: &[Vec<T>], b: &[T]) -> Option<Vec<T>> {
    let m = CMatrix::from_fn(a.len(), a.len(), |i, j| cx(a[i][j], T::zero()));
    let rhs: Vec<Cplx<T>> = b.iter().map(|&x| re(x)).collect();
    m.solve(&rhs).map(|x| x.into_iter().map(|c| c.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = CMatrix<f64>;

    fn sample() -> M {
        M::from_rows(&[
            vec![cx(2.0, 0.0), cx(1.0, -1.0), cx(0.5, 0.25)],
            vec![cx(1.0, 1.0), cx(3.0, 0.0), cx(0.0, 2.0)],
            vec![cx(0.5, -0.25), cx(0.0, -2.0), cx(4.0, 0.0)],
        ])
    }

    #[test]
    fn identity_has_unit_determinant() {
        assert!((M::identity(4).det() - cx(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = sample();
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).max_abs_diff(&M::identity(3)) < 1e-13);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let a = M::from_rows(&[vec![cx(1.0, 0.0), cx(2.0, 0.0)], vec![cx(2.0, 0.0), cx(4.0, 0.0)]]);
        assert!(a.inverse().is_none());
        assert!(a.det().norm() < 1e-15);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        let a = sample();
        let e = a.hermitian_eigen();
        let d = M::diagonal(&e.values.iter().map(|&x| cx(x, 0.0)).collect::<Vec<_>>());
        let back = e.vectors.mul(&d).mul(&e.vectors.adjoint());
        assert!(back.max_abs_diff(&a) < 1e-12);
        assert!(e.vectors.adjoint().mul(&e.vectors).max_abs_diff(&M::identity(3)) < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        for k in 0..3 {
            let first = (0..3).map(|i| e.vectors[(i, k)]).find(|c| c.norm() > 1e-8).unwrap();
            assert!(first.im.abs() < 1e-15 && first.re > 0.0);
        }
    }

    #[test]
    fn op_norm_of_diagonal() {
        let d = M::diagonal(&[cx(0.0, -3.0), cx(1.0, 0.0)]);
        assert!((d.op_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn real_solver() {
        let x: Vec<f64> = solve_real(&[vec![2.0, 1.0], vec![1.0, 3.0]], &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
    }
}
