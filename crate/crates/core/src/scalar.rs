//! Scalar abstraction shared by every numerical module.
//!
//! All geometry, quadrature and kernel code is written against [`Real`], which
//! is implemented for `f32` and `f64`. The tolerances quoted throughout the
//! crate are calibrated for `f64`; `f32` is supported for smoke runs only.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cplx<T> {
    Complex::new(x, T::zero())
}

/// `k!` as a real number.
pub fn factorial<T: Real>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * T::from_usize_lossy(i))
}

/// `ln(k!)` accumulated in the working precision.
pub fn ln_factorial<T: Real>(k: usize) -> T {
    (2..=k).fold(T::zero(), |acc, i| acc + T::from_usize_lossy(i).ln())
}

/// Binomial coefficient `C(m, k)` as a real number (zero when `k > m`).
pub fn binomial<T: Real>(m: usize, k: usize) -> T {
    if k > m {
        return T::zero();
    }
    let k = k.min(m - k);
    (0..k).fold(T::one(), |acc, i| {
        acc * T::from_usize_lossy(m - i) / T::from_usize_lossy(i + 1)
    })
}

/// Euclidean norm of a complex vector.
pub fn norm<T: Real>(v: &[Cplx<T>]) -> T {
    v.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
}

/// Hermitian inner product `<x, y> = sum x_i conj(y_i)`.
pub fn inner<T: Real>(x: &[Cplx<T>], y: &[Cplx<T>]) -> Cplx<T> {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

pub(crate) fn sub<T: Real>(x: &[Cplx<T>], y: &[Cplx<T>]) -> Vec<Cplx<T>> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub(crate) fn add<T: Real>(x: &[Cplx<T>], y: &[Cplx<T>]) -> Vec<Cplx<T>> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial::<f64>(5), 120.0);
        assert_eq!(binomial::<f64>(6, 2), 15.0);
        assert_eq!(binomial::<f64>(2, 3), 0.0);
        assert!((ln_factorial::<f64>(10) - 3628800f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_second_slot() {
        let x = [cx(1.0, 2.0), cx(0.0, 1.0)];
        let y = [cx(0.0, 1.0), cx(3.0, 0.0)];
        let ip = inner(&x, &y);
        assert!((ip - cx(2.0, -1.0 + 3.0)).norm() < 1e-15);
    }
}
