//! Fefferman surface measure relative to Euclidean surface measure.

use serde::{Deserialize, Serialize};

use crate::domain::{DefiningFunctionJet, DomainSpec, SmoothFactor};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{re, Cplx, Real};

/// Bordered determinant and the resulting density of the Fefferman measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureDensity<T> {
    pub bordered_det: T,
    pub density: T,
    pub c_n: T,
}

/// The `(n+1) x (n+1)` matrix with `0` in the corner, first row `r_{j̄}`, first
/// column `r_i` and the block `r_{ij̄}`.
pub fn bordered_matrix<T: Real>(jet: &DefiningFunctionJet<T>) -> CMatrix<T> {
    let n = jet.dim();
    CMatrix::from_fn(n + 1, n + 1, |i, j| match (i, j) {
        (0, 0) => re(T::zero()),
        (0, j) => jet.grad_z[j - 1].conj(),
        (i, 0) => jet.grad_z[i - 1],
        (i, j) => jet.hess_mixed[(i - 1, j - 1)],
    })
}

/// `M = -det` of the bordered complex Hessian.
pub fn bordered_determinant<T: Real>(jet: &DefiningFunctionJet<T>) -> T {
    -bordered_matrix(jet).det().re
}

/// Density `w = c_n M^{1/(n+1)} / |∇r|` of the Fefferman measure with respect
/// to Euclidean surface measure, where `|∇r| = 2 |∂r/∂z|`.
pub fn fefferman_density<T: Real>(jet: &DefiningFunctionJet<T>, c_n: T) -> Result<MeasureDensity<T>> {
    let m = bordered_determinant(jet);
    if !(m > T::zero()) {
        return Err(Error::NonPositiveDeterminant { value: m.as_f64() });
    }
    let n = T::from_usize_lossy(jet.dim());
    let density = c_n * m.powf(T::one() / (n + T::one())) / jet.real_gradient_norm();
    Ok(MeasureDensity {
        bordered_det: m,
        density,
        c_n,
    })
}

/// Maximum relative difference between the densities computed from `r` and
/// from `h r` over boundary sample points.
pub fn independence_check<T: Real>(
    spec: &DomainSpec<T>,
    h: &SmoothFactor<T>,
    sample: &[Vec<Cplx<T>>],
) -> Result<T> {
    let mut worst = T::zero();
    for p in sample {
        let jet = spec.evaluate_jet(p)?;
        let modified = jet.times(&h.jet(p));
        let a = fefferman_density(&jet, T::one())?.density;
        let b = fefferman_density(&modified, T::one())?.density;
        worst = worst.max((a - b).abs() / a.abs());
    }
    Ok(worst)
}
