//! Truncated Taylor jets in the variables `(dz, dz̄)`.
//!
//! A [`BiJet`] stores the coefficients of `f(z + ε, conj(z + ε))` as a
//! polynomial in `ε` and `ε̄` treated as independent variables, keeping every
//! monomial `ε^a ε̄^b` with `|a| <= 2` and `|b| <= 2`. That is exactly the
//! information needed for a Kähler metric (bidegree (1,1)), its first
//! derivatives ((2,1) and (1,2)) and the curvature term ((2,2)).
//!
//! Products are truncated to the same bidegree box, which makes the algebra
//! closed, and `ln` is exact inside the box because a jet without constant
//! term has total degree at least one, so its fifth power vanishes.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::scalar::{binomial, re, Cplx, Real};

/// Maximum holomorphic (and antiholomorphic) degree kept in a jet.
pub const JET_ORDER: usize = 2;

/// Enumeration of multi-indices of total degree `<= JET_ORDER` in `n`
/// variables together with their addition table.
#[derive(Debug)]
pub struct JetLayout {
    n: usize,
    indices: Vec<Vec<usize>>,
    sum_table: Vec<Vec<Option<usize>>>,
    fact: Vec<usize>,
}

impl JetLayout {
    pub fn new(n: usize) -> Arc<Self> {
        let mut indices = vec![vec![0; n]];
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            indices.push(e);
        }
        for i in 0..n {
            for j in i..n {
                let mut e = vec![0; n];
                e[i] += 1;
                e[j] += 1;
                indices.push(e);
            }
        }
        let m = indices.len();
        let sum_table = (0..m)
            .map(|p| {
                (0..m)
                    .map(|q| {
                        let s: Vec<usize> = indices[p].iter().zip(&indices[q]).map(|(a, b)| a + b).collect();
                        indices.iter().position(|e| *e == s)
                    })
                    .collect()
            })
            .collect();
        let fact = indices
            .iter()
            .map(|e| e.iter().map(|&k| if k == 2 { 2 } else { 1 }).product())
            .collect();
        Arc::new(Self {
            n,
            indices,
            sum_table,
            fact,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of multi-indices in the layout.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_index(&self, k: usize) -> &[usize] {
        &self.indices[k]
    }

    pub fn position(&self, e: &[usize]) -> Option<usize> {
        self.indices.iter().position(|x| x == e)
    }

    /// Position of the unit multi-index `e_i`.
    pub fn unit(&self, i: usize) -> usize {
        1 + i
    }

    /// Position of `e_i + e_j`.
    pub fn pair(&self, i: usize, j: usize) -> usize {
        self.sum_table[self.unit(i)][self.unit(j)].expect("degree two index")
    }

    pub fn degree(&self, k: usize) -> usize {
        self.indices[k].iter().sum()
    }

    /// `a!` for the multi-index at position `k`.
    pub fn factorial(&self, k: usize) -> usize {
        self.fact[k]
    }

    /// Positions of the multi-indices of total degree exactly `d`.
    pub fn of_degree(&self, d: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&k| self.degree(k) == d)
    }

    /// Coefficients `prod_i C(alpha_i, a_i) z_i^(alpha_i - a_i)` of `ε^a` in
    /// `(z + ε)^alpha`, for every `a` in the layout.
    pub fn monomial_shift<T: Real>(&self, alpha: &[usize], z: &[Cplx<T>]) -> Vec<Cplx<T>> {
        self.indices
            .iter()
            .map(|a| {
                let mut c = Cplx::<T>::one();
                for i in 0..self.n {
                    if a[i] > alpha[i] {
                        return Cplx::zero();
                    }
                    c *= z[i].powu((alpha[i] - a[i]) as u32).scale(binomial(alpha[i], a[i]));
                }
                c
            })
            .collect()
    }
}

/// Taylor coefficients of a function of `(z, z̄)` truncated at bidegree
/// `(2, 2)`. Coefficient `(a, b)` multiplies `ε^a ε̄^b`, so
/// `∂^a ∂̄^b f = a! b! * coeff(a, b)`.
#[derive(Debug, Clone)]
pub struct BiJet<T: Real> {
    layout: Arc<JetLayout>,
    coeffs: Vec<Cplx<T>>,
}

impl<T: Real> BiJet<T> {
    pub fn zero(layout: &Arc<JetLayout>) -> Self {
        let m = layout.len();
        Self {
            layout: Arc::clone(layout),
            coeffs: vec![Cplx::zero(); m * m],
        }
    }

    pub fn constant(layout: &Arc<JetLayout>, c: Cplx<T>) -> Self {
        let mut j = Self::zero(layout);
        j.coeffs[0] = c;
        j
    }

    /// The jet of `z_i`.
    pub fn holomorphic_coordinate(layout: &Arc<JetLayout>, z: &[Cplx<T>], i: usize) -> Self {
        let mut j = Self::constant(layout, z[i]);
        let k = layout.unit(i);
        j.set(k, 0, Cplx::one());
        j
    }

    /// The jet of `conj(z_i)`.
    pub fn antiholomorphic_coordinate(layout: &Arc<JetLayout>, z: &[Cplx<T>], i: usize) -> Self {
        let mut j = Self::constant(layout, z[i].conj());
        let k = layout.unit(i);
        j.set(0, k, Cplx::one());
        j
    }

    pub fn layout(&self) -> &Arc<JetLayout> {
        &self.layout
    }

    #[inline]
    pub fn coeff(&self, a: usize, b: usize) -> Cplx<T> {
        self.coeffs[a * self.layout.len() + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, v: Cplx<T>) {
        let m = self.layout.len();
        self.coeffs[a * m + b] = v;
    }

    /// `∂^a ∂̄^b f` at the base point.
    pub fn derivative(&self, a: usize, b: usize) -> Cplx<T> {
        let f = self.layout.factorial(a) * self.layout.factorial(b);
        self.coeff(a, b).scale(T::from_usize_lossy(f))
    }

    pub fn value(&self) -> Cplx<T> {
        self.coeffs[0]
    }

    /// Adds `weight * h(a) * conj(h(b))` to every coefficient. This is the
    /// contribution of `weight * |(z + ε)^alpha|^2` when `h` comes from
    /// [`JetLayout::monomial_shift`].
    pub fn accumulate_outer(&mut self, weight: T, h: &[Cplx<T>]) {
        let m = self.layout.len();
        for a in 0..m {
            let ha = h[a].scale(weight);
            if ha.is_zero() {
                continue;
            }
            let row = &mut self.coeffs[a * m..(a + 1) * m];
            for (b, slot) in row.iter_mut().enumerate() {
                *slot += ha * h[b].conj();
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, y) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, y) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *x -= y;
        }
        out
    }

    pub fn scale(&self, s: Cplx<T>) -> Self {
        let mut out = self.clone();
        for x in &mut out.coeffs {
            *x *= s;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let m = self.layout.len();
        let table = &self.layout.sum_table;
        let mut out = Self::zero(&self.layout);
        for a1 in 0..m {
            for b1 in 0..m {
                let x = self.coeffs[a1 * m + b1];
                if x.is_zero() {
                    continue;
                }
                for a2 in 0..m {
                    let Some(a) = table[a1][a2] else { continue };
                    for b2 in 0..m {
                        let Some(b) = table[b1][b2] else { continue };
                        let y = other.coeffs[a2 * m + b2];
                        out.coeffs[a * m + b] += x * y;
                    }
                }
            }
        }
        out
    }

    /// Natural logarithm, principal branch at the constant term.
    pub fn ln(&self) -> Self {
        let f0 = self.value();
        let mut x = self.scale(Cplx::<T>::one() / f0);
        x.coeffs[0] = Cplx::zero();
        // ln(1 + x) = x - x^2/2 + x^3/3 - x^4/4; higher powers vanish in the box
        let x2 = x.mul(&x);
        let x3 = x2.mul(&x);
        let x4 = x3.mul(&x);
        let mut out = x
            .sub(&x2.scale(re(T::lit(0.5))))
            .add(&x3.scale(re(T::one() / T::lit(3.0))))
            .sub(&x4.scale(re(T::lit(0.25))));
        out.coeffs[0] = f0.ln();
        out
    }

    /// Exponential.
    pub fn exp(&self) -> Self {
        let f0 = self.value();
        let mut x = self.clone();
        x.coeffs[0] = Cplx::zero();
        let x2 = x.mul(&x);
        let x3 = x2.mul(&x);
        let x4 = x3.mul(&x);
        let mut series = x
            .add(&x2.scale(re(T::lit(0.5))))
            .add(&x3.scale(re(T::one() / T::lit(6.0))))
            .add(&x4.scale(re(T::one() / T::lit(24.0))));
        series.coeffs[0] = Cplx::one();
        series.scale(f0.exp())
    }

    /// `self^p` for a real exponent, principal branch at the constant term.
    pub fn powf(&self, p: T) -> Self {
        self.ln().scale(re(p)).exp()
    }

    /// Largest violation of `coeff(b, a) = conj(coeff(a, b))`, the symmetry of
    /// the jet of a real-valued function.
    pub fn reality_defect(&self) -> T {
        let m = self.layout.len();
        let mut worst = T::zero();
        for a in 0..m {
            for b in 0..m {
                worst = worst.max((self.coeff(a, b) - self.coeff(b, a).conj()).norm());
            }
        }
        worst
    }
}
