//! Closed-form ball formulas and finite-difference helpers used as test
//! oracles. Nothing here calls into the library's kernel or metric code.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use szego_lab::Cx;

pub use std::f64::consts::PI;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn hermitian_product(z: &[Cx], w: &[Cx]) -> Cx {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn norm2(z: &[Cx]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// `(n-1)! / (c_n π^n) (1 - <z, w>)^{-n}`.
pub fn ball_szego(n: usize, c_n: f64, z: &[Cx], w: &[Cx]) -> Cx {
    let d = Cx::new(1.0, 0.0) - hermitian_product(z, w);
    factorial(n - 1) / (c_n * PI.powi(n as i32)) * d.powi(-(n as i32))
}

/// `n! / π^n (1 - <z, w>)^{-(n+1)}`.
pub fn ball_bergman(n: usize, z: &[Cx], w: &[Cx]) -> Cx {
    let d = Cx::new(1.0, 0.0) - hermitian_product(z, w);
    factorial(n) / PI.powi(n as i32) * d.powi(-(n as i32 + 1))
}

/// `∂_α ∂̄_β (-log(1 - |z|^2)) = δ_{αβ}/(1-|z|^2) + conj(z_α) z_β/(1-|z|^2)^2`.
pub fn ball_potential_hessian(z: &[Cx]) -> DMatrix<Cx> {
    let n = z.len();
    let s = 1.0 - norm2(z);
    DMatrix::from_fn(n, n, |a, b| {
        let delta = if a == b { 1.0 / s } else { 0.0 };
        Cx::new(delta, 0.0) + z[a].conj() * z[b] / (s * s)
    })
}

/// `∂_α ∂̄_β log S` for the ball Szegő kernel, `n` times the potential Hessian.
pub fn ball_metric(z: &[Cx]) -> DMatrix<Cx> {
    ball_potential_hessian(z) * Cx::new(z.len() as f64, 0.0)
}

/// `Σ A_{αβ} X_α conj(X_β)`.
pub fn form(a: &DMatrix<Cx>, x: &[Cx]) -> f64 {
    let mut acc = Cx::new(0.0, 0.0);
    for i in 0..x.len() {
        for j in 0..x.len() {
            acc += a[(i, j)] * x[i] * x[j].conj();
        }
    }
    acc.re
}

/// `-∂∂̄ log g (X, X) / τ^2` with `log g = log n^n - (n+1) log(1 - |z|^2)`.
pub fn ball_ricci(z: &[Cx], x: &[Cx]) -> f64 {
    let n = z.len() as f64;
    let h = ball_potential_hessian(z);
    -(n + 1.0) * form(&h, x) / form(&ball_metric(z), x)
}

pub fn random_point(rng: &mut StdRng, n: usize, radius: f64) -> Vec<Cx> {
    let v: Vec<Cx> = (0..n)
        .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    let m = norm2(&v).sqrt();
    let r = radius * rng.gen_range(0.0f64..1.0).sqrt();
    v.into_iter().map(|c| c * (r / m)).collect()
}

pub fn random_unit(rng: &mut StdRng, n: usize) -> Vec<Cx> {
    loop {
        let v: Vec<Cx> = (0..n)
            .map(|_| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let m = norm2(&v).sqrt();
        if m > 1e-3 {
            return v.into_iter().map(|c| c / m).collect();
        }
    }
}

/// Unitary factor of the QR decomposition of a random complex matrix.
pub fn random_unitary(rng: &mut StdRng, n: usize) -> DMatrix<Cx> {
    let m = DMatrix::from_fn(n, n, |_, _| Cx::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    m.qr().q()
}

fn shifted(z: &[Cx], k: usize, h: f64) -> Vec<Cx> {
    let n = z.len();
    let mut v = z.to_vec();
    if k < n {
        v[k] += Cx::new(h, 0.0);
    } else {
        v[k - n] += Cx::new(0.0, h);
    }
    v
}

fn central_second<F: Fn(&[Cx]) -> Cx>(f: &F, z: &[Cx], a: usize, b: usize, h: f64) -> Cx {
    let pp = f(&shifted(&shifted(z, a, h), b, h));
    let pm = f(&shifted(&shifted(z, a, h), b, -h));
    let mp = f(&shifted(&shifted(z, a, -h), b, h));
    let mm = f(&shifted(&shifted(z, a, -h), b, -h));
    (pp - pm - mp + mm) / (4.0 * h * h)
}

/// `∂² f / ∂u_a ∂u_b` in real coordinates `(x_1..x_n, y_1..y_n)` by central
/// differences with one Richardson step.
pub fn real_second<F: Fn(&[Cx]) -> Cx>(f: &F, z: &[Cx], a: usize, b: usize, h: f64) -> Cx {
    (central_second(f, z, a, b, h / 2.0) * 4.0 - central_second(f, z, a, b, h)) / 3.0
}

fn central_first<F: Fn(&[Cx]) -> Cx>(f: &F, z: &[Cx], a: usize, h: f64) -> Cx {
    (f(&shifted(z, a, h)) - f(&shifted(z, a, -h))) / (2.0 * h)
}

pub fn real_first<F: Fn(&[Cx]) -> Cx>(f: &F, z: &[Cx], a: usize, h: f64) -> Cx {
    (central_first(f, z, a, h / 2.0) * 4.0 - central_first(f, z, a, h)) / 3.0
}

const I: Cx = Cx::new(0.0, 1.0);

/// `∂f/∂z_i = (f_x - i f_y) / 2`.
pub fn wirtinger(f: &impl Fn(&[Cx]) -> Cx, z: &[Cx], i: usize, h: f64) -> Cx {
    let n = z.len();
    (real_first(f, z, i, h) - I * real_first(f, z, i + n, h)) * 0.5
}

/// `∂f/∂z̄_i = (f_x + i f_y) / 2`.
pub fn wirtinger_bar(f: &impl Fn(&[Cx]) -> Cx, z: &[Cx], i: usize, h: f64) -> Cx {
    let n = z.len();
    (real_first(f, z, i, h) + I * real_first(f, z, i + n, h)) * 0.5
}

/// `∂²f/∂z_i∂z̄_j`.
pub fn wirtinger_mixed(f: &impl Fn(&[Cx]) -> Cx, z: &[Cx], i: usize, j: usize, h: f64) -> Cx {
    let n = z.len();
    let xx = real_second(f, z, i, j, h);
    let yy = real_second(f, z, i + n, j + n, h);
    let xy = real_second(f, z, i, j + n, h);
    let yx = real_second(f, z, i + n, j, h);
    (xx + yy + I * (xy - yx)) * 0.25
}

/// `∂²f/∂z_i∂z_j`.
pub fn wirtinger_holo(f: &impl Fn(&[Cx]) -> Cx, z: &[Cx], i: usize, j: usize, h: f64) -> Cx {
    let n = z.len();
    let xx = real_second(f, z, i, j, h);
    let yy = real_second(f, z, i + n, j + n, h);
    let xy = real_second(f, z, i, j + n, h);
    let yx = real_second(f, z, i + n, j, h);
    (xx - yy - I * (xy + yx)) * 0.25
}

/// Holomorphic sectional curvature of a Kähler metric given entrywise by
/// `metric(z)[(β, α)] = g_{βᾱ}`, with derivatives by central differences:
/// `(-∂_γ∂̄_δ g_{βᾱ} + g^{νμ̄} ∂_γ g_{βμ̄} ∂̄_δ g_{νᾱ}) conj(X_α) X_β X_γ conj(X_δ) / τ^4`.
pub fn sectional_curvature_fd(metric: &impl Fn(&[Cx]) -> DMatrix<Cx>, z: &[Cx], x: &[Cx], h: f64) -> f64 {
    let n = z.len();
    let g = metric(z);
    let inv = g.clone().try_inverse().expect("metric is invertible");
    let entry = |b: usize, a: usize| move |w: &[Cx]| metric(w)[(b, a)];
    let mut term1 = Cx::new(0.0, 0.0);
    let mut v = vec![Cx::new(0.0, 0.0); n];
    let mut w = vec![Cx::new(0.0, 0.0); n];
    for a in 0..n {
        for b in 0..n {
            let f = entry(b, a);
            for c in 0..n {
                for d in 0..n {
                    term1 -= wirtinger_mixed(&f, z, c, d, h) * x[a].conj() * x[b] * x[c] * x[d].conj();
                }
            }
        }
    }
    for m in 0..n {
        for b in 0..n {
            for c in 0..n {
                v[m] += wirtinger(&entry(b, m), z, c, h) * x[b] * x[c];
            }
        }
        for a in 0..n {
            for d in 0..n {
                w[m] += wirtinger_bar(&entry(m, a), z, d, h) * x[a].conj() * x[d].conj();
            }
        }
    }
    let mut term2 = Cx::new(0.0, 0.0);
    for mu in 0..n {
        for nu in 0..n {
            term2 += v[mu] * inv[(mu, nu)] * w[nu];
        }
    }
    let tau2 = form(&g, x);
    (term1 + term2).re / (tau2 * tau2)
}
