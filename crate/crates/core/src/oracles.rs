//! Reference computations for test suites: dense matrix powers, fixed-step
//! propagators, a general eigensolver and trapezoid quadratures of Gaussian
//! integrals. Deliberately brute force and independent of the production
//! paths they check.

use nalgebra::{Matrix2, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::gaussian::{GaussianPureState, ReducedGaussianDM};
use crate::linalg::{hamiltonian_generator, RealMatrix2, RealMatrix4};

/// Trapezoid nodes per axis.
pub const QUAD_POINTS: usize = 2001;
/// Half-width of each integration axis in standard deviations.
pub const QUAD_SIGMAS: f64 = 8.0;

/// Trapezoid rule on `[-half_width, half_width]` shifted by `center`.
pub fn trapezoid<F: Fn(f64) -> f64>(center: f64, half_width: f64, points: usize, f: F) -> f64 {
    let h = 2.0 * half_width / (points - 1) as f64;
    let mut sum = 0.0;
    for i in 0..points {
        let w = if i == 0 || i + 1 == points { 0.5 } else { 1.0 };
        sum += w * f(center - half_width + h * i as f64);
    }
    sum * h
}

fn trapezoid_complex<F: Fn(f64) -> Complex64>(center: f64, half_width: f64, points: usize, f: F) -> Complex64 {
    let re = trapezoid(center, half_width, points, |x| f(x).re);
    let im = trapezoid(center, half_width, points, |x| f(x).im);
    Complex64::new(re, im)
}

/// 2-D trapezoid over the rotated box `x = R (u, v)`, rows evaluated in
/// parallel and summed in a fixed order.
fn trapezoid_2d<F>(rotation: &RealMatrix2, half_widths: [f64; 2], f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let n = QUAD_POINTS;
    let h_u = 2.0 * half_widths[0] / (n - 1) as f64;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let u = -half_widths[0] + h_u * i as f64;
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            w * trapezoid(0.0, half_widths[1], n, |v| {
                let x = rotation[(0, 0)] * u + rotation[(0, 1)] * v;
                let y = rotation[(1, 0)] * u + rotation[(1, 1)] * v;
                f(x, y)
            })
        })
        .collect();
    rows.iter().sum::<f64>() * h_u
}

pub fn dense_power(f: &RealMatrix4, n: usize) -> RealMatrix4 {
    let mut p = RealMatrix4::identity();
    for _ in 0..n {
        p = f * p;
    }
    p
}

/// `1/2 sum_j (F^n)_ij^2` for each `i`, from the explicit power.
pub fn dense_moments(f: &RealMatrix4, n: usize) -> [f64; 4] {
    let p = dense_power(f, n);
    std::array::from_fn(|i| 0.5 * p.row(i).norm_squared())
}

/// Classical RK4 on `dX/dt = A X`, `X(0) = I`.
pub fn rk4_propagator(k: &RealMatrix2, t: f64, steps: usize) -> RealMatrix4 {
    let a = hamiltonian_generator(k);
    let h = t / steps as f64;
    let mut m = RealMatrix4::identity();
    for _ in 0..steps {
        let k1 = a * m;
        let k2 = a * (m + k1 * (h / 2.0));
        let k3 = a * (m + k2 * (h / 2.0));
        let k4 = a * (m + k3 * h);
        m += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    m
}

/// Eigenvalues from nalgebra's general Schur solver, unsorted.
pub fn general_eigenvalues(f: &RealMatrix4) -> Vec<Complex64> {
    f.complex_eigenvalues().iter().copied().collect()
}

/// `int int |Psi|^2` over the principal axes of `Re Omega`.
pub fn norm_by_quadrature(state: &GaussianPureState) -> f64 {
    let eig = SymmetricEigen::new(state.re_omega());
    let sigma = eig.eigenvalues.map(|l| (0.5 / l).sqrt());
    let widths = [QUAD_SIGMAS * sigma[0], QUAD_SIGMAS * sigma[1]];
    trapezoid_2d(&eig.eigenvectors, widths, |x, y| state.amplitude(x, y).norm_sqr())
}

/// `<x| rho_1 |y> = int Psi(x, q2) Psi*(y, q2) dq2`.
pub fn partial_trace_by_quadrature(state: &GaussianPureState, x: f64, y: f64) -> Complex64 {
    let (b, c) = (state.b(), state.c());
    // |integrand| ~ exp(-Re b (q2 - m)^2)
    let center = -(c * x + c.conj() * y).re / (2.0 * b.re);
    let sigma = (0.5 / b.re).sqrt();
    trapezoid_complex(center, QUAD_SIGMAS * sigma, QUAD_POINTS, |q2| {
        state.amplitude(x, q2) * state.amplitude(y, q2).conj()
    })
}

/// `int rho_1(q, q) dq`.
pub fn trace_by_quadrature(dm: &ReducedGaussianDM, log_norm: f64) -> f64 {
    let sigma = (0.5 / dm.gap).sqrt();
    trapezoid(0.0, QUAD_SIGMAS * sigma, QUAD_POINTS, |q| dm.kernel(log_norm, q, q).re)
}

/// `int q^2 rho_1(q, q) dq / int rho_1(q, q) dq`.
pub fn position_variance_by_quadrature(dm: &ReducedGaussianDM, log_norm: f64) -> f64 {
    let sigma = (0.5 / dm.gap).sqrt();
    let w = QUAD_SIGMAS * sigma;
    let second = trapezoid(0.0, w, QUAD_POINTS, |q| q * q * dm.kernel(log_norm, q, q).re);
    second / trace_by_quadrature(dm, log_norm)
}

/// `int int rho_1(x, y) rho_1(y, x) dx dy` over the axes `(x +- y) / sqrt 2`.
pub fn purity_by_quadrature(dm: &ReducedGaussianDM, log_norm: f64) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let rotation = Matrix2::new(s, s, s, -s);
    let sigma_u = (0.5 / dm.gap).sqrt();
    let sigma_v = (0.5 / (dm.chi.re + dm.eta)).sqrt();
    let widths = [QUAD_SIGMAS * sigma_u, QUAD_SIGMAS * sigma_v];
    trapezoid_2d(&rotation, widths, |x, y| {
        (dm.kernel(log_norm, x, y) * dm.kernel(log_norm, y, x)).re
    })
}
