//! Fixed-size kernels for the two-mode problem.
//!
//! Phase-space vectors are ordered `(q1, q2, p1, p2)`. A quadratic
//! Hamiltonian `H = p.p/2 + q.K.q/2` has generator `A = [[0, I], [-K, 0]]`,
//! and its flow `e^{tA}` is computed in closed form from the eigensystem
//! of the symmetric stiffness matrix `K`.

use std::cmp::Ordering;

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;

use crate::error::{FloquetError, Result};

pub type RealMatrix2 = Matrix2<f64>;
pub type RealMatrix4 = Matrix4<f64>;
pub type ComplexMatrix2 = Matrix2<Complex64>;

/// Stiffness eigenvalues with magnitude below this use the free-particle
/// limit of the propagator.
pub const K_TOL: f64 = 1e-10;

/// Tolerance on `max |F^T J F - J|` accepted by [`symplectic_eigenvalues`].
pub const SYMPLECTIC_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

/// The canonical form `J = [[0, I], [-I, 0]]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SymplecticForm;

impl SymplecticForm {
    pub fn matrix() -> RealMatrix4 {
        let mut j = RealMatrix4::zeros();
        j[(0, 2)] = 1.0;
        j[(1, 3)] = 1.0;
        j[(2, 0)] = -1.0;
        j[(3, 1)] = -1.0;
        j
    }

    /// `max |M^T J M - J|` over all entries.
    pub fn deviation(m: &RealMatrix4) -> f64 {
        let j = Self::matrix();
        (m.transpose() * j * m - j).amax()
    }

    /// The symplectic product `u^T J v`.
    pub fn product(u: &nalgebra::Vector4<f64>, v: &nalgebra::Vector4<f64>) -> f64 {
        u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1]
    }
}

/// Assemble a 4x4 matrix from its 2x2 blocks.
pub fn from_blocks(
    top_left: &RealMatrix2,
    top_right: &RealMatrix2,
    bottom_left: &RealMatrix2,
    bottom_right: &RealMatrix2,
) -> RealMatrix4 {
    let mut m = RealMatrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(top_left);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(top_right);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(bottom_left);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(bottom_right);
    m
}

/// Generator `A = [[0, I], [-K, 0]]` for stiffness `K`.
pub fn hamiltonian_generator(k: &RealMatrix2) -> RealMatrix4 {
    from_blocks(
        &RealMatrix2::zeros(),
        &RealMatrix2::identity(),
        &(-k),
        &RealMatrix2::zeros(),
    )
}

/// Eigensystem of a real symmetric 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen2 {
    /// Eigenvalues, descending.
    pub values: [f64; 2],
    /// Unit eigenvectors as columns, in the order of `values`.
    pub vectors: RealMatrix2,
}

impl SymEigen2 {
    pub fn vector(&self, i: usize) -> Vector2<f64> {
        self.vectors.column(i).into_owned()
    }
}

/// Closed-form eigendecomposition of a symmetric 2x2 matrix.
///
/// Panics if `k` is not symmetric to within `1e-12`.
pub fn sym2_eigen(k: &RealMatrix2) -> SymEigen2 {
    assert!(
        (k[(0, 1)] - k[(1, 0)]).abs() <= SYMMETRY_TOL,
        "sym2_eigen: input not symmetric ({} vs {})",
        k[(0, 1)],
        k[(1, 0)]
    );
    let off = 0.5 * (k[(0, 1)] + k[(1, 0)]);
    let mean = 0.5 * (k[(0, 0)] + k[(1, 1)]);
    let half_diff = 0.5 * (k[(0, 0)] - k[(1, 1)]);
    let radius = half_diff.hypot(off);

    // rotation angle of the leading eigenvector
    let theta = 0.5 * (2.0 * off).atan2(k[(0, 0)] - k[(1, 1)]);
    let (s, c) = theta.sin_cos();
    SymEigen2 {
        values: [mean + radius, mean - radius],
        vectors: RealMatrix2::new(c, -s, s, c),
    }
}

/// Per-mode propagator entries `(cos-like, sin-like / w, -w * sin-like)` for
/// `q'' = -k q` over time `t`: the mode map is `[[c, s], [d, c]]`.
fn mode_propagator(k: f64, t: f64) -> (f64, f64, f64) {
    if k > K_TOL {
        let w = k.sqrt();
        let (sn, cs) = (w * t).sin_cos();
        (cs, sn / w, -w * sn)
    } else if k < -K_TOL {
        let w = (-k).sqrt();
        let wt = w * t;
        (wt.cosh(), wt.sinh() / w, w * wt.sinh())
    } else {
        // first order in k around the free-particle map [[1, t], [0, 1]]
        let t2 = t * t;
        (1.0 - 0.5 * k * t2, t - k * t2 * t / 6.0, -k * t)
    }
}

/// Exact flow `e^{tA}` of the generator `A = [[0, I], [-K, 0]]`.
///
/// Each eigendirection of `K` evolves independently with the trigonometric,
/// hyperbolic or free-particle propagator depending on the sign of its
/// eigenvalue.
pub fn hamiltonian_exponential(k: &RealMatrix2, t: f64) -> RealMatrix4 {
    assert!(t >= 0.0, "hamiltonian_exponential: negative time {t}");
    let eig = sym2_eigen(k);
    let v = eig.vector(0);
    let proj = v * v.transpose();
    let (c0, s0, d0) = mode_propagator(eig.values[0], t);
    let (c1, s1, d1) = mode_propagator(eig.values[1], t);
    // f(K) = f1 I + (f0 - f1) P0, exact when both modes coincide
    let block = |f0: f64, f1: f64| RealMatrix2::identity() * f1 + proj * (f0 - f1);
    let cos_block = block(c0, c1);
    let sin_block = block(s0, s1);
    let kick_block = block(d0, d1);
    from_blocks(&cos_block, &sin_block, &kick_block, &cos_block)
}

/// Descending order with a relative tie tolerance of `1e-12`.
fn descending_tol(a: f64, b: f64, scale: f64) -> Ordering {
    if (a - b).abs() <= 1e-12 * scale {
        Ordering::Equal
    } else {
        b.partial_cmp(&a).unwrap_or(Ordering::Equal)
    }
}

fn modulus_order(a: &Complex64, b: &Complex64) -> Ordering {
    let scale = a.norm().max(b.norm()).max(1.0);
    descending_tol(a.norm(), b.norm(), scale)
        .then(descending_tol(a.re, b.re, scale))
        .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

fn adjugate(m: &RealMatrix2) -> RealMatrix2 {
    RealMatrix2::new(m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)])
}

/// Larger-modulus root of `x^2 - b x + c = 0`, computed without cancellation.
fn dominant_root(b: Complex64, c: Complex64) -> Complex64 {
    let disc = (b * b - 4.0 * c).sqrt();
    let plus = b + disc;
    let minus = b - disc;
    if plus.norm() >= minus.norm() {
        plus * 0.5
    } else {
        minus * 0.5
    }
}

/// Spectrum of a 4x4 symplectic matrix.
///
/// Each reciprocal pair `mu, 1/mu` is fixed by `s = mu + 1/mu`, and the two
/// values of `s` are the eigenvalues of `F + F^-1`. With `F` split into
/// per-mode blocks `[[A, B], [C, D]]` this matrix is
/// `[[tr A, W], [adj W, tr D]]` with `W = B + adj C`, so
///
/// `s^2 - (tr A + tr D) s + tr A tr D - det W = 0`,
///
/// whose discriminant `(tr A - tr D)^2 + 4 det W` has no cancellation when
/// the modes decouple. Each `s` then yields the pair solving
/// `mu^2 - s mu + 1 = 0`.
///
/// Eigenvalues come back in descending modulus; equal moduli are ordered
/// by descending real part, then descending imaginary part.
pub fn symplectic_eigenvalues(f: &RealMatrix4) -> Result<[Complex64; 4]> {
    let deviation = SymplecticForm::deviation(f);
    if !(deviation < SYMPLECTIC_TOL) {
        return Err(FloquetError::NonSymplecticInput { deviation });
    }
    // mode blocks in (q1, q2, p1, p2) ordering
    let block = |r: usize, c: usize| RealMatrix2::new(f[(r, c)], f[(r, c + 2)], f[(r + 2, c)], f[(r + 2, c + 2)]);
    let (a, b, c, d) = (block(0, 0), block(0, 1), block(1, 0), block(1, 1));
    let w = b + adjugate(&c);
    let (ta, td, det_w) = (a.trace(), d.trace(), w.determinant());
    let sum = ta + td;
    let disc = (ta - td) * (ta - td) + 4.0 * det_w;
    let (s_big, s_small) = if disc >= 0.0 {
        let big = 0.5 * (sum + disc.sqrt().copysign(sum));
        let small = if big != 0.0 { (ta * td - det_w) / big } else { 0.0 };
        (Complex64::new(big, 0.0), Complex64::new(small, 0.0))
    } else {
        let s = Complex64::new(0.5 * sum, 0.5 * (-disc).sqrt());
        (s, s.conj())
    };

    let one = Complex64::new(1.0, 0.0);
    let mut values = [Complex64::default(); 4];
    for (pair, s) in [s_big, s_small].into_iter().enumerate() {
        let mu = dominant_root(s, one);
        values[2 * pair] = mu;
        values[2 * pair + 1] = mu.inv();
    }
    values.sort_by(modulus_order);
    Ok(values)
}
