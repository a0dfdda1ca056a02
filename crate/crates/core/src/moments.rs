//! Heisenberg-picture second moments and unequal-time commutators.
//!
//! Starting from the vacuum `|0,0>`, `<X_i^2(n)> = 1/2 sum_j (F^n)_{ij}^2`, and
//! for a quadratic Hamiltonian `[X_i(n), X_j(0)] = i (F^n J)_{ij}` is a
//! c-number. Everything therefore reduces to rows of `F^n`, which grow like
//! `e^{n mu_L}`; rows are propagated with per-step renormalization and a
//! separately accumulated log-scale so nothing overflows.

use std::ops::Range;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::floquet::TOL_STAB;
use crate::linalg::{symplectic_eigenvalues, RealMatrix4};

/// A non-negative quantity stored as `mantissa * exp(log_scale)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    pub mantissa: f64,
    pub log_scale: f64,
}

impl ScaledValue {
    pub fn from_value(value: f64) -> Self {
        Self { mantissa: value, log_scale: 0.0 }
    }

    /// Natural log of the represented value (`-inf` for zero).
    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.log_scale
    }

    /// The represented value; may overflow to `inf`.
    pub fn value(&self) -> f64 {
        self.mantissa * self.log_scale.exp()
    }

    /// `self / other`, with the scales cancelled before exponentiating.
    pub fn ratio(&self, other: &ScaledValue) -> f64 {
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

/// Row `i` of `F^n` as `exp(log_scale) * direction`.
#[derive(Debug, Clone, Copy)]
struct ScaledRow {
    direction: Vector4<f64>,
    log_scale: f64,
}

impl ScaledRow {
    fn unit(i: usize) -> Self {
        let mut direction = Vector4::zeros();
        direction[i] = 1.0;
        Self { direction, log_scale: 0.0 }
    }

    /// `row <- row * F`, given `F^T`.
    fn advance(&mut self, f_transpose: &Matrix4<f64>) {
        self.direction = f_transpose * self.direction;
        let norm = self.direction.norm();
        if norm > 0.0 && norm.is_finite() {
            self.direction /= norm;
            self.log_scale += norm.ln();
        }
    }

    /// `1/2 |row|^2`.
    fn half_norm_sq(&self) -> ScaledValue {
        ScaledValue {
            mantissa: 0.5 * self.direction.norm_squared(),
            log_scale: 2.0 * self.log_scale,
        }
    }

    /// `(row_j)^2`.
    fn entry_sq(&self, j: usize) -> ScaledValue {
        ScaledValue {
            mantissa: self.direction[j] * self.direction[j],
            log_scale: 2.0 * self.log_scale,
        }
    }
}

/// Rows of `F^n` for all four phase-space variables.
#[derive(Debug, Clone)]
struct RowPropagator {
    f_transpose: Matrix4<f64>,
    rows: [ScaledRow; 4],
    step: usize,
}

impl RowPropagator {
    fn new(f: &RealMatrix4) -> Self {
        Self {
            f_transpose: f.transpose(),
            rows: [ScaledRow::unit(0), ScaledRow::unit(1), ScaledRow::unit(2), ScaledRow::unit(3)],
            step: 0,
        }
    }

    fn advance(&mut self) {
        for row in &mut self.rows {
            row.advance(&self.f_transpose);
        }
        self.step += 1;
    }

    fn moments(&self) -> MomentRecord {
        let [q1, q2, p1, p2] = self.rows.map(|r| r.half_norm_sq());
        MomentRecord { n: self.step, q1_sq: q1, q2_sq: q2, p1_sq: p1, p2_sq: p2, r: p1.ratio(&q1) }
    }

    fn otoc(&self) -> OtocRecord {
        OtocRecord { n: self.step, c_qq: self.rows[0].entry_sq(2), c_pq: self.rows[2].entry_sq(2) }
    }
}

/// Second moments of the phase-space operators at stroboscopic step `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRecord {
    pub n: usize,
    pub q1_sq: ScaledValue,
    pub q2_sq: ScaledValue,
    pub p1_sq: ScaledValue,
    pub p2_sq: ScaledValue,
    /// Equipartition ratio `<p1^2> / <q1^2>`.
    pub r: f64,
}

/// Squared unequal-time commutators at stroboscopic step `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OtocRecord {
    pub n: usize,
    /// `|[q1(n), q1(0)]|^2 = ((F^n)_{13})^2`
    pub c_qq: ScaledValue,
    /// `|[p1(n), q1(0)]|^2 = ((F^n)_{33})^2`
    pub c_pq: ScaledValue,
}

/// Vacuum second moments for `n = 0..=n_max`.
pub fn second_moments(f: &RealMatrix4, n_max: usize) -> Vec<MomentRecord> {
    let mut prop = RowPropagator::new(f);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(prop.moments());
    for _ in 0..n_max {
        prop.advance();
        out.push(prop.moments());
    }
    out
}

/// `R(n) = [F^n F^nT]_33 / [F^n F^nT]_11`.
pub fn ratio_r(f: &RealMatrix4, n: usize) -> f64 {
    let mut prop = RowPropagator::new(f);
    for _ in 0..n {
        prop.advance();
    }
    prop.moments().r
}

/// Unequal-time commutators `C_qq`, `C_pq` for `n = 0..=n_max`.
pub fn otoc_series(f: &RealMatrix4, n_max: usize) -> Vec<OtocRecord> {
    let mut prop = RowPropagator::new(f);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(prop.otoc());
    for _ in 0..n_max {
        prop.advance();
        out.push(prop.otoc());
    }
    out
}

fn dominant_eigenvector(f: &RealMatrix4, mu: Complex64) -> Option<Vector4<Complex64>> {
    let fc: Matrix4<Complex64> = f.map(|x| Complex64::new(x, 0.0));
    let shift = mu * (1.0 + 1e-10);
    let lu = (fc - Matrix4::identity() * shift).lu();
    let mut v = Vector4::from_element(Complex64::new(1.0, 0.0));
    for _ in 0..4 {
        v = lu.solve(&v)?;
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        v /= Complex64::new(norm, 0.0);
    }
    Some(v)
}

/// `omega_eff = |u_3| / |u_1|` from the dominant eigenvector `u` of `F`.
///
/// Rows of `F^n` grow as `mu_m^n u_i w^T`, so the long-time ratio
/// `<p1^2>/<q1^2>` converges to `|u_3|^2 / |u_1|^2`.
pub fn effective_frequency(f: &RealMatrix4) -> Result<f64> {
    let spectrum = symplectic_eigenvalues(f)?;
    let mu = spectrum[0];
    let mu_l = mu.norm().ln();
    if mu_l <= TOL_STAB {
        return Err(FloquetError::NotUnstable { mu_l });
    }
    let u = dominant_eigenvector(f, mu).ok_or(FloquetError::DegenerateEigenvector { u1: 0.0 })?;
    let u1 = u[0].norm();
    if u1 < 1e-12 {
        return Err(FloquetError::DegenerateEigenvector { u1 });
    }
    Ok(u[2].norm() / u1)
}

/// Peak-to-peak spread of `R` over the given records.
pub fn ratio_ripple(records: &[MomentRecord]) -> f64 {
    let (lo, hi) = records
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.r), hi.max(r.r)));
    if records.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Least-squares line through `(n, log value)` samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 10;

/// Default fit window: drop the first quarter of the series.
pub fn default_window(len: usize) -> Range<usize> {
    (len / 4)..len
}

/// Fit `log value = slope * n + intercept` over `series[window]`.
pub fn fit_growth_rate(series: &[(f64, f64)], window: Range<usize>) -> Result<GrowthFit> {
    let slice = series.get(window.clone()).unwrap_or(&[]);
    if slice.len() < MIN_FIT_POINTS {
        return Err(FloquetError::InsufficientData { points: slice.len(), required: MIN_FIT_POINTS });
    }
    if slice.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FloquetError::InsufficientData {
            points: slice.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).count(),
            required: slice.len(),
        });
    }
    let count = slice.len() as f64;
    let mean_x = slice.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = slice.iter().map(|p| p.1).sum::<f64>() / count;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in slice {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual_rms = (slice
        .iter()
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum::<f64>()
        / count)
        .sqrt();
    Ok(GrowthFit { slope, intercept, residual_rms, points: slice.len() })
}

/// `(n, ln C)` pairs for one of the commutator series.
pub fn log_series<F>(records: &[OtocRecord], pick: F) -> Vec<(f64, f64)>
where
    F: Fn(&OtocRecord) -> ScaledValue,
{
    records.iter().map(|r| (r.n as f64, pick(r).ln())).collect()
}
