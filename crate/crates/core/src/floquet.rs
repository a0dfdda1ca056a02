//! Drive protocol, Floquet matrix and stability classification.
//!
//! The second oscillator's frequency is modulated by a square wave: `1 + eps`
//! on the first half of every period, `1 - eps` on the second. The one-period
//! map is therefore the product of two exact quadratic flows.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::linalg::{hamiltonian_exponential, symplectic_eigenvalues, RealMatrix2, RealMatrix4};

/// `mu_L` above this declares instability.
pub const TOL_STAB: f64 = 1e-9;

/// `|Im mu_m| > COMPLEX_TOL * |mu_m|` declares the dominant eigenvalue complex.
pub const COMPLEX_TOL: f64 = 1e-9;

/// Dimensionless model and drive parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Modulation depth of the driven oscillator's frequency.
    pub epsilon: f64,
    /// Drive period in units of `1/omega_0`.
    pub period: f64,
    /// Coupling `Lambda / (m omega_0^2)`.
    pub lambda: f64,
    /// Frequency ratio `omega_1 / omega_0` of the undriven oscillator.
    pub alpha: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self { epsilon: 0.1, period: 3.32, lambda: 0.1, alpha: 1.0 }
    }
}

impl SystemParams {
    pub fn new(epsilon: f64, period: f64, lambda: f64, alpha: f64) -> Result<Self> {
        let p = Self { epsilon, period, lambda, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon < 1.0) {
            return Err(FloquetError::InvalidParams(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(FloquetError::InvalidParams(format!(
                "period must be positive and finite, got {}",
                self.period
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(FloquetError::InvalidParams(format!(
                "alpha must be positive and finite, got {}",
                self.alpha
            )));
        }
        if !self.lambda.is_finite() {
            return Err(FloquetError::InvalidParams(format!(
                "lambda must be finite, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Driven-oscillator frequency on the given half of the period.
    pub fn nu(&self, half: DriveHalf) -> f64 {
        match half {
            DriveHalf::Plus => 1.0 + self.epsilon,
            DriveHalf::Minus => 1.0 - self.epsilon,
        }
    }
}

/// Half of the drive period. The drive starts in `Plus` at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DriveHalf {
    /// `nu = 1 + eps`, `nT <= t < (n + 1/2)T`.
    Plus,
    /// `nu = 1 - eps`, `(n + 1/2)T <= t < (n + 1)T`.
    Minus,
}

impl DriveHalf {
    /// Active half at time `t` (time measured from the start of the drive).
    pub fn at(t: f64, period: f64) -> Self {
        let phase = (t / period).fract();
        if phase < 0.5 {
            DriveHalf::Plus
        } else {
            DriveHalf::Minus
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Stable,
    UnstableReal,
    UnstableComplex,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Stable => "stable",
            Regime::UnstableReal => "unstable_real",
            Regime::UnstableComplex => "unstable_complex",
        }
    }

    pub fn is_unstable(&self) -> bool {
        !matches!(self, Regime::Stable)
    }

    fn classify(mu_l: f64, dominant: Complex64) -> Self {
        if mu_l <= TOL_STAB {
            Regime::Stable
        } else if dominant.im.abs() > COMPLEX_TOL * dominant.norm() {
            Regime::UnstableComplex
        } else {
            Regime::UnstableReal
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetData {
    pub matrix: RealMatrix4,
    /// Spectrum in descending modulus.
    pub eigenvalues: [Complex64; 4],
    /// Lyapunov exponent per stroboscopic step, `log |mu_m|`.
    pub mu_l: f64,
    pub regime: Regime,
}

impl FloquetData {
    /// Eigenvalue of largest modulus.
    pub fn dominant(&self) -> Complex64 {
        self.eigenvalues[0]
    }
}

/// `K = [[alpha^2, lambda], [lambda, nu^2]]` for the given half-period.
pub fn stiffness_matrix(params: &SystemParams, half: DriveHalf) -> RealMatrix2 {
    let nu = params.nu(half);
    RealMatrix2::new(
        params.alpha * params.alpha,
        params.lambda,
        params.lambda,
        nu * nu,
    )
}

/// One-period map `F = e^{T A_-/2} e^{T A_+/2}`.
pub fn floquet_matrix(params: &SystemParams) -> RealMatrix4 {
    let half = 0.5 * params.period;
    let plus = hamiltonian_exponential(&stiffness_matrix(params, DriveHalf::Plus), half);
    let minus = hamiltonian_exponential(&stiffness_matrix(params, DriveHalf::Minus), half);
    minus * plus
}

/// Closed-form one-period map of the driven oscillator alone (`lambda = 0`),
/// acting on `(q, p)`.
pub fn single_oscillator_floquet(epsilon: f64, period: f64) -> RealMatrix2 {
    let nu_p = 1.0 + epsilon;
    let nu_m = 1.0 - epsilon;
    let (sp, cp) = (0.5 * nu_p * period).sin_cos();
    let (sm, cm) = (0.5 * nu_m * period).sin_cos();
    RealMatrix2::new(
        cm * cp - (nu_p / nu_m) * sm * sp,
        sp * cm / nu_p + sm * cp / nu_m,
        -nu_p * sp * cm - nu_m * sm * cp,
        cp * cm - (nu_m / nu_p) * sp * sm,
    )
}

/// Left-hand side minus right-hand side of the single-oscillator
/// instability inequality; positive means unstable.
pub fn instability_margin_single(epsilon: f64, period: f64) -> f64 {
    let e2 = epsilon * epsilon;
    (period.cos() - e2 * (epsilon * period).cos()).abs() - (1.0 - e2)
}

/// `|cos T - eps^2 cos(eps T)| > 1 - eps^2`.
pub fn instability_condition_single(epsilon: f64, period: f64) -> bool {
    instability_margin_single(epsilon, period) > 0.0
}

/// Lyapunov exponent of the driven oscillator alone: `arccosh(|tr F0| / 2)`
/// outside the stable band, 0 inside.
pub fn single_oscillator_mu_l(epsilon: f64, period: f64) -> f64 {
    let half_trace = 0.5 * single_oscillator_floquet(epsilon, period).trace().abs();
    if half_trace > 1.0 {
        half_trace.acosh()
    } else {
        0.0
    }
}

pub fn analyze(params: &SystemParams) -> Result<FloquetData> {
    let matrix = floquet_matrix(params);
    let eigenvalues = symplectic_eigenvalues(&matrix)?;
    let mu_l = eigenvalues[0].norm().ln();
    Ok(FloquetData {
        matrix,
        eigenvalues,
        mu_l,
        regime: Regime::classify(mu_l, eigenvalues[0]),
    })
}

/// Evenly spaced samples on `[start, end]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(start: f64, end: f64, points: usize) -> Result<Self> {
        let axis = Self { start, end, points };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(FloquetError::InvalidRange("axis has zero points".into()));
        }
        if !(self.start.is_finite() && self.end.is_finite()) {
            return Err(FloquetError::InvalidRange(format!(
                "non-finite bounds [{}, {}]",
                self.start, self.end
            )));
        }
        if self.end < self.start || (self.end == self.start && self.points > 1) {
            return Err(FloquetError::InvalidRange(format!(
                "empty or inverted range [{}, {}] with {} points",
                self.start, self.end, self.points
            )));
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.points == 1 {
            self.start
        } else {
            self.start + (self.end - self.start) * (i as f64) / ((self.points - 1) as f64)
        }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.value(i))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRecord {
    pub epsilon: f64,
    pub period: f64,
    /// Zero exactly when below [`TOL_STAB`].
    pub mu_l: f64,
    pub regime: Regime,
}

/// Analyze every `(epsilon, T)` cell of the grid.
///
/// Records are row-major in epsilon with T the fastest axis. Cells are
/// evaluated on the current rayon pool; ordering does not depend on it.
pub fn stability_scan(
    epsilon: &Axis,
    period: &Axis,
    lambda: f64,
    alpha: f64,
) -> Result<Vec<ScanRecord>> {
    epsilon.validate()?;
    period.validate()?;
    if epsilon.start < 0.0 || epsilon.end >= 1.0 {
        return Err(FloquetError::InvalidRange(format!(
            "epsilon range [{}, {}] leaves [0, 1)",
            epsilon.start, epsilon.end
        )));
    }
    if period.start <= 0.0 {
        return Err(FloquetError::InvalidRange(format!(
            "period range must be positive, starts at {}",
            period.start
        )));
    }
    SystemParams::new(epsilon.start, period.start, lambda, alpha)?;

    let cells = epsilon.points * period.points;
    (0..cells)
        .into_par_iter()
        .map(|idx| {
            let eps = epsilon.value(idx / period.points);
            let t = period.value(idx % period.points);
            let data = analyze(&SystemParams { epsilon: eps, period: t, lambda, alpha })?;
            let mu_l = if data.mu_l <= TOL_STAB { 0.0 } else { data.mu_l };
            Ok(ScanRecord { epsilon: eps, period: t, mu_l, regime: data.regime })
        })
        .collect()
}
