//! Classical phase-space orbits: stroboscopic samples and intra-period
//! trajectories.

use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::floquet::{stiffness_matrix, DriveHalf, SystemParams};
use crate::linalg::{hamiltonian_exponential, RealMatrix2, RealMatrix4};

/// Orbits are truncated once any component exceeds this magnitude.
pub const OVERFLOW_LIMIT: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint {
    pub q1: f64,
    pub q2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub const fn new(q1: f64, q2: f64, p1: f64, p2: f64) -> Self {
        Self { q1, q2, p1, p2 }
    }

    /// Excites the undriven oscillator only: `(1, 0, 0, 0)`.
    pub const fn default_initial() -> Self {
        Self::new(1.0, 0.0, 0.0, 0.0)
    }

    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.q1, self.q2, self.p1, self.p2)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn max_abs(&self) -> f64 {
        self.q1.abs().max(self.q2.abs()).max(self.p1.abs()).max(self.p2.abs())
    }

    fn overflowed(&self) -> bool {
        !(self.max_abs() <= OVERFLOW_LIMIT)
    }

    /// `(p.p + q.K.q) / 2`, the Hamiltonian of a half-period with stiffness `K`.
    pub fn energy(&self, k: &RealMatrix2) -> f64 {
        let q = nalgebra::Vector2::new(self.q1, self.q2);
        0.5 * (self.p1 * self.p1 + self.p2 * self.p2 + q.dot(&(k * q)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    /// `x(0), x(1), ...`; shorter than requested when truncated.
    pub points: Vec<PhasePoint>,
    /// Step at which a component first exceeded [`OVERFLOW_LIMIT`].
    pub truncated_at: Option<usize>,
}

/// Iterate `x(k) = F x(k-1)` for `n_steps` steps.
pub fn stroboscopic_orbit(f: &RealMatrix4, x0: PhasePoint, n_steps: usize) -> Orbit {
    let mut points = Vec::with_capacity(n_steps + 1);
    points.push(x0);
    let mut x = x0.to_vector();
    for step in 1..=n_steps {
        x = f * x;
        let point = PhasePoint::from_vector(&x);
        if point.overflowed() {
            return Orbit { points, truncated_at: Some(step) };
        }
        points.push(point);
    }
    Orbit { points, truncated_at: None }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseOrbit {
    /// `(t, x(t))` at `t = k T / samples_per_period`.
    pub samples: Vec<(f64, PhasePoint)>,
    /// Sample index at which the orbit overflowed, if it did.
    pub truncated_at: Option<usize>,
}

impl DenseOrbit {
    pub fn samples_per_period(&self, n_periods: usize) -> usize {
        (self.samples.len() - 1) / n_periods.max(1)
    }
}

/// Propagators for offsets `j * dt`, `j = 1..=half`, with the last entry
/// taken at exactly half a period.
fn half_period_table(k: &RealMatrix2, dt: f64, half: usize, half_period: f64) -> Vec<RealMatrix4> {
    (1..=half)
        .map(|j| {
            let t = if j == half { half_period } else { dt * j as f64 };
            hamiltonian_exponential(k, t)
        })
        .collect()
}

/// Trajectory resolved within each period.
///
/// Samples inside a half-period are obtained by propagating the state at
/// the start of that half with the exact flow of the active stiffness, so
/// half-period boundaries reproduce the stroboscopic composition.
pub fn dense_orbit(
    params: &SystemParams,
    x0: PhasePoint,
    n_periods: usize,
    samples_per_period: usize,
) -> Result<DenseOrbit> {
    params.validate()?;
    if samples_per_period < 2 || !samples_per_period.is_multiple_of(2) {
        return Err(FloquetError::InvalidParams(format!(
            "samples_per_period must be even and >= 2, got {samples_per_period}"
        )));
    }
    let half = samples_per_period / 2;
    let dt = params.period / samples_per_period as f64;
    let half_period = 0.5 * params.period;
    let plus = half_period_table(&stiffness_matrix(params, DriveHalf::Plus), dt, half, half_period);
    let minus = half_period_table(&stiffness_matrix(params, DriveHalf::Minus), dt, half, half_period);

    let mut samples = Vec::with_capacity(n_periods * samples_per_period + 1);
    samples.push((0.0, x0));
    let mut start = x0.to_vector();
    for n in 0..n_periods {
        let period_start = n as f64 * params.period;
        for (offset, table) in [(0.0, &plus), (half_period, &minus)] {
            for (j, propagator) in table.iter().enumerate() {
                let point = PhasePoint::from_vector(&(propagator * start));
                if point.overflowed() {
                    let truncated_at = samples.len();
                    return Ok(DenseOrbit { samples, truncated_at: Some(truncated_at) });
                }
                let t = if j + 1 == half {
                    period_start + offset + half_period
                } else {
                    period_start + offset + dt * (j + 1) as f64
                };
                samples.push((t, point));
            }
            start = samples.last().map(|(_, p)| p.to_vector()).unwrap_or(start);
        }
    }
    Ok(DenseOrbit { samples, truncated_at: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::{analyze, floquet_matrix};
    use approx::assert_relative_eq;

    fn params(epsilon: f64, period: f64, lambda: f64) -> SystemParams {
        SystemParams::new(epsilon, period, lambda, 1.0).unwrap()
    }

    #[test]
    fn identity_map_is_constant() {
        let x0 = PhasePoint::new(0.3, -1.0, 2.0, 0.1);
        let orbit = stroboscopic_orbit(&RealMatrix4::identity(), x0, 5);
        assert_eq!(orbit.points.len(), 6);
        assert!(orbit.points.iter().all(|p| *p == x0));
        assert_eq!(orbit.truncated_at, None);
    }

    #[test]
    fn stable_orbit_stays_bounded() {
        let p = params(0.1, 3.5, 0.1);
        assert!(!analyze(&p).unwrap().regime.is_unstable());
        let orbit = stroboscopic_orbit(&floquet_matrix(&p), PhasePoint::default_initial(), 20_000);
        let bound = orbit.points.iter().map(|x| x.q1.abs()).fold(0.0, f64::max);
        assert!(bound < 10.0, "max |q1| = {bound}");
        assert_eq!(orbit.truncated_at, None);
    }

    #[test]
    fn unstable_growth_rate_approaches_mu_l() {
        let p = params(0.1, 3.32, 0.1);
        let data = analyze(&p).unwrap();
        let orbit = stroboscopic_orbit(&data.matrix, PhasePoint::new(0.4, -0.2, 0.7, 0.1), 2000);
        let last = orbit.points.last().unwrap().to_vector().norm().ln();
        let first = orbit.points[1000].to_vector().norm().ln();
        assert_relative_eq!((last - first) / 1000.0, data.mu_l, max_relative = 1e-6);
    }

    #[test]
    fn overflow_truncates_and_reports() {
        let f = RealMatrix4::identity() * 1e100;
        let orbit = stroboscopic_orbit(&f, PhasePoint::new(1.0, 0.0, 0.0, 0.0), 10);
        assert_eq!(orbit.truncated_at, Some(4));
        assert_eq!(orbit.points.len(), 4);
        assert!(orbit.points.iter().all(|x| x.max_abs().is_finite()));
    }

    #[test]
    fn two_samples_per_period_reproduce_stroboscopic_map() {
        let p = params(0.1, 3.32, 0.1);
        let x0 = PhasePoint::new(0.4, -0.2, 0.7, 0.1);
        let dense = dense_orbit(&p, x0, 30, 2).unwrap();
        let strobe = stroboscopic_orbit(&floquet_matrix(&p), x0, 30);
        assert_eq!(dense.samples.len(), 61);
        for (n, point) in strobe.points.iter().enumerate() {
            let (t, sample) = dense.samples[2 * n];
            assert_relative_eq!(t, n as f64 * p.period, epsilon = 1e-12);
            let diff = (sample.to_vector() - point.to_vector()).norm();
            assert!(diff <= 1e-11 * point.to_vector().norm().max(1.0), "n = {n}: {diff}");
        }
    }

    #[test]
    fn free_motion_of_undriven_oscillator() {
        let p = SystemParams::new(0.0, 2.3, 0.0, 1.7).unwrap();
        let x0 = PhasePoint::new(0.8, 0.1, -0.5, 0.3);
        let dense = dense_orbit(&p, x0, 4, 64).unwrap();
        for (t, x) in &dense.samples {
            let expected = x0.q1 * (p.alpha * t).cos() + x0.p1 * (p.alpha * t).sin() / p.alpha;
            assert!((x.q1 - expected).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn energy_constant_within_each_half() {
        let p = params(0.3, 4.1, 0.25);
        let spp = 40;
        let dense = dense_orbit(&p, PhasePoint::new(0.2, 1.0, -0.4, 0.3), 5, spp).unwrap();
        for period in 0..5 {
            for half in [DriveHalf::Plus, DriveHalf::Minus] {
                let k = stiffness_matrix(&p, half);
                let base = period * spp + if half == DriveHalf::Plus { 0 } else { spp / 2 };
                let e0 = dense.samples[base].1.energy(&k);
                for j in 1..=spp / 2 {
                    let e = dense.samples[base + j].1.energy(&k);
                    assert_relative_eq!(e, e0, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn rejects_odd_sampling() {
        let p = params(0.1, 1.0, 0.1);
        assert!(dense_orbit(&p, PhasePoint::default(), 1, 3).is_err());
        assert!(dense_orbit(&p, PhasePoint::default(), 1, 0).is_err());
    }

    #[test]
    fn zero_initial_condition_stays_zero() {
        let p = params(0.1, 3.32, 0.1);
        let dense = dense_orbit(&p, PhasePoint::default(), 10, 8).unwrap();
        assert!(dense.samples.iter().all(|(_, x)| x.max_abs() == 0.0));
    }
}
