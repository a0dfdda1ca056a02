//! Two-mode Gaussian wavefunction `N exp(-x.Omega.x / 2)` and the reduced
//! density matrix of the undriven oscillator.
//!
//! `Omega` obeys the matrix Riccati equation `i dOmega/dt = Omega^2 - K(t)`.
//! Writing `Omega = -i M N^{-1}` linearizes it: `(N; M)` evolves under the
//! same generator `[[0, I], [-K, 0]]` as the classical phase-space vector,
//! so each half-period is one application of the exact flow.
//!
//! In the unstable regime `Re Omega` decays like `exp(-2 n mu_L)` while
//! `Im Omega` stays of order one, so `Re Omega` cannot be read off
//! `M N^{-1}` directly. The propagator keeps the frame orthonormal and
//! carries a factor `L` with `(2 Re Omega)^{-1} = N L L^H N^H`, which gives
//! `Re Omega` and its determinant to full relative precision.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FloquetError, Result};
use crate::floquet::{stiffness_matrix, DriveHalf, SystemParams};
use crate::linalg::{hamiltonian_exponential, ComplexMatrix2, RealMatrix2, RealMatrix4};

/// `|det N|` below this is treated as a singular frame.
pub const SINGULAR_N_TOL: f64 = 1e-300;

/// RK4 gives up once any entry of `Omega` exceeds this magnitude.
pub const RK4_MAGNITUDE_LIMIT: f64 = 1e150;

/// `Re chi / eta` values down to `1 - THERMAL_TOL` are accepted as thermal.
pub const THERMAL_TOL: f64 = 1e-9;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPureState {
    /// `[[a, c], [c, b]]`.
    pub omega: ComplexMatrix2,
    /// `log |N|`.
    pub log_norm: f64,
}

impl GaussianPureState {
    /// Build a state from `Omega`, computing the normalization.
    pub fn new(omega: ComplexMatrix2) -> Result<Self> {
        let omega = symmetrized(&omega);
        let mut state = Self { omega, log_norm: 0.0 };
        state.log_norm = normalize(&state)?;
        Ok(state)
    }

    pub fn a(&self) -> Complex64 {
        self.omega[(0, 0)]
    }

    pub fn b(&self) -> Complex64 {
        self.omega[(1, 1)]
    }

    pub fn c(&self) -> Complex64 {
        self.omega[(0, 1)]
    }

    pub fn re_omega(&self) -> RealMatrix2 {
        self.omega.map(|z| z.re)
    }

    /// `log det Re Omega`, consistent with `log_norm`.
    pub fn log_det_re_omega(&self) -> f64 {
        4.0 * self.log_norm + 2.0 * PI.ln()
    }

    /// `max(|a|, |b|, |c|)`.
    pub fn max_abs(&self) -> f64 {
        self.a().norm().max(self.b().norm()).max(self.c().norm())
    }

    /// Largest of `|da|, |db|, |dc|` against another state.
    pub fn max_param_diff(&self, other: &GaussianPureState) -> f64 {
        (self.a() - other.a())
            .norm()
            .max((self.b() - other.b()).norm())
            .max((self.c() - other.c()).norm())
    }

    /// Wavefunction value at `(q1, q2)` up to the global phase of `N`.
    pub fn amplitude(&self, q1: f64, q2: f64) -> Complex64 {
        let quad = self.a() * q1 * q1 + self.b() * q2 * q2 + self.c() * (2.0 * q1 * q2);
        (c(self.log_norm) - quad * 0.5).exp()
    }
}

fn symmetrized(omega: &ComplexMatrix2) -> ComplexMatrix2 {
    let off = (omega[(0, 1)] + omega[(1, 0)]) * 0.5;
    ComplexMatrix2::new(omega[(0, 0)], off, off, omega[(1, 1)])
}

/// Ground state of the undriven, uncoupled pair: `a = alpha`, `b = 1`, `c = 0`.
pub fn initial_state(alpha: f64) -> GaussianPureState {
    assert!(alpha > 0.0, "initial_state: alpha must be positive, got {alpha}");
    let omega = ComplexMatrix2::new(c(alpha), c(0.0), c(0.0), c(1.0));
    GaussianPureState { omega, log_norm: 0.25 * alpha.ln() - 0.5 * PI.ln() }
}

/// `log |N|` from `|N|^2 = sqrt(det Re Omega) / pi`.
pub fn normalize(state: &GaussianPureState) -> Result<f64> {
    let re = state.re_omega();
    let det = re.determinant();
    if !(det > 0.0 && re[(0, 0)] > 0.0) {
        return Err(FloquetError::NonNormalizable { det });
    }
    Ok(0.25 * det.ln() - 0.5 * PI.ln())
}

/// Linearized Riccati flow: the frame `(N; M)` and the covariance factor.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiPropagatorState {
    pub n_block: ComplexMatrix2,
    pub m_block: ComplexMatrix2,
    /// Direction of `L`, max-entry normalized.
    spread: ComplexMatrix2,
    /// `L = exp(log_spread) * spread`.
    log_spread: f64,
    /// `log |det L|`.
    log_det_spread: f64,
}

impl RiccatiPropagatorState {
    pub fn new(state: &GaussianPureState) -> Result<Self> {
        let re = state.re_omega();
        let det = re.determinant();
        if !(det > 0.0 && re[(0, 0)] > 0.0) {
            return Err(FloquetError::NonNormalizable { det });
        }
        // Cholesky factor of (Re Omega)^{-1}
        let inv = RealMatrix2::new(re[(1, 1)], -re[(0, 1)], -re[(1, 0)], re[(0, 0)]) / det;
        let l00 = inv[(0, 0)].sqrt();
        let l10 = inv[(1, 0)] / l00;
        let l11 = (inv[(1, 1)] - l10 * l10).sqrt();
        let spread = ComplexMatrix2::new(c(l00), c(0.0), c(l10), c(l11));
        let mut frame = Self {
            n_block: ComplexMatrix2::identity(),
            m_block: state.omega * I,
            spread,
            log_spread: 0.0,
            log_det_spread: -0.5 * det.ln(),
        };
        frame.rescale_spread();
        Ok(frame)
    }

    fn rescale_spread(&mut self) {
        let m = self.spread.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m > 0.0 && m.is_finite() {
            self.spread /= c(m);
            self.log_spread += m.ln();
        }
    }

    /// `(N; M) <- E (N; M)` for a real 4x4 propagator `E`.
    pub fn apply(&mut self, e: &RealMatrix4) {
        let block = |r: usize, col: usize| -> ComplexMatrix2 {
            e.fixed_view::<2, 2>(r, col).into_owned().map(c)
        };
        let n = block(0, 0) * self.n_block + block(0, 2) * self.m_block;
        let m = block(2, 0) * self.n_block + block(2, 2) * self.m_block;
        self.n_block = n;
        self.m_block = m;
    }

    fn column(&self, j: usize) -> [Complex64; 4] {
        [self.n_block[(0, j)], self.n_block[(1, j)], self.m_block[(0, j)], self.m_block[(1, j)]]
    }

    fn set_column(&mut self, j: usize, v: [Complex64; 4]) {
        self.n_block[(0, j)] = v[0];
        self.n_block[(1, j)] = v[1];
        self.m_block[(0, j)] = v[2];
        self.m_block[(1, j)] = v[3];
    }

    /// Gram-Schmidt on the two columns of `(N; M)`. `Omega` is unchanged;
    /// the triangular factor is folded into `L`.
    pub fn reorthonormalize(&mut self) -> Result<()> {
        let x1 = self.column(0);
        let x2 = self.column(1);
        let norm = |v: &[Complex64; 4]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let r11 = norm(&x1);
        let q1 = x1.map(|z| z / r11);
        let r12: Complex64 = q1.iter().zip(x2.iter()).map(|(a, b)| a.conj() * b).sum();
        let mut y = x2;
        for (yk, qk) in y.iter_mut().zip(q1.iter()) {
            *yk -= r12 * qk;
        }
        let r22 = norm(&y);
        if !(r11 > 0.0 && r22 > 0.0 && r11.is_finite() && r22.is_finite()) {
            return Err(FloquetError::SingularN { det: r11 * r22 });
        }
        self.set_column(0, q1);
        self.set_column(1, y.map(|z| z / r22));

        let r = ComplexMatrix2::new(c(r11), r12, c(0.0), c(r22));
        self.spread = r * self.spread;
        self.log_det_spread += (r11 * r22).ln();
        self.rescale_spread();
        Ok(())
    }

    /// Reconstruct `Omega` and `log |N|` from the frame.
    pub fn state(&self) -> Result<GaussianPureState> {
        let n = &self.n_block;
        let det_n = n[(0, 0)] * n[(1, 1)] - n[(0, 1)] * n[(1, 0)];
        let abs_det = det_n.norm();
        if !(abs_det >= SINGULAR_N_TOL) {
            return Err(FloquetError::SingularN { det: abs_det });
        }
        let n_inv = ComplexMatrix2::new(n[(1, 1)], -n[(0, 1)], -n[(1, 0)], n[(0, 0)]) / det_n;
        let w = self.m_block * n_inv;

        // (2 Re Omega)^{-1} = N L L^H N^H = exp(2 log_spread) * G
        let p = n * self.spread;
        let g = (p * p.adjoint()).map(|z| z.re);
        let log_det_two_cov = 2.0 * abs_det.ln() + 2.0 * self.log_det_spread;
        let factor = (2.0 * self.log_spread - log_det_two_cov).exp();
        let off = -0.5 * (g[(0, 1)] + g[(1, 0)]) * factor;
        let re = RealMatrix2::new(g[(1, 1)] * factor, off, off, g[(0, 0)] * factor);
        if !(re[(0, 0)] > 0.0 && re[(1, 1)] > 0.0 && re.iter().all(|x| x.is_finite())) {
            return Err(FloquetError::NonNormalizable { det: (-log_det_two_cov).exp() });
        }

        // Im Omega = -Re(M N^{-1})
        let im_off = -0.5 * (w[(0, 1)].re + w[(1, 0)].re);
        let omega = ComplexMatrix2::new(
            Complex64::new(re[(0, 0)], -w[(0, 0)].re),
            Complex64::new(re[(0, 1)], im_off),
            Complex64::new(re[(1, 0)], im_off),
            Complex64::new(re[(1, 1)], -w[(1, 1)].re),
        );
        Ok(GaussianPureState { omega, log_norm: -0.25 * log_det_two_cov - 0.5 * PI.ln() })
    }
}

/// Evolve a state for time `t` under constant stiffness `k`.
pub fn propagate(state: &GaussianPureState, k: &RealMatrix2, t: f64) -> Result<GaussianPureState> {
    let mut frame = RiccatiPropagatorState::new(state)?;
    frame.apply(&hamiltonian_exponential(k, t));
    frame.reorthonormalize()?;
    frame.state()
}

/// Stroboscopic states `Psi(nT)`, `n = 0..=n_periods`, from the exact flow.
pub fn evolve_exact(
    state: &GaussianPureState,
    params: &SystemParams,
    n_periods: usize,
) -> Result<Vec<GaussianPureState>> {
    params.validate()?;
    let half = 0.5 * params.period;
    let plus = hamiltonian_exponential(&stiffness_matrix(params, DriveHalf::Plus), half);
    let minus = hamiltonian_exponential(&stiffness_matrix(params, DriveHalf::Minus), half);

    let mut frame = RiccatiPropagatorState::new(state)?;
    let mut out = Vec::with_capacity(n_periods + 1);
    out.push(frame.state()?);
    for _ in 0..n_periods {
        frame.apply(&plus);
        frame.apply(&minus);
        frame.reorthonormalize()?;
        out.push(frame.state()?);
    }
    Ok(out)
}

/// Right-hand side of the Riccati system: `(dOmega/dt, d log|N| / dt)`.
fn riccati_rhs(omega: &ComplexMatrix2, k: &ComplexMatrix2) -> (ComplexMatrix2, f64) {
    let d_omega = (omega * omega - k) * (-I);
    // i dN/dt = N (a + b) / 2
    let d_log_norm = 0.5 * (omega[(0, 0)].im + omega[(1, 1)].im);
    (d_omega, d_log_norm)
}

/// Fixed-step RK4 integration of the Riccati system, stroboscopic output.
///
/// `log |N|` is integrated alongside `Omega` rather than recomputed.
pub fn evolve_rk4(
    state: &GaussianPureState,
    params: &SystemParams,
    n_periods: usize,
    steps_per_period: usize,
) -> Result<Vec<GaussianPureState>> {
    params.validate()?;
    if steps_per_period < 100 || !steps_per_period.is_multiple_of(2) {
        return Err(FloquetError::InvalidParams(format!(
            "steps_per_period must be even and >= 100, got {steps_per_period}"
        )));
    }
    let h = params.period / steps_per_period as f64;
    let halves = [
        stiffness_matrix(params, DriveHalf::Plus).map(c),
        stiffness_matrix(params, DriveHalf::Minus).map(c),
    ];

    let mut omega = state.omega;
    let mut log_norm = state.log_norm;
    let mut out = Vec::with_capacity(n_periods + 1);
    out.push(*state);
    for period in 0..n_periods {
        for k in &halves {
            for _ in 0..steps_per_period / 2 {
                let (k1, l1) = riccati_rhs(&omega, k);
                let (k2, l2) = riccati_rhs(&(omega + k1 * c(0.5 * h)), k);
                let (k3, l3) = riccati_rhs(&(omega + k2 * c(0.5 * h)), k);
                let (k4, l4) = riccati_rhs(&(omega + k3 * c(h)), k);
                omega += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(h / 6.0);
                log_norm += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
            }
        }
        let magnitude = omega
            .iter()
            .map(|z| z.norm())
            .fold(0.0, |m: f64, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) });
        if !(magnitude <= RK4_MAGNITUDE_LIMIT) {
            return Err(FloquetError::StepRejected { period: period + 1, magnitude });
        }
        out.push(GaussianPureState { omega: symmetrized(&omega), log_norm });
    }
    Ok(out)
}

/// Reduced density matrix of oscillator 1,
/// `<x| rho_1 |y> = |N|^2 sqrt(2 pi / mu) exp(-(chi x^2 + chi* y^2 - 2 eta x y) / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedGaussianDM {
    /// `2 Re b`
    pub mu: f64,
    /// `|c|^2 / mu`
    pub eta: f64,
    /// `a - c^2 / mu`
    pub chi: Complex64,
    /// `Re chi - eta`, evaluated as `det Re Omega / Re b` to avoid cancellation.
    pub gap: f64,
}

impl ReducedGaussianDM {
    /// From `(mu, eta, chi)` directly; `gap` is formed by subtraction.
    pub fn new(mu: f64, eta: f64, chi: Complex64) -> Self {
        Self { mu, eta, chi, gap: chi.re - eta }
    }

    /// `eta / Re chi`; 0 for a pure state, 1 in the infinite-temperature limit.
    pub fn eta_over_re_chi(&self) -> f64 {
        self.eta / (self.eta + self.gap)
    }

    /// `Re chi + eta`.
    fn re_chi_plus_eta(&self) -> f64 {
        self.chi.re + self.eta
    }

    /// `<q1^2>` from the diagonal `rho_1(q, q) ~ exp(-(Re chi - eta) q^2)`.
    pub fn position_variance(&self) -> f64 {
        0.5 / self.gap
    }

    /// `|Im chi| / |chi|`: distance from the real thermal kernel.
    pub fn thermal_residual(&self) -> f64 {
        self.chi.im.abs() / self.chi.norm()
    }

    /// Matrix element `<x| rho_1 |y>` given the source state's `log |N|`.
    pub fn kernel(&self, log_norm: f64, x: f64, y: f64) -> Complex64 {
        let prefactor = 2.0 * log_norm + 0.5 * (2.0 * PI / self.mu).ln();
        let exponent = self.chi * x * x + self.chi.conj() * y * y - c(2.0 * self.eta * x * y);
        (c(prefactor) - exponent * 0.5).exp()
    }
}

pub fn reduce(state: &GaussianPureState) -> ReducedGaussianDM {
    let (a, b, cc) = (state.a(), state.b(), state.c());
    let mu = 2.0 * b.re;
    let eta = cc.norm_sqr() / mu;
    let chi = a - cc * cc / mu;
    let gap = state.log_det_re_omega().exp() / b.re;
    ReducedGaussianDM { mu, eta, chi, gap }
}

/// `log Tr rho_1^2`, from
/// `Tr rho_1^2 = 2 pi^2 |N|^4 / (mu sqrt(Re chi^2 - eta^2))`.
pub fn log_purity(dm: &ReducedGaussianDM, log_norm: f64) -> f64 {
    // Re chi + eta = Re a + 2 (Im c)^2 / mu; both terms positive
    2.0f64.ln() + 2.0 * PI.ln() + 4.0 * log_norm
        - dm.mu.ln()
        - 0.5 * (dm.gap.ln() + dm.re_chi_plus_eta().ln())
}

/// `S_lin = 1 - Tr rho_1^2`, evaluated in log space.
pub fn linear_entropy(dm: &ReducedGaussianDM, log_norm: f64) -> f64 {
    (-log_purity(dm, log_norm).exp_m1()).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalFit {
    /// Inverse temperature in units of `1 / (hbar omega_0)`.
    pub beta: f64,
    /// `|Im chi| / |chi|`.
    pub residual: f64,
}

/// Match `rho_1` to a thermal oscillator kernel: `cosh(beta omega_eff) = Re chi / eta`.
pub fn effective_beta(dm: &ReducedGaussianDM, omega_eff: f64) -> Result<ThermalFit> {
    if !(omega_eff > 0.0 && omega_eff.is_finite()) {
        return Err(FloquetError::InvalidParams(format!(
            "omega_eff must be positive, got {omega_eff}"
        )));
    }
    if dm.eta == 0.0 {
        return Err(FloquetError::Undefined);
    }
    // Re chi / eta - 1
    let excess = dm.gap / dm.eta;
    if excess < -THERMAL_TOL {
        return Err(FloquetError::NotThermalForm { ratio: 1.0 + excess });
    }
    let beta = if excess <= 0.0 {
        0.0
    } else {
        // arccosh(1 + x) = log1p(x + sqrt(x (2 + x)))
        (excess + (excess * (2.0 + excess)).sqrt()).ln_1p() / omega_eff
    };
    Ok(ThermalFit { beta, residual: dm.thermal_residual() })
}
