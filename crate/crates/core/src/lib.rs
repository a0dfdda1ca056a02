//! Floquet analysis of two linearly coupled oscillators, one of which has a
//! square-wave modulated frequency.
//!
//! The crate covers the classical stroboscopic map and its stability
//! diagram, Heisenberg-picture second moments and unequal-time commutators,
//! and the exact evolution of the two-mode Gaussian wavefunction together
//! with the reduced density matrix of the undriven oscillator.

pub mod classical;
pub mod error;
pub mod floquet;
pub mod gaussian;
pub mod linalg;
pub mod moments;
#[cfg(feature = "oracles")]
pub mod oracles;

pub use classical::{dense_orbit, stroboscopic_orbit, DenseOrbit, Orbit, PhasePoint};
pub use error::{FloquetError, Result};
pub use floquet::{
    analyze, floquet_matrix, instability_condition_single, single_oscillator_floquet,
    single_oscillator_mu_l,
    stability_scan, stiffness_matrix, Axis, DriveHalf, FloquetData, Regime, ScanRecord,
    SystemParams, TOL_STAB,
};
pub use gaussian::{
    effective_beta, evolve_exact, evolve_rk4, initial_state, linear_entropy, log_purity, normalize, propagate,
    reduce, GaussianPureState, ReducedGaussianDM, RiccatiPropagatorState, ThermalFit,
};
pub use linalg::{
    hamiltonian_exponential, sym2_eigen, symplectic_eigenvalues, ComplexMatrix2, RealMatrix2,
    RealMatrix4, SymplecticForm,
};
pub use moments::{
    effective_frequency, fit_growth_rate, otoc_series, ratio_r, second_moments, GrowthFit,
    MomentRecord, OtocRecord, ScaledValue,
};
