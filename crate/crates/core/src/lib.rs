//! Quantum coherence of the anisotropic XY chain with a
//! Dzyaloshinsky-Moriya interaction, in the thermodynamic limit, with a
//! finite-chain solver as independent ground truth.
//!
//! The pipeline runs quadrature -> spectrum (magnetization, fermionic
//! contractions, Toeplitz correlators) -> rdm (two-site X state, basis
//! rotations) -> coherence (square-root Jensen-Shannon divergence) ->
//! scan (coupling grids, finite-difference derivatives, critical-point
//! detection). The ed module diagonalizes short periodic chains directly
//! and feeds the same state machinery, which is how the closed forms are
//! cross-checked.

pub mod coherence;
pub mod ed;
pub mod error;
pub mod quadrature;
pub mod rdm;
pub mod scan;
pub mod spectrum;

pub use coherence::{
    entropy, entropy_from_eigenvalues, entropy_single, qjsd_coherence, single_site_coherence,
    xstate_eigenvalues, CoherenceResult, Dephase,
};
pub use ed::{
    dense_spectrum, ground_state, ground_state_dense, oracle_coherence, oracle_correlators,
    oracle_two_site_rdm, two_site_rdm, FiniteChainSpec, GroundState, SparseHamiltonian,
};
pub use error::{EdError, QuadratureError, ScanError, SpectrumError, StateError};
pub use quadrature::{gap_roots, integrate, IntegrationSpec};
pub use rdm::{
    build_two_site, rotate_basis, rotate_single_site, single_site, Basis, CMatrix2, CMatrix4,
    SingleSiteState, TwoSiteState,
};
pub use scan::{
    central_differences, detect_critical_point, sharpness_ordering, sharpness_vs_d,
    sharpness_vs_r, sweep, CriticalPointEstimate, OrderingReport, SweepRow, SweepSpec, SweepTable,
};
pub use spectrum::{
    correlator_set, delta, greens_fn, ising_specialization_check, magnetization, Calibration,
    CorrelatorSet, GreensVector, IsingCheck, ModelParams,
};
