//! Error types shared across the crate.

use thiserror::Error;

/// Failures of the adaptive integrator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    /// The error estimate is still above target after the subdivision
    /// budget is spent. Refine breakpoints or loosen the tolerance.
    #[error("integral did not converge after {subdivisions} subdivisions (error estimate {estimate:.3e}, target {target:.3e})")]
    NonConvergence {
        estimate: f64,
        target: f64,
        subdivisions: usize,
    },
    #[error("invalid integration spec: {0}")]
    InvalidSpec(String),
}

/// Failures of the band-structure layer (parameter validation and
/// anything the integrator reports while evaluating the integrals).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("separation r={0} outside supported range 1..=10")]
    SeparationOutOfRange(usize),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Failures while assembling or consuming density matrices.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    /// Trace or positivity broken beyond numerical tolerance; points at a
    /// calibration or quadrature problem upstream.
    #[error("invalid two-site state: {0}")]
    InvalidState(String),
    #[error("not an X-state: entry ({row},{col}) has off-pattern magnitude {magnitude:.3e}")]
    NotXState {
        row: usize,
        col: usize,
        magnitude: f64,
    },
    /// The Jensen-Shannon radicand came out below the numerical noise
    /// floor, which only happens for inputs that are not density matrices.
    #[error("coherence radicand {0:.3e} below the -1e-12 noise floor")]
    NumericalBreakdown(f64),
}

/// Failures of the sweep and critical-point layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScanError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("slice has {0} valid interior points, need at least 5")]
    TooFewPoints(usize),
    /// Largest second-difference peak does not stand out of the slice
    /// background; there is no transition inside the window.
    #[error("no critical-point signal: peak {peak:.3e} does not exceed 3x median {median:.3e}")]
    NoSignal { peak: f64, median: f64 },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Failures of the finite-chain solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EdError {
    #[error("invalid chain spec: {0}")]
    InvalidSpec(String),
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:.3e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
}
