//! Shared fixtures for the criterion benchmarks. The parameter points sit
//! just off the transition so every code path (gap roots, transverse
//! integrals, full Toeplitz determinants) stays exercised.

use xydm_core::{Calibration, ModelParams};

pub fn near_critical() -> ModelParams {
    ModelParams::new(1.05, 0.5, 0.5).expect("valid params")
}

pub fn deep_ordered() -> ModelParams {
    ModelParams::new(2.0, 0.5, 0.0).expect("valid params")
}

pub fn calibration() -> Calibration {
    Calibration::default()
}
