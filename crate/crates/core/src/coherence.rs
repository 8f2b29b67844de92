//! Square-root Jensen-Shannon coherence.
//!
//! For a state rho with dephased counterpart rho_d (off-diagonals zeroed in
//! the tagged basis),
//!
//! ```text
//! C(rho) = sqrt( S((rho + rho_d)/2) - S(rho)/2 - S(rho_d)/2 )
//! ```
//!
//! with all entropies in bits. X-patterned matrices use closed-form
//! eigenvalues; anything else goes through a Hermitian eigensolver.

use crate::error::StateError;
use crate::rdm::{single_site, Basis, CMatrix2, CMatrix4, SingleSiteState, TwoSiteState};
use nalgebra::SymmetricEigen;

const XPATTERN_TOL: f64 = 1e-12;
/// Radicand more negative than this is not roundoff anymore.
const RADICAND_FLOOR: f64 = -1e-12;

/// Positions that must vanish for the X pattern (upper triangle).
const OFF_PATTERN: [(usize, usize); 4] = [(0, 1), (0, 2), (1, 3), (2, 3)];

fn xpattern_violation(m: &CMatrix4) -> Option<(usize, usize, f64)> {
    OFF_PATTERN
        .iter()
        .map(|&(i, j)| (i, j, m[(i, j)].norm().max(m[(j, i)].norm())))
        .find(|&(_, _, mag)| mag > XPATTERN_TOL)
}

fn xstate_eigenvalues_of(m: &CMatrix4) -> [f64; 4] {
    let outer_mean = 0.5 * (m[(0, 0)].re + m[(3, 3)].re);
    let outer_split = 0.5 * (m[(0, 0)].re - m[(3, 3)].re).hypot(2.0 * m[(0, 3)].norm());
    let inner_mean = 0.5 * (m[(1, 1)].re + m[(2, 2)].re);
    let inner_split = 0.5 * (m[(1, 1)].re - m[(2, 2)].re).hypot(2.0 * m[(1, 2)].norm());
    let mut evs = [
        outer_mean + outer_split,
        outer_mean - outer_split,
        inner_mean + inner_split,
        inner_mean - inner_split,
    ];
    evs.sort_by(|a, b| b.total_cmp(a));
    evs
}

/// Closed-form eigenvalues of an X-patterned two-site state, sorted
/// descending: each antidiagonal pair (rho_11, rho_44, rho_14) and
/// (rho_22, rho_33, rho_23) contributes mean +- sqrt(split^2 + |off|^2).
pub fn xstate_eigenvalues(state: &TwoSiteState) -> Result<[f64; 4], StateError> {
    if let Some((row, col, magnitude)) = xpattern_violation(&state.matrix) {
        return Err(StateError::NotXState {
            row,
            col,
            magnitude,
        });
    }
    Ok(xstate_eigenvalues_of(&state.matrix))
}

/// Shannon entropy in bits of an eigenvalue list; negatives are clamped to
/// zero before the log and 0 log 0 = 0.
pub fn entropy_from_eigenvalues<I: IntoIterator<Item = f64>>(eigenvalues: I) -> f64 {
    let mut s = 0.0;
    for ev in eigenvalues {
        let p = ev.max(0.0);
        if p > 0.0 {
            s -= p * p.log2();
        }
    }
    s
}

/// Von Neumann entropy in bits of a 4x4 Hermitian matrix. X-patterned
/// input takes the closed-form path, everything else an eigensolve.
pub fn entropy(m: &CMatrix4) -> f64 {
    if xpattern_violation(m).is_none() {
        entropy_from_eigenvalues(xstate_eigenvalues_of(m))
    } else {
        let eig = SymmetricEigen::new(*m);
        entropy_from_eigenvalues(eig.eigenvalues.iter().copied())
    }
}

/// Von Neumann entropy in bits of a 2x2 Hermitian matrix (closed form).
pub fn entropy_single(m: &CMatrix2) -> f64 {
    let mean = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let split = 0.5 * (m[(0, 0)].re - m[(1, 1)].re).hypot(2.0 * m[(0, 1)].norm());
    entropy_from_eigenvalues([mean + split, mean - split])
}

/// Projection onto the diagonal of the tagged basis.
pub trait Dephase {
    fn dephase(&self) -> Self;
}

impl Dephase for TwoSiteState {
    fn dephase(&self) -> Self {
        let mut matrix = CMatrix4::zeros();
        for i in 0..4 {
            matrix[(i, i)] = self.matrix[(i, i)];
        }
        Self {
            matrix,
            basis: self.basis,
            r: self.r,
        }
    }
}

impl Dephase for SingleSiteState {
    fn dephase(&self) -> Self {
        let mut matrix = CMatrix2::zeros();
        for i in 0..2 {
            matrix[(i, i)] = self.matrix[(i, i)];
        }
        Self {
            matrix,
            basis: self.basis,
        }
    }
}

/// Coherence value with the three entropies behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceResult {
    pub c: f64,
    /// S(rho), bits.
    pub s_rho: f64,
    /// S(rho_d), bits.
    pub s_diag: f64,
    /// S((rho + rho_d)/2), bits.
    pub s_mix: f64,
    pub basis: Basis,
    pub r: usize,
}

fn coherence_from_entropies(
    s_rho: f64,
    s_diag: f64,
    s_mix: f64,
    basis: Basis,
    r: usize,
) -> Result<CoherenceResult, StateError> {
    let radicand = s_mix - 0.5 * (s_rho + s_diag);
    if radicand < RADICAND_FLOOR {
        return Err(StateError::NumericalBreakdown(radicand));
    }
    Ok(CoherenceResult {
        c: radicand.max(0.0).sqrt(),
        s_rho,
        s_diag,
        s_mix,
        basis,
        r,
    })
}

/// Coherence of a two-site state in its tagged basis.
///
/// All three entropies go through the same evaluation path, so an exactly
/// diagonal input gives radicand 0 bitwise rather than last-ulp noise that
/// the square root would amplify.
pub fn qjsd_coherence(state: &TwoSiteState) -> Result<CoherenceResult, StateError> {
    let dephased = state.dephase();
    let s_rho = entropy(&state.matrix);
    let s_diag = entropy(&dephased.matrix);
    let mix = (state.matrix + dephased.matrix).scale(0.5);
    let s_mix = entropy(&mix);
    coherence_from_entropies(s_rho, s_diag, s_mix, state.basis, state.r)
}

/// Coherence of the single-site marginal of a two-site state, in the same
/// basis; the r tag is inherited from the parent pair.
pub fn single_site_coherence(state: &TwoSiteState) -> Result<CoherenceResult, StateError> {
    let one = single_site(state);
    let dephased = one.dephase();
    let s_rho = entropy_single(&one.matrix);
    let s_diag = entropy_single(&dephased.matrix);
    let mix = (one.matrix + dephased.matrix).scale(0.5);
    let s_mix = entropy_single(&mix);
    coherence_from_entropies(s_rho, s_diag, s_mix, state.basis, state.r)
}
