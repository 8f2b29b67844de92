//! Finite-chain solver used as ground truth for the closed-form pipeline.
//!
//! The chain is periodic with N sites, basis states are bit strings where
//! bit i = 0 means site i points up, and the operator acts as
//!
//! ```text
//! H = sum_i  J [ (1+gamma)/2 X_i X_{i+1} + (1-gamma)/2 Y_i Y_{i+1}
//!              + D (X_i Y_{i+1} - Y_i X_{i+1}) ]  -  sum_i Z_i
//! ```
//!
//! written matrix-free: the diagonal counts flipped bits, unequal
//! neighbor bits exchange with weight 2a (a = J/2) carrying the
//! antisymmetric 2b phase (b = J D), equal neighbor bits co-flip with
//! weight 2 a gamma.

use crate::coherence::{qjsd_coherence, CoherenceResult};
use crate::error::{EdError, StateError};
use crate::rdm::{rotate_basis, Basis, CMatrix4, TwoSiteState};
use crate::spectrum::{CorrelatorSet, ModelParams};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const LANCZOS_SEED: u64 = 0x6c61_6e63;
const LANCZOS_TOL: f64 = 1e-11;
const LANCZOS_MAX_ITER: usize = 500;
/// Rows per parallel chunk in the re-orthogonalization update.
const REORTH_CHUNK: usize = 2048;

/// Finite periodic chain: N sites, couplings, and the energy-gap width
/// below which the ground state is treated as degenerate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteChainSpec {
    pub n: usize,
    pub params: ModelParams,
    pub degeneracy_tol: f64,
}

impl FiniteChainSpec {
    pub fn new(n: usize, params: ModelParams) -> Self {
        Self {
            n,
            params,
            degeneracy_tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<(), EdError> {
        if !(4..=14).contains(&self.n) || self.n % 2 != 0 {
            return Err(EdError::InvalidSpec(format!(
                "need an even site count in 4..=14, got {}",
                self.n
            )));
        }
        if !(self.degeneracy_tol.is_finite() && self.degeneracy_tol > 0.0) {
            return Err(EdError::InvalidSpec(format!(
                "degeneracy_tol must be positive, got {}",
                self.degeneracy_tol
            )));
        }
        Ok(())
    }
}

/// Matrix-free Hamiltonian over 2^N basis states.
#[derive(Debug, Clone, Copy)]
pub struct SparseHamiltonian {
    n: usize,
    two_a: f64,
    two_b: f64,
    two_ag: f64,
}

impl SparseHamiltonian {
    pub fn new(spec: &FiniteChainSpec) -> Self {
        let a = spec.params.j / 2.0;
        let b = spec.params.j * spec.params.d;
        Self {
            n: spec.n,
            two_a: 2.0 * a,
            two_b: 2.0 * b,
            two_ag: 2.0 * a * spec.params.gamma,
        }
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Loose upper bound on the operator norm, used for breakdown scales.
    fn norm_bound(&self) -> f64 {
        self.n as f64 * (1.0 + self.two_a.abs() + self.two_b.abs() + self.two_ag.abs())
    }

    /// out = H v.
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        assert_eq!(v.len(), self.dim());
        let n = self.n;
        let mut out = DVector::from_element(self.dim(), Complex64::new(0.0, 0.0));
        for s in 0..self.dim() {
            let amp = v[s];
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            // field term: each up bit contributes -1, each down bit +1
            let diag = (2 * s.count_ones() as i64 - n as i64) as f64;
            out[s] += diag * amp;
            for i in 0..n {
                let j = (i + 1) % n;
                let bi = (s >> i) & 1;
                let bj = (s >> j) & 1;
                let t = s ^ (1 << i) ^ (1 << j);
                if bi != bj {
                    // |01> -> |10> picks up -2ib, the reverse +2ib
                    let dm = if bi == 0 { -self.two_b } else { self.two_b };
                    out[t] += Complex64::new(self.two_a, dm) * amp;
                } else {
                    out[t] += self.two_ag * amp;
                }
            }
        }
        out
    }

    /// Dense matrix assembled column-by-column from `apply`.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = self.dim();
        let mut m = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
        let mut e = DVector::from_element(dim, Complex64::new(0.0, 0.0));
        for c in 0..dim {
            e[c] = Complex64::new(1.0, 0.0);
            m.set_column(c, &self.apply(&e));
            e[c] = Complex64::new(0.0, 0.0);
        }
        m
    }

    /// <v|H|v> for a normalized vector.
    pub fn expectation(&self, v: &DVector<Complex64>) -> f64 {
        v.dotc(&self.apply(v)).re
    }

    /// <v|H^2|v> - <v|H|v>^2; zero for an exact eigenvector.
    pub fn energy_variance(&self, v: &DVector<Complex64>) -> f64 {
        let hv = self.apply(v);
        let e = v.dotc(&hv).re;
        hv.norm_squared() - e * e
    }
}

/// Lowest eigenpair(s). `vectors` holds one normalized state, or the
/// two-member multiplet when `degenerate` is set.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    /// Separation to the next eigenvalue.
    pub gap: f64,
    pub degenerate: bool,
    pub vectors: Vec<DVector<Complex64>>,
    pub iterations: usize,
}

fn random_unit(dim: usize, seed: u64) -> DVector<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);
    v
}

/// Eigenpairs of the symmetric tridiagonal (alphas, betas), sorted
/// ascending. Returns (values, column eigenvectors).
fn tridiag_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alphas.len();
    let t = DMatrix::from_fn(m, m, |r, c| {
        if r == c {
            alphas[r]
        } else if r + 1 == c {
            betas[r]
        } else if c + 1 == r {
            betas[c]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Remove every basis component from w (two classical Gram-Schmidt
/// passes). Dot products and the rank-k update both run in parallel.
fn reorthogonalize(w: &mut DVector<Complex64>, basis: &[DVector<Complex64>]) {
    for _ in 0..2 {
        let coeffs: Vec<Complex64> = basis.par_iter().map(|vi| vi.dotc(w)).collect();
        let ws = w.as_mut_slice();
        ws.par_chunks_mut(REORTH_CHUNK)
            .enumerate()
            .for_each(|(ci, chunk)| {
                let off = ci * REORTH_CHUNK;
                for (vi, c) in basis.iter().zip(&coeffs) {
                    let vs = vi.as_slice();
                    for (t, x) in chunk.iter_mut().enumerate() {
                        *x -= c * vs[off + t];
                    }
                }
            });
    }
}

struct LanczosOutcome {
    values: [f64; 2],
    vectors: [DVector<Complex64>; 2],
    iterations: usize,
}

fn lanczos_lowest_two(h: &SparseHamiltonian) -> Result<LanczosOutcome, EdError> {
    let dim = h.dim();
    let cap = LANCZOS_MAX_ITER.min(dim);
    let breakdown = 1e-13 * h.norm_bound().max(1.0);

    let mut basis: Vec<DVector<Complex64>> = Vec::with_capacity(cap + 1);
    basis.push(random_unit(dim, LANCZOS_SEED));
    let mut alphas: Vec<f64> = Vec::with_capacity(cap);
    let mut betas: Vec<f64> = Vec::with_capacity(cap);
    let mut last_residual = f64::INFINITY;

    for it in 0..cap {
        let mut w = h.apply(&basis[it]);
        if it > 0 {
            let b = Complex64::new(betas[it - 1], 0.0);
            w.axpy(-b, &basis[it - 1], Complex64::new(1.0, 0.0));
        }
        let alpha = basis[it].dotc(&w).re;
        alphas.push(alpha);
        w.axpy(
            Complex64::new(-alpha, 0.0),
            &basis[it],
            Complex64::new(1.0, 0.0),
        );
        reorthogonalize(&mut w, &basis);
        let beta = w.norm();

        let m = alphas.len();
        let exhausted = beta < breakdown;
        if m >= 2 && (m % 5 == 0 || exhausted || it + 1 == cap) {
            let (theta, y) = tridiag_eigen(&alphas, &betas);
            let res = |col: usize| beta * y[(m - 1, col)].abs();
            let ok =
                |col: usize| res(col) <= LANCZOS_TOL * theta[col].abs().max(1.0);
            if (ok(0) && ok(1)) || exhausted {
                let ritz = |col: usize| {
                    let mut x = DVector::from_element(dim, Complex64::new(0.0, 0.0));
                    for (k, vk) in basis.iter().take(m).enumerate() {
                        x.axpy(
                            Complex64::new(y[(k, col)], 0.0),
                            vk,
                            Complex64::new(1.0, 0.0),
                        );
                    }
                    let norm = x.norm();
                    x /= Complex64::new(norm, 0.0);
                    x
                };
                return Ok(LanczosOutcome {
                    values: [theta[0], theta[1]],
                    vectors: [ritz(0), ritz(1)],
                    iterations: it + 1,
                });
            }
            last_residual = res(0).max(res(1));
        }
        if exhausted {
            // Krylov space closed before two Ritz pairs existed
            return Err(EdError::ConvergenceFailure {
                iterations: it + 1,
                residual: beta,
            });
        }
        betas.push(beta);
        let next = &w / Complex64::new(beta, 0.0);
        basis.push(next);
    }
    Err(EdError::ConvergenceFailure {
        iterations: cap,
        residual: last_residual,
    })
}

fn pack_ground_state(
    spec: &FiniteChainSpec,
    values: [f64; 2],
    vectors: [DVector<Complex64>; 2],
    iterations: usize,
) -> GroundState {
    let gap = values[1] - values[0];
    let degenerate = gap.abs() < spec.degeneracy_tol;
    let [v0, v1] = vectors;
    let vectors = if degenerate { vec![v0, v1] } else { vec![v0] };
    GroundState {
        energy: values[0],
        gap,
        degenerate,
        vectors,
        iterations,
    }
}

/// Iterative ground-state solve for any supported N.
pub fn ground_state(spec: &FiniteChainSpec) -> Result<GroundState, EdError> {
    spec.validate()?;
    let h = SparseHamiltonian::new(spec);
    let out = lanczos_lowest_two(&h)?;
    Ok(pack_ground_state(spec, out.values, out.vectors, out.iterations))
}

/// Dense cross-check solve, limited to N <= 10.
pub fn ground_state_dense(spec: &FiniteChainSpec) -> Result<GroundState, EdError> {
    spec.validate()?;
    if spec.n > 10 {
        return Err(EdError::InvalidSpec(format!(
            "dense solve supports N <= 10, got {}",
            spec.n
        )));
    }
    let h = SparseHamiltonian::new(spec);
    let eig = SymmetricEigen::new(h.to_dense());
    let dim = h.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = [eig.eigenvalues[order[0]], eig.eigenvalues[order[1]]];
    let vectors = [
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
    ];
    Ok(pack_ground_state(spec, values, vectors, 0))
}

/// Full sorted spectrum from the dense solver, N <= 10.
pub fn dense_spectrum(spec: &FiniteChainSpec) -> Result<Vec<f64>, EdError> {
    spec.validate()?;
    if spec.n > 10 {
        return Err(EdError::InvalidSpec(format!(
            "dense solve supports N <= 10, got {}",
            spec.n
        )));
    }
    let h = SparseHamiltonian::new(spec);
    let eig = SymmetricEigen::new(h.to_dense());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Spread x by inserting a zero bit at `pos`.
fn insert_zero_bit(x: usize, pos: usize) -> usize {
    let low = x & ((1 << pos) - 1);
    ((x >> pos) << (pos + 1)) | low
}

fn check_state(state: &DVector<Complex64>, n: usize, r: usize) -> Result<(), EdError> {
    if state.len() != (1 << n) {
        return Err(EdError::InvalidSpec(format!(
            "state dimension {} does not match N={n}",
            state.len()
        )));
    }
    if r == 0 || r >= n {
        return Err(EdError::InvalidSpec(format!(
            "separation r={r} must satisfy 1 <= r < N={n}"
        )));
    }
    Ok(())
}

/// Two-site density matrix of sites (i, i+r mod N), tracing out the rest.
/// Row index is b_i * 2 + b_j with bit 0 meaning up.
pub fn two_site_rdm(state: &DVector<Complex64>, n: usize, i: usize, r: usize) -> CMatrix4 {
    let j = (i + r) % n;
    let (p0, p1) = if i < j { (i, j) } else { (j, i) };
    let mut rho = CMatrix4::zeros();
    for m in 0..(1usize << (n - 2)) {
        let base = insert_zero_bit(insert_zero_bit(m, p0), p1);
        let amps: [Complex64; 4] = std::array::from_fn(|idx| {
            let bi = idx >> 1;
            let bj = idx & 1;
            state[base | (bi << i) | (bj << j)]
        });
        for a in 0..4 {
            for b in 0..4 {
                rho[(a, b)] += amps[a] * amps[b].conj();
            }
        }
    }
    rho
}

/// Translation-averaged two-site state at separation r, hermitized.
pub fn oracle_two_site_rdm(
    state: &DVector<Complex64>,
    n: usize,
    r: usize,
) -> Result<TwoSiteState, EdError> {
    check_state(state, n, r)?;
    let mut rho = CMatrix4::zeros();
    for i in 0..n {
        rho += two_site_rdm(state, n, i, r);
    }
    rho /= Complex64::new(n as f64, 0.0);
    let rho = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    Ok(TwoSiteState {
        matrix: rho,
        basis: Basis::Z,
        r,
    })
}

/// Pauli expectations read off the translation-averaged density matrix.
pub fn oracle_correlators(
    state: &DVector<Complex64>,
    n: usize,
    r: usize,
) -> Result<CorrelatorSet, EdError> {
    let rho = oracle_two_site_rdm(state, n, r)?.matrix;
    let p = |a: usize| rho[(a, a)].re;
    Ok(CorrelatorSet {
        r,
        m_z: p(0) + p(1) - p(2) - p(3),
        xx: 2.0 * rho[(0, 3)].re + 2.0 * rho[(1, 2)].re,
        yy: -2.0 * rho[(0, 3)].re + 2.0 * rho[(1, 2)].re,
        zz: p(0) - p(1) - p(2) + p(3),
    })
}

/// Full coherence pipeline on the finite-chain state.
pub fn oracle_coherence(
    state: &DVector<Complex64>,
    n: usize,
    r: usize,
    basis: Basis,
) -> Result<CoherenceResult, EdError> {
    check_state(state, n, r)?;
    let two_site = oracle_two_site_rdm(state, n, r)?;
    qjsd_coherence(&rotate_basis(&two_site, basis)).map_err(|e: StateError| {
        EdError::InvalidSpec(format!("finite-chain state rejected downstream: {e}"))
    })
}
