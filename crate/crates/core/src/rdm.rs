//! Two-site reduced density matrices: assembly from correlators, basis
//! rotation, and single-site extraction.
//!
//! In the sigma-z product basis (|00>, |01>, |10>, |11>, 0 = up) every
//! model state is an X-state: real, with weight only on the diagonal and
//! the antidiagonal. The rotated matrices are dense complex in general, so
//! states are stored densely regardless of pattern.

use crate::error::StateError;
use crate::spectrum::CorrelatorSet;
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

pub type CMatrix2 = Matrix2<Complex64>;
pub type CMatrix4 = Matrix4<Complex64>;

/// Measurement basis tag: the Pauli axis whose eigenbasis the matrix is
/// written in. Declaration order fixes the canonical sort order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Basis {
    X,
    Y,
    Z,
}

impl Basis {
    pub const ALL: [Basis; 3] = [Basis::X, Basis::Y, Basis::Z];
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "x",
            Basis::Y => "y",
            Basis::Z => "z",
        })
    }
}

impl FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Basis::X),
            "y" => Ok(Basis::Y),
            "z" => Ok(Basis::Z),
            other => Err(format!("unknown basis {other:?}, expected x, y, or z")),
        }
    }
}

/// 4x4 Hermitian density matrix of the site pair (i, i+r).
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteState {
    pub matrix: CMatrix4,
    pub basis: Basis,
    pub r: usize,
}

/// 2x2 Hermitian density matrix of one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleSiteState {
    pub matrix: CMatrix2,
    pub basis: Basis,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Single-qubit unitary whose columns are the target-axis eigenvectors in
/// the sigma-z representation; conjugating with its adjoint re-expresses a
/// matrix in the target eigenbasis.
fn axis_unitary(basis: Basis) -> CMatrix2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match basis {
        Basis::Z => CMatrix2::identity(),
        Basis::X => CMatrix2::new(re(s), re(s), re(s), re(-s)),
        Basis::Y => CMatrix2::new(
            re(s),
            re(s),
            Complex64::new(0.0, s),
            Complex64::new(0.0, -s),
        ),
    }
}

/// Assemble the sigma-z basis two-site state
///
/// ```text
/// rho = [ u+  .   .   x- ]        u+- = 1/4 +- m_z/2 + zz/4
///       [ .   w   x+  .  ]        w   = (1 - zz)/4
///       [ .   x+  w   .  ]        x+- = (xx +- yy)/4
///       [ x-  .   .   u- ]
/// ```
///
/// Fails if the trace leaves 1 by more than 1e-8 or any eigenvalue drops
/// below -1e-8; both indicate broken inputs rather than roundoff.
pub fn build_two_site(c: &CorrelatorSet) -> Result<TwoSiteState, StateError> {
    let u_plus = 0.25 + 0.5 * c.m_z + 0.25 * c.zz;
    let u_minus = 0.25 - 0.5 * c.m_z + 0.25 * c.zz;
    let w = 0.25 * (1.0 - c.zz);
    let x_plus = 0.25 * (c.xx + c.yy);
    let x_minus = 0.25 * (c.xx - c.yy);

    let z = re(0.0);
    #[rustfmt::skip]
    let matrix = CMatrix4::new(
        re(u_plus), z,          z,          re(x_minus),
        z,          re(w),      re(x_plus), z,
        z,          re(x_plus), re(w),      z,
        re(x_minus), z,         z,          re(u_minus),
    );

    let trace = u_plus + u_minus + 2.0 * w;
    if (trace - 1.0).abs() > 1e-8 {
        return Err(StateError::InvalidState(format!(
            "trace {trace} deviates from 1 beyond 1e-8"
        )));
    }
    // closed-form X-state eigenvalues; cheaper than a general solve and
    // exact for this pattern
    let outer = 0.5 * (u_plus + u_minus);
    let outer_split = 0.5 * (u_plus - u_minus).hypot(2.0 * x_minus);
    let inner_low = w - x_plus.abs();
    let min_eig = (outer - outer_split).min(inner_low);
    if min_eig < -1e-8 {
        return Err(StateError::InvalidState(format!(
            "eigenvalue {min_eig:.3e} below -1e-8, state not positive semidefinite"
        )));
    }

    Ok(TwoSiteState {
        matrix,
        basis: Basis::Z,
        r: c.r,
    })
}

/// Re-express the state in the eigenbasis of another Pauli axis on both
/// sites. Eigenvalues (and hence every entropy) are unchanged; only the
/// matrix representation and the tag move.
pub fn rotate_basis(state: &TwoSiteState, target: Basis) -> TwoSiteState {
    if state.basis == target {
        return state.clone();
    }
    let u_from = axis_unitary(state.basis);
    let u_to = axis_unitary(target);
    let big_from = u_from.kronecker(&u_from);
    let big_to = u_to.kronecker(&u_to);
    // operator = U_from rho_from U_from^H; rho_target = U_to^H operator U_to
    let matrix = big_to.adjoint() * big_from * state.matrix * big_from.adjoint() * big_to;
    TwoSiteState {
        matrix,
        basis: target,
        r: state.r,
    }
}

/// Partial trace over the second site.
pub fn single_site(state: &TwoSiteState) -> SingleSiteState {
    let m = &state.matrix;
    let matrix = CMatrix2::new(
        m[(0, 0)] + m[(1, 1)],
        m[(0, 2)] + m[(1, 3)],
        m[(2, 0)] + m[(3, 1)],
        m[(2, 2)] + m[(3, 3)],
    );
    SingleSiteState {
        matrix,
        basis: state.basis,
    }
}

/// Same rotation as [`rotate_basis`] applied to a single site.
pub fn rotate_single_site(state: &SingleSiteState, target: Basis) -> SingleSiteState {
    if state.basis == target {
        return state.clone();
    }
    let u_from = axis_unitary(state.basis);
    let u_to = axis_unitary(target);
    let matrix = u_to.adjoint() * u_from * state.matrix * u_from.adjoint() * u_to;
    SingleSiteState {
        matrix,
        basis: target,
    }
}
