//! CHSH-Bell function of X-form states.
//!
//! [`chsh`] evaluates the two-branch formula
//!
//! ```text
//! B1 = 2 sqrt(4|u23|² + (u11 − u22 − u33)²)
//! B2 = 2 sqrt(2|u23|²)
//! ```
//!
//! exactly as published for this model. [`chsh_horodecki`] is the general
//! criterion `2 sqrt(m1 + m2)` over the two largest eigenvalues of `TᵀT`,
//! where `T` is the spin correlation matrix. For these states the transverse
//! branch of the general criterion is `2 sqrt(8|u23|²)`, a factor two above
//! the published `B2` inside the root; both are kept and the published one
//! never exceeds the criterion.

use nalgebra::{Matrix2, Matrix3, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::Mat4;
use crate::states::{x_form_deviation, TwoQubitState, XFORM_TOL};

pub const TSIRELSON: f64 = 2.0 * std::f64::consts::SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChshBranch {
    B1,
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshResult {
    pub value: f64,
    pub branch: ChshBranch,
}

pub fn chsh(state: &TwoQubitState) -> Result<ChshResult> {
    let dev = x_form_deviation(state.matrix());
    if dev > XFORM_TOL {
        return Err(Error::NotXForm(format!("forbidden entry of size {dev:e}")));
    }
    let coh = state.u23().norm_sqr();
    let z = state.u11() - state.u22() - state.u33();
    let b1 = 2.0 * (4.0 * coh + z * z).sqrt();
    let b2 = 2.0 * (2.0 * coh).sqrt();
    Ok(if b2 > b1 {
        ChshResult {
            value: b2,
            branch: ChshBranch::B2,
        }
    } else {
        ChshResult {
            value: b1,
            branch: ChshBranch::B1,
        }
    })
}

fn paulis() -> [Matrix2<Complex64>; 3] {
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::new(o, one, one, o),
        Matrix2::new(o, -i, i, o),
        Matrix2::new(one, o, o, -one),
    ]
}

fn kron(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `T_ij = Tr[ρ σ_i ⊗ σ_j]`.
pub(crate) fn correlation_matrix(rho: &Mat4) -> Matrix3<f64> {
    let s = paulis();
    Matrix3::from_fn(|i, j| (rho * kron(&s[i], &s[j])).trace().re)
}

/// Maximal CHSH value of an arbitrary two-qubit state.
pub fn chsh_horodecki(rho: &Mat4) -> f64 {
    let t = correlation_matrix(rho);
    let mut m = SymmetricEigen::new(t.transpose() * t).eigenvalues;
    m.as_mut_slice().sort_by(|a, b| b.total_cmp(a));
    2.0 * (m[0] + m[1]).max(0.0).sqrt()
}
