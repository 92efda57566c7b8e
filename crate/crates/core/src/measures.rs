//! Density-matrix functionals: Uhlmann fidelity, trace distance, von Neumann
//! and relative entropies (in bits), and the closed-form fidelities between
//! the initial and evolved reduced states.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{excitation_probabilities, ModelParams};
use crate::error::{Error, Result};
use crate::linalg::{apply_spectral, eigh, eigvalsh, entropy_bits, Mat4, ZERO_EIGENVALUE};
use crate::states::{Partition, PSD_TOL};

/// Default eigenvalue threshold deciding the support of the second argument
/// of [`relative_entropy`].
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

/// Closed-form fidelity labels, one per intra-subsystem or equivalent partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FidelityIndex {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
}

impl FidelityIndex {
    pub const ALL: [FidelityIndex; 6] = [
        FidelityIndex::F1,
        FidelityIndex::F2,
        FidelityIndex::F3,
        FidelityIndex::F4,
        FidelityIndex::F5,
        FidelityIndex::F6,
    ];

    pub fn partition(self) -> Partition {
        match self {
            FidelityIndex::F1 => Partition::AtomAtom,
            FidelityIndex::F2 => Partition::CavityCavity,
            FidelityIndex::F3 => Partition::ReservoirReservoir,
            FidelityIndex::F4 => Partition::AtomCavityIntra,
            FidelityIndex::F5 => Partition::AtomReservoirIntra,
            FidelityIndex::F6 => Partition::CavityReservoirIntra,
        }
    }

    pub fn for_partition(partition: Partition) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.partition() == partition)
    }
}

impl fmt::Display for FidelityIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for FidelityIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|i| i.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown fidelity index '{s}', expected F1..F6")))
    }
}

fn sqrt_clamped(x: f64) -> f64 {
    if x > ZERO_EIGENVALUE {
        x.sqrt()
    } else {
        0.0
    }
}

fn check_psd(min_eig: f64) -> Result<()> {
    if min_eig < -PSD_TOL {
        Err(Error::NotPsd(min_eig))
    } else {
        Ok(())
    }
}

/// Uhlmann fidelity `(Tr √(√ρ1 ρ2 √ρ1))²`.
pub fn fidelity(rho1: &Mat4, rho2: &Mat4) -> Result<f64> {
    let (w1, v1) = eigh(rho1);
    check_psd(w1.min())?;
    check_psd(eigvalsh(rho2).min())?;

    let root = apply_spectral(&w1, &v1, sqrt_clamped);
    let inner = root * rho2 * root;
    let trace_root: f64 = eigvalsh(&inner).iter().map(|&x| sqrt_clamped(x)).sum();
    Ok((trace_root * trace_root).clamp(0.0, 1.0))
}

/// `½ ‖ρ1 − ρ2‖₁`.
pub fn trace_distance(rho1: &Mat4, rho2: &Mat4) -> f64 {
    let diff = rho1 - rho2;
    let total: f64 = eigvalsh(&diff).iter().map(|x| x.abs()).sum();
    (0.5 * total).clamp(0.0, 1.0)
}

/// `−Σ λ log₂ λ` over the spectrum.
pub fn von_neumann_entropy(rho: &Mat4) -> f64 {
    entropy_bits(eigvalsh(rho).iter().copied())
}

/// Quantum relative entropy in bits, or [`RelativeEntropy::Infinite`] when
/// the support of `rho` leaves the support of `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelativeEntropy {
    Finite(f64),
    Infinite,
}

impl RelativeEntropy {
    pub fn finite(self) -> Option<f64> {
        match self {
            RelativeEntropy::Finite(x) => Some(x),
            RelativeEntropy::Infinite => None,
        }
    }
}

pub fn relative_entropy(rho: &Mat4, sigma: &Mat4, support_tol: f64) -> RelativeEntropy {
    let self_term = -von_neumann_entropy(rho);

    let (s, w) = eigh(sigma);
    let mut cross = 0.0;
    for j in 0..4 {
        let col = w.column(j);
        let weight = (col.adjoint() * rho * col)[(0, 0)].re;
        if s[j] <= support_tol {
            if weight > support_tol {
                return RelativeEntropy::Infinite;
            }
            continue;
        }
        cross += weight * s[j].log2();
    }
    RelativeEntropy::Finite((self_term - cross).max(0.0))
}

/// `H(x) = −x log₂ x − (1−x) log₂ (1−x)`, argument clamped into `[0, 1]`.
pub fn binary_entropy(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
}

/// Closed-form fidelity between the `t = 0` and time-`t` states of the
/// partition behind `index`.
pub fn fidelity_closed_form(index: FidelityIndex, params: &ModelParams, t: f64) -> f64 {
    let e = excitation_probabilities(params, t);
    let stay = 1.0 - e.p;
    let a2 = params.a_sq();
    let b2 = params.b_sq();
    let f = match index {
        FidelityIndex::F1 => stay,
        FidelityIndex::F2 => 1.0 - e.q,
        FidelityIndex::F3 => 1.0 - e.gamma_d,
        FidelityIndex::F4 => {
            let s = (a2 * a2 * stay).sqrt() + (b2 * b2 + a2 * b2 * e.gamma_d).sqrt();
            s * s
        }
        FidelityIndex::F5 => {
            let s = (a2 * a2 * stay).sqrt() + (b2 * b2 + a2 * b2 * e.q).sqrt();
            s * s
        }
        FidelityIndex::F6 => b2 + a2 * stay,
    };
    f.clamp(0.0, 1.0)
}
