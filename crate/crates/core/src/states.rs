//! Reduced two-qubit density matrices of the two-subsystem model.
//!
//! Two non-interacting atom–cavity–reservoir subsystems start in
//! `(a|10⟩ + b|01⟩)` on the atoms with everything else in vacuum. Tracing out
//! four of the six qubits leaves an X-form matrix in the basis
//! `|00⟩, |01⟩, |10⟩, |11⟩` with a single coherence `u23` and `u44 = 0`.
//! For cross-subsystem partitions the first tensor factor belongs to
//! subsystem 1.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{excitation_probabilities, ModelParams};
use crate::error::Error;
use crate::linalg::{c, eigvalsh, Mat4};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const XFORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Partition {
    AtomAtom,
    CavityCavity,
    ReservoirReservoir,
    /// Atom and cavity of the same subsystem.
    AtomCavityIntra,
    /// Atom and reservoir of the same subsystem.
    AtomReservoirIntra,
    /// Cavity and reservoir of the same subsystem.
    CavityReservoirIntra,
    /// Atom of subsystem 1 with the reservoir of subsystem 2.
    AtomReservoirCross,
}

impl Partition {
    pub const ALL: [Partition; 7] = [
        Partition::AtomAtom,
        Partition::CavityCavity,
        Partition::ReservoirReservoir,
        Partition::AtomCavityIntra,
        Partition::AtomReservoirIntra,
        Partition::CavityReservoirIntra,
        Partition::AtomReservoirCross,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Partition::AtomAtom => "atom-atom",
            Partition::CavityCavity => "cavity-cavity",
            Partition::ReservoirReservoir => "reservoir-reservoir",
            Partition::AtomCavityIntra => "atom-cavity-intra",
            Partition::AtomReservoirIntra => "atom-reservoir-intra",
            Partition::CavityReservoirIntra => "cavity-reservoir-intra",
            Partition::AtomReservoirCross => "atom-reservoir-cross",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Partition::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<_> = Partition::ALL.iter().map(|p| p.name()).collect();
            Error::InvalidArgument(format!("unknown partition '{s}', expected one of {}", names.join(", ")))
        })
    }
}

/// A 4×4 two-qubit density matrix, optionally tagged with the partition it
/// was built for.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    partition: Option<Partition>,
    matrix: Mat4,
}

impl TwoQubitState {
    /// Untagged state from an arbitrary matrix; see [`validate_state`].
    pub fn from_matrix(matrix: Mat4) -> Self {
        Self {
            partition: None,
            matrix,
        }
    }

    /// X-form state with `u44 = 0`.
    pub fn x_form(u11: f64, u22: f64, u33: f64, u23: Complex64) -> Self {
        Self::from_matrix(x_matrix(u11, u22, u33, u23))
    }

    pub fn partition(&self) -> Option<Partition> {
        self.partition
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat4 {
        self.matrix
    }

    pub fn u11(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    pub fn u22(&self) -> f64 {
        self.matrix[(1, 1)].re
    }

    pub fn u33(&self) -> f64 {
        self.matrix[(2, 2)].re
    }

    pub fn u44(&self) -> f64 {
        self.matrix[(3, 3)].re
    }

    pub fn u23(&self) -> Complex64 {
        self.matrix[(1, 2)]
    }
}

fn x_matrix(u11: f64, u22: f64, u33: f64, u23: Complex64) -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = c(u11);
    m[(1, 1)] = c(u22);
    m[(2, 2)] = c(u33);
    m[(1, 2)] = u23;
    m[(2, 1)] = u23.conj();
    m
}

/// Reduced density matrix of `partition` at time `t`.
pub fn reduced_state(partition: Partition, params: &ModelParams, t: f64) -> TwoQubitState {
    let e = excitation_probabilities(params, t);
    let (p, q, g) = (e.p, e.q, e.gamma_d);
    let stay = 1.0 - p;
    let a2 = params.a_sq();
    let b2 = params.b_sq();
    let ab = params.amp_a().conj() * params.amp_b();

    // Equivalent partitions: x is the excitation weight on the pair.
    let equivalent = |x: f64| x_matrix(1.0 - x, b2 * x, a2 * x, ab * x);

    let matrix = match partition {
        Partition::AtomAtom => equivalent(stay),
        Partition::CavityCavity => equivalent(q),
        Partition::ReservoirReservoir => equivalent(g),
        Partition::AtomCavityIntra => x_matrix(a2 * g + b2, a2 * q, a2 * stay, c(a2 * (stay * q).sqrt())),
        Partition::AtomReservoirIntra => x_matrix(a2 * q + b2, a2 * g, a2 * stay, c(a2 * (stay * g).sqrt())),
        Partition::CavityReservoirIntra => x_matrix(a2 * stay + b2, a2 * g, a2 * q, c(a2 * (q * g).sqrt())),
        Partition::AtomReservoirCross => {
            x_matrix(a2 * (q + g) + b2 * (1.0 - g), b2 * g, a2 * stay, ab * (g * stay).sqrt())
        }
    };
    TwoQubitState {
        partition: Some(partition),
        matrix,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotHermitian { max_deviation: f64 },
    Trace { trace: Complex64 },
    NotPsd { min_eigenvalue: f64 },
    NotXForm { max_offending: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotHermitian { max_deviation } => {
                write!(f, "not Hermitian (max deviation {max_deviation:e})")
            }
            Violation::Trace { trace } => write!(f, "trace is {trace}, expected 1"),
            Violation::NotPsd { min_eigenvalue } => {
                write!(f, "not PSD (min eigenvalue {min_eigenvalue:e})")
            }
            Violation::NotXForm { max_offending } => {
                write!(f, "not X-form (largest forbidden entry {max_offending:e})")
            }
        }
    }
}

/// Largest entry outside the `u11, u22, u33, u23, u32` pattern.
pub fn x_form_deviation(m: &Mat4) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let allowed = (i == j && i < 3) || (i, j) == (1, 2) || (i, j) == (2, 1);
            if !allowed {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Every invariant the state breaks; empty when it is a valid X-form
/// density matrix.
pub fn validate_state(state: &TwoQubitState) -> Vec<Violation> {
    let m = state.matrix();
    let mut out = Vec::new();

    let herm = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > HERMITIAN_TOL {
        out.push(Violation::NotHermitian { max_deviation: herm });
    }

    let trace = m.trace();
    if (trace - c(1.0)).norm() > TRACE_TOL {
        out.push(Violation::Trace { trace });
    }

    let min_eig = eigvalsh(m).min();
    if min_eig < -PSD_TOL {
        out.push(Violation::NotPsd {
            min_eigenvalue: min_eig,
        });
    }

    let xdev = x_form_deviation(m);
    if xdev > XFORM_TOL {
        out.push(Violation::NotXForm { max_offending: xdev });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn sym(lc: f64) -> ModelParams {
        ModelParams::symmetric(1.0, lc).unwrap()
    }

    #[test]
    fn atom_pair_starts_bell_like() {
        for lc in [0.0, 1.0, 4.0] {
            let s = reduced_state(Partition::AtomAtom, &sym(lc), 0.0);
            assert_eq!(s.u11(), 0.0);
            assert_eq!(s.u44(), 0.0);
            assert!((s.u22() - 0.5).abs() < 1e-15 && (s.u33() - 0.5).abs() < 1e-15);
            assert!((s.u23() - c(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn reservoir_pair_after_total_decay() {
        let s = reduced_state(Partition::ReservoirReservoir, &sym(1.0), 80.0);
        assert!(s.u11().abs() < 1e-12);
        assert!((s.u22() - 0.5).abs() < 1e-12 && (s.u33() - 0.5).abs() < 1e-12);
        assert!((s.u23() - c(0.5)).norm() < 1e-12);
    }

    #[test]
    fn atom_cavity_intra_at_exceptional_point() {
        let s = reduced_state(Partition::AtomCavityIntra, &sym(4.0), 1.0);
        let em2 = (-2.0f64).exp();
        let (p, q) = (1.0 - 4.0 * em2, em2);
        assert!((s.u11() - ((p - q) / 2.0 + 0.5)).abs() < 1e-14);
        assert!((s.u11() - 0.661_662).abs() < 1e-6);
        assert!((s.u22() - 0.067_668).abs() < 1e-6);
        assert!((s.u33() - 0.270_671).abs() < 1e-6);
        assert!((s.u23().re - 0.135_335).abs() < 1e-6);
        assert!(validate_state(&s).is_empty());
    }

    #[test]
    fn validation_flags() {
        let bell = TwoQubitState::x_form(0.0, 0.5, 0.5, c(0.5));
        assert!(validate_state(&bell).is_empty());

        let short = TwoQubitState::x_form(0.0, 0.45, 0.45, c(0.0));
        assert!(matches!(validate_state(&short).as_slice(), [Violation::Trace { .. }]));

        let bad = TwoQubitState::x_form(0.0, 0.5, 0.5, c(1.0));
        assert!(matches!(validate_state(&bad).as_slice(), [Violation::NotPsd { .. }]));

        let mut m = Mat4::identity() * c(0.25);
        m[(0, 3)] = c(0.1);
        let v = validate_state(&TwoQubitState::from_matrix(m));
        assert!(v.iter().any(|x| matches!(x, Violation::NotHermitian { .. })));
        assert!(v.iter().any(|x| matches!(x, Violation::NotXForm { .. })));
    }

    #[test]
    fn population_bookkeeping() {
        let params = sym(2.5);
        for k in 0..40 {
            let t = 0.1 * k as f64;
            let e = excitation_probabilities(&params, t);
            let pair = |p| {
                let s = reduced_state(p, &params, t);
                s.u22() + s.u33()
            };
            assert!((pair(Partition::AtomAtom) - (1.0 - e.p)).abs() < 1e-14);
            assert!((pair(Partition::CavityCavity) - e.q).abs() < 1e-14);
            assert!((pair(Partition::ReservoirReservoir) - e.gamma_d).abs() < 1e-14);
        }
    }

    #[test]
    fn cross_partition_trace_identity() {
        let params = ModelParams::with_real_amplitude(1.0, 1.7, 0.9).unwrap();
        for k in 0..50 {
            let t = 0.13 * k as f64;
            let s = reduced_state(Partition::AtomReservoirCross, &params, t);
            assert!((s.matrix().trace().re - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn lossless_reservoir_pair_is_vacuum() {
        for k in 0..30 {
            let s = reduced_state(Partition::ReservoirReservoir, &sym(0.0), 0.3 * k as f64);
            assert_eq!(s.u11(), 1.0);
            assert_eq!((s.u22(), s.u33(), s.u23().norm()), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn partition_names_round_trip() {
        for p in Partition::ALL {
            assert_eq!(p.name().parse::<Partition>().unwrap(), p);
        }
        assert!("atom".parse::<Partition>().is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn amplitude() -> impl Strategy<Value = f64> {
            prop_oneof![Just(FRAC_1_SQRT_2), Just(1.0 / 5f64.sqrt()), Just(0.9), 0.0f64..=1.0]
        }

        proptest! {
            #[test]
            fn every_partition_is_a_valid_rank_two_x_state(
                lc in 0.0f64..10.0, t in 0.0f64..12.0, a in amplitude(), phase in 0.0f64..6.3
            ) {
                let b = (1.0 - a * a).sqrt();
                let params = ModelParams::new(
                    1.0, lc, Complex64::from_polar(a, phase), Complex64::new(b, 0.0)
                ).unwrap();
                for partition in Partition::ALL {
                    let s = reduced_state(partition, &params, t);
                    prop_assert!(validate_state(&s).is_empty(), "{partition} {:?}", validate_state(&s));
                    prop_assert!(s.u22() * s.u33() - s.u23().norm_sqr() <= 1e-10);
                }
            }
        }
    }
}
