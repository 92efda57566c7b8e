//! Mutual information, classical correlation and quantum discord of the
//! three equivalent pair states `diag(1−x, |b|²x, |a|²x, 0)` with coherence
//! `a*b x`, where `x` is `1−p`, `q` or `γd`.
//!
//! The closed forms correspond to rank-one projective measurements on the
//! second qubit of the pair. With `m = H(½[1 + sqrt(1 − 4|a|²x(1−x))])` the
//! minimal post-measurement entropy of the first qubit,
//!
//! ```text
//! C = H(|a|²x) − m
//! D = H(|b|²x) − H(x) + m
//! ```
//!
//! so that `C + D = I`. [`quantum_discord_as_printed`] keeps the published
//! variant with `−m`, which breaks that identity and goes negative;
//! [`discord_numeric`] is an independent brute-force check of both.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{excitation_probabilities, ModelParams};
use crate::error::Error;
use crate::linalg::{c, eigvalsh, eigvalsh2, entropy_bits, partial_trace_first, partial_trace_second, Mat2, Mat4};
use crate::measures::binary_entropy;
use crate::states::{Partition, TwoQubitState};

/// The partitions related by the `(1−p) → q → γd` substitution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    AtomAtom,
    CavityCavity,
    ReservoirReservoir,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::AtomAtom, Family::CavityCavity, Family::ReservoirReservoir];

    pub fn partition(self) -> Partition {
        match self {
            Family::AtomAtom => Partition::AtomAtom,
            Family::CavityCavity => Partition::CavityCavity,
            Family::ReservoirReservoir => Partition::ReservoirReservoir,
        }
    }

    pub fn from_partition(partition: Partition) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.partition() == partition)
    }

    /// Excitation weight `x` carried by the pair.
    fn weight(self, params: &ModelParams, t: f64) -> f64 {
        let e = excitation_probabilities(params, t);
        match self {
            Family::AtomAtom => 1.0 - e.p,
            Family::CavityCavity => e.q,
            Family::ReservoirReservoir => e.gamma_d,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.partition().name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let partition: Partition = s.parse()?;
        Family::from_partition(partition)
            .ok_or_else(|| Error::InvalidArgument(format!("'{s}' is not one of the equivalent pair partitions")))
    }
}

fn measured_entropy(a2: f64, x: f64) -> f64 {
    let root = (1.0 - 4.0 * a2 * x * (1.0 - x)).max(0.0).sqrt();
    binary_entropy(0.5 * (1.0 + root))
}

pub fn classical_correlation_closed(family: Family, params: &ModelParams, t: f64) -> f64 {
    let x = family.weight(params, t);
    let a2 = params.a_sq();
    binary_entropy(a2 * x) - measured_entropy(a2, x)
}

pub fn quantum_discord_closed(family: Family, params: &ModelParams, t: f64) -> f64 {
    let x = family.weight(params, t);
    let a2 = params.a_sq();
    binary_entropy(params.b_sq() * x) - binary_entropy(x) + measured_entropy(a2, x)
}

/// The published discord expression, `H(|b|²x) − H(x) − m`.
pub fn quantum_discord_as_printed(family: Family, params: &ModelParams, t: f64) -> f64 {
    let x = family.weight(params, t);
    let a2 = params.a_sq();
    binary_entropy(params.b_sq() * x) - binary_entropy(x) - measured_entropy(a2, x)
}

fn entropy2(m: &Mat2) -> f64 {
    entropy_bits(eigvalsh2(m))
}

/// `S(ρ₁) + S(ρ₂) − S(ρ)` in bits.
pub fn mutual_information(state: &TwoQubitState) -> f64 {
    let m = state.matrix();
    let total = entropy_bits(eigvalsh(m).iter().copied());
    (entropy2(&partial_trace_second(m)) + entropy2(&partial_trace_first(m)) - total).max(0.0)
}

/// `Σ_k p_k S(ρ₁|k)` after measuring the second qubit along the Bloch
/// direction `(θ, φ)`.
pub fn conditional_entropy_after_measurement(rho: &Mat4, theta: f64, phi: f64) -> f64 {
    let (st, ct) = theta.sin_cos();
    let n = [st * phi.cos(), st * phi.sin(), ct];
    [1.0, -1.0]
        .into_iter()
        .map(|sign| {
            // Π = (I + sign n·σ)/2
            let proj = Mat2::new(
                c(0.5 * (1.0 + sign * n[2])),
                num_complex::Complex64::new(0.5 * sign * n[0], -0.5 * sign * n[1]),
                num_complex::Complex64::new(0.5 * sign * n[0], 0.5 * sign * n[1]),
                c(0.5 * (1.0 - sign * n[2])),
            );
            // Tr₂[(I ⊗ Π) ρ]
            let cond = Mat2::from_fn(|i, k| {
                let mut acc = c(0.0);
                for j in 0..2 {
                    for l in 0..2 {
                        acc += proj[(l, j)] * rho[(2 * i + j, 2 * k + l)];
                    }
                }
                acc
            });
            let pk = cond.trace().re;
            if pk <= 1e-15 {
                0.0
            } else {
                pk * entropy2(&(cond / c(pk)))
            }
        })
        .sum()
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

const REFINED_CANDIDATES: usize = 4;
const SWEEPS: usize = 6;

/// Brute-force discord: `I − max I(ρ|Π)` over projective measurements on
/// the second qubit. Coarse `(θ, φ)` grid of `angular_resolution ×
/// 2·angular_resolution` points followed by alternating golden-section
/// searches around the best cells.
pub fn discord_numeric(state: &TwoQubitState, angular_resolution: usize) -> f64 {
    let rho = state.matrix();
    let res = angular_resolution.max(1);
    let d_theta = if res > 1 { PI / (res - 1) as f64 } else { PI };
    let d_phi = PI / res as f64;

    let cond = |th: f64, ph: f64| conditional_entropy_after_measurement(rho, th, ph);
    let mut cells: Vec<(f64, f64, f64)> = (0..res)
        .flat_map(|i| (0..2 * res).map(move |j| (i as f64 * d_theta, j as f64 * d_phi)))
        .map(|(th, ph)| (cond(th, ph), th, ph))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best = cells[0].0;
    for &(start, th0, ph0) in cells.iter().take(REFINED_CANDIDATES) {
        let (mut th, mut ph, mut val) = (th0, ph0, start);
        let (mut h_th, mut h_ph) = (d_theta, d_phi);
        for _ in 0..SWEEPS {
            let (t_new, v_t) = golden_min(|x| cond(x, ph), (th - h_th).max(0.0), (th + h_th).min(PI), 1e-10);
            if v_t < val {
                th = t_new;
                val = v_t;
            }
            let (p_new, v_p) = golden_min(|y| cond(th, y), ph - h_ph, ph + h_ph, 1e-10);
            if v_p < val {
                ph = p_new;
                val = v_p;
            }
            h_th *= 0.5;
            h_ph *= 0.5;
        }
        best = best.min(val);
    }

    let first = entropy2(&partial_trace_second(rho));
    let classical = first - best;
    (mutual_information(state) - classical).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::reduced_state;

    fn sym(lc: f64) -> ModelParams {
        ModelParams::symmetric(1.0, lc).unwrap()
    }

    #[test]
    fn atom_pair_origin_values() {
        let p = sym(1.0);
        assert!((classical_correlation_closed(Family::AtomAtom, &p, 0.0) - 1.0).abs() < 1e-12);
        assert!((quantum_discord_closed(Family::AtomAtom, &p, 0.0) - 1.0).abs() < 1e-12);
        for f in [Family::CavityCavity, Family::ReservoirReservoir] {
            assert_eq!(classical_correlation_closed(f, &p, 0.0), 0.0);
            assert_eq!(quantum_discord_closed(f, &p, 0.0), 0.0);
        }
    }

    #[test]
    fn mutual_information_anchors() {
        let bell = TwoQubitState::x_form(0.0, 0.5, 0.5, c(0.5));
        assert!((mutual_information(&bell) - 2.0).abs() < 1e-12);
        let product = TwoQubitState::x_form(1.0, 0.0, 0.0, c(0.0));
        assert!(mutual_information(&product) < 1e-12);
    }

    #[test]
    fn identity_at_exceptional_point() {
        let p = sym(4.0);
        let s = reduced_state(Partition::AtomAtom, &p, 1.0);
        let cc = classical_correlation_closed(Family::AtomAtom, &p, 1.0);
        let dd = quantum_discord_closed(Family::AtomAtom, &p, 1.0);
        assert!(cc >= 0.0 && cc <= mutual_information(&s));
        assert!((mutual_information(&s) - cc - dd).abs() < 1e-9);
        assert!(quantum_discord_as_printed(Family::AtomAtom, &p, 1.0) < dd);
    }

    #[test]
    fn numeric_discord_anchors() {
        let bell = TwoQubitState::x_form(0.0, 0.5, 0.5, c(0.5));
        assert!((discord_numeric(&bell, 64) - 1.0).abs() < 1e-4);
        let classical = TwoQubitState::x_form(0.3, 0.7, 0.0, c(0.0));
        assert!(discord_numeric(&classical, 32) < 1e-6);
    }

    #[test]
    fn numeric_discord_matches_closed_form() {
        let p = sym(1.0);
        let s = reduced_state(Partition::AtomAtom, &p, 0.8);
        let closed = quantum_discord_closed(Family::AtomAtom, &p, 0.8);
        assert!((discord_numeric(&s, 96) - closed).abs() < 1e-3);

        let p = sym(3.9);
        let s = reduced_state(Partition::ReservoirReservoir, &p, 3.0);
        let closed = quantum_discord_closed(Family::ReservoirReservoir, &p, 3.0);
        assert!((discord_numeric(&s, 48) - closed).abs() < 1e-3);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_min(|x| (x - 0.3) * (x - 0.3) + 1.0, -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7 && (fx - 1.0).abs() < 1e-13);
    }

    #[test]
    fn family_parsing() {
        assert_eq!("cavity-cavity".parse::<Family>().unwrap(), Family::CavityCavity);
        assert!("atom-cavity-intra".parse::<Family>().is_err());
    }
}
