//! Difference witnesses comparing the distance between `ρ(t)` and `ρ(t+τ)`
//! with the distance between `ρ(0)` and `ρ(τ)`. A negative value means the
//! later pair is less distinguishable (fidelity) or more distinguishable
//! (trace distance, relative entropy) than a divisible Markovian map allows.
//!
//! At `t = 0` the two pairs coincide and at `τ = 0` both distances vanish;
//! every witness is pinned to exactly zero there.

use super::WitnessValue;
use crate::dynamics::ModelParams;
use crate::linalg::{c, Mat4};
use crate::measures::{fidelity, relative_entropy, trace_distance, RelativeEntropy, DEFAULT_SUPPORT_TOL};
use crate::states::{reduced_state, Partition};

/// Reference terms below this make a witness undefined.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

struct Pairs {
    start: Mat4,
    lag: Mat4,
    later: Mat4,
    later_lag: Mat4,
}

fn pairs(partition: Partition, params: &ModelParams, t: f64, tau: f64) -> Pairs {
    let at = |time| reduced_state(partition, params, time).into_matrix();
    Pairs {
        start: at(0.0),
        lag: at(tau),
        later: at(t),
        later_lag: at(t + tau),
    }
}

fn trivially_zero(t: f64, tau: f64) -> bool {
    t == 0.0 || tau == 0.0
}

/// `G(t,τ) = (F[ρ(t),ρ(t+τ)] − F[ρ(0),ρ(τ)]) / F[ρ(0),ρ(τ)]`.
pub fn fidelity_difference(partition: Partition, params: &ModelParams, t: f64, tau: f64) -> WitnessValue {
    if trivially_zero(t, tau) {
        return WitnessValue::Value(0.0);
    }
    let s = pairs(partition, params, t, tau);
    let (Ok(reference), Ok(later)) = (fidelity(&s.start, &s.lag), fidelity(&s.later, &s.later_lag)) else {
        return WitnessValue::Undefined;
    };
    if reference < DENOMINATOR_FLOOR {
        return WitnessValue::Undefined;
    }
    WitnessValue::Value((later - reference) / reference)
}

/// `D(t,τ) = (D[ρ(0),ρ(τ)] − D[ρ(t),ρ(t+τ)]) / D[ρ(0),ρ(τ)]`.
pub fn trace_distance_difference(partition: Partition, params: &ModelParams, t: f64, tau: f64) -> WitnessValue {
    if trivially_zero(t, tau) {
        return WitnessValue::Value(0.0);
    }
    let s = pairs(partition, params, t, tau);
    let reference = trace_distance(&s.start, &s.lag);
    if reference < DENOMINATOR_FLOOR {
        return WitnessValue::Undefined;
    }
    let later = trace_distance(&s.later, &s.later_lag);
    WitnessValue::Value((reference - later) / reference)
}

fn mix_with_identity(sigma: &Mat4, eps: f64) -> Mat4 {
    sigma * c(1.0 - eps) + Mat4::identity() * c(eps / 4.0)
}

/// `S(t,τ) = (S[ρ(0)‖ρ(τ)] − S[ρ(t)‖ρ(t+τ)]) / S[ρ(0)‖ρ(τ)]`.
///
/// With `regularizer_eps > 0` every second argument `σ` is replaced by
/// `(1−ε)σ + ε I/4`, which keeps the relative entropies finite.
pub fn relative_entropy_difference(
    partition: Partition,
    params: &ModelParams,
    t: f64,
    tau: f64,
    regularizer_eps: f64,
) -> WitnessValue {
    if trivially_zero(t, tau) {
        return WitnessValue::Value(0.0);
    }
    let s = pairs(partition, params, t, tau);
    let (lag, later_lag) = if regularizer_eps > 0.0 {
        (
            mix_with_identity(&s.lag, regularizer_eps),
            mix_with_identity(&s.later_lag, regularizer_eps),
        )
    } else {
        (s.lag, s.later_lag)
    };
    let reference = relative_entropy(&s.start, &lag, DEFAULT_SUPPORT_TOL);
    let later = relative_entropy(&s.later, &later_lag, DEFAULT_SUPPORT_TOL);
    match (reference, later) {
        (RelativeEntropy::Finite(r), RelativeEntropy::Finite(l)) => {
            if r < DENOMINATOR_FLOOR {
                WitnessValue::Undefined
            } else {
                WitnessValue::Value((r - l) / r)
            }
        }
        _ => WitnessValue::Infinite,
    }
}
