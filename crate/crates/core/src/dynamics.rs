//! Single-subsystem excitation dynamics.
//!
//! One excitation shared between an atom, a resonant cavity and the cavity's
//! reservoir. The atom and cavity amplitudes obey
//!
//! ```text
//! dξ/dt = -i V η
//! dη/dt = -i V ξ - (λc/2) η
//! ```
//!
//! with ξ(0) = 1, η(0) = 0. The closed-form solution is evaluated with a
//! complex Rabi frequency so that the underdamped, critically damped
//! (exceptional point) and overdamped regimes share a single code path.
//! [`amplitudes_ode`] integrates the same equations numerically and is kept
//! independent of the closed form.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative width of the exceptional-point window on `4V² − (λc/2)²`.
pub const EP_WINDOW: f64 = 1e-10;

/// Tolerance on `|a|² + |b|² = 1`.
pub const NORM_TOL: f64 = 1e-12;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Coupling `V`, cavity decay `λc` and the initial two-atom amplitudes `(a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    coupling: f64,
    cavity_decay: f64,
    amp_a: Complex64,
    amp_b: Complex64,
}

impl ModelParams {
    pub fn new(coupling: f64, cavity_decay: f64, amp_a: Complex64, amp_b: Complex64) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::InvalidParams(format!("coupling must be > 0, got {coupling}")));
        }
        if !(cavity_decay.is_finite() && cavity_decay >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "cavity decay must be >= 0, got {cavity_decay}"
            )));
        }
        let norm = amp_a.norm_sqr() + amp_b.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParams(format!("|a|^2 + |b|^2 must be 1, got {norm}")));
        }
        Ok(Self {
            coupling,
            cavity_decay,
            amp_a,
            amp_b,
        })
    }

    /// Real amplitude `a`, with `b = sqrt(1 - a²)`.
    pub fn with_real_amplitude(coupling: f64, cavity_decay: f64, a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a.abs()) {
            return Err(Error::InvalidParams(format!("|a| must be <= 1, got {a}")));
        }
        let b = (1.0 - a * a).max(0.0).sqrt();
        Self::new(coupling, cavity_decay, Complex64::new(a, 0.0), Complex64::new(b, 0.0))
    }

    /// `a = b = 1/√2`, the setting used for most of the figures.
    pub fn symmetric(coupling: f64, cavity_decay: f64) -> Result<Self> {
        Self::with_real_amplitude(coupling, cavity_decay, std::f64::consts::FRAC_1_SQRT_2)
    }

    /// Same state preparation, different cavity decay.
    pub fn with_cavity_decay(&self, cavity_decay: f64) -> Result<Self> {
        Self::new(self.coupling, cavity_decay, self.amp_a, self.amp_b)
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn cavity_decay(&self) -> f64 {
        self.cavity_decay
    }

    pub fn amp_a(&self) -> Complex64 {
        self.amp_a
    }

    pub fn amp_b(&self) -> Complex64 {
        self.amp_b
    }

    pub fn a_sq(&self) -> f64 {
        self.amp_a.norm_sqr()
    }

    pub fn b_sq(&self) -> f64 {
        self.amp_b.norm_sqr()
    }

    /// `4V² − (λc/2)²`, i.e. `(2Ω)²`.
    fn discriminant(&self) -> f64 {
        let v = self.coupling;
        let half = 0.5 * self.cavity_decay;
        4.0 * v * v - half * half
    }
}

/// `(p, q, γd)` at one instant: `1 − p` is the atom population, `q` the
/// cavity population and `γd = p − q` the weight that reached the reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcitationProbabilities {
    pub p: f64,
    pub q: f64,
    pub gamma_d: f64,
}

/// Atom amplitude ξ, cavity amplitude η and reservoir weight |χ|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub xi: Complex64,
    pub eta: Complex64,
    pub chi_sq: f64,
}

impl Amplitudes {
    fn new(xi: Complex64, eta: Complex64) -> Self {
        let chi_sq = (1.0 - xi.norm_sqr() - eta.norm_sqr()).max(0.0);
        Self { xi, eta, chi_sq }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `V > λc/4`: damped Rabi oscillation.
    Coherent,
    /// `V = λc/4`: the two eigenvalues of the effective Hamiltonian coalesce.
    ExceptionalPoint,
    /// `V < λc/4`: overdamped.
    Incoherent,
}

/// `Ω` with `2Ω = sqrt(4V² − (λc/2)²)`; purely imaginary (positive imaginary
/// part) below the exceptional point.
pub fn rabi_frequency(params: &ModelParams) -> Complex64 {
    let w = params.discriminant();
    if w >= 0.0 {
        Complex64::new(0.5 * w.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, 0.5 * (-w).sqrt())
    }
}

pub fn classify_regime(params: &ModelParams) -> Regime {
    let w = params.discriminant();
    let scale = 4.0 * params.coupling * params.coupling;
    if w.abs() <= EP_WINDOW * scale {
        Regime::ExceptionalPoint
    } else if w > 0.0 {
        Regime::Coherent
    } else {
        Regime::Incoherent
    }
}

/// Closed-form `(ξ_t, η_t)`.
pub fn analytic_amplitudes(params: &ModelParams, t: f64) -> Amplitudes {
    debug_assert!(t >= 0.0, "negative time {t}");
    let lc = params.cavity_decay;
    let v = params.coupling;
    let log_damp = -0.25 * lc * t;

    // damped cos(Ωt) and damped sin(Ωt)/Ω
    let (cos_d, sinc_d) = if classify_regime(params) == Regime::ExceptionalPoint {
        // Series in Ω² = w; exact at w = 0 and free of the 0/0 in sin(Ωt)/Ω.
        let w = 0.25 * params.discriminant();
        let t2 = t * t;
        let d = log_damp.exp();
        let cos = 1.0 - w * t2 / 2.0 + w * w * t2 * t2 / 24.0;
        let sinc = t * (1.0 - w * t2 / 6.0 + w * w * t2 * t2 / 120.0);
        (Complex64::new(d * cos, 0.0), Complex64::new(d * sinc, 0.0))
    } else {
        let omega = rabi_frequency(params);
        let z = omega * t;
        if z.norm() <= 1.0 {
            let d = log_damp.exp();
            (z.cos() * d, z.sin() / omega * d)
        } else {
            // exp(±iz) folded with the damping so cosh/sinh never overflow.
            let up = (I * z + log_damp).exp();
            let down = (-I * z + log_damp).exp();
            ((up + down) * 0.5, (up - down) / (2.0 * I * omega))
        }
    };

    let xi = cos_d + sinc_d * (0.25 * lc);
    let eta = -I * sinc_d * v;
    Amplitudes::new(xi, eta)
}

/// Analytic `(p, q, γd)`, clamped into `[0, 1]` with `0 ≤ q ≤ p`.
pub fn excitation_probabilities(params: &ModelParams, t: f64) -> ExcitationProbabilities {
    let amps = analytic_amplitudes(params, t);
    let atom = amps.xi.norm_sqr().clamp(0.0, 1.0);
    let q = amps.eta.norm_sqr().clamp(0.0, 1.0 - atom);
    // No decay channel at λc = 0: the reservoir weight is exactly zero.
    let gamma_d = if params.cavity_decay == 0.0 {
        0.0
    } else {
        (1.0 - atom - q).max(0.0)
    };
    let p = (q + gamma_d).min(1.0);
    ExcitationProbabilities { p, q, gamma_d: p - q }
}

type State = (Complex64, Complex64);

fn derivative(params: &ModelParams, (xi, eta): State) -> State {
    let v = params.coupling;
    (-I * v * eta, -I * v * xi - eta * (0.5 * params.cavity_decay))
}

/// One classic RK4 step of the amplitude equations.
pub(crate) fn rk4_step(params: &ModelParams, y: State, h: f64) -> State {
    let add = |a: State, k: State, s: f64| (a.0 + k.0 * s, a.1 + k.1 * s);
    let k1 = derivative(params, y);
    let k2 = derivative(params, add(y, k1, 0.5 * h));
    let k3 = derivative(params, add(y, k2, 0.5 * h));
    let k4 = derivative(params, add(y, k3, h));
    (
        y.0 + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0),
        y.1 + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
    )
}

pub(crate) fn integrate_fixed(params: &ModelParams, t: f64, steps: usize) -> State {
    let h = t / steps as f64;
    let mut y = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    for _ in 0..steps {
        y = rk4_step(params, y, h);
    }
    y
}

const MAX_STEPS: usize = 1 << 24;
const INITIAL_STEP: f64 = 0.05;

/// Numerical oracle: RK4 from `(ξ, η) = (1, 0)`, doubling the step count
/// until two successive resolutions agree to `tol`.
pub fn amplitudes_ode(params: &ModelParams, t: f64, tol: f64) -> Result<Amplitudes> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidArgument(format!("tol must be in (0, 1e-3], got {tol}")));
    }
    if t == 0.0 {
        return Ok(Amplitudes::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
    }

    let mut steps = ((t / INITIAL_STEP).ceil() as usize).max(1);
    let mut coarse = integrate_fixed(params, t, steps);
    loop {
        let fine_steps = steps * 2;
        let fine = integrate_fixed(params, t, fine_steps);
        let diff = (fine.0 - coarse.0).norm().max((fine.1 - coarse.1).norm());
        if diff <= tol {
            return Ok(Amplitudes::new(fine.0, fine.1));
        }
        if fine_steps >= MAX_STEPS {
            return Err(Error::StepControl {
                tol,
                reached: diff,
                steps: fine_steps,
            });
        }
        steps = fine_steps;
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(v: f64, lc: f64) -> ModelParams {
        ModelParams::symmetric(v, lc).unwrap()
    }

    #[test]
    fn rabi_frequency_anchors() {
        assert_eq!(rabi_frequency(&params(1.0, 0.0)), Complex64::new(1.0, 0.0));
        assert_eq!(rabi_frequency(&params(1.0, 4.0)), Complex64::new(0.0, 0.0));
        let om = rabi_frequency(&params(1.0, 8.0));
        assert_eq!(om.re, 0.0);
        assert!((om.im - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn regime_classification() {
        assert_eq!(classify_regime(&params(1.0, 1.0)), Regime::Coherent);
        assert_eq!(classify_regime(&params(1.0, 4.0)), Regime::ExceptionalPoint);
        assert_eq!(classify_regime(&params(1.0, 6.0)), Regime::Incoherent);
        assert_eq!(classify_regime(&params(2.5, 10.0)), Regime::ExceptionalPoint);
    }

    #[test]
    fn lossless_half_period() {
        let e = excitation_probabilities(&params(1.0, 0.0), FRAC_PI_2);
        assert!((e.p - 1.0).abs() < 1e-15);
        assert!((e.q - 1.0).abs() < 1e-15);
        assert_eq!(e.gamma_d, 0.0);
    }

    #[test]
    fn exceptional_point_values() {
        let e = excitation_probabilities(&params(1.0, 4.0), 1.0);
        let em2 = (-2.0f64).exp();
        assert!((e.p - (1.0 - 4.0 * em2)).abs() < 1e-14);
        assert!((e.q - em2).abs() < 1e-14);
        assert!((e.p - 0.458_659).abs() < 1e-6);
        assert!((e.q - 0.135_335).abs() < 1e-6);
        assert!((e.gamma_d - (1.0 - 5.0 * em2)).abs() < 1e-14);
        assert!((e.gamma_d - 0.323_324).abs() < 1e-6);
    }

    #[test]
    fn initial_condition() {
        for lc in [0.0, 0.5, 4.0, 9.0] {
            let e = excitation_probabilities(&params(1.0, lc), 0.0);
            assert_eq!((e.p, e.q, e.gamma_d), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn long_times_do_not_overflow() {
        let e = excitation_probabilities(&params(1.0, 8.0), 2000.0);
        assert!((e.p - 1.0).abs() < 1e-12 && e.q.abs() < 1e-12);
        let e = excitation_probabilities(&params(0.01, 100.0), 5000.0);
        assert!(e.p.is_finite() && e.q.is_finite());
    }

    #[test]
    fn ode_anchors() {
        let a = amplitudes_ode(&params(1.0, 0.0), FRAC_PI_2, 1e-10).unwrap();
        assert!(a.xi.norm_sqr() < 1e-9);
        assert!((a.eta.norm_sqr() - 1.0).abs() < 1e-9);

        let a = amplitudes_ode(&params(1.0, 4.0), 1.0, 1e-10).unwrap();
        assert!((a.xi.norm_sqr() - 0.541_341).abs() < 1e-6);
        assert!((a.eta.norm_sqr() - 0.135_335).abs() < 1e-6);

        let a = amplitudes_ode(&params(1.0, 2.0), 0.0, 1e-8).unwrap();
        assert_eq!(a.xi, Complex64::new(1.0, 0.0));
        assert_eq!(a.eta, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn ode_rejects_bad_arguments() {
        let p = params(1.0, 1.0);
        assert!(matches!(amplitudes_ode(&p, -1.0, 1e-8), Err(Error::InvalidArgument(_))));
        assert!(matches!(amplitudes_ode(&p, 1.0, 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(amplitudes_ode(&p, 1.0, 1e-2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn analytic_matches_ode_across_regimes() {
        for lc in [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 8.0] {
            let p = params(1.0, lc);
            for k in 0..=20 {
                let t = 0.5 * k as f64;
                let ode = amplitudes_ode(&p, t, 1e-9).unwrap();
                let e = excitation_probabilities(&p, t);
                assert!((ode.xi.norm_sqr() - (1.0 - e.p)).abs() <= 1e-8, "lc={lc} t={t}");
                assert!((ode.eta.norm_sqr() - e.q).abs() <= 1e-8, "lc={lc} t={t}");
            }
        }
    }

    #[test]
    fn reservoir_rate_equals_decay_times_cavity() {
        // dγd/dt = λc q, central differences
        let h = 1e-4;
        for lc in [0.5, 2.0, 4.0, 7.0] {
            let p = params(1.0, lc);
            for k in 1..40 {
                let t = 0.25 * k as f64;
                let q = excitation_probabilities(&p, t).q;
                if q < 1e-3 {
                    continue;
                }
                let fwd = excitation_probabilities(&p, t + h).gamma_d;
                let bwd = excitation_probabilities(&p, t - h).gamma_d;
                let rate = (fwd - bwd) / (2.0 * h);
                assert!(((rate - lc * q) / (lc * q)).abs() <= 1e-6, "lc={lc} t={t}");
            }
        }
    }

    #[test]
    fn continuity_across_exceptional_point() {
        let at = params(1.0, 4.0);
        for shift in [-1e-6, 1e-6] {
            let near = params(1.0, 4.0 + shift);
            for k in 0..=100 {
                let t = 0.1 * k as f64;
                let a = excitation_probabilities(&at, t);
                let b = excitation_probabilities(&near, t);
                assert!((a.p - b.p).abs() <= 1e-5 && (a.q - b.q).abs() <= 1e-5);
            }
        }
    }

    #[test]
    fn lossless_conservation() {
        let p = params(1.3, 0.0);
        for k in 0..200 {
            let e = excitation_probabilities(&p, 0.05 * k as f64 * PI);
            assert_eq!(e.gamma_d, 0.0);
            assert_eq!(e.p, e.q);
        }
    }

    #[test]
    fn rejects_invalid_params() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert!(ModelParams::new(0.0, 1.0, one, zero).is_err());
        assert!(ModelParams::new(1.0, -0.1, one, zero).is_err());
        assert!(ModelParams::new(1.0, 1.0, one, one).is_err());
        assert!(ModelParams::new(1.0, 1.0, Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn ordering_and_bounds(lc in 0.0f64..12.0, t in 0.0f64..20.0, v in 0.2f64..3.0) {
                let e = excitation_probabilities(&ModelParams::symmetric(v, lc).unwrap(), t);
                prop_assert!(0.0 <= e.q && e.q <= e.p && e.p <= 1.0);
                prop_assert!(e.gamma_d >= 0.0);
                prop_assert!((e.gamma_d - (e.p - e.q)).abs() <= 1e-12);
            }

            #[test]
            fn amplitudes_are_normalized(lc in 0.0f64..12.0, t in 0.0f64..20.0) {
                let a = analytic_amplitudes(&ModelParams::symmetric(1.0, lc).unwrap(), t);
                let total = a.xi.norm_sqr() + a.eta.norm_sqr() + a.chi_sq;
                prop_assert!((total - 1.0).abs() <= 1e-10);
            }
        }
    }
}
