use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cavitynm::dynamics::{amplitudes_ode, excitation_probabilities, ModelParams};
use cavitynm::linalg::Mat4;
use cavitynm::measures::{fidelity, fidelity_closed_form, FidelityIndex};
use cavitynm::states::{reduced_state, Partition};
use cavitynm::witnesses::{chsh, chsh_horodecki, discord_numeric, quantum_discord_closed, Family};
use num_complex::Complex64;

fn pauli_products(rho: &Mat4) -> Matrix3<f64> {
    // T_ij = Tr[ρ σ_i ⊗ σ_j], written out entry by entry
    let r = |i: usize, j: usize| rho[(i, j)];
    let t_xx = 2.0 * (r(0, 3) + r(1, 2)).re;
    let t_yy = 2.0 * (r(1, 2) - r(0, 3)).re;
    let t_xy = -2.0 * (r(0, 3) - r(1, 2)).im;
    let t_yx = -2.0 * (r(0, 3) + r(1, 2)).im;
    let t_xz = 2.0 * (r(0, 2) - r(1, 3)).re;
    let t_yz = -2.0 * (r(0, 2) - r(1, 3)).im;
    let t_zx = 2.0 * (r(0, 1) - r(2, 3)).re;
    let t_zy = -2.0 * (r(0, 1) - r(2, 3)).im;
    let t_zz = (r(0, 0) - r(1, 1) - r(2, 2) + r(3, 3)).re;
    Matrix3::new(t_xx, t_xy, t_xz, t_yx, t_yy, t_yz, t_zx, t_zy, t_zz)
}

fn direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// `|a·T(b + b′) + a′·T(b − b′)|` for the eight measurement angles.
fn chsh_objective(t: &Matrix3<f64>, x: &[f64; 8]) -> f64 {
    let a = direction(x[0], x[1]);
    let a2 = direction(x[2], x[3]);
    let b = direction(x[4], x[5]);
    let b2 = direction(x[6], x[7]);
    (a.dot(&(t * (b + b2))) + a2.dot(&(t * (b - b2)))).abs()
}

/// Maximum over random starts followed by coordinate search with a
/// shrinking step.
fn chsh_brute_force(rho: &Mat4) -> f64 {
    let t = pauli_products(rho);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut starts: Vec<([f64; 8], f64)> = (0..4000)
        .map(|_| {
            let x: [f64; 8] = std::array::from_fn(|k| {
                if k % 2 == 0 {
                    rng.random::<f64>() * PI
                } else {
                    rng.random::<f64>() * 2.0 * PI
                }
            });
            (x, chsh_objective(&t, &x))
        })
        .collect();
    starts.sort_by(|a, b| b.1.total_cmp(&a.1));
    starts
        .into_iter()
        .take(8)
        .map(|(mut x, mut best)| {
            let mut step = 0.2;
            while step > 1e-9 {
                let mut improved = false;
                for k in 0..8 {
                    for sign in [1.0, -1.0] {
                        let mut y = x;
                        y[k] += sign * step;
                        let v = chsh_objective(&t, &y);
                        if v > best {
                            best = v;
                            x = y;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                }
            }
            best
        })
        .fold(0.0, f64::max)
}

#[test]
fn correlation_matrix_oracle_agrees_on_bell_state() {
    let bell = cavitynm::states::TwoQubitState::x_form(0.0, 0.5, 0.5, Complex64::new(0.5, 0.0));
    let t = pauli_products(bell.matrix());
    assert!((t - Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0))).norm() < 1e-14);
}

#[test]
fn brute_force_chsh_matches_horodecki() {
    let a = 1.0 / 5f64.sqrt();
    let params = ModelParams::with_real_amplitude(1.0, 1.0, a).unwrap();
    let state = reduced_state(Partition::AtomAtom, &params, 0.5);
    let brute = chsh_brute_force(state.matrix());
    let horodecki = chsh_horodecki(state.matrix());
    assert!((brute - horodecki).abs() < 1e-6, "brute {brute} horodecki {horodecki}");

    for partition in [
        Partition::ReservoirReservoir,
        Partition::AtomReservoirCross,
        Partition::CavityReservoirIntra,
    ] {
        let state = reduced_state(partition, &ModelParams::symmetric(1.0, 3.0).unwrap(), 1.3);
        let brute = chsh_brute_force(state.matrix());
        assert!((brute - chsh_horodecki(state.matrix())).abs() < 1e-6, "{partition}");
    }
}

#[test]
fn printed_chsh_never_exceeds_horodecki() {
    for partition in Partition::ALL {
        for lc in [0.0, 0.5, 2.0, 4.0, 6.0] {
            let params = ModelParams::with_real_amplitude(1.0, lc, 0.6).unwrap();
            for k in 0..=40 {
                let s = reduced_state(partition, &params, 0.1 * k as f64);
                let b = chsh(&s).unwrap().value;
                assert!(b <= chsh_horodecki(s.matrix()) + 1e-9);
                assert!((0.0..=2.0 * 2f64.sqrt() + 1e-9).contains(&b));
            }
        }
    }
}

#[test]
fn closed_form_fidelities_match_uhlmann() {
    for a in [FRAC_1_SQRT_2, 1.0 / 5f64.sqrt()] {
        for lc in [0.0, 1.5, 4.0, 5.0] {
            let params = ModelParams::with_real_amplitude(1.0, lc, a).unwrap();
            for index in FidelityIndex::ALL {
                let start = reduced_state(index.partition(), &params, 0.0);
                for k in 0..=20 {
                    let t = 0.2 * k as f64;
                    let later = reduced_state(index.partition(), &params, t);
                    let generic = fidelity(start.matrix(), later.matrix()).unwrap();
                    let closed = fidelity_closed_form(index, &params, t);
                    assert!(
                        (generic - closed).abs() < 1e-8,
                        "{index} lc={lc} t={t}: {generic} vs {closed}"
                    );
                }
            }
        }
    }
}

#[test]
fn numeric_discord_tracks_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..10 {
        let family = Family::ALL[rng.random_range(0..3)];
        let params =
            ModelParams::with_real_amplitude(1.0, rng.random_range(0.0..5.0), rng.random_range(0.2..0.95)).unwrap();
        let t = rng.random_range(0.0..4.0);
        let closed = quantum_discord_closed(family, &params, t);
        let numeric = discord_numeric(&reduced_state(family.partition(), &params, t), 48);
        assert!((closed - numeric).abs() < 1e-3, "{family} t={t}: {closed} vs {numeric}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ode_agrees_with_closed_form(v in 0.2f64..3.0, lc in 0.0f64..8.0, t in 0.0f64..6.0) {
        let params = ModelParams::symmetric(v, lc).unwrap();
        let ode = amplitudes_ode(&params, t, 1e-11).unwrap();
        let e = excitation_probabilities(&params, t);
        prop_assert!((1.0 - ode.xi.norm_sqr() - e.p).abs() < 1e-8);
        prop_assert!((ode.eta.norm_sqr() - e.q).abs() < 1e-8);
    }

    #[test]
    fn fidelity_to_initial_state_is_a_probability(lc in 0.0f64..6.0, t in 0.0f64..5.0, a in 0.05f64..0.99) {
        let params = ModelParams::with_real_amplitude(1.0, lc, a).unwrap();
        for index in FidelityIndex::ALL {
            let f = fidelity_closed_form(index, &params, t);
            prop_assert!((0.0..=1.0).contains(&f));
        }
    }
}
