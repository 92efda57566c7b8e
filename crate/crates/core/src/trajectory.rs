//! Quantum-jump unraveling of the single-excitation dynamics.
//!
//! With a single decay channel whose post-jump state is absorbing, every
//! trajectory either follows the non-Hermitian flow of `(ξ, η)` or has
//! jumped into the reservoir. A trajectory draws `u ∈ (0, 1]` and jumps when
//! the squared norm `|ξ|² + |η|²` first falls below `u`; survivors carry the
//! normalized populations `|ξ|²/N` and `|η|²/N`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{rk4_step, ModelParams};
use crate::error::{Error, Result};

pub const DEFAULT_DT: f64 = 1e-3;

/// Ensembles at least this large re-run with `dt/2` and compare.
pub const SELF_CHECK_MIN_TRAJ: usize = 10_000;

const MAX_TABLE_STEPS: f64 = 5e7;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub params: ModelParams,
    pub checkpoints: Vec<f64>,
    pub n_traj: usize,
    pub seed: u64,
    pub dt: f64,
}

impl TrajectoryConfig {
    pub fn new(params: ModelParams, checkpoints: Vec<f64>, n_traj: usize, seed: u64) -> Self {
        Self {
            params,
            checkpoints,
            n_traj,
            seed,
            dt: DEFAULT_DT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::InvalidArgument("n_traj must be at least 1".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {}", self.dt)));
        }
        let Some(&last) = self.checkpoints.last() else {
            return Err(Error::InvalidArgument("at least one checkpoint is required".into()));
        };
        if self.checkpoints.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::InvalidArgument(
                "checkpoints must be finite and non-negative".into(),
            ));
        }
        if self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
        }
        if last / self.dt > MAX_TABLE_STEPS {
            return Err(Error::InvalidArgument(format!(
                "last checkpoint {last} needs too many steps of {}",
                self.dt
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckpointEstimate {
    pub t: f64,
    pub est_atom: f64,
    pub est_cavity: f64,
    pub est_reservoir: f64,
    pub se_atom: f64,
    pub se_cavity: f64,
    pub se_reservoir: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryEstimate {
    pub n_traj: usize,
    pub checkpoints: Vec<CheckpointEstimate>,
}

/// Squared norm on the `dt` grid plus the flow evaluated at each checkpoint.
struct Flow {
    dt: f64,
    norms: Vec<f64>,
    /// `(|ξ|²/N, |η|²/N)` at each checkpoint.
    conditional: Vec<(f64, f64)>,
}

fn build_flow(params: &ModelParams, checkpoints: &[f64], dt: f64) -> Flow {
    let last = *checkpoints.last().expect("validated");
    let steps = (last / dt).ceil() as usize;
    let mut y = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let mut states = Vec::with_capacity(steps + 1);
    let mut norms = Vec::with_capacity(steps + 1);
    states.push(y);
    norms.push(1.0);
    for _ in 0..steps {
        y = rk4_step(params, y, dt);
        let n = (y.0.norm_sqr() + y.1.norm_sqr()).min(*norms.last().unwrap());
        states.push(y);
        norms.push(n);
    }
    let conditional = checkpoints
        .iter()
        .map(|&t| {
            let k = ((t / dt).floor() as usize).min(steps);
            let rest = t - k as f64 * dt;
            let (xi, eta) = if rest > 0.0 {
                rk4_step(params, states[k], rest)
            } else {
                states[k]
            };
            let n = xi.norm_sqr() + eta.norm_sqr();
            (xi.norm_sqr() / n, eta.norm_sqr() / n)
        })
        .collect();
    Flow { dt, norms, conditional }
}

impl Flow {
    /// First time the norm drops below `u`, linearly interpolated.
    fn jump_time(&self, u: f64) -> Option<f64> {
        let k = self.norms.partition_point(|&n| n >= u);
        if k == self.norms.len() {
            return None;
        }
        let (hi, lo) = (self.norms[k - 1], self.norms[k]);
        let frac = if hi > lo { (hi - u) / (hi - lo) } else { 0.0 };
        Some(((k - 1) as f64 + frac) * self.dt)
    }
}

fn uniform_draw(seed: u64, index: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    1.0 - rng.random::<f64>()
}

/// Number of trajectories that have not jumped by each checkpoint.
fn survivors(config: &TrajectoryConfig, flow: &Flow) -> Vec<u64> {
    let m = config.checkpoints.len();
    if config.params.cavity_decay() == 0.0 {
        return vec![config.n_traj as u64; m];
    }
    // histogram[j] = trajectories surviving exactly the first j checkpoints
    let histogram = (0..config.n_traj)
        .into_par_iter()
        .fold(
            || vec![0u64; m + 1],
            |mut acc, i| {
                let survived = match flow.jump_time(uniform_draw(config.seed, i)) {
                    None => m,
                    Some(tj) => config.checkpoints.partition_point(|&t| t < tj),
                };
                acc[survived] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut alive = config.n_traj as u64;
    (0..m)
        .map(|c| {
            alive -= histogram[c];
            alive
        })
        .collect()
}

fn estimate_with_dt(config: &TrajectoryConfig, dt: f64) -> TrajectoryEstimate {
    let flow = build_flow(&config.params, &config.checkpoints, dt);
    let alive = survivors(config, &flow);
    let n = config.n_traj as f64;
    let checkpoints = config
        .checkpoints
        .iter()
        .zip(&flow.conditional)
        .zip(alive)
        .map(|((&t, &(atom, cavity)), alive)| {
            let s = alive as f64 / n;
            let se = (s * (1.0 - s) / n).sqrt();
            CheckpointEstimate {
                t,
                est_atom: s * atom,
                est_cavity: s * cavity,
                est_reservoir: 1.0 - s,
                se_atom: atom * se,
                se_cavity: cavity * se,
                se_reservoir: se,
            }
        })
        .collect();
    TrajectoryEstimate {
        n_traj: config.n_traj,
        checkpoints,
    }
}

/// Runs the ensemble. Output depends only on the config, not on the number
/// of worker threads.
pub fn simulate(config: &TrajectoryConfig) -> Result<TrajectoryEstimate> {
    config.validate()?;
    let estimate = estimate_with_dt(config, config.dt);
    if config.n_traj >= SELF_CHECK_MIN_TRAJ {
        let fine = estimate_with_dt(config, 0.5 * config.dt);
        for (a, b) in estimate.checkpoints.iter().zip(&fine.checkpoints) {
            let pairs = [
                ("atom", a.est_atom, b.est_atom, a.se_atom),
                ("cavity", a.est_cavity, b.est_cavity, a.se_cavity),
                ("reservoir", a.est_reservoir, b.est_reservoir, a.se_reservoir),
            ];
            for (name, coarse, fine, se) in pairs {
                if (coarse - fine).abs() > se.max(1e-9) {
                    return Err(Error::DtConvergence {
                        dt: config.dt,
                        detail: format!("{name} estimate at t={} moved from {coarse} to {fine} (SE {se})", a.t),
                    });
                }
            }
        }
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::excitation_probabilities;

    fn config(lc: f64, checkpoints: Vec<f64>, n: usize) -> TrajectoryConfig {
        TrajectoryConfig::new(ModelParams::symmetric(1.0, lc).unwrap(), checkpoints, n, 7)
    }

    #[test]
    fn lossless_limit_is_deterministic() {
        let est = simulate(&config(0.0, vec![0.0, 0.3, 1.0, 2.5], 1000)).unwrap();
        for c in &est.checkpoints {
            assert_eq!(c.est_reservoir, 0.0);
            assert!((c.est_atom - c.t.cos().powi(2)).abs() < 1e-6);
            assert!((c.est_cavity - c.t.sin().powi(2)).abs() < 1e-6);
            assert_eq!(c.se_atom, 0.0);
        }
    }

    #[test]
    fn exceptional_point_statistics() {
        let est = simulate(&config(4.0, vec![1.0], 100_000)).unwrap();
        let c = est.checkpoints[0];
        let e2 = (-2.0f64).exp();
        assert!((c.est_atom - 4.0 * e2).abs() < 3.0 * c.se_atom);
        assert!((c.est_cavity - e2).abs() < 3.0 * c.se_cavity);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let cfg = config(2.0, vec![0.5, 1.0, 2.0], 5000);
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        let other = TrajectoryConfig { seed: 8, ..cfg.clone() };
        assert_ne!(simulate(&cfg).unwrap(), simulate(&other).unwrap());
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = config(1.0, vec![0.5, 1.0, 4.0], 20_000);
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let quad = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = single.install(|| simulate(&cfg).unwrap());
        let b = quad.install(|| simulate(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn populations_sum_to_one_and_reservoir_grows() {
        let est = simulate(&config(3.0, vec![0.1, 0.5, 0.9, 1.7, 3.0], 3000)).unwrap();
        for c in &est.checkpoints {
            assert!((c.est_atom + c.est_cavity + c.est_reservoir - 1.0).abs() < 1e-9);
        }
        assert!(est
            .checkpoints
            .windows(2)
            .all(|w| w[1].est_reservoir >= w[0].est_reservoir));
    }

    #[test]
    fn conditional_flow_matches_analytic_ratio() {
        let params = ModelParams::symmetric(1.0, 2.0).unwrap();
        let flow = build_flow(&params, &[0.7, 1.234], 1e-3);
        for (&t, &(atom, cavity)) in [0.7, 1.234].iter().zip(&flow.conditional) {
            let e = excitation_probabilities(&params, t);
            let n = 1.0 - e.gamma_d;
            assert!((atom - (1.0 - e.p) / n).abs() < 1e-10);
            assert!((cavity - e.q / n).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(simulate(&config(1.0, vec![1.0, 1.0], 10)).is_err());
        assert!(simulate(&config(1.0, vec![], 10)).is_err());
        assert!(simulate(&config(1.0, vec![1.0], 0)).is_err());
        assert!(simulate(&config(1.0, vec![-1.0], 10)).is_err());
    }

    #[test]
    fn oversized_step_fails_self_check() {
        let cfg = TrajectoryConfig {
            dt: 0.9,
            ..config(8.0, vec![0.5, 1.0, 2.0], 20_000)
        };
        assert!(matches!(simulate(&cfg), Err(Error::DtConvergence { .. })));
    }
}
