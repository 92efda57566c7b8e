//! Statistical comparison of the trajectory ensemble with the analytic
//! populations.

use std::fmt;

use serde::Serialize;

use crate::dynamics::{excitation_probabilities, ModelParams};
use crate::error::Result;
use crate::trajectory::{simulate, TrajectoryConfig};

/// Tolerance for treating a zero-variance estimate as exact.
const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Population {
    Atom,
    Cavity,
    Reservoir,
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Population::Atom => "atom",
            Population::Cavity => "cavity",
            Population::Reservoir => "reservoir",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckRow {
    pub t: f64,
    pub population: Population,
    pub analytic: f64,
    pub estimate: f64,
    pub se: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryReport {
    pub rows: Vec<CheckRow>,
    pub beyond_3_sigma: usize,
    pub beyond_5_sigma: usize,
    pub pass: bool,
}

fn z_score(diff: f64, se: f64) -> f64 {
    if se > 0.0 {
        diff / se
    } else if diff.abs() <= EXACT_TOL {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

/// Compares the ensemble with the analytic populations of the same model.
pub fn run_trajectory_check(config: &TrajectoryConfig) -> Result<TrajectoryReport> {
    run_trajectory_check_against(config, &config.params)
}

/// Compares the ensemble with the analytic populations of `reference`.
///
/// Passes when at most one cell in thirty lies beyond 3 standard errors and
/// none beyond 5.
pub fn run_trajectory_check_against(config: &TrajectoryConfig, reference: &ModelParams) -> Result<TrajectoryReport> {
    let estimate = simulate(config)?;
    let rows: Vec<CheckRow> = estimate
        .checkpoints
        .iter()
        .flat_map(|c| {
            let e = excitation_probabilities(reference, c.t);
            [
                (Population::Atom, 1.0 - e.p, c.est_atom, c.se_atom),
                (Population::Cavity, e.q, c.est_cavity, c.se_cavity),
                (Population::Reservoir, e.gamma_d, c.est_reservoir, c.se_reservoir),
            ]
            .map(|(population, analytic, estimate, se)| CheckRow {
                t: c.t,
                population,
                analytic,
                estimate,
                se,
                z: z_score(estimate - analytic, se),
            })
        })
        .collect();
    let beyond_3_sigma = rows.iter().filter(|r| r.z.abs() > 3.0).count();
    let beyond_5_sigma = rows.iter().filter(|r| r.z.abs() > 5.0).count();
    let pass = beyond_5_sigma == 0 && beyond_3_sigma * 30 <= rows.len();
    Ok(TrajectoryReport {
        rows,
        beyond_3_sigma,
        beyond_5_sigma,
        pass,
    })
}
