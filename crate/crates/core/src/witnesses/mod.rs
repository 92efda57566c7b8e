//! Non-Markovianity witnesses, the CHSH-Bell function and classical/quantum
//! correlations of the reduced two-qubit states.

mod bell;
mod correlations;
mod memory;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use bell::{chsh, chsh_horodecki, ChshBranch, ChshResult, TSIRELSON};
pub use correlations::{
    classical_correlation_closed, conditional_entropy_after_measurement, discord_numeric, mutual_information,
    quantum_discord_as_printed, quantum_discord_closed, Family,
};
pub use memory::{fidelity_difference, relative_entropy_difference, trace_distance_difference, DENOMINATOR_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    FidelityDiff,
    TraceDistDiff,
    RelEntropyDiff,
    Chsh,
    ClassicalCorr,
    QuantumDiscord,
    MutualInfo,
}

impl WitnessKind {
    pub const ALL: [WitnessKind; 7] = [
        WitnessKind::FidelityDiff,
        WitnessKind::TraceDistDiff,
        WitnessKind::RelEntropyDiff,
        WitnessKind::Chsh,
        WitnessKind::ClassicalCorr,
        WitnessKind::QuantumDiscord,
        WitnessKind::MutualInfo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WitnessKind::FidelityDiff => "fidelity-diff",
            WitnessKind::TraceDistDiff => "trace-dist-diff",
            WitnessKind::RelEntropyDiff => "rel-entropy-diff",
            WitnessKind::Chsh => "chsh",
            WitnessKind::ClassicalCorr => "classical-corr",
            WitnessKind::QuantumDiscord => "quantum-discord",
            WitnessKind::MutualInfo => "mutual-info",
        }
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WitnessKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown witness kind '{s}'")))
    }
}

/// Value of a difference witness. Cells whose reference distance vanishes,
/// or whose relative entropy diverges, are kept distinct from numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WitnessValue {
    Value(f64),
    /// Reference term below [`DENOMINATOR_FLOOR`].
    Undefined,
    /// A relative entropy in the ratio is infinite.
    Infinite,
}

impl WitnessValue {
    pub fn value(self) -> Option<f64> {
        match self {
            WitnessValue::Value(x) => Some(x),
            _ => None,
        }
    }

    /// `NaN` for undefined, `+∞` for infinite.
    pub fn to_f64(self) -> f64 {
        match self {
            WitnessValue::Value(x) => x,
            WitnessValue::Undefined => f64::NAN,
            WitnessValue::Infinite => f64::INFINITY,
        }
    }
}
