//! Parameter sweeps over two of `t`, `τ` and `λc`, with per-cell
//! classification and flat-file output.

mod check;
mod io;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::ModelParams;
use crate::error::{Error, Result};
use crate::measures::{fidelity_closed_form, FidelityIndex};
use crate::states::{reduced_state, Partition};
use crate::witnesses::{
    chsh, classical_correlation_closed, fidelity_difference, mutual_information, quantum_discord_closed,
    relative_entropy_difference, trace_distance_difference, Family, WitnessKind,
};

pub use check::{run_trajectory_check, run_trajectory_check_against, CheckRow, Population, TrajectoryReport};
pub use io::{read_csv, CsvCell, CsvTable};

/// Values below this count as negative.
pub const NEGATIVE_THRESHOLD: f64 = -1e-9;

/// Amplitudes given in a spec must be normalized to within this.
pub const NORMALIZATION_TOL: f64 = 1e-9;

const MAX_AXIS_POINTS: usize = 1_000_000;

/// What a scan evaluates at each cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Quantity {
    FidelitySurface,
    Witness(WitnessKind),
}

impl Quantity {
    fn uses_tau(self) -> bool {
        matches!(
            self,
            Quantity::Witness(WitnessKind::FidelityDiff | WitnessKind::TraceDistDiff | WitnessKind::RelEntropyDiff)
        )
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::FidelitySurface => f.write_str("fidelity-surface"),
            Quantity::Witness(k) => k.fmt(f),
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "fidelity-surface" {
            Ok(Quantity::FidelitySurface)
        } else {
            s.parse().map(Quantity::Witness)
        }
    }
}

impl TryFrom<String> for Quantity {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Quantity> for String {
    fn from(q: Quantity) -> String {
        q.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    T,
    Tau,
    LambdaC,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::T => "t",
            AxisName::Tau => "tau",
            AxisName::LambdaC => "lambda_c",
        }
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [AxisName::T, AxisName::Tau, AxisName::LambdaC]
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown axis '{s}', expected t, tau or lambda_c")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(name: AxisName, min: f64, max: f64, step: f64) -> Self {
        Self { name, min, max, step }
    }

    fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidSpec(format!("axis {} has non-finite bounds", self.name)));
        }
        if self.step <= 0.0 {
            return Err(Error::InvalidSpec(format!("axis {} needs a positive step", self.name)));
        }
        if self.max < self.min {
            return Err(Error::InvalidSpec(format!(
                "axis {} is empty ({} > {})",
                self.name, self.min, self.max
            )));
        }
        if self.min < 0.0 {
            return Err(Error::InvalidSpec(format!("axis {} must be non-negative", self.name)));
        }
        if (self.max - self.min) / self.step >= MAX_AXIS_POINTS as f64 {
            return Err(Error::InvalidSpec(format!("axis {} has too many points", self.name)));
        }
        Ok(())
    }

    /// `min + i·step` up to `max`, allowing for rounding in the last point.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::InvalidSpec(format!(
                "unknown format '{s}', expected csv or json"
            ))),
        }
    }
}

fn default_coupling() -> f64 {
    1.0
}

/// A two-axis sweep. Parameters not on an axis come from the fixed fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub quantity: Quantity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    /// Selects the partition for fidelity surfaces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<FidelityIndex>,
    pub axes: [Axis; 2],
    #[serde(default = "default_coupling", alias = "v")]
    pub coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// `[re, im]`; defaults to `1/√2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_a: Option<[f64; 2]>,
    /// `[re, im]`; derived as real `sqrt(1 − |a|²)` when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_b: Option<[f64; 2]>,
    /// Mixing weight with `I/4` for relative-entropy scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularizer: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub format: Format,
}

impl ScanSpec {
    pub fn new(quantity: Quantity, axes: [Axis; 2]) -> Self {
        Self {
            quantity,
            partition: None,
            index: None,
            axes,
            coupling: 1.0,
            lambda_c: None,
            t: None,
            tau: None,
            amp_a: None,
            amp_b: None,
            regularizer: None,
            output: None,
            format: Format::Csv,
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: Self = toml::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads TOML for `.toml` files and JSON otherwise, without validating.
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))
        } else {
            serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let spec = Self::read(path)?;
        spec.validate()?;
        Ok(spec)
    }

    /// Resolved `(a, b)`.
    pub fn amplitudes(&self) -> Result<(Complex64, Complex64)> {
        let to_c = |[re, im]: [f64; 2]| Complex64::new(re, im);
        match (self.amp_a.map(to_c), self.amp_b.map(to_c)) {
            (None, None) => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                Ok((Complex64::new(h, 0.0), Complex64::new(h, 0.0)))
            }
            (Some(a), None) => {
                let rest = 1.0 - a.norm_sqr();
                if rest < -NORMALIZATION_TOL {
                    return Err(Error::InvalidSpec(format!("|a|² = {} exceeds 1", a.norm_sqr())));
                }
                Ok((a, Complex64::new(rest.max(0.0).sqrt(), 0.0)))
            }
            (None, Some(b)) => {
                let rest = 1.0 - b.norm_sqr();
                if rest < -NORMALIZATION_TOL {
                    return Err(Error::InvalidSpec(format!("|b|² = {} exceeds 1", b.norm_sqr())));
                }
                Ok((Complex64::new(rest.max(0.0).sqrt(), 0.0), b))
            }
            (Some(a), Some(b)) => {
                let norm = a.norm_sqr() + b.norm_sqr();
                if (norm - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidSpec(format!("|a|² + |b|² = {norm}, expected 1")));
                }
                Ok((a, b))
            }
        }
    }

    fn axis_has(&self, name: AxisName) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    fn fixed(&self, name: AxisName) -> Option<f64> {
        match name {
            AxisName::T => self.t,
            AxisName::Tau => self.tau,
            AxisName::LambdaC => self.lambda_c,
        }
    }

    /// Partition the scan's states are built for, if any.
    pub fn resolved_partition(&self) -> Result<Partition> {
        match self.quantity {
            Quantity::FidelitySurface => {
                let index = match (self.index, self.partition) {
                    (Some(i), _) => i,
                    (None, Some(p)) => FidelityIndex::for_partition(p)
                        .ok_or_else(|| Error::InvalidSpec(format!("no closed-form fidelity for partition {p}")))?,
                    (None, None) => return Err(Error::InvalidSpec("fidelity-surface needs an index".into())),
                };
                if let Some(p) = self.partition {
                    if p != index.partition() {
                        return Err(Error::InvalidSpec(format!(
                            "index {index} belongs to {}, not {p}",
                            index.partition()
                        )));
                    }
                }
                Ok(index.partition())
            }
            Quantity::Witness(kind) => {
                let p = self
                    .partition
                    .ok_or_else(|| Error::InvalidSpec(format!("{kind} scan needs a partition")))?;
                if matches!(kind, WitnessKind::ClassicalCorr | WitnessKind::QuantumDiscord)
                    && Family::from_partition(p).is_none()
                {
                    return Err(Error::InvalidSpec(format!(
                        "{kind} is available for atom-atom, cavity-cavity and reservoir-reservoir only"
                    )));
                }
                Ok(p)
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        for axis in &self.axes {
            axis.validate()?;
        }
        if self.axes[0].name == self.axes[1].name {
            return Err(Error::InvalidSpec("the two axes must differ".into()));
        }
        if !self.quantity.uses_tau() && self.axis_has(AxisName::Tau) {
            return Err(Error::InvalidSpec(format!("{} does not depend on tau", self.quantity)));
        }
        let mut needed = vec![AxisName::T, AxisName::LambdaC];
        if self.quantity.uses_tau() {
            needed.push(AxisName::Tau);
        }
        for name in needed {
            if !self.axis_has(name) {
                match self.fixed(name) {
                    Some(v) if v.is_finite() && v >= 0.0 => {}
                    Some(v) => return Err(Error::InvalidSpec(format!("fixed {name} = {v} must be non-negative"))),
                    None => return Err(Error::InvalidSpec(format!("{name} is neither an axis nor fixed"))),
                }
            }
        }
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "coupling must be positive, got {}",
                self.coupling
            )));
        }
        if let Some(eps) = self.regularizer {
            if !(0.0..1.0).contains(&eps) {
                return Err(Error::InvalidSpec(format!("regularizer must lie in [0, 1), got {eps}")));
            }
        }
        self.amplitudes()?;
        self.resolved_partition()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellFlag {
    Negative,
    NonNegative,
    /// CHSH value above the classical bound 2.
    Violating,
    /// Undefined ratio or divergent relative entropy.
    Undefined,
}

impl CellFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            CellFlag::Negative => "negative",
            CellFlag::NonNegative => "non-negative",
            CellFlag::Violating => "violating",
            CellFlag::Undefined => "undefined",
        }
    }

    /// Flag implied by a cell value. Non-finite values are undefined; CHSH
    /// cells are violating above 2, everything else is negative below
    /// [`NEGATIVE_THRESHOLD`].
    pub fn classify(quantity: Quantity, value: f64) -> Self {
        if !value.is_finite() {
            CellFlag::Undefined
        } else if quantity == Quantity::Witness(WitnessKind::Chsh) {
            if value > 2.0 {
                CellFlag::Violating
            } else {
                CellFlag::NonNegative
            }
        } else if value < NEGATIVE_THRESHOLD {
            CellFlag::Negative
        } else {
            CellFlag::NonNegative
        }
    }
}

impl fmt::Display for CellFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CellFlag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            CellFlag::Negative,
            CellFlag::NonNegative,
            CellFlag::Violating,
            CellFlag::Undefined,
        ]
        .into_iter()
        .find(|f| f.as_str() == s)
        .ok_or_else(|| Error::Parse(format!("unknown cell flag '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisValues {
    pub name: AxisName,
    pub values: Vec<f64>,
}

/// Row-major grid: the second axis varies fastest. Undefined cells hold
/// `NaN`, divergent ones `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessGrid {
    pub spec: ScanSpec,
    pub axes: [AxisValues; 2],
    pub values: Vec<f64>,
    pub flags: Vec<CellFlag>,
}

impl WitnessGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.axes[0].values.len(), self.axes[1].values.len())
    }

    pub fn coords(&self, index: usize) -> (f64, f64) {
        let n2 = self.axes[1].values.len();
        (self.axes[0].values[index / n2], self.axes[1].values[index % n2])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes[1].values.len() + j]
    }

    pub fn to_json_string(&self) -> Result<String> {
        io::grid_to_json(self)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        io::grid_from_json(s)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        io::grid_to_csv(self)
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<()> {
        let text = match format {
            Format::Csv => self.to_csv_string()?,
            Format::Json => self.to_json_string()?,
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}

struct Cell {
    t: f64,
    tau: f64,
    lambda_c: f64,
}

fn evaluate(spec: &ScanSpec, partition: Partition, base: &ModelParams, cell: &Cell) -> f64 {
    let params = base.with_cavity_decay(cell.lambda_c).expect("validated decay");
    match spec.quantity {
        Quantity::FidelitySurface => {
            let index = FidelityIndex::for_partition(partition).expect("validated index");
            fidelity_closed_form(index, &params, cell.t)
        }
        Quantity::Witness(kind) => match kind {
            WitnessKind::FidelityDiff => fidelity_difference(partition, &params, cell.t, cell.tau).to_f64(),
            WitnessKind::TraceDistDiff => trace_distance_difference(partition, &params, cell.t, cell.tau).to_f64(),
            WitnessKind::RelEntropyDiff => {
                relative_entropy_difference(partition, &params, cell.t, cell.tau, spec.regularizer.unwrap_or(0.0))
                    .to_f64()
            }
            WitnessKind::Chsh => chsh(&reduced_state(partition, &params, cell.t)).map_or(f64::NAN, |r| r.value),
            WitnessKind::MutualInfo => mutual_information(&reduced_state(partition, &params, cell.t)),
            WitnessKind::ClassicalCorr => {
                classical_correlation_closed(Family::from_partition(partition).expect("validated"), &params, cell.t)
            }
            WitnessKind::QuantumDiscord => {
                quantum_discord_closed(Family::from_partition(partition).expect("validated"), &params, cell.t)
            }
        },
    }
}

/// Evaluates every cell. Deterministic for a given spec regardless of the
/// rayon pool size.
pub fn run_scan(spec: &ScanSpec) -> Result<WitnessGrid> {
    spec.validate()?;
    let partition = spec.resolved_partition()?;
    let (a, b) = spec.amplitudes()?;
    let base = ModelParams::new(spec.coupling, spec.lambda_c.unwrap_or(0.0), a, b)?;
    let axes = spec.axes.map(|a| AxisValues {
        name: a.name,
        values: a.values(),
    });
    for axis in &axes {
        if axis.name == AxisName::LambdaC {
            base.with_cavity_decay(*axis.values.last().expect("non-empty axis"))?;
        }
    }
    let n2 = axes[1].values.len();
    let total = axes[0].values.len() * n2;

    let values: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|k| {
            let mut cell = Cell {
                t: spec.t.unwrap_or(0.0),
                tau: spec.tau.unwrap_or(0.0),
                lambda_c: spec.lambda_c.unwrap_or(0.0),
            };
            for (axis, value) in axes.iter().zip([axes[0].values[k / n2], axes[1].values[k % n2]]) {
                match axis.name {
                    AxisName::T => cell.t = value,
                    AxisName::Tau => cell.tau = value,
                    AxisName::LambdaC => cell.lambda_c = value,
                }
            }
            evaluate(spec, partition, &base, &cell)
        })
        .collect();
    let flags = values.iter().map(|&v| CellFlag::classify(spec.quantity, v)).collect();
    Ok(WitnessGrid {
        spec: spec.clone(),
        axes,
        values,
        flags,
    })
}

/// Runs the scan and, when the spec names an output file, writes it.
pub fn execute(spec: &ScanSpec) -> Result<WitnessGrid> {
    let grid = run_scan(spec)?;
    if let Some(out) = &spec.output {
        grid.write(Path::new(out), spec.format)?;
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub value: f64,
    pub index: usize,
    pub coords: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlagCount {
    pub flag: CellFlag,
    pub count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub cells: usize,
    pub flags: Vec<FlagCount>,
    /// Over finite cells only; the first occurrence wins ties.
    pub min: Option<Extremum>,
    pub max: Option<Extremum>,
}

impl ScanSummary {
    pub fn count(&self, flag: CellFlag) -> usize {
        self.flags.iter().find(|f| f.flag == flag).map_or(0, |f| f.count)
    }

    pub fn fraction(&self, flag: CellFlag) -> f64 {
        self.flags.iter().find(|f| f.flag == flag).map_or(0.0, |f| f.fraction)
    }
}

pub fn summarize(grid: &WitnessGrid) -> ScanSummary {
    let cells = grid.values.len();
    let flags = [
        CellFlag::Negative,
        CellFlag::NonNegative,
        CellFlag::Violating,
        CellFlag::Undefined,
    ]
    .into_iter()
    .map(|flag| {
        let count = grid.flags.iter().filter(|&&f| f == flag).count();
        let fraction = if cells == 0 { 0.0 } else { count as f64 / cells as f64 };
        FlagCount { flag, count, fraction }
    })
    .collect();
    let mut min: Option<Extremum> = None;
    let mut max: Option<Extremum> = None;
    for (index, &value) in grid.values.iter().enumerate() {
        if !value.is_finite() {
            continue;
        }
        let here = Extremum {
            value,
            index,
            coords: grid.coords(index),
        };
        if min.is_none_or(|m| value < m.value) {
            min = Some(here);
        }
        if max.is_none_or(|m| value > m.value) {
            max = Some(here);
        }
    }
    ScanSummary { cells, flags, min, max }
}
