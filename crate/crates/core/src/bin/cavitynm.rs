use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use cavitynm::dynamics::{analytic_amplitudes, excitation_probabilities, ModelParams};
use cavitynm::error::{Error, Result};
use cavitynm::measures::FidelityIndex;
use cavitynm::scan::{
    execute, run_trajectory_check_against, summarize, Axis, AxisName, Format, Quantity, ScanSpec, WitnessGrid,
};
use cavitynm::states::Partition;
use cavitynm::trajectory::{TrajectoryConfig, DEFAULT_DT};
use cavitynm::witnesses::WitnessKind;

const T_MAX: f64 = 4.0;
const T_STEP: f64 = 0.02;
const LAMBDA_C_MAX: f64 = 4.0;
const LAMBDA_C_STEP: f64 = 0.05;

/// Closed-form dynamics, non-Markovianity maps, Bell and correlation scans
/// for two atoms in dissipative cavities.
#[derive(Parser)]
#[command(name = "cavitynm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate ξ(t), η(t) and the populations p, q, γd.
    Amplitudes(Common),
    /// Closed-form fidelity over t and λc.
    FidelitySurface {
        #[command(flatten)]
        common: Common,
        /// F1..F6
        #[arg(long)]
        index: Option<FidelityIndex>,
    },
    /// Fidelity, trace-distance or relative-entropy witness over t and τ.
    NmMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<WitnessKind>,
        #[arg(long)]
        partition: Option<Partition>,
        /// Mix the second state with I/4 at this weight.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// CHSH-Bell function over t and λc.
    ChshMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        partition: Option<Partition>,
    },
    /// Mutual information, classical correlation or discord over t and λc.
    CorrMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<WitnessKind>,
        #[arg(long)]
        partition: Option<Partition>,
    },
    /// Compare a quantum-jump ensemble with the analytic populations.
    TrajectoryCheck {
        #[command(flatten)]
        common: Common,
        /// Comma-separated checkpoint times.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<f64>>,
        #[arg(long)]
        n_traj: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Compare against the analytic solution at a different λc.
        #[arg(long)]
        reference_lambda_c: Option<f64>,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON or TOML file with the run description.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    lambda_c: Option<f64>,
    #[arg(long)]
    a_re: Option<f64>,
    #[arg(long)]
    a_im: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
}

enum Failure {
    Spec(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Spec(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Spec(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Check(msg)) => {
            eprintln!("trajectory check failed: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Amplitudes(common) => amplitudes(&common).map_err(Failure::from),
        Command::FidelitySurface { common, index } => {
            let mut spec = map_spec(
                &common,
                None,
                &[Quantity::FidelitySurface],
                [AxisName::T, AxisName::LambdaC],
            )?;
            if index.is_some() {
                spec.index = index;
                spec.partition = None;
            } else if spec.index.is_none() && spec.partition.is_none() {
                spec.index = Some(FidelityIndex::F2);
            }
            scan(spec).map_err(Failure::from)
        }
        Command::NmMap {
            common,
            kind,
            partition,
            epsilon,
        } => {
            let allowed = [
                WitnessKind::FidelityDiff,
                WitnessKind::TraceDistDiff,
                WitnessKind::RelEntropyDiff,
            ]
            .map(Quantity::Witness);
            let mut spec = map_spec(
                &common,
                kind.map(Quantity::Witness),
                &allowed,
                [AxisName::T, AxisName::Tau],
            )?;
            set_partition(&mut spec, partition, Partition::AtomReservoirIntra);
            spec.regularizer = epsilon.or(spec.regularizer);
            if spec.lambda_c.is_none() {
                spec.lambda_c = Some(0.0);
            }
            scan(spec).map_err(Failure::from)
        }
        Command::ChshMap { common, partition } => {
            let allowed = [Quantity::Witness(WitnessKind::Chsh)];
            let mut spec = map_spec(&common, None, &allowed, [AxisName::T, AxisName::LambdaC])?;
            set_partition(&mut spec, partition, Partition::ReservoirReservoir);
            scan(spec).map_err(Failure::from)
        }
        Command::CorrMap {
            common,
            kind,
            partition,
        } => {
            let allowed = [
                WitnessKind::QuantumDiscord,
                WitnessKind::ClassicalCorr,
                WitnessKind::MutualInfo,
            ]
            .map(Quantity::Witness);
            let mut spec = map_spec(
                &common,
                kind.map(Quantity::Witness),
                &allowed,
                [AxisName::T, AxisName::LambdaC],
            )?;
            set_partition(&mut spec, partition, Partition::AtomAtom);
            scan(spec).map_err(Failure::from)
        }
        Command::TrajectoryCheck {
            common,
            checkpoints,
            n_traj,
            seed,
            dt,
            reference_lambda_c,
        } => {
            let mut spec: CheckSpec = match &common.config {
                Some(path) => read_config(path)?,
                None => CheckSpec::default(),
            };
            spec.lambda_c = common.lambda_c.unwrap_or(spec.lambda_c);
            spec.checkpoints = checkpoints.unwrap_or(spec.checkpoints);
            spec.n_traj = n_traj.unwrap_or(spec.n_traj);
            spec.seed = seed.unwrap_or(spec.seed);
            spec.dt = dt.unwrap_or(spec.dt);
            spec.reference_lambda_c = reference_lambda_c.or(spec.reference_lambda_c);
            trajectory_check(&spec, &common)
        }
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))
    } else {
        serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))
    }
}

fn default_axis(name: AxisName) -> Axis {
    match name {
        AxisName::LambdaC => Axis::new(name, 0.0, LAMBDA_C_MAX, LAMBDA_C_STEP),
        _ => Axis::new(name, 0.0, T_MAX, T_STEP),
    }
}

/// Spec from `--config` or defaults, with the shared flag overrides applied.
/// The quantity is `explicit` if given, otherwise the config's, which must
/// be one of `allowed`. Without a config it defaults to `allowed[0]`.
fn map_spec(
    common: &Common,
    explicit: Option<Quantity>,
    allowed: &[Quantity],
    default_axes: [AxisName; 2],
) -> Result<ScanSpec> {
    let mut spec = match &common.config {
        Some(path) => ScanSpec::read(path)?,
        None => ScanSpec::new(allowed[0], default_axes.map(default_axis)),
    };
    if let Some(q) = explicit {
        if !allowed.contains(&q) {
            return Err(Error::InvalidSpec(format!("{q} is not available in this subcommand")));
        }
        spec.quantity = q;
    } else if !allowed.contains(&spec.quantity) {
        return Err(Error::InvalidSpec(format!(
            "config describes {}, not a quantity of this subcommand",
            spec.quantity
        )));
    }
    if let Some(lc) = common.lambda_c {
        // pins a λc axis to a single point
        spec.lambda_c = Some(lc);
        for axis in spec.axes.iter_mut().filter(|a| a.name == AxisName::LambdaC) {
            *axis = Axis::new(AxisName::LambdaC, lc, lc, 1.0);
        }
    }
    if common.a_re.is_some() || common.a_im.is_some() {
        let [re, im] = spec.amp_a.unwrap_or([std::f64::consts::FRAC_1_SQRT_2, 0.0]);
        spec.amp_a = Some([common.a_re.unwrap_or(re), common.a_im.unwrap_or(im)]);
        spec.amp_b = None;
    }
    for axis in spec.axes.iter_mut().filter(|a| a.name != AxisName::LambdaC) {
        if let Some(max) = common.t_max {
            axis.max = max;
        }
        if let Some(step) = common.step {
            axis.step = step;
        }
    }
    if let Some(out) = &common.out {
        spec.output = Some(out.display().to_string());
    }
    if let Some(format) = common.format {
        spec.format = format;
    }
    Ok(spec)
}

fn set_partition(spec: &mut ScanSpec, flag: Option<Partition>, default: Partition) {
    spec.partition = flag.or(spec.partition).or(Some(default));
}

fn scan(spec: ScanSpec) -> Result<()> {
    let grid = execute(&spec)?;
    if spec.output.is_none() {
        print_grid(&grid, spec.format)?;
    }
    let summary = summarize(&grid);
    eprintln!(
        "{}",
        serde_json::to_string(&summary).map_err(|e| Error::Parse(e.to_string()))?
    );
    Ok(())
}

fn print_grid(grid: &WitnessGrid, format: Format) -> Result<()> {
    let text = match format {
        Format::Csv => grid.to_csv_string()?,
        Format::Json => grid.to_json_string()?,
    };
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplitudeSpec {
    #[serde(default = "one", alias = "v")]
    coupling: f64,
    #[serde(default)]
    lambda_c: f64,
    #[serde(default = "t_max")]
    t_max: f64,
    #[serde(default = "t_step")]
    step: f64,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    format: Format,
}

fn one() -> f64 {
    1.0
}

fn t_max() -> f64 {
    T_MAX
}

fn t_step() -> f64 {
    T_STEP
}

#[derive(Serialize)]
struct AmplitudeRow {
    t: f64,
    xi_re: f64,
    xi_im: f64,
    eta_re: f64,
    eta_im: f64,
    p: f64,
    q: f64,
    gamma_d: f64,
}

fn amplitudes(common: &Common) -> Result<()> {
    let mut spec: AmplitudeSpec = match &common.config {
        Some(path) => read_config(path)?,
        None => serde_json::from_str("{}").expect("defaults"),
    };
    spec.lambda_c = common.lambda_c.unwrap_or(spec.lambda_c);
    spec.t_max = common.t_max.unwrap_or(spec.t_max);
    spec.step = common.step.unwrap_or(spec.step);
    spec.format = common.format.unwrap_or(spec.format);
    if common.out.is_some() {
        spec.output = common.out.clone();
    }
    // ξ and η do not depend on the two-atom amplitudes
    let params = ModelParams::symmetric(spec.coupling, spec.lambda_c)?;
    let times = Axis::new(AxisName::T, 0.0, spec.t_max, spec.step);
    if !(spec.t_max >= 0.0 && spec.step > 0.0) {
        return Err(Error::InvalidSpec(
            "t-max must be non-negative and step positive".into(),
        ));
    }
    let rows: Vec<AmplitudeRow> = times
        .values()
        .into_iter()
        .map(|t| {
            let a = analytic_amplitudes(&params, t);
            let e = excitation_probabilities(&params, t);
            AmplitudeRow {
                t,
                xi_re: a.xi.re,
                xi_im: a.xi.im,
                eta_re: a.eta.re,
                eta_im: a.eta.im,
                p: e.p,
                q: e.q,
                gamma_d: e.gamma_d,
            }
        })
        .collect();
    let text = match spec.format {
        Format::Json => serde_json::to_string_pretty(&rows).map_err(|e| Error::Parse(e.to_string()))?,
        Format::Csv => {
            let mut s = String::from("t,xi_re,xi_im,eta_re,eta_im,p,q,gamma_d\n");
            for r in &rows {
                let cols = [r.t, r.xi_re, r.xi_im, r.eta_re, r.eta_im, r.p, r.q, r.gamma_d];
                let cols: Vec<String> = cols.iter().map(|x| format!("{x:.16e}")).collect();
                s.push_str(&cols.join(","));
                s.push('\n');
            }
            s
        }
    };
    emit(&text, spec.output.as_ref())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckSpec {
    #[serde(default = "one", alias = "v")]
    coupling: f64,
    #[serde(default = "check_lambda_c")]
    lambda_c: f64,
    #[serde(default = "check_points")]
    checkpoints: Vec<f64>,
    #[serde(default = "check_n")]
    n_traj: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "check_dt")]
    dt: f64,
    #[serde(default)]
    reference_lambda_c: Option<f64>,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    format: Format,
}

impl Default for CheckSpec {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

fn check_lambda_c() -> f64 {
    4.0
}

fn check_points() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 4.0]
}

fn check_n() -> usize {
    100_000
}

fn check_dt() -> f64 {
    DEFAULT_DT
}

fn trajectory_check(spec: &CheckSpec, common: &Common) -> std::result::Result<(), Failure> {
    let params = ModelParams::symmetric(spec.coupling, spec.lambda_c)?;
    let reference = match spec.reference_lambda_c {
        Some(lc) => params.with_cavity_decay(lc)?,
        None => params,
    };
    let config = TrajectoryConfig {
        params,
        checkpoints: spec.checkpoints.clone(),
        n_traj: spec.n_traj,
        seed: spec.seed,
        dt: spec.dt,
    };
    config.validate()?;
    let report = run_trajectory_check_against(&config, &reference).map_err(|e| match e {
        Error::DtConvergence { .. } => Failure::Check(e.to_string()),
        other => Failure::Spec(other),
    })?;
    let format = common.format.unwrap_or(spec.format);
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?,
        Format::Csv => {
            let mut s = String::from("t,population,analytic,estimate,se,z\n");
            for r in &report.rows {
                s.push_str(&format!(
                    "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    r.t, r.population, r.analytic, r.estimate, r.se, r.z
                ));
            }
            s
        }
    };
    emit(&text, common.out.as_ref().or(spec.output.as_ref()))?;
    let verdict = format!(
        "{} of {} cells beyond 3 SE, {} beyond 5 SE",
        report.beyond_3_sigma,
        report.rows.len(),
        report.beyond_5_sigma
    );
    if report.pass {
        eprintln!("pass: {verdict}");
        Ok(())
    } else {
        Err(Failure::Check(verdict))
    }
}
