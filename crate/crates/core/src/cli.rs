//! `graphon-od` command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4 configuration
//! conflict (agents not conformable with the partition).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::io::{self, IoError, StepGraphonJson};
use crate::ode::{convergence_study, discretize, simulate, SimConfig};
use crate::three_group::{classify, Coupling3};
use crate::{pixel_graphon, sample_network, solve_many, Error, Execution, PiecewiseFn, StepGraphon};

pub const DEFAULT_RESOLUTION: usize = 512;

/// Where the step graphon of a problem comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphonSource {
    Inline(StepGraphonJson),
    /// Path to a step-graphon JSON file.
    File { file: String },
    /// Path to a network (JSON or dense CSV), embedded as its pixel diagram.
    Network { network: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialSpec {
    /// One value per group.
    Steps(Vec<f64>),
    /// `linear`, `constant:c` or `indicator:j` (groups numbered from 1).
    Preset(String),
    /// `x,u` CSV of a step function.
    Csv(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub graphon: GraphonSource,
    pub initial: InitialSpec,
    pub horizon: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

fn default_resolution() -> usize {
    DEFAULT_RESOLUTION
}

/// A problem with its graphon loaded and the initial datum built.
#[derive(Clone, Debug)]
pub struct Problem {
    /// Same spec with the graphon inlined.
    pub spec: ProblemSpec,
    pub graphon: StepGraphon,
    pub initial: PiecewiseFn,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Config(_) => 4,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Errors raised while computing, as opposed to while loading inputs.
fn numeric(e: Error) -> CliError {
    match e {
        Error::NotConformable { .. } => CliError::Config(e.to_string()),
        Error::InvalidConfig(_) => CliError::Input(e.to_string()),
        _ => CliError::Numeric(e.to_string()),
    }
}

fn input(e: Error) -> CliError {
    CliError::Input(e.to_string())
}

impl ProblemSpec {
    pub fn load(path: &Path) -> Result<Problem, CliError> {
        let spec: ProblemSpec = io::read_json(path)?;
        spec.resolve(path.parent().unwrap_or(Path::new(".")))
    }

    /// Loads referenced files (relative to `base`) and builds the initial datum.
    pub fn resolve(&self, base: &Path) -> Result<Problem, CliError> {
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(CliError::Input(format!("horizon must be non-negative, got {}", self.horizon)));
        }
        if self.resolution == 0 {
            return Err(CliError::Input("resolution must be positive".into()));
        }
        let graphon = match &self.graphon {
            GraphonSource::Inline(j) => StepGraphon::try_from(j).map_err(input)?,
            GraphonSource::File { file } => io::read_graphon_json(&base.join(file))?,
            GraphonSource::Network { network } => pixel_graphon(&io::read_network(&base.join(network))?),
        };
        let p = graphon.partition();
        let initial = match &self.initial {
            InitialSpec::Steps(v) => PiecewiseFn::from_group_values(p, v).map_err(input)?,
            InitialSpec::Csv(f) => io::read_step_csv(&base.join(f))?,
            InitialSpec::Preset(name) => preset(name, &graphon, self.resolution)?,
        };
        let mut spec = self.clone();
        spec.graphon = GraphonSource::Inline(StepGraphonJson::from(&graphon));
        Ok(Problem { spec, graphon, initial })
    }
}

fn preset(name: &str, g: &StepGraphon, resolution: usize) -> Result<PiecewiseFn, CliError> {
    let bad = || CliError::Input(format!("unknown initial preset {name:?}"));
    match name.split_once(':') {
        None if name == "linear" => PiecewiseFn::from_fn_midpoints(resolution, |x| x).map_err(input),
        Some(("constant", c)) => Ok(PiecewiseFn::constant(c.trim().parse().map_err(|_| bad())?)),
        Some(("indicator", j)) => {
            let j: usize = j.trim().parse().map_err(|_| bad())?;
            let n = g.groups();
            if j == 0 || j > n {
                return Err(CliError::Input(format!("indicator group {j} outside 1..={n}")));
            }
            let v: Vec<f64> = (1..=n).map(|k| if k == j { 1.0 } else { 0.0 }).collect();
            PiecewiseFn::from_group_values(g.partition(), &v).map_err(input)
        }
        _ => Err(bad()),
    }
}

#[derive(Parser, Debug)]
#[command(name = "graphon-od", about = "Opinion dynamics on step graphons", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact mean-field solution at the requested times.
    Solve {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// RK4 simulation of M agents on the midpoint-sampled network.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        agents: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Defaults to the spec horizon.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        record_every: Option<usize>,
        /// Also write the wide trajectory layout.
        #[arg(long)]
        wide: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// L² distance between M-agent simulations and the exact solution.
    Compare {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        agents: Vec<usize>,
        /// Defaults to the spec horizon.
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Closed-form three-group scenario report.
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        a12: f64,
        #[arg(long, allow_negative_numbers = true)]
        a13: f64,
        #[arg(long, allow_negative_numbers = true)]
        a23: f64,
        #[arg(long, value_delimiter = ',', num_args = 1, allow_negative_numbers = true, required = true)]
        means: Vec<f64>,
        /// In-group couplings a11,a22,a33.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        diag: Option<Vec<f64>>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct StateSummary {
    pub t: f64,
    pub means: Vec<f64>,
    pub mu: Vec<f64>,
    pub energy: f64,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub spec: ProblemSpec,
    pub parameters: serde_json::Map<String, serde_json::Value>,
    pub files: Vec<String>,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Command::Solve { spec, times, out } => cmd_solve(&spec, &times, &out),
        Command::Simulate { spec, agents, dt, t_end, record_every, wide, out } => {
            cmd_simulate(&spec, agents, dt, t_end, record_every, wide, &out)
        }
        Command::Compare { spec, agents, t, dt, out } => cmd_compare(&spec, &agents, t, dt, &out, stdout),
        Command::Classify { a12, a13, a23, means, diag, eps, out } => {
            cmd_classify(a12, a13, a23, &means, diag.as_deref(), eps, out.as_deref(), stdout)
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))
}

fn params(pairs: &[(&str, serde_json::Value)]) -> serde_json::Map<String, serde_json::Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

pub fn cmd_solve(spec: &Path, times: &[f64], out: &Path) -> Result<(), CliError> {
    let problem = ProblemSpec::load(spec)?;
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::Input(format!("times must be non-negative, got {t}")));
    }
    let states = solve_many(&problem.graphon, &problem.initial, times, Execution::default()).map_err(numeric)?;
    create_dir(out)?;
    let grid = io::midpoint_grid(problem.spec.resolution);
    let mut files = Vec::new();
    for (k, s) in states.iter().enumerate() {
        let name = format!("solution_{k:03}.csv");
        io::write_file(&out.join(&name), &io::samples_csv(&s.solution, &grid))?;
        files.push(name);
    }
    let summary: Vec<StateSummary> = states
        .iter()
        .map(|s| StateSummary { t: s.time, means: s.means.clone(), mu: s.mu.clone(), energy: s.solution.energy() })
        .collect();
    io::write_file(&out.join("summary.json"), io::to_json(&summary).as_bytes())?;
    files.push("summary.json".into());
    let manifest = Manifest {
        command: "solve".into(),
        spec: problem.spec,
        parameters: params(&[("times", serde_json::json!(times))]),
        files,
    };
    io::write_file(&out.join("manifest.json"), io::to_json(&manifest).as_bytes())?;
    Ok(())
}

pub fn cmd_simulate(
    spec: &Path,
    agents: usize,
    dt: f64,
    t_end: Option<f64>,
    record_every: Option<usize>,
    wide: bool,
    out: &Path,
) -> Result<(), CliError> {
    let problem = ProblemSpec::load(spec)?;
    if agents == 0 {
        return Err(CliError::Input("need at least one agent".into()));
    }
    let t_end = t_end.unwrap_or(problem.spec.horizon);
    let mut cfg = SimConfig::new(dt, t_end).map_err(input)?;
    if let Some(k) = record_every {
        cfg = cfg.with_record_every(k).map_err(input)?;
    }
    let net = sample_network(&problem.graphon, agents).map_err(numeric)?;
    let u0 = discretize(&problem.initial, agents).map_err(numeric)?;
    let traj = simulate(&net, &u0, &cfg).map_err(numeric)?;

    create_dir(out)?;
    let mut files = vec!["trajectory.csv".to_string(), "final.csv".to_string()];
    io::write_file(&out.join("trajectory.csv"), &io::trajectory_long_csv(&traj))?;
    io::write_file(&out.join("final.csv"), &io::agents_csv(traj.final_state()))?;
    if wide {
        io::write_file(&out.join("trajectory_wide.csv"), &io::trajectory_wide_csv(&traj))?;
        files.push("trajectory_wide.csv".into());
    }
    let manifest = Manifest {
        command: "simulate".into(),
        spec: problem.spec,
        parameters: params(&[
            ("agents", serde_json::json!(agents)),
            ("dt", serde_json::json!(dt)),
            ("t_end", serde_json::json!(t_end)),
            ("record_every", serde_json::json!(cfg.record_every)),
        ]),
        files,
    };
    io::write_file(&out.join("manifest.json"), io::to_json(&manifest).as_bytes())?;
    Ok(())
}

pub fn cmd_compare(
    spec: &Path,
    agents: &[usize],
    t: Option<f64>,
    dt: f64,
    out: &Path,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let problem = ProblemSpec::load(spec)?;
    let t = t.unwrap_or(problem.spec.horizon);
    if let Some(&bad) = agents.iter().find(|&&m| !problem.graphon.partition().is_conformable(m)) {
        return Err(numeric(Error::NotConformable { agents: bad }));
    }
    let rows = convergence_study(&problem.graphon, &problem.initial, agents, t, dt).map_err(numeric)?;
    io::write_file(out, &io::convergence_csv(&rows))?;
    let monotone = rows.windows(2).all(|w| w[1].l2_error <= w[0].l2_error);
    let _ = writeln!(stdout, "errors non-increasing in M: {}", if monotone { "yes" } else { "no" });
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_classify(
    a12: f64,
    a13: f64,
    a23: f64,
    means: &[f64],
    diag: Option<&[f64]>,
    eps: Option<f64>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    if ![a12, a13, a23].iter().chain(means).all(|v| v.is_finite()) {
        return Err(CliError::Input("couplings and means must be finite".into()));
    }
    let means: [f64; 3] = means
        .try_into()
        .map_err(|_| CliError::Input(format!("expected 3 means, got {}", means.len())))?;
    let mut c = Coupling3::new(a12, a13, a23);
    if let Some(d) = diag {
        let d: [f64; 3] = d.try_into().map_err(|_| CliError::Input(format!("expected 3 diagonal entries, got {}", d.len())))?;
        c = c.with_diagonal(d);
    }
    let report = classify(&c, means, eps);
    let text = io::to_json(&report);
    let _ = stdout.write_all(text.as_bytes());
    if let Some(path) = out {
        io::write_file(path, text.as_bytes())?;
    }
    Ok(())
}
