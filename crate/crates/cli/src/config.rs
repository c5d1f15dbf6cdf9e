//! Command-line grammar and the resolved, serializable run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use dsy_core::cascade::GuardConfig;
use dsy_core::criteria::{DEFAULT_GAMMA_RESOLUTION, DEFAULT_MARGIN};
use dsy_core::solution::{InitialData, RadialProfile};
use dsy_core::{Params, WaveVector};
use serde::{Deserialize, Serialize};

use crate::validate::Suite;

#[derive(Debug, Parser)]
#[command(name = "dsy", version, about = "Monte Carlo and quadrature laboratory for doubly stochastic Yule cascades")]
pub struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Top-level seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory, or a file path whose stem names the artifacts.
    #[arg(long, global = true, default_value = "dsy-out")]
    pub out: PathBuf,

    /// Rerun from an echoed config.json instead of a subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the (d, gamma) plane by the moment criteria.
    Diagram(DiagramArgs),
    /// Estimate rho(xi, t) = P(S > t), or a rho grid with its residual check.
    Rho(RhoArgs),
    /// Estimate the planar mean flow E[X 1{S > t}].
    Meanflow(MeanflowArgs),
    /// Estimate the scalar majorant with tail diagnostics.
    Majorant(MajorantArgs),
    /// Riccati blow-up bound for annulus data and its geometric lemmas.
    Blowup(BlowupArgs),
    /// Grow one cascade tree.
    Simulate(SimulateArgs),
    /// Run the invariant suites.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub gamma: f64,
}

#[derive(Debug, Args)]
pub struct GuardArgs {
    /// Largest number of nodes grown per tree before it counts as exploded.
    #[arg(long, default_value_t = GuardConfig::default().max_nodes)]
    pub guard_nodes: usize,
    /// Largest number of generations, root included.
    #[arg(long, default_value_t = GuardConfig::default().max_depth)]
    pub guard_depth: usize,
}

impl GuardArgs {
    fn resolve(&self) -> Result<GuardConfig> {
        ensure!(self.guard_nodes >= 1 && self.guard_depth >= 1, "guards must be at least 1");
        Ok(GuardConfig { max_nodes: self.guard_nodes, max_depth: self.guard_depth })
    }
}

#[derive(Debug, Args)]
pub struct WaveArgs {
    /// |xi|, with xi along the first axis.
    #[arg(long, conflicts_with = "xi")]
    pub xi_norm: Option<f64>,
    /// Explicit wavevector, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub xi: Option<Vec<f64>>,
}

impl WaveArgs {
    fn resolve(&self, d: usize) -> Result<Vec<f64>> {
        let xi = match (&self.xi, self.xi_norm) {
            (Some(v), _) => v.clone(),
            (None, Some(r)) => WaveVector::along_first_axis(d, r).as_slice().to_vec(),
            (None, None) => bail!("one of --xi or --xi-norm is required"),
        };
        ensure!(xi.len() == d, "xi has {} components but d = {d}", xi.len());
        let w = WaveVector::new(&xi)?;
        ensure!(!w.is_zero(), "xi must be nonzero");
        Ok(xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataKind {
    Gaussian,
    Constant,
    Annulus,
    Table,
    Zero,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Radial profile of the initial data.
    #[arg(long, value_enum, default_value_t = DataKind::Gaussian)]
    pub data: DataKind,
    /// Gaussian amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Gaussian width.
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    /// Value of the constant profile, or of the annulus.
    #[arg(long, default_value_t = 1.0)]
    pub value: f64,
    /// Annulus support.
    #[arg(long, default_value_t = 4.0)]
    pub inner: f64,
    #[arg(long, default_value_t = 7.0)]
    pub outer: f64,
    /// CSV file with columns `r,value` for the tabulated profile.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Angular modulation `1 + eps cos theta` (vector data only; breaks radial symmetry).
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
}

#[derive(Deserialize)]
struct TableRow {
    r: f64,
    value: f64,
}

fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut r = Vec::new();
    let mut value = Vec::new();
    for row in rdr.deserialize() {
        let row: TableRow = row.with_context(|| format!("parsing {}", path.display()))?;
        r.push(row.r);
        value.push(row.value);
    }
    Ok((r, value))
}

impl DataArgs {
    fn profile(&self) -> Result<RadialProfile> {
        Ok(match self.data {
            DataKind::Gaussian => RadialProfile::Gaussian { amplitude: self.amplitude, width: self.width },
            DataKind::Constant => RadialProfile::Constant { value: self.value },
            DataKind::Annulus => RadialProfile::Annulus { value: self.value, inner: self.inner, outer: self.outer },
            DataKind::Zero => RadialProfile::Constant { value: 0.0 },
            DataKind::Table => {
                let path = self.table.as_deref().context("--data table needs --table FILE")?;
                let (r, value) = read_table(path)?;
                RadialProfile::Table { r, value }
            }
        })
    }

    /// Divergence-free planar data `g(|xi|) (1 + eps cos theta) e_{xi perp}`.
    fn vector(&self) -> Result<InitialData> {
        let profile = self.profile()?;
        let data = if self.eps != 0.0 {
            InitialData::ModulatedVortex { profile, eps: self.eps }
        } else {
            match profile {
                RadialProfile::Annulus { value, inner, outer } => InitialData::AnnulusConstant { m: value, inner, outer },
                RadialProfile::Table { r, value } => InitialData::Tabulated { r, value },
                profile => InitialData::VortexRadial { profile },
            }
        };
        data.validate()?;
        Ok(data)
    }

    fn scalar(&self) -> Result<InitialData> {
        ensure!(self.eps == 0.0, "--eps applies to vector data only");
        let data = InitialData::ScalarMajorant { profile: self.profile()? };
        data.validate()?;
        Ok(data)
    }
}

#[derive(Debug, Args)]
pub struct DiagramArgs {
    /// Dimensions: a range `1..6` (inclusive) or a list `1,2,5`.
    #[arg(long, default_value = "1..12")]
    pub d: String,
    #[arg(long, default_value_t = DEFAULT_GAMMA_RESOLUTION)]
    pub gamma_points: usize,
    /// Safety margin added to the quadrature error before comparing with the thresholds.
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    pub margin: f64,
}

#[derive(Debug, Args)]
pub struct RhoArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub wave: WaveArgs,
    /// Times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    /// Radii of a (|xi|, t) grid; switches to grid mode with a residual check.
    #[arg(long, value_delimiter = ',', requires = "times")]
    pub radii: Option<Vec<f64>>,
    /// Times of the grid.
    #[arg(long, value_delimiter = ',', requires = "radii")]
    pub times: Option<Vec<f64>>,
    /// Kernel draws per grid point in the residual check.
    #[arg(long, default_value_t = 4000)]
    pub residual_draws: usize,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    pub guard: GuardArgs,
}

#[derive(Debug, Args)]
pub struct MeanflowArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    pub guard: GuardArgs,
    #[command(flatten)]
    pub data: DataArgs,
    /// Average each tree with its root-sign flip (vortex data only).
    #[arg(long)]
    pub symmetrize: bool,
}

#[derive(Debug, Args)]
pub struct MajorantArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[command(flatten)]
    pub guard: GuardArgs,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct BlowupArgs {
    #[arg(long)]
    pub gamma: f64,
    /// Annulus amplitude M on 4 <= |xi| <= 7.
    #[arg(long)]
    pub m: f64,
    /// Points on the p(t) curve.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long)]
    pub t: f64,
    #[command(flatten)]
    pub guard: GuardArgs,
    /// Write every node of the tree.
    #[arg(long)]
    pub dump_tree: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
}

/// Everything that determines a run's outputs. Thread count and output
/// location are deliberately left out, so the echo reproduces a run anywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub task: Task,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Task {
    Diagram { ds: Vec<usize>, gamma_points: usize, margin: f64 },
    Rho { params: Params, xi: Vec<f64>, times: Vec<f64>, n: usize, guard: GuardConfig },
    RhoGrid { params: Params, radii: Vec<f64>, times: Vec<f64>, n: usize, guard: GuardConfig, residual_draws: usize },
    Meanflow { params: Params, xi: Vec<f64>, times: Vec<f64>, n: usize, guard: GuardConfig, data: InitialData, symmetrize: bool },
    Majorant { params: Params, xi: Vec<f64>, times: Vec<f64>, n: usize, guard: GuardConfig, data: InitialData },
    Blowup { gamma: f64, m: f64, points: usize },
    Simulate { params: Params, xi: Vec<f64>, t: f64, guard: GuardConfig, dump_tree: bool },
    Validate { suite: Suite },
}

impl Task {
    /// Default artifact stem.
    pub fn name(&self) -> &'static str {
        match self {
            Task::Diagram { .. } => "diagram",
            Task::Rho { .. } => "rho",
            Task::RhoGrid { .. } => "rho_grid",
            Task::Meanflow { .. } => "meanflow",
            Task::Majorant { .. } => "majorant",
            Task::Blowup { .. } => "blowup",
            Task::Simulate { .. } => "simulate",
            Task::Validate { .. } => "validate",
        }
    }
}

/// Parses `1..6` (inclusive) or `1,2,5`.
pub fn parse_dims(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let ds: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        ensure!(a <= b, "empty dimension range {s}");
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>()?
    };
    ensure!(!ds.is_empty() && ds.iter().all(|&d| d >= 1), "dimensions must be positive: {s}");
    Ok(ds)
}

fn times(t: &[f64]) -> Result<Vec<f64>> {
    ensure!(!t.is_empty(), "--t needs at least one time");
    ensure!(t.iter().all(|&x| x >= 0.0 && x.is_finite()), "times must be finite and nonnegative");
    Ok(t.to_vec())
}

fn params(m: &ModelArgs) -> Result<Params> {
    Ok(Params::new(m.d, m.gamma)?)
}

impl Command {
    pub fn resolve(&self) -> Result<Task> {
        Ok(match self {
            Command::Diagram(a) => {
                ensure!(a.gamma_points >= 1, "--gamma-points must be positive");
                ensure!(a.margin >= 0.0, "--margin must be nonnegative");
                Task::Diagram { ds: parse_dims(&a.d)?, gamma_points: a.gamma_points, margin: a.margin }
            }
            Command::Rho(a) => {
                let p = params(&a.model)?;
                let guard = a.guard.resolve()?;
                match (&a.radii, &a.times) {
                    (Some(radii), Some(ts)) => {
                        ensure!(a.t.is_empty() && a.wave.xi.is_none() && a.wave.xi_norm.is_none(), "grid mode takes --radii and --times only");
                        Task::RhoGrid { params: p, radii: radii.clone(), times: ts.clone(), n: a.n, guard, residual_draws: a.residual_draws }
                    }
                    _ => Task::Rho { params: p, xi: a.wave.resolve(p.d)?, times: times(&a.t)?, n: a.n, guard },
                }
            }
            Command::Meanflow(a) => {
                let p = params(&a.model)?;
                Task::Meanflow {
                    params: p,
                    xi: a.wave.resolve(p.d)?,
                    times: times(&a.t)?,
                    n: a.n,
                    guard: a.guard.resolve()?,
                    data: a.data.vector()?,
                    symmetrize: a.symmetrize,
                }
            }
            Command::Majorant(a) => {
                let p = params(&a.model)?;
                Task::Majorant {
                    params: p,
                    xi: a.wave.resolve(p.d)?,
                    times: times(&a.t)?,
                    n: a.n,
                    guard: a.guard.resolve()?,
                    data: a.data.scalar()?,
                }
            }
            Command::Blowup(a) => {
                ensure!(a.points >= 2, "--points must be at least 2");
                Task::Blowup { gamma: a.gamma, m: a.m, points: a.points }
            }
            Command::Simulate(a) => {
                let p = params(&a.model)?;
                ensure!(a.t >= 0.0 && a.t.is_finite(), "--t must be finite and nonnegative");
                Task::Simulate { params: p, xi: a.wave.resolve(p.d)?, t: a.t, guard: a.guard.resolve()?, dump_tree: a.dump_tree }
            }
            Command::Validate(a) => Task::Validate { suite: a.suite },
        })
    }
}

/// Where the artifacts of a run go: `<dir>/<stem>.<ext>`.
#[derive(Debug, Clone)]
pub struct OutputTarget {
    pub dir: PathBuf,
    pub stem: String,
}

impl OutputTarget {
    /// `--out results` names a directory; `--out results/d.csv` names the
    /// primary artifact, and its companions share the stem `d`.
    pub fn new(out: &Path, task: &Task) -> OutputTarget {
        let is_file = matches!(out.extension().and_then(|e| e.to_str()), Some("csv" | "json" | "svg"));
        if is_file {
            let dir = out.parent().map(Path::to_path_buf).unwrap_or_default();
            let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or(task.name()).to_string();
            OutputTarget { dir, stem }
        } else {
            OutputTarget { dir: out.to_path_buf(), stem: task.name().to_string() }
        }
    }

    pub fn path(&self, suffix: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}.{ext}", self.stem))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_ranges() {
        assert_eq!(parse_dims("1..6").unwrap(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(parse_dims("2..=3").unwrap(), vec![2, 3]);
        assert_eq!(parse_dims("1,4, 9").unwrap(), vec![1, 4, 9]);
        assert!(parse_dims("3..1").is_err());
        assert!(parse_dims("0,1").is_err());
    }

    #[test]
    fn output_targets() {
        let task = Task::Validate { suite: Suite::All };
        let t = OutputTarget::new(Path::new("runs/a"), &task);
        assert_eq!(t.path("", "json"), Path::new("runs/a/validate.json"));
        let t = OutputTarget::new(Path::new("runs/diagram.csv"), &task);
        assert_eq!(t.path("", "svg"), Path::new("runs/diagram.svg"));
        assert_eq!(t.path(".config", "json"), Path::new("runs/diagram.config.json"));
    }

    #[test]
    fn config_round_trip() {
        let cfg = RunConfig {
            seed: 7,
            task: Task::Meanflow {
                params: Params::new(2, 0.75).unwrap(),
                xi: vec![1.0, 0.5],
                times: vec![0.5, 1.0],
                n: 100,
                guard: GuardConfig::default(),
                data: InitialData::VortexRadial { profile: RadialProfile::Gaussian { amplitude: 1.0, width: 2.0 } },
                symmetrize: true,
            },
        };
        let s = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&s).unwrap(), cfg);
    }
}
