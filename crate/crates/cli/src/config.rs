//! Command-line surface and the JSON experiment document it overlays.
//!
//! Every flag has a config-file twin with the same name in snake_case. A flag that is
//! given on the command line replaces the file's value.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mesoheat_core::rational::{format_rational, parse_rational, to_f64};
use mesoheat_core::{LinearPDE, Rational, ScaleSpec};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::CliError;

/// An exact number written as `"num/den"`, a decimal string, or a JSON number.
#[derive(Clone, Debug, PartialEq)]
pub struct Num(pub Rational);

impl Num {
    pub fn f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = match Value::deserialize(d)? {
            Value::String(s) => s,
            Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected a number, got {other}"))),
        };
        parse_rational(&text).map(Num).map_err(serde::de::Error::custom)
    }
}

fn num_arg(text: &str) -> Result<Num, String> {
    parse_rational(text).map(Num).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    SimulateLattice,
    Derive,
    Solve,
    Compare,
    Speed,
    Study,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::SimulateLattice => "simulate-lattice",
            CommandKind::Derive => "derive",
            CommandKind::Solve => "solve",
            CommandKind::Compare => "compare",
            CommandKind::Speed => "speed",
            CommandKind::Study => "study",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    Rational,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Ring,
    Line,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FormKind {
    Spatial,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Meso,
    Micro,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Heat,
    Telegraph,
    FourthOrder,
    Mixed,
    /// Level-N equation derived from the stencil at concrete `δx`, `δt`.
    Hierarchy,
    /// The lattice itself (speed only).
    Lattice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Delta,
    Gaussian,
    Sine,
    Spike,
    Constant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureKind {
    Compatibility,
    ZeroRate,
    Require,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Reject,
    Cutoff,
    Allow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    L2,
    Linf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientKind {
    Derived,
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// The full experiment document. Unknown keys are rejected.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<CommandKind>,

    pub p: Option<Num>,
    pub mode: Option<Arithmetic>,
    pub steps: Option<u64>,
    pub topology: Option<TopologyKind>,
    pub cells: Option<usize>,
    pub x_a: Option<Num>,
    pub t_a: Option<Num>,

    pub level: Option<u32>,
    pub form: Option<FormKind>,
    pub symbols: Option<SymbolKind>,
    pub series_order: Option<usize>,

    pub model: Option<ModelKind>,
    /// Explicit coefficients, used when no `model` is named.
    pub pde: Option<LinearPDE>,
    pub tau: Option<Num>,
    pub d: Option<Num>,
    pub d1: Option<Num>,
    pub d2: Option<Num>,
    pub eps1: Option<Num>,
    pub eps2: Option<Num>,
    pub d_bar: Option<Num>,
    pub dx: Option<Num>,
    pub dt: Option<Num>,
    pub scales: Option<ScaleSpec>,

    pub profile: Option<ProfileKind>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub amplitude: Option<f64>,
    pub wavenumber: Option<f64>,
    pub offset: Option<f64>,
    pub value: Option<f64>,
    /// Initial data as CSV with columns `x,u`.
    pub input: Option<PathBuf>,

    pub x_start: Option<Num>,
    pub length: Option<Num>,
    pub modes: Option<usize>,
    pub times: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    pub samples: Option<usize>,
    pub closure: Option<ClosureKind>,
    pub policy: Option<PolicyKind>,

    pub a: Option<PathBuf>,
    pub b: Option<PathBuf>,
    pub norm: Option<NormKind>,
    pub tolerance: Option<f64>,

    pub threshold: Option<f64>,

    pub refinements: Option<Vec<Num>>,
    pub t_final: Option<Num>,
    pub coefficients: Option<CoefficientKind>,
    pub expected_slope: Option<f64>,
    pub slope_tolerance: Option<f64>,
    pub max_slope: Option<f64>,

    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Parser)]
#[command(name = "mesoheat", version, about = "Lattice heat transfer, its modified-equation hierarchy, and continuum solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the three-point lattice rule.
    SimulateLattice(SimulateArgs),
    /// Derive the level-N modified equation of the lattice rule.
    Derive(DeriveArgs),
    /// Solve a continuum model spectrally on a periodic domain.
    Solve(SolveArgs),
    /// Distance between two sampled fields.
    Compare(CompareArgs),
    /// Track a heat front and fit its speed.
    Speed(SpeedArgs),
    /// Lattice-versus-PDE refinement study.
    Study(StudyArgs),
    /// Run whatever command a config file names.
    Run(RunArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct CommonArgs {
    /// JSON experiment document; flags override its fields.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Where to write results (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProfileArgs {
    #[arg(long, value_enum)]
    pub profile: Option<ProfileKind>,
    #[arg(long)]
    pub center: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub amplitude: Option<f64>,
    #[arg(long)]
    pub wavenumber: Option<f64>,
    #[arg(long)]
    pub offset: Option<f64>,
    #[arg(long)]
    pub value: Option<f64>,
    /// CSV initial data (`x,u`).
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LatticeArgs {
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, value_enum)]
    pub topology: Option<TopologyKind>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long, value_parser = num_arg)]
    pub x_a: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub t_a: Option<Num>,
    #[arg(long, value_enum)]
    pub mode: Option<Arithmetic>,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, value_parser = num_arg)]
    pub p: Option<Num>,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long, value_parser = num_arg)]
    pub tau: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub d: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub d1: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub d2: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub eps1: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub eps2: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub d_bar: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub dx: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub dt: Option<Num>,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, value_parser = num_arg, allow_hyphen_values = true)]
    pub x_start: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub length: Option<Num>,
    #[arg(long)]
    pub modes: Option<usize>,
    /// Output times, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Evenly spaced output times over `[0, t_end]`.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub closure: Option<ClosureKind>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = num_arg)]
    pub p: Option<Num>,
    #[command(flatten)]
    #[serde(flatten)]
    pub lattice: LatticeArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct DeriveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = num_arg)]
    pub p: Option<Num>,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long, value_enum)]
    pub form: Option<FormKind>,
    #[arg(long, value_enum)]
    pub symbols: Option<SymbolKind>,
    /// Truncation order for the operator-identity check.
    #[arg(long)]
    pub series_order: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub b: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub norm: Option<NormKind>,
    /// Fail (exit 2) when the distance exceeds this.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct SpeedArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, value_parser = num_arg)]
    pub x_a: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub t_a: Option<Num>,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Fail (exit 2) when the relative deviation from the predicted speed exceeds this.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct StudyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long, value_parser = num_arg)]
    pub p: Option<Num>,
    /// Diffusivity.
    #[arg(long, value_parser = num_arg)]
    pub d: Option<Num>,
    /// Lattice spacings, coarse to fine, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = num_arg)]
    pub refinements: Option<Vec<Num>>,
    #[arg(long, value_parser = num_arg)]
    pub t_final: Option<Num>,
    #[arg(long, value_parser = num_arg, allow_hyphen_values = true)]
    pub x_start: Option<Num>,
    #[arg(long, value_parser = num_arg)]
    pub length: Option<Num>,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    #[arg(long, value_enum)]
    pub norm: Option<NormKind>,
    #[arg(long, value_enum)]
    pub coefficients: Option<CoefficientKind>,
    #[arg(long, value_enum)]
    pub closure: Option<ClosureKind>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyKind>,
    #[arg(long)]
    pub expected_slope: Option<f64>,
    #[arg(long)]
    pub slope_tolerance: Option<f64>,
    #[arg(long)]
    pub max_slope: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Where to write results (stdout when omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

impl Command {
    /// Resolves the subcommand and its flags against the optional config file.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let (kind, config_path, flags) = match self {
            Command::SimulateLattice(a) => (Some(CommandKind::SimulateLattice), a.common.config.as_deref(), to_map(a)?),
            Command::Derive(a) => (Some(CommandKind::Derive), a.common.config.as_deref(), to_map(a)?),
            Command::Solve(a) => (Some(CommandKind::Solve), a.common.config.as_deref(), to_map(a)?),
            Command::Compare(a) => (Some(CommandKind::Compare), a.common.config.as_deref(), to_map(a)?),
            Command::Speed(a) => (Some(CommandKind::Speed), a.common.config.as_deref(), to_map(a)?),
            Command::Study(a) => (Some(CommandKind::Study), a.common.config.as_deref(), to_map(a)?),
            Command::Run(a) => {
                let mut flags = Map::new();
                if let Some(out) = &a.output {
                    flags.insert("output".into(), Value::String(out.display().to_string()));
                }
                (None, Some(a.config.as_path()), flags)
            }
        };
        let mut doc = match config_path {
            Some(path) => read_config(path)?,
            None => Map::new(),
        };
        if let (Some(kind), Some(declared)) = (kind, doc.get("command")) {
            if declared.as_str() != Some(kind.name()) {
                return Err(CliError::config(
                    "command",
                    format!("config file is for {declared}, but `{}` was invoked", kind.name()),
                ));
            }
        }
        doc.extend(flags);
        if let Some(kind) = kind {
            doc.insert("command".into(), Value::String(kind.name().into()));
        }
        let config: ExperimentConfig = parse_config(Value::Object(doc))?;
        if config.command.is_none() {
            return Err(CliError::config("command", "the config file does not name a command"));
        }
        Ok(config)
    }
}

fn to_map<T: Serialize>(args: &T) -> Result<Map<String, Value>, CliError> {
    let value = serde_json::to_value(args).map_err(|e| CliError::config("flags", e.to_string()))?;
    let Value::Object(map) = value else {
        unreachable!("argument groups serialize to objects")
    };
    Ok(map.into_iter().filter(|(_, v)| !v.is_null()).collect())
}

fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::config("config", "top level must be a JSON object")),
        Err(e) => Err(CliError::config("config", format!("{}: {e}", path.display()))),
    }
}

fn parse_config(doc: Value) -> Result<ExperimentConfig, CliError> {
    serde_path_to_error::deserialize(doc).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        // Unknown keys are reported against the document root.
        let field = match inner.strip_prefix("unknown field `") {
            Some(rest) => rest.split('`').next().unwrap_or(&path).to_string(),
            None => path,
        };
        CliError::config(&field, inner)
    })
}
