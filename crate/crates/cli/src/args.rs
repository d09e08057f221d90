use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liyau_core::probe::GridAxis;
use liyau_core::{Engine, PairForm, QuadratureSpec, Theorem, Variant};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "liyau", version, about = "Check and explore generalized Li-Yau inequalities for the heat equation")]
pub struct Cli {
    /// Progress and summaries on stderr (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one inequality at the given points.
    Check(CheckArgs),
    /// Derivative ratios from moments next to a finite-difference oracle.
    Derivatives(DerivativesArgs),
    /// Evaluate an inequality over a parameter grid.
    Sweep(SweepArgs),
    /// Search for the smallest slack over a scenario family.
    Probe(ProbeArgs),
    /// Run the built-in oracle battery.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineKind {
    Closed,
    GaussHermite,
    Trapezoid,
}

#[derive(Debug, Clone, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "closed")]
    pub quad_engine: EngineKind,
    /// Gauss–Hermite nodes per axis.
    #[arg(long, default_value_t = 40)]
    pub quad_order: usize,
    /// Trapezoid half-width in units of sqrt(4t).
    #[arg(long, default_value_t = 8.0)]
    pub trap_radius: f64,
    #[arg(long, default_value_t = 512)]
    pub trap_steps: usize,
}

impl EngineArgs {
    pub fn engine(&self) -> Result<Engine, CliError> {
        let spec = match self.quad_engine {
            EngineKind::Closed => return Ok(Engine::ClosedForm),
            EngineKind::GaussHermite => QuadratureSpec::gauss_hermite(self.quad_order),
            EngineKind::Trapezoid => QuadratureSpec::trapezoid(self.trap_radius, self.trap_steps),
        };
        spec.validate()?;
        Ok(Engine::Quadrature(spec))
    }
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Scenario JSON file; repeatable.
    #[arg(long, required = true)]
    pub scenario: Vec<PathBuf>,
    /// Evaluation point as comma-separated coordinates; repeatable.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub x: Vec<String>,
    /// Evaluation time; repeatable.
    #[arg(long, required = true)]
    pub t: Vec<f64>,
}

impl PointArgs {
    pub fn points(&self) -> Result<Vec<Vec<f64>>, CliError> {
        self.x.iter().map(|s| parse_point(s)).collect()
    }
}

pub fn parse_point(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::input(format!("bad coordinate {c:?} in --x {s:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoremArg {
    Second,
    Fourth,
}

impl From<TheoremArg> for Theorem {
    fn from(t: TheoremArg) -> Self {
        match t {
            TheoremArg::Second => Theorem::Second,
            TheoremArg::Fourth => Theorem::Fourth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    AsStated,
    Rederived,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::AsStated => Variant::AsStated,
            VariantArg::Rederived => Variant::Rederived,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairFormArg {
    SquaredSum,
    SumOfSquares,
}

impl From<PairFormArg> for PairForm {
    fn from(p: PairFormArg) -> Self {
        match p {
            PairFormArg::SquaredSum => PairForm::SquaredSum,
            PairFormArg::SumOfSquares => PairForm::SumOfSquares,
        }
    }
}

/// Inequality selection. Each parameter is a value or `min:max:steps`.
#[derive(Debug, Clone, Args)]
pub struct InequalityArgs {
    #[arg(long, value_enum, default_value = "second")]
    pub theorem: TheoremArg,
    #[arg(long, value_enum, default_value = "rederived")]
    pub variant: VariantArg,
    /// Aggregate of off-diagonal Hessian ratios in the k4 term.
    #[arg(long, value_enum, default_value = "squared-sum")]
    pub pair_form: PairFormArg,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub alpha: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub beta: String,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub gamma: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub k1: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub k2: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub k3: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub k4: String,
    /// Evaluate fourth-order constants outside the admissible set.
    #[arg(long)]
    pub allow_inadmissible: bool,
}

impl InequalityArgs {
    pub fn axes(&self) -> Result<Vec<GridAxis>, CliError> {
        let raw: Vec<(&str, &String)> = match self.theorem {
            TheoremArg::Second => vec![("alpha", &self.alpha), ("beta", &self.beta), ("gamma", &self.gamma)],
            TheoremArg::Fourth => {
                vec![("k1", &self.k1), ("k2", &self.k2), ("k3", &self.k3), ("k4", &self.k4)]
            }
        };
        raw.into_iter().map(|(name, s)| parse_axis(name, s)).collect()
    }

    /// Parameter tuple for single-valued flags.
    pub fn scalars(&self) -> Result<Vec<f64>, CliError> {
        self.axes()?
            .into_iter()
            .map(|a| {
                if a.steps == 1 {
                    Ok(a.min)
                } else {
                    Err(CliError::input("parameter ranges are only accepted by `sweep`"))
                }
            })
            .collect()
    }
}

/// `v` or `min:max:steps`.
pub fn parse_axis(name: &str, s: &str) -> Result<GridAxis, CliError> {
    let bad = || CliError::input(format!("--{name}: expected a number or min:max:steps, got {s:?}"));
    let num = |p: &str| p.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(bad);
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(GridAxis::fixed(num(v)?)),
        [lo, hi, steps] => {
            let steps: usize = steps.trim().parse().map_err(|_| bad())?;
            let (lo, hi) = (num(lo)?, num(hi)?);
            if steps == 0 || lo > hi || (steps == 1 && lo != hi) {
                return Err(bad());
            }
            Ok(GridAxis::new(lo, hi, steps))
        }
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub inequality: InequalityArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Report path (JSON); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DerivativesArgs {
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Finite-difference base step; defaults to 1e-3*max(sqrt(t), 1).
    #[arg(long)]
    pub fd_step: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub points: PointArgs,
    #[command(flatten)]
    pub inequality: InequalityArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Recorded in the JSON envelope; sweeps draw no random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; all cores when omitted.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the scenario of the minimal-slack row here.
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    /// One Gaussian at the origin, evaluated at its center; free width.
    SingleGaussian,
    /// Constant data; no free parameters.
    Constant,
    /// Gaussian mixtures with free weights, centers, widths, x, t and constants.
    Mixture,
    /// Single-Gaussian slack against its closed form over --sigmas.
    Sharpness,
}

#[derive(Debug, Clone, Args)]
pub struct ProbeArgs {
    #[arg(long, value_enum, default_value = "mixture")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Mixture component count (1..=3).
    #[arg(long, default_value_t = 2)]
    pub components: usize,
    #[arg(long, value_enum, default_value = "second")]
    pub theorem: TheoremArg,
    #[arg(long, value_enum, default_value = "rederived")]
    pub variant: VariantArg,
    #[arg(long, value_enum, default_value = "squared-sum")]
    pub pair_form: PairFormArg,
    /// Time for the single-gaussian, constant and sharpness families.
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 0.01)]
    pub sigma_min: f64,
    #[arg(long, default_value_t = 10.0)]
    pub sigma_max: f64,
    /// Widths for the sharpness curve.
    #[arg(long, value_delimiter = ',', default_value = "0,0.01,0.1,0.5,1,2")]
    pub sigmas: Vec<f64>,
    /// Use gamma = 1 for the sharpness curve (gamma = 0 otherwise).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub gamma_one: bool,
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the scenario at the minimum here.
    #[arg(long)]
    pub witness_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random scenarios for the derivative oracle.
    #[arg(long, default_value_t = 50)]
    pub scenarios: usize,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON summary path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axes_parse() {
        assert_eq!(parse_axis("k1", "0.5").unwrap(), GridAxis::fixed(0.5));
        assert_eq!(parse_axis("k3", "-0.25:0:6").unwrap(), GridAxis::new(-0.25, 0.0, 6));
        for bad in ["", "a", "1:0:3", "0:1:0", "0:1", "0:1:2:3", "0:1:1", "nan"] {
            assert!(parse_axis("x", bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn points_parse() {
        assert_eq!(parse_point("-1, 2.5,0").unwrap(), vec![-1.0, 2.5, 0.0]);
        assert!(parse_point("1,,2").is_err());
        assert!(parse_point("inf").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn negative_values_parse() {
        let cli = Cli::try_parse_from([
            "liyau", "check", "--scenario", "a.json", "--x", "-1,-2", "--t", "1", "--theorem",
            "fourth", "--k2", "-0.5",
        ])
        .unwrap();
        let Command::Check(c) = cli.command else { panic!() };
        assert_eq!(c.points.x, vec!["-1,-2"]);
        assert_eq!(c.inequality.scalars().unwrap(), vec![0.0, -0.5, 0.0, 0.0]);
    }
}
