//! Command-line grammar.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dptom_core::phasediagram::{ApproachSide, BranchRule, LinRange, Measures};
use dptom_core::{BranchId, Tol};

#[derive(Debug, Parser)]
#[command(name = "dptom", version, about = "Stability, phase diagrams and Gaussian fluctuations of a driven optomechanical cavity")]
pub struct Cli {
    /// Flat `key = value` file; each key is a long flag of the subcommand.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Cap on worker threads (also `DPTOM_THREADS`).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stationary branches and their stability at one point.
    #[command(args_override_self = true)]
    Branches(PointCmd),
    /// Region labels over a (dtilde, g) grid.
    #[command(args_override_self = true)]
    PhaseDiagram(PhaseDiagramCmd),
    /// Transitions along a line of fixed dtilde or fixed g.
    #[command(args_override_self = true)]
    Slice(SliceCmd),
    /// Semiclassical or moment time series.
    #[command(args_override_self = true)]
    Evolve(EvolveCmd),
    /// Up and down drive sweeps at fixed bare detuning.
    #[command(args_override_self = true)]
    Hysteresis(HysteresisCmd),
    /// Steady covariance, entanglement and squeezing of one branch.
    #[command(args_override_self = true)]
    Covariance(CovarianceCmd),
    /// Critical point and exponents.
    #[command(args_override_self = true)]
    Critical(CriticalCmd),
    /// Drift eigenvalues along a g sweep.
    #[command(args_override_self = true)]
    Spectrum(SpectrumCmd),
}

impl Command {
    pub const NAMES: [&'static str; 8] =
        ["branches", "phase-diagram", "slice", "evolve", "hysteresis", "covariance", "critical", "spectrum"];
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Physical {
    /// Cavity decay rate.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: f64,
    /// Mechanical damping rate.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Mechanical frequency.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub omega_m: f64,
}

/// Either the effective `(dtilde, g)` or the bare `(delta, e_tilde)` pair.
#[derive(Debug, Clone, Copy, Args)]
pub struct Point {
    #[arg(long, allow_hyphen_values = true)]
    pub dtilde: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub e_tilde: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Tolerance {
    /// Strict-stability margin on max Re(lambda).
    #[arg(long, allow_hyphen_values = true)]
    pub eps_stab: Option<f64>,
    /// Half-width of the marginal band around Re(lambda) = 0.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_band: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub root_residual: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lyapunov_residual: Option<f64>,
}

impl Tolerance {
    pub fn resolve(&self) -> Tol {
        let d = Tol::default();
        Tol {
            eps_stab: self.eps_stab.unwrap_or(d.eps_stab),
            eps_band: self.eps_band.unwrap_or(d.eps_band),
            root_residual: self.root_residual.unwrap_or(d.root_residual),
            lyapunov_residual: self.lyapunov_residual.unwrap_or(d.lyapunov_residual),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct PointCmd {
    #[command(flatten)]
    pub phys: Physical,
    #[command(flatten)]
    pub point: Point,
    #[command(flatten)]
    pub tol: Tolerance,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct PhaseDiagramCmd {
    #[command(flatten)]
    pub phys: Physical,
    /// Detuning range `min:max:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub dtilde: RangeArg,
    /// Coupling range `min:max:count`.
    #[arg(long, allow_hyphen_values = true)]
    pub g: RangeArg,
    /// Comma-separated subset of `entanglement,squeezing,fluctuations`, or `all` / `none`.
    #[arg(long, default_value = "none")]
    pub measures: MeasuresArg,
    /// Branch whose steady state the measures use in bistable regions.
    #[arg(long, default_value = "A=III,B=III,C=I")]
    pub rule: RuleArg,
    #[command(flatten)]
    pub tol: Tolerance,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SliceCmd {
    #[command(flatten)]
    pub phys: Physical,
    /// Fixed detuning, or a range `min:max:count` when g is fixed.
    #[arg(long, allow_hyphen_values = true)]
    pub dtilde: AxisArg,
    /// Fixed coupling, or a range `min:max:count` when dtilde is fixed.
    #[arg(long, allow_hyphen_values = true)]
    pub g: AxisArg,
    /// Bracket width at which bisection stops.
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Relative photon-number jump separating discontinuous from continuous events.
    #[arg(long)]
    pub jump_threshold: Option<f64>,
    #[command(flatten)]
    pub tol: Tolerance,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Semiclassical,
    Moments,
}

#[derive(Debug, Args)]
pub struct EvolveCmd {
    #[command(flatten)]
    pub phys: Physical,
    #[command(flatten)]
    pub point: Point,
    #[arg(long, value_enum, default_value = "semiclassical")]
    pub mode: Mode,
    #[arg(long)]
    pub t_end: f64,
    /// Number of output intervals; `samples + 1` rows including t = 0.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Initial cavity amplitude `re,im`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
    pub alpha0: ComplexArg,
    /// Initial mechanical amplitude `re,im`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,0")]
    pub beta0: ComplexArg,
    /// Initial fluctuation means `x_c,p_c,x_m,p_m` (moments mode).
    #[arg(long, allow_hyphen_values = true, default_value = "0,0,0,0")]
    pub x0: Vec4Arg,
    /// Initial covariance `v0 * I` (moments mode).
    #[arg(long, default_value_t = 0.5)]
    pub v0: f64,
    /// Branch to linearise about (moments mode).
    #[arg(long, default_value = "I")]
    pub branch: BranchArg,
    /// Relative integration tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct HysteresisCmd {
    #[command(flatten)]
    pub phys: Physical,
    /// Bare detuning.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: f64,
    /// Drive ramp `min:max:count`.
    #[arg(long)]
    pub e_tilde: RangeArg,
    /// Settling threshold per mechanical period.
    #[arg(long, default_value_t = 1e-8)]
    pub threshold: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_periods: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct CovarianceCmd {
    #[command(flatten)]
    pub phys: Physical,
    #[command(flatten)]
    pub point: Point,
    /// Branch; defaults to the bistable-region rule `A=III,B=III,C=I`.
    #[arg(long)]
    pub branch: Option<BranchArg>,
    #[command(flatten)]
    pub tol: Tolerance,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Below,
    Above,
}

impl From<Side> for ApproachSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Below => ApproachSide::Below,
            Side::Above => ApproachSide::Above,
        }
    }
}

#[derive(Debug, Args)]
pub struct CriticalCmd {
    #[command(flatten)]
    pub phys: Physical,
    /// Side from which g approaches g_c.
    #[arg(long, value_enum, default_value = "below")]
    pub side: Side,
    /// Fit window `lo:hi` for |g - g_c|.
    #[arg(long, default_value = "1e-4:1e-2")]
    pub window: WindowArg,
    #[arg(long, default_value_t = 21)]
    pub samples: usize,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SpectrumCmd {
    #[command(flatten)]
    pub phys: Physical,
    #[arg(long, allow_hyphen_values = true)]
    pub dtilde: f64,
    /// Coupling range `min:max:count`.
    #[arg(long)]
    pub g: RangeArg,
    #[command(flatten)]
    pub tol: Tolerance,
    #[command(flatten)]
    pub output: Output,
}

fn parse_f64(s: &str, what: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("{what}: `{s}` is not a number"))
}

/// `min:max:count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeArg(pub LinRange<f64>);

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, count] = parts.as_slice() else {
            return Err(format!("expected `min:max:count`, got `{s}`"));
        };
        let count = count.trim().parse::<usize>().map_err(|_| format!("count `{count}` is not a positive integer"))?;
        LinRange::new(parse_f64(min, "min")?, parse_f64(max, "max")?, count)
            .map(RangeArg)
            .map_err(|e| e.to_string())
    }
}

/// A single value or a `min:max:count` range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisArg {
    Value(f64),
    Range(LinRange<f64>),
}

impl FromStr for AxisArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.contains(':') {
            s.parse::<RangeArg>().map(|r| AxisArg::Range(r.0))
        } else {
            parse_f64(s, "value").map(AxisArg::Value)
        }
    }
}

/// `lo:hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowArg(pub f64, pub f64);

impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let Some((lo, hi)) = s.split_once(':') else {
            return Err(format!("expected `lo:hi`, got `{s}`"));
        };
        Ok(WindowArg(parse_f64(lo, "lo")?, parse_f64(hi, "hi")?))
    }
}

/// `re,im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexArg(pub f64, pub f64);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let Some((re, im)) = s.split_once(',') else {
            return Err(format!("expected `re,im`, got `{s}`"));
        };
        Ok(ComplexArg(parse_f64(re, "re")?, parse_f64(im, "im")?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec4Arg(pub [f64; 4]);

impl FromStr for Vec4Arg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let v = s.split(',').map(|x| parse_f64(x, "component")).collect::<Result<Vec<_>, _>>()?;
        v.try_into().map(Vec4Arg).map_err(|_| format!("expected four comma-separated numbers, got `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchArg(pub BranchId);

impl FromStr for BranchArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "I" | "1" => Ok(BranchArg(BranchId::I)),
            "II" | "2" => Ok(BranchArg(BranchId::II)),
            "III" | "3" => Ok(BranchArg(BranchId::III)),
            _ => Err(format!("unknown branch `{s}` (expected I, II or III)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuresArg(pub Measures);

impl FromStr for MeasuresArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut m = Measures::default();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            match item {
                "all" => m = Measures::all(),
                "none" => {}
                "entanglement" => m.entanglement = true,
                "squeezing" => m.squeezing = true,
                "fluctuations" => m.fluctuations = true,
                other => return Err(format!("unknown measure `{other}`")),
            }
        }
        Ok(MeasuresArg(m))
    }
}

/// `A=III,B=III,C=I`; unspecified regions keep the default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleArg(pub BranchRule);

impl FromStr for RuleArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut rule = BranchRule::default();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let Some((region, branch)) = item.split_once('=') else {
                return Err(format!("expected `REGION=BRANCH`, got `{item}`"));
            };
            let id = branch.parse::<BranchArg>()?.0;
            match region.trim() {
                "A" => rule.a = id,
                "B" => rule.b = id,
                "C" => rule.c = id,
                other => return Err(format!("branch rule applies to A, B or C, not `{other}`")),
            }
        }
        Ok(RuleArg(rule))
    }
}
