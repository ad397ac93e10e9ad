//! Command-line configuration. The parsed [`RunConfig`] is echoed verbatim in every report.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use modone::statistics::IntervalSet;
use modone::{ExtReal, TestFunction};
use serde::{Deserialize, Serialize};

pub const DEFAULT_DIGITS: u32 = 64;
pub const PRECISION_ENV: &str = "MODONE_PRECISION";

#[derive(Clone, Debug, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "modone", version, about = "Fine-scale statistics of quadratic sequences mod 1")]
pub struct RunConfig {
    #[command(flatten)]
    pub options: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct Options {
    /// Decimal digits for alpha and beta; overrides MODONE_PRECISION (default 64).
    #[arg(long, global = true)]
    pub precision: Option<u32>,
    /// Seed for commands that sample at random.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Reduce floating-point sums in a fixed order.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output format; inferred from --out when that names a .csv file.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// `json` or `csv` selects the format on stdout; anything else is an output path.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Record wall-clock time in the report (otherwise `timing` is null).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Pair correlation histogram over --range, or R2 of a single --interval.
    Paircorr(PaircorrArgs),
    /// Distribution of the nearest-neighbour gaps, scaled by N.
    Gaps(GapsArgs),
    /// Smooth pair correlation R2(f, h).
    Smooth(SmoothArgs),
    /// Q_N computed directly and through theta sums.
    Qn(QnArgs),
    /// Randomised checks of theta-sum invariance, the torus norm and the cusp bound.
    ThetaVerify(ThetaVerifyArgs),
    /// Equidistribution of horocycle section points in the Heisenberg fibre.
    Equidist(EquidistArgs),
    /// Pointwise equidistribution at a single prime level c.
    Conjecture(ConjectureArgs),
    /// Exact discrepancy against the Erdos-Turan bound.
    Discrepancy(DiscrepancyArgs),
    /// Long-average lattice count against the volume term.
    Oppenheim(OppenheimArgs),
    /// A compact run of every experiment.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Paircorr(_) => "paircorr",
            Self::Gaps(_) => "gaps",
            Self::Smooth(_) => "smooth",
            Self::Qn(_) => "qn",
            Self::ThetaVerify(_) => "theta-verify",
            Self::Equidist(_) => "equidist",
            Self::Conjecture(_) => "conjecture",
            Self::Discrepancy(_) => "discrepancy",
            Self::Oppenheim(_) => "oppenheim",
            Self::Report(_) => "report",
        }
    }

    fn alpha_mut(&mut self) -> Option<&mut RealArg> {
        match self {
            Self::Paircorr(a) => Some(&mut a.seq.alpha),
            Self::Gaps(a) => Some(&mut a.seq.alpha),
            Self::Smooth(a) => Some(&mut a.seq.alpha),
            Self::Qn(a) => Some(&mut a.seq.alpha),
            Self::Conjecture(a) => Some(&mut a.alpha),
            Self::Discrepancy(a) => Some(&mut a.alpha),
            Self::Oppenheim(a) => Some(&mut a.alpha),
            Self::Report(a) => Some(&mut a.alpha),
            Self::ThetaVerify(_) | Self::Equidist(_) => None,
        }
    }

    fn beta_mut(&mut self) -> Option<&mut RealArg> {
        match self {
            Self::Paircorr(a) => Some(&mut a.seq.beta),
            Self::Gaps(a) => Some(&mut a.seq.beta),
            Self::Smooth(a) => Some(&mut a.seq.beta),
            Self::Qn(a) => Some(&mut a.seq.beta),
            Self::Oppenheim(a) => Some(&mut a.beta),
            _ => None,
        }
    }
}

/// A real parameter given as a token (`1.25`, `7/3`, `sqrt:2`, `golden`, `pi`, `pi-3`).
/// `decimal` is filled in by [`RunConfig::resolve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealArg {
    pub token: String,
    pub decimal: Option<String>,
}

impl RealArg {
    pub fn value(&self, digits: u32) -> modone::Result<ExtReal> {
        ExtReal::parse(&self.token, digits)
    }
}

impl FromStr for RealArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ExtReal::parse(s, 16).map_err(|e| e.to_string())?;
        Ok(Self { token: s.trim().to_string(), decimal: None })
    }
}

impl fmt::Display for RealArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token)
    }
}

/// A union of intervals such as `[-1,1]` or `0:1;2:3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SetArg(pub String);

impl SetArg {
    pub fn set(&self) -> IntervalSet {
        self.0.parse().expect("validated when parsed")
    }
}

impl FromStr for SetArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        IntervalSet::from_str(s).map_err(|e| e.to_string())?;
        Ok(Self(s.trim().to_string()))
    }
}

/// A test function: `gaussian:center,width`, `bump:lo,hi` or `indicator:lo,hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FnArg(pub String);

impl FnArg {
    pub fn function(&self) -> TestFunction {
        parse_function(&self.0).expect("validated when parsed")
    }
}

fn parse_function(s: &str) -> Result<TestFunction, String> {
    let (kind, params) = s.split_once(':').ok_or_else(|| format!("expected KIND:A,B in test function `{s}`"))?;
    let nums: Vec<f64> = params
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("cannot parse parameters of `{s}`"))?;
    let [a, b] = nums[..] else {
        return Err(format!("`{s}` needs exactly two parameters"));
    };
    if !(a.is_finite() && b.is_finite()) {
        return Err(format!("parameters of `{s}` must be finite"));
    }
    match kind {
        "gaussian" if b > 0.0 => Ok(TestFunction::gaussian(a, b)),
        "bump" | "indicator" if a < b => {
            Ok(if kind == "bump" { TestFunction::bump_on(a, b) } else { TestFunction::indicator(a, b) })
        }
        "gaussian" => Err(format!("gaussian width must be positive in `{s}`")),
        "bump" | "indicator" => Err(format!("`{s}` needs lo < hi")),
        _ => Err(format!("unknown test function `{kind}`; use gaussian, bump or indicator")),
    }
}

impl FromStr for FnArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        parse_function(s)?;
        Ok(Self(s.trim().to_string()))
    }
}

/// `lo:hi` for histogram ranges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeArg {
    pub lo: f64,
    pub hi: f64,
}

impl FromStr for RangeArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
        let lo: f64 = a.trim().parse().map_err(|_| format!("bad lower end in `{s}`"))?;
        let hi: f64 = b.trim().parse().map_err(|_| format!("bad upper end in `{s}`"))?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("range `{s}` needs finite lo < hi"));
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SequenceArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: RealArg,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub beta: RealArg,
    #[arg(long = "N", value_parser = clap::value_parser!(u64).range(1..))]
    #[serde(rename = "N")]
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct PaircorrArgs {
    #[command(flatten)]
    pub seq: SequenceArgs,
    #[arg(long, conflicts_with = "interval", default_value = "0:4", allow_hyphen_values = true)]
    pub range: RangeArg,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u32).range(1..=100_000))]
    pub bins: u32,
    /// Compute R2 of this set instead of a histogram.
    #[arg(long, allow_hyphen_values = true)]
    pub interval: Option<SetArg>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct GapsArgs {
    #[command(flatten)]
    pub seq: SequenceArgs,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(1..=100_000))]
    pub bins: u32,
    /// Upper end of the histogram range `[0, max)`.
    #[arg(long, default_value_t = 6.0)]
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct SmoothArgs {
    #[command(flatten)]
    pub seq: SequenceArgs,
    #[arg(long, default_value = "gaussian:0,1")]
    pub f: FnArg,
    #[arg(long, default_value = "bump:-0.5,1.5")]
    pub h: FnArg,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct QnArgs {
    #[command(flatten)]
    pub seq: SequenceArgs,
    #[arg(long, default_value = "bump:-1,1")]
    pub nu: FnArg,
    #[arg(long, default_value = "bump:-0.5,1.5")]
    pub h: FnArg,
    /// Also split Q_N by gcd(k, N) <= N^delta.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ThetaVerifyArgs {
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..=10_000))]
    pub trials: u32,
    /// Group elements tried per sampled point.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(1..=1000))]
    pub elements: u32,
    #[arg(long, default_value = "gaussian:0.2,0.9")]
    pub f: FnArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObservableChoice {
    Separable,
    ThetaModulus,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct EquidistArgs {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: f64,
    #[arg(long, default_value_t = 0.5)]
    pub eta1: f64,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub eta2: f64,
    #[arg(long, value_enum, default_value = "separable")]
    pub observable: ObservableChoice,
    #[arg(long, default_value = "bump:-1,1")]
    pub nu: FnArg,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ConjectureArgs {
    /// Prime level.
    #[arg(long)]
    pub c: u64,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: RealArg,
    #[arg(long, default_value = "bump:-1,1")]
    pub nu: FnArg,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct DiscrepancyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: RealArg,
    /// One or more N, comma separated.
    #[arg(long = "N", value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
    #[serde(rename = "N")]
    pub n: Vec<u64>,
    /// Frequency cutoff (default N).
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long = "C", default_value_t = modone::discrepancy::ERDOS_TURAN_C)]
    #[serde(rename = "C")]
    pub c: f64,
    /// Also check the bound at every N up to the largest requested.
    #[arg(long)]
    pub sweep: bool,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct OppenheimArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: RealArg,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub beta: RealArg,
    #[arg(long = "M", value_parser = clap::value_parser!(u64).range(1..))]
    #[serde(rename = "M")]
    pub m: u64,
    #[arg(long = "A", default_value = "[-1,1]", allow_hyphen_values = true)]
    #[serde(rename = "A")]
    pub a: SetArg,
    #[arg(long = "B1", default_value = "(0,1]", allow_hyphen_values = true)]
    #[serde(rename = "B1")]
    pub b1: SetArg,
    #[arg(long = "B2", default_value = "(0,1]", allow_hyphen_values = true)]
    #[serde(rename = "B2")]
    pub b2: SetArg,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct ReportArgs {
    #[arg(long, default_value = "sqrt:2", allow_hyphen_values = true)]
    pub alpha: RealArg,
    /// Smaller sizes throughout.
    #[arg(long)]
    pub quick: bool,
}

impl RunConfig {
    /// Fix the working precision and record the decimal expansion of every real token.
    pub fn resolve(&mut self) -> Result<(), String> {
        let digits = match self.options.precision {
            Some(d) => d,
            None => match std::env::var(PRECISION_ENV) {
                Ok(v) => {
                    v.trim().parse().map_err(|_| format!("{PRECISION_ENV} must be a positive integer, got `{v}`"))?
                }
                Err(_) => DEFAULT_DIGITS,
            },
        };
        if !(8..=10_000).contains(&digits) {
            return Err(format!("precision must lie in 8..=10000 digits, got {digits}"));
        }
        self.options.precision = Some(digits);
        if let Some(arg) = self.command.alpha_mut() {
            arg.decimal = Some(arg.value(digits).map_err(|e| e.to_string())?.decimal_string(digits));
        }
        if let Some(arg) = self.command.beta_mut() {
            arg.decimal = Some(arg.value(digits).map_err(|e| e.to_string())?.decimal_string(digits));
        }
        Ok(())
    }

    pub fn digits(&self) -> u32 {
        self.options.precision.unwrap_or(DEFAULT_DIGITS)
    }

    /// The report format and, when writing to a file, its path.
    pub fn destination(&self) -> Result<(Format, Option<PathBuf>), String> {
        let named = match self.options.out.as_deref() {
            Some("json") => Some(Format::Json),
            Some("csv") => Some(Format::Csv),
            _ => None,
        };
        if let (Some(n), Some(f)) = (named, self.options.format) {
            if n != f {
                return Err(format!("--out {n:?} contradicts --format {f:?}").to_lowercase());
            }
        }
        Ok(match (named, self.options.out.as_deref()) {
            (Some(n), _) => (n, None),
            (None, Some(path)) => {
                let by_ext = if path.to_ascii_lowercase().ends_with(".csv") { Format::Csv } else { Format::Json };
                (self.options.format.unwrap_or(by_ext), Some(PathBuf::from(path)))
            }
            (None, None) => (self.options.format.unwrap_or(Format::Json), None),
        })
    }
}
