use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum, ValueHint};
use serde::Serialize;
use subideal::verify::CheckKind;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SUBIDEAL_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "subideal", version, about = "Sub-ideal causal smoothing filters exp(-a (s + b)^q)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Frequency response table `omega,re,im,gain,phase_rad`.
    Freqz(FreqzOpts),
    /// Impulse response `t,value` by inverse FFT.
    Impulse(ImpulseOpts),
    /// Filter a sampled signal file.
    Apply(ApplyOpts),
    /// Run the verification battery and print a JSON report.
    Verify(VerifyOpts),
    /// Write the three figure datasets.
    Figures(FiguresOpts),
}

/// `--alpha` value: a number, or `from-matched` for `mu / cos(q π/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaArg {
    Value(f64),
    FromMatched,
}

impl FromStr for AlphaArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "from-matched" {
            return Ok(AlphaArg::FromMatched);
        }
        s.parse::<f64>().map(AlphaArg::Value).map_err(|_| format!("expected a number or `from-matched`, got {s:?}"))
    }
}

#[derive(Args, Debug, Clone)]
pub struct FilterOpts {
    /// Scale alpha > 0, or `from-matched` (needs --mu).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: AlphaArg,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Exponent, 0 < q < 1.
    #[arg(long, allow_hyphen_values = true)]
    pub q: f64,
    /// Reference decay rate of exp(-mu |w|).
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputOpts {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (a directory for `figures`). Defaults to $SUBIDEAL_OUT_DIR, else stdout.
    #[arg(long, value_hint = ValueHint::AnyPath)]
    pub out: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, hide_env_values = true, value_hint = ValueHint::DirPath)]
    pub out_dir: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct FreqzOpts {
    #[command(flatten)]
    pub filter: FilterOpts,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub omega_min: f64,
    /// Defaults to where the gain envelope drops to --tail-eps.
    #[arg(long, allow_hyphen_values = true)]
    pub omega_max: Option<f64>,
    /// Number of rows.
    #[arg(long, default_value_t = 1001)]
    pub samples: usize,
    #[arg(long, default_value_t = subideal::spectral::DEFAULT_TAIL_EPS)]
    pub tail_eps: f64,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Args, Debug)]
pub struct ImpulseOpts {
    #[command(flatten)]
    pub filter: FilterOpts,
    /// Band of the inverse transform; defaults to the automatic grid.
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Grid size, a power of two >= 8; defaults to the automatic grid.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = subideal::spectral::DEFAULT_TAIL_EPS)]
    pub tail_eps: f64,
    #[arg(long, default_value_t = subideal::spectral::DEFAULT_RESOLUTION_FACTOR)]
    pub resolution_factor: f64,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Direct,
    Fft,
    Stream,
}

#[derive(Args, Debug)]
pub struct ApplyOpts {
    #[command(flatten)]
    pub filter: FilterOpts,
    /// Input signal CSV (`t,value`).
    #[arg(long, value_hint = ValueHint::FilePath)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Fft)]
    pub mode: Mode,
    /// Chunk length for --mode stream.
    #[arg(long, default_value_t = 1024)]
    pub chunk: usize,
    #[arg(long, default_value_t = subideal::spectral::DEFAULT_TAIL_EPS)]
    pub tail_eps: f64,
    #[arg(long, default_value_t = subideal::spectral::DEFAULT_RESOLUTION_FACTOR)]
    pub resolution_factor: f64,
    #[command(flatten)]
    pub output: OutputOpts,
}

#[derive(Args, Debug)]
pub struct VerifyOpts {
    #[command(flatten)]
    pub filter: FilterOpts,
    /// Run only these checks (repeatable): a1, a2, b, pw, c, d, causality, ratio.
    #[arg(long = "check", value_parser = parse_check)]
    pub checks: Vec<CheckKind>,
    /// Frequency at which the gain ratio is reported.
    #[arg(long, default_value_t = 100.0)]
    pub omega: f64,
    /// Upper limit for the Paley-Wiener integral.
    #[arg(long, allow_hyphen_values = true)]
    pub pw_max: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = subideal::spectral::DEFAULT_TAIL_EPS)]
    pub tail_eps: f64,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputOpts,
}

fn parse_check(s: &str) -> Result<CheckKind, String> {
    s.parse().map_err(|e: subideal::Error| e.to_string())
}

#[derive(Args, Debug)]
pub struct FiguresOpts {
    /// Reference rate for the gain figure.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    /// Reference rate drawn with the identity-error curves.
    #[arg(long, default_value_t = 0.05)]
    pub identity_mu: f64,
    /// Alpha for the impulse-response figure.
    #[arg(long, default_value_t = 6.3925)]
    pub impulse_alpha: f64,
    /// Rows per frequency figure.
    #[arg(long, default_value_t = 2001)]
    pub samples: usize,
    #[arg(long, default_value_t = subideal::spectral::DEFAULT_TAIL_EPS)]
    pub tail_eps: f64,
    #[command(flatten)]
    pub output: OutputOpts,
}
