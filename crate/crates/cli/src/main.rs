//! `ic-lab`: Information Causality bounds from the command line.

mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_AMBIGUOUS: u8 = 3;

#[derive(Parser, Serialize)]
#[command(
    name = "ic-lab",
    version,
    about = "Information Causality bounds on nonsignaling boxes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Bisection tolerance in the bias `e`.
    #[arg(long, global = true, default_value_t = ic_core::bounds::DEFAULT_TOL)]
    tol: f64,
    /// Write the result here, plus `<out>.manifest.json`, instead of printing it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// CHSH bound on p from the two-bit protocol with a binary symmetric channel.
    Chsh(ChshArgs),
    /// Optimal channel bias versus concatenation for n = 2 and d = 3, 4, 5, 20.
    Table1,
    /// CHSH bound as a function of the channel keep-probability p_c.
    Fig1(Fig1Args),
    /// Bound on the 3322 mixing parameter e.
    I3322(I3322Args),
    /// Bound for a box, protocol and channel given as files.
    Bound(BoundArgs),
    /// Protocol search for a box and channel.
    Search(SearchArgs),
    /// Check a box file for normalization and no-signaling.
    Validate(ValidateArgs),
    /// Capacity of a channel.
    Capacity(CapacityArgs),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Serialize)]
pub struct ChshArgs {
    /// Channel bias e_c = 2 p_c - 1, in (0, 1].
    #[arg(long, default_value_t = 1.0, conflicts_with = "limit")]
    pub ec: f64,
    /// Extrapolate to e_c -> 0.
    #[arg(long)]
    pub limit: bool,
    /// Largest allowed residual of the e_c -> 0 fit.
    #[arg(long, default_value_t = 1e-6)]
    pub fit_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Serialize)]
pub struct Fig1Args {
    /// Grid size; rows are p_c = 0.5 + 0.5 j / points for j = 1..=points.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum I3322Mode {
    /// Noiseless one-bit channel.
    Capacity1,
    /// Symmetric channel with e_c -> 0.
    Limit,
}

#[derive(Args, Serialize)]
pub struct I3322Args {
    #[arg(long, value_enum, default_value_t = I3322Mode::Capacity1)]
    pub mode: I3322Mode,
    #[arg(long, default_value_t = 1e-6)]
    pub fit_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Serialize)]
pub struct ChannelChoice {
    /// Channel file.
    #[arg(long, conflicts_with = "ec")]
    pub channel: Option<PathBuf>,
    /// Bias of a symmetric channel.
    #[arg(long)]
    pub ec: Option<f64>,
    /// Alphabet of the `--ec` channel; defaults to the protocol's message
    /// alphabet, or 2 without a protocol.
    #[arg(long, requires = "ec")]
    pub d: Option<usize>,
}

#[derive(Args, Serialize)]
pub struct BoundArgs {
    /// Box at e = 1; the bound is over its mixtures with white noise.
    #[arg(long = "box")]
    pub box_file: PathBuf,
    #[arg(long)]
    pub protocol: PathBuf,
    #[command(flatten)]
    pub channel: ChannelChoice,
    /// Extrapolate to a vanishing symmetric channel bias.
    #[arg(long, conflicts_with_all = ["channel", "ec"])]
    pub limit: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub fit_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Serialize)]
pub struct SearchArgs {
    #[arg(long = "box")]
    pub box_file: PathBuf,
    #[command(flatten)]
    pub channel: ChannelChoice,
    /// Number of data symbols.
    #[arg(long, default_value_t = 2)]
    pub n_data: usize,
    /// Annealing seed; overrides the seed in `--config`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Annealing configuration as JSON; missing fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Enumerate every protocol instead of annealing.
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Args, Serialize)]
pub struct ValidateArgs {
    pub box_file: PathBuf,
    /// Largest tolerated deviation.
    #[arg(long = "ns-tol", default_value_t = ic_core::boxes::NS_TOL)]
    pub ns_tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Serialize)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub channel: ChannelChoice,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug)]
pub struct AppError {
    pub code: u8,
    pub message: String,
}

impl AppError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::validation(format!("{}: {err}", path.display()))
    }
}

impl From<ic_core::Error> for AppError {
    fn from(err: ic_core::Error) -> Self {
        use ic_core::Error as E;
        let code = match &err {
            E::Domain { .. } | E::SearchSpaceTooLarge { .. } => EXIT_USAGE,
            E::Ambiguous { .. } | E::NonConvergence { .. } | E::FitResidual { .. } => {
                EXIT_AMBIGUOUS
            }
            _ => EXIT_VALIDATION,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn configure_threads() -> Result<(), AppError> {
    let Ok(raw) = std::env::var("IC_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        AppError::usage(format!(
            "IC_LAB_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| AppError::internal(e.to_string()))
}

fn run(cli: &Cli) -> Result<(), AppError> {
    configure_threads()?;
    if !(cli.tol > 0.0 && cli.tol < 1.0) {
        return Err(AppError::usage(format!(
            "--tol must be in (0, 1), got {}",
            cli.tol
        )));
    }
    let (name, params) = match &cli.command {
        Command::Chsh(a) => ("chsh", serde_json::to_value(a)),
        Command::Table1 => ("table1", Ok(serde_json::Value::Null)),
        Command::Fig1(a) => ("fig1", serde_json::to_value(a)),
        Command::I3322(a) => ("i3322", serde_json::to_value(a)),
        Command::Bound(a) => ("bound", serde_json::to_value(a)),
        Command::Search(a) => ("search", serde_json::to_value(a)),
        Command::Validate(a) => ("validate", serde_json::to_value(a)),
        Command::Capacity(a) => ("capacity", serde_json::to_value(a)),
    };
    let mut params = params.map_err(|e| AppError::internal(e.to_string()))?;
    if let serde_json::Value::Object(map) = &mut params {
        map.insert("tol".into(), cli.tol.into());
    } else {
        params = serde_json::json!({ "tol": cli.tol });
    }
    let ctx = commands::Context {
        tol: cli.tol,
        out: cli.out.as_deref(),
        name,
        params,
    };
    match &cli.command {
        Command::Chsh(a) => commands::chsh(&ctx, a),
        Command::Table1 => commands::table1(&ctx),
        Command::Fig1(a) => commands::fig1(&ctx, a),
        Command::I3322(a) => commands::i3322(&ctx, a),
        Command::Bound(a) => commands::bound(&ctx, a),
        Command::Search(a) => commands::search(&ctx, a),
        Command::Validate(a) => commands::validate(&ctx, a),
        Command::Capacity(a) => commands::capacity(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}
