mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RawSettings;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "szego-lab", version, about = "Boundary asymptotics of the Fefferman-Szegő metric")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// ball, bumped, siegel or profile.
    #[arg(long, global = true)]
    domain: Option<String>,
    /// Complex dimension.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Bump height of the bumped ball.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    /// Profile terms `i j c; ...` for `ρ = Σ c s1^i s2^j`.
    #[arg(long, global = true)]
    profile: Option<String>,
    /// Truncation degree of kernel series (at least 4).
    #[arg(long, global = true)]
    degree: Option<usize>,
    /// Normalizing constant of the boundary measure.
    #[arg(long, global = true)]
    cn: Option<f64>,
    /// Comma-separated, strictly decreasing distances to the boundary.
    #[arg(long, global = true)]
    deltas: Option<String>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative tolerance on extrapolated limits.
    #[arg(long, global = true)]
    tol_limit: Option<f64>,
    /// Allowed deviation of η/δ from 1 at the last scaling step.
    #[arg(long, global = true)]
    tol_ratio: Option<f64>,
    /// Required decrease factor of the scaling residual per decade of δ.
    #[arg(long, global = true)]
    tol_residual_factor: Option<f64>,
    /// Evaluate truncated series even where a closed form exists.
    #[arg(long, global = true)]
    series: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the Szegő and Bergman kernels at (z, w).
    Kernel {
        #[arg(long)]
        z: String,
        /// Defaults to z.
        #[arg(long)]
        w: Option<String>,
    },
    /// Metric length, curvatures and the β invariant at z in direction X.
    Metric {
        #[arg(long)]
        z: String,
        /// Defaults to the first coordinate vector.
        #[arg(long)]
        x: Option<String>,
    },
    /// Boundary limits along the inward normal at a boundary point.
    Limits {
        /// Direction from the origin to the boundary point; defaults to e1.
        #[arg(long)]
        p0: Option<String>,
        /// Tangent direction for the a, d, e and f limits; defaults to (e1 + e2)/sqrt(2).
        #[arg(long)]
        x: Option<String>,
    },
    /// Ratios between a domain and the ball near a shared boundary point.
    Localize,
    /// Scaling sequence approaching a boundary point.
    Scale,
}

impl CommonArgs {
    fn settings(&self) -> Result<RawSettings, CliError> {
        let file = match &self.config {
            Some(path) => RawSettings::from_config_text(&std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?)?,
            None => RawSettings::default(),
        };
        Ok(file.overlay(RawSettings {
            domain: self.domain.clone(),
            n: self.n,
            epsilon: self.epsilon,
            profile: self.profile.clone(),
            degree: self.degree,
            cn: self.cn,
            deltas: self.deltas.clone(),
            out: self.out.clone(),
            tol_limit: self.tol_limit,
            tol_ratio: self.tol_ratio,
            tol_residual_factor: self.tol_residual_factor,
        }))
    }
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SZEGO_LAB_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("SZEGO_LAB_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(CliError::Usage("SZEGO_LAB_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let raw = cli.common.settings()?;
    let series = cli.common.series;
    match cli.command {
        Command::Kernel { z, w } => commands::kernel(&raw.resolve("ball", series)?, &z, w.as_deref()),
        Command::Metric { z, x } => commands::metric(&raw.resolve("ball", series)?, &z, x.as_deref()),
        Command::Limits { p0, x } => commands::limits(&raw.resolve("ball", series)?, p0.as_deref(), x.as_deref()),
        Command::Localize => commands::localize(&raw.resolve("bumped", series)?),
        Command::Scale => commands::scale(&raw.resolve("ball", series)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
