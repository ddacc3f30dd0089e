//! Command-line front end: configuration, report files and plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod report;

use clap::{Args, Parser, Subcommand};
use commands::{BallTask, DEFAULT_SWEEP};
use config::{Format, LabConfig, Overrides};
pub use error::{exit, CliError};
use report::Report;
use std::io::Write;
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "bnlab", version, about = "Bubble estimates and Brezis-Nirenberg checks near singular boundary points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sharp Sobolev constants: closed form against Rayleigh minimisation.
    Extremal,
    /// Verify the witness balls of the singular sequence.
    CheckDomain,
    /// Integrals of each bubble.
    Bubbles,
    /// Fitted asymptotic orders of the bubble integrals.
    Slopes,
    /// Energy quotients against the compactness bound.
    Quotient,
    /// Quotient test across singularity orders.
    Sweep,
    /// Brezis-Nirenberg problem on the unit ball by radial shooting.
    Ball,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Extremal => "extremal",
            Self::CheckDomain => "check-domain",
            Self::Bubbles => "bubbles",
            Self::Slopes => "slopes",
            Self::Quotient => "quotient",
            Self::Sweep => "sweep",
            Self::Ball => "ball",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML configuration; the built-in six-dimensional cusp when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// λ of the quotient, or the ball problem's λ.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    /// Read `--lambda` as a multiple of λ₁ (ball only).
    #[arg(long, global = true)]
    pub relative: bool,
    #[arg(long, global = true)]
    pub eps_start: Option<f64>,
    #[arg(long, global = true)]
    pub eps_ratio: Option<f64>,
    #[arg(long, global = true)]
    pub j_max: Option<usize>,
    /// Weight exponent of the I4 column in `bubbles`.
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Relative tolerance of the shooting integrator.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Format printed on stdout.
    #[arg(long, global = true, value_enum)]
    pub out: Option<Format>,
    /// Directory receiving `<command>.csv` and `<command>.json`.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    /// Ball: bisect for the existence threshold.
    #[arg(long, global = true)]
    pub threshold: bool,
    /// Sweep: comma-separated singularity orders.
    #[arg(long, global = true, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            n: self.n,
            p: self.p,
            alpha: self.alpha,
            beta: self.beta,
            sigma: self.sigma,
            gamma: self.gamma,
            lambda: self.lambda,
            eps_start: self.eps_start,
            eps_ratio: self.eps_ratio,
            j_max: self.j_max,
            theta: self.theta,
            tol: self.tol,
        }
    }
}

fn load_config(flags: &Flags) -> Result<LabConfig, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => LabConfig::load(path)?,
        None => LabConfig::reference(),
    };
    flags.overrides().apply(&mut cfg)?;
    Ok(cfg)
}

/// Build the report for a parsed command line.
pub fn execute(cli: &Cli) -> Result<(LabConfig, Report), CliError> {
    let cfg = load_config(&cli.flags)?;
    let f = &cli.flags;
    let run = || -> Result<Report, CliError> {
        match cli.command {
            Command::Extremal => commands::extremal(f.n, f.p),
            Command::CheckDomain => commands::check_domain(&cfg),
            Command::Bubbles => commands::bubbles(&cfg),
            Command::Slopes => commands::slopes(&cfg),
            Command::Quotient => commands::quotient(&cfg),
            Command::Sweep => commands::sweep(&cfg, f.alphas.as_deref().unwrap_or(&DEFAULT_SWEEP)),
            Command::Ball => {
                let n = f.n.ok_or_else(|| CliError::Config("ball needs --n".to_string()))?;
                let task = match (f.threshold, f.lambda) {
                    (true, Some(_)) => {
                        return Err(CliError::Config("--threshold and --lambda are mutually exclusive".to_string()))
                    }
                    (true, None) => BallTask::Threshold,
                    (false, Some(l)) if f.relative => {
                        let l1 = bnlab_core::ball::principal_eigenvalue(n)?;
                        BallTask::Solve { lambda: l * l1 }
                    }
                    (false, Some(lambda)) => BallTask::Solve { lambda },
                    (false, None) => BallTask::Eigenvalue,
                };
                commands::ball(&cfg, n, task)
            }
        }
    };
    let report = match f.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be positive".to_string())),
        Some(jobs) => rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?.install(run)?,
        None => run()?,
    };
    debug_assert_eq!(report.command, cli.command.name());
    Ok((cfg, report))
}

/// Write report files and stdout; returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let (cfg, report) = execute(cli)?;
    let f = &cli.flags;
    let csv = report.table.to_csv()?;
    let json = report.json_text()?;
    if let Some(dir) = f.out_dir.as_ref().or(cfg.output.dir.as_ref()) {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{}.csv", report.command)), &csv)?;
        std::fs::write(dir.join(format!("{}.json", report.command)), &json)?;
    }
    if let Some(path) = f.plot.as_ref().or(cfg.output.plot.as_ref()) {
        match &report.plot {
            Some(plot) => std::fs::write(path, plot.render())?,
            None => eprintln!("note: {} produces no plot", report.command),
        }
    }
    let text = match f.out.unwrap_or(cfg.output.format) {
        Format::Csv => csv,
        Format::Json => json,
    };
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
        // A closed reader (`| head`) is not an error.
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    for line in &report.summary {
        eprintln!("{line}");
    }
    if report.failures.is_empty() {
        Ok(exit::SUCCESS)
    } else {
        for line in &report.failures {
            eprintln!("FAILED: {line}");
        }
        Ok(exit::ASSERTION)
    }
}
