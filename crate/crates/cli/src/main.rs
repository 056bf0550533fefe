//! `slb-decider`: command-line front end to the sale-leaseback decision engine.
//!
//! Exit status: 0 success, 1 I/O or parse error, 2 validation failure,
//! 3 solver failure. Machine output goes to stdout, diagnostics to stderr.

mod render;

use std::fs;
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{debug, info};
use slb_core::deal::Severity;
use slb_core::scenario::{
    parse_scenario, parse_scenario_unchecked, run_batch, to_canonical_json, OutputFormat, ReportDocument, Scenario,
};
use slb_core::sensitivity::{self, linspace, Variable, DEFAULT_PERTURBATION};
use slb_core::Error;
use slb_service::{timestamp, ServiceConfig};

#[derive(Parser)]
#[command(name = "slb-decider", version = slb_core::VERSION, about = "Sale-leaseback versus new debt decision engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full decision report as JSON.
    Evaluate {
        scenario: PathBuf,
        /// Human-readable table instead of JSON.
        #[arg(long)]
        pretty: bool,
    },
    /// Side-by-side N_sl and N_b with the condition dashboard.
    Compare { scenario: PathBuf },
    /// Value of a variable at which N_sl equals N_b.
    Breakeven {
        scenario: PathBuf,
        /// One of S, R_ts, monthly_rent, P_dss.
        #[arg(long = "var")]
        variable: Variable,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
    },
    /// Evaluate on an evenly spaced grid of one variable.
    Sweep {
        scenario: PathBuf,
        #[arg(long = "var")]
        variable: Variable,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        /// Number of grid points, endpoints included.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        steps: u32,
    },
    /// One-at-a-time sensitivity ranking.
    Tornado {
        scenario: PathBuf,
        #[arg(long = "perturb", default_value_t = DEFAULT_PERTURBATION)]
        perturbation: f64,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
        #[arg(long)]
        cors_origin: Option<String>,
    },
    /// Bounds findings only.
    Validate { scenario: PathBuf },
    /// Evaluate many scenario files, writing one report each (json) or one table (csv).
    RunBatch {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value = "reports")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: exit_code(&e), message: e.to_string() }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Syntax { .. } | Error::Schema { .. } | Error::InvalidState(_) => 1,
        Error::Validation(_) | Error::MissingCurve(_) | Error::InvalidInput(_) => 2,
        Error::Bracket { .. } | Error::NoConvergence { .. } | Error::Domain(_) | Error::Capability(_) => 3,
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    debug!("loading {}", path.display());
    Ok(parse_scenario(&read_text(path)?)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Evaluate { scenario, pretty } => {
            let doc = ReportDocument::build(load(&scenario)?, timestamp())?;
            if pretty {
                print!("{}", render::pretty_report(&doc));
            } else {
                print!("{}", doc.to_json());
            }
        }
        Command::Compare { scenario } => {
            let doc = ReportDocument::build(load(&scenario)?, timestamp())?;
            print!("{}", render::compare(&doc));
        }
        Command::Breakeven { scenario, variable, lo, hi } => {
            let result = sensitivity::breakeven(&load(&scenario)?, variable, lo, hi)?;
            print!("{}", to_canonical_json(&result));
        }
        Command::Sweep { scenario, variable, from, to, steps } => {
            let grid = linspace(from, to, steps as usize);
            let table = sensitivity::sweep(&load(&scenario)?, variable, &grid)?;
            print!("{}", to_canonical_json(&table));
        }
        Command::Tornado { scenario, perturbation } => {
            let rows = sensitivity::tornado(&load(&scenario)?, perturbation)?;
            print!("{}", to_canonical_json(&rows));
        }
        Command::Serve { port, bind, cors_origin } => {
            let runtime = tokio::runtime::Runtime::new()
                .map_err(|e| Failure { code: 1, message: format!("cannot start runtime: {e}") })?;
            runtime
                .block_on(slb_service::serve(ServiceConfig { bind, port, cors_origin }))
                .map_err(|e| Failure { code: 1, message: format!("server error: {e}") })?;
        }
        Command::Validate { scenario } => {
            let parsed = parse_scenario_unchecked(&read_text(&scenario)?)?;
            let findings = parsed.validate();
            print!("{}", to_canonical_json(&findings));
            for f in &findings {
                eprintln!("{:?}: {}: {}", f.severity, f.path, f.message);
            }
            let violations = findings.iter().filter(|f| f.severity == Severity::Violation).count();
            if violations > 0 {
                return Err(Failure { code: 2, message: format!("{violations} violation(s)") });
            }
        }
        Command::RunBatch { paths, format, out } => {
            let format = match format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            let outcome = run_batch(&paths, format, &out, &timestamp())?;
            for written in &outcome.written {
                println!("{}", written.display());
            }
            info!("{} report(s), {} failure(s)", outcome.reports.len(), outcome.failures.len());
            if !outcome.success() {
                for (path, e) in &outcome.failures {
                    eprintln!("{}: {e}", path.display());
                }
                let code = outcome.failures.iter().map(|(_, e)| exit_code(e)).max().unwrap_or(1);
                return Err(Failure { code, message: format!("{} of {} scenario(s) failed", outcome.failures.len(), paths.len()) });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SLB_DECIDER_LOG", "error")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
