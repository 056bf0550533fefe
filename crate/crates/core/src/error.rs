use thiserror::Error;

use crate::deal::Finding;

/// Errors raised by the engine, the solvers and scenario I/O.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A condition needs a curve the scenario does not supply.
    #[error("missing curve `{0}` required by the derivative conditions")]
    MissingCurve(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capability error: {0}")]
    Capability(String),

    #[error("no sign change over [{lo}, {hi}]: g(lo) = {g_lo}, g(hi) = {g_hi}")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("scenario failed validation: {}", format_findings(.0))]
    Validation(Vec<Finding>),

    #[error("i/o error: {0}")]
    Io(String),
}

fn format_findings(findings: &[Finding]) -> String {
    findings
        .iter()
        .map(|f| format!("{}: {}", f.path, f.message))
        .collect::<Vec<_>>()
        .join("; ")
}

impl Error {
    /// Field path the error points at, when there is one.
    pub fn path(&self) -> Option<String> {
        match self {
            Error::Schema { path, .. } => Some(path.clone()),
            Error::Validation(findings) => findings
                .iter()
                .find(|f| f.is_violation())
                .map(|f| f.path.clone()),
            Error::MissingCurve(name) => Some(format!("curves.{name}")),
            _ => None,
        }
    }

    /// True for errors coming out of the numerical machinery rather than the input.
    pub fn is_solver_error(&self) -> bool {
        matches!(
            self,
            Error::Bracket { .. } | Error::NoConvergence { .. } | Error::Domain(_) | Error::Capability(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
