//! Scenario runner and verification suite for hyperbolic curve shortening
//! flow.
//!
//! A scenario is a JSON configuration ([`config`]) naming one of `analytic`,
//! `evolve`, `soliton`, `intrinsic` or `verify`. Running it writes CSV and
//! JSON files into an output directory ([`scenarios`]); `verify` runs the
//! check batteries in [`verify`] and emits a pass/fail report.

use std::fmt;
use std::io;

use serde::Serialize;

pub mod config;
pub mod output;
pub mod scenarios;
pub mod verify;

pub use config::{FieldError, ScenarioConfig};
pub use scenarios::{run_scenario, Summary};

/// Why a scenario did not complete.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// The configuration is malformed or out of range; every problem is listed.
    Config(Vec<FieldError>),
    Usage(String),
    /// The solver failed, at flow time `time` when known.
    Solver {
        message: String,
        time: Option<f64>,
    },
    Io(String),
}

impl RunError {
    pub fn solver_at(e: hcsf_core::Error, t: f64) -> Self {
        let mut r = RunError::from(e);
        if let RunError::Solver { time, .. } = &mut r {
            time.get_or_insert(t);
        }
        r
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) => 2,
            RunError::Solver { .. } => 3,
            RunError::Io(_) => 4,
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (kind, message, errors, time) = match self {
            RunError::Config(errors) => (
                "config",
                format!("invalid configuration ({} problems)", errors.len()),
                errors.clone(),
                None,
            ),
            RunError::Usage(m) => ("usage", m.clone(), Vec::new(), None),
            RunError::Solver { message, time } => ("solver", message.clone(), Vec::new(), *time),
            RunError::Io(m) => ("io", m.clone(), Vec::new(), None),
        };
        ErrorReport {
            status: "error",
            kind,
            message,
            errors,
            time,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(errors) => {
                write!(f, "invalid configuration:")?;
                for e in errors {
                    write!(f, "\n  {e}")?;
                }
                Ok(())
            }
            RunError::Usage(m) | RunError::Io(m) => f.write_str(m),
            RunError::Solver {
                message,
                time: Some(t),
            } => write!(f, "solver failed at t = {t}: {message}"),
            RunError::Solver { message, .. } => write!(f, "solver failed: {message}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<hcsf_core::Error> for RunError {
    fn from(e: hcsf_core::Error) -> Self {
        use hcsf_core::Error as E;
        let time = match &e {
            E::StepFailed { t, .. } | E::Collapsed { t, .. } => Some(*t),
            E::LostPositivity { time, .. } => Some(*time),
            _ => None,
        };
        RunError::Solver {
            message: e.to_string(),
            time,
        }
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

/// The structured error report printed on failure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub status: &'static str,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<FieldError>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
}
