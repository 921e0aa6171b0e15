use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use pontryagin::indefinite::Tolerances;
use pontryagin::Error;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// A cross-check between two independent computations disagreed.
    Inconsistent,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub kind: &'static str,
    pub input_error: bool,
    pub message: String,
}

/// JSON document printed by every command. Maps are ordered by key so that
/// reports diff cleanly.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub status: Status,
    pub inputs: Vec<InputRecord>,
    pub tolerances: Option<Tolerances>,
    pub verdicts: BTreeMap<String, Value>,
    pub residuals: BTreeMap<String, f64>,
    pub certificates: BTreeMap<String, Value>,
    pub notes: Vec<String>,
    pub outputs: Vec<String>,
    pub error: Option<ErrorRecord>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            status: Status::Ok,
            inputs: Vec::new(),
            tolerances: None,
            verdicts: BTreeMap::new(),
            residuals: BTreeMap::new(),
            certificates: BTreeMap::new(),
            notes: Vec::new(),
            outputs: Vec::new(),
            error: None,
        }
    }

    pub fn verdict(&mut self, key: &str, value: impl Serialize) {
        self.verdicts.insert(key.to_string(), to_value(value));
    }

    pub fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.to_string(), value);
    }

    pub fn certificate(&mut self, key: &str, value: impl Serialize) {
        self.certificates.insert(key.to_string(), to_value(value));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    /// Marks the report inconsistent; the process exits with code 1.
    pub fn inconsistent(&mut self, text: impl Into<String>) {
        self.status = Status::Inconsistent;
        self.notes.push(text.into());
    }

    pub fn fail(&mut self, e: &Error) {
        self.status = Status::Error;
        self.error = Some(ErrorRecord {
            kind: error_kind(e),
            input_error: e.is_input_error(),
            message: e.to_string(),
        });
    }

    pub fn exit_code(&self) -> i32 {
        match (self.status, &self.error) {
            (Status::Ok, _) => 0,
            (Status::Inconsistent, _) => 1,
            (Status::Error, Some(e)) if e.input_error => 2,
            (Status::Error, _) => 1,
        }
    }

    /// Reads a file and records its hash.
    pub fn read_input(&mut self, path: &Path) -> pontryagin::Result<String> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.inputs.push(InputRecord {
            path: path.display().to_string(),
            sha256: format!("{:x}", Sha256::digest(&bytes)),
        });
        String::from_utf8(bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn record_output(&mut self, path: PathBuf) {
        self.outputs.push(path.display().to_string());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("report values always serialize")
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DimensionMismatch { .. } => "dimension_mismatch",
        Error::NonFinite(_) => "non_finite",
        Error::NotHermitian { .. } => "not_hermitian",
        Error::Indefinite { .. } => "indefinite",
        Error::DegenerateSubspace => "degenerate_subspace",
        Error::SpectralAmbiguity { .. } => "spectral_ambiguity",
        Error::PoleProximity { .. } => "pole_proximity",
        Error::OrderAmbiguity(_) => "order_ambiguity",
        Error::NotContraction { .. } => "not_contraction",
        Error::Precondition(_) => "precondition",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::Singular(_) => "singular",
        Error::NoConvergence(_) => "no_convergence",
        Error::Unsupported(_) => "unsupported",
        Error::Parse(_) => "parse",
        Error::Certification { .. } => "certification",
        Error::Inconsistency(_) => "inconsistency",
    }
}
