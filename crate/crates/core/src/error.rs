use std::fmt;

use serde::Serialize;

/// A single broken invariant, addressed by a dotted field path such as
/// `units[2].p_available`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input `{field}`: {message}")]
    InvalidInput { field: String, message: String },

    #[error("validation failed with {} violation(s): {}", .0.len(), join(.0))]
    Validation(Vec<Violation>),

    #[error("infinite ROCOF: system inertia is zero but the disturbance is {delta_p} pu")]
    InfiniteRocof { delta_p: f64 },

    #[error("infeasible headroom: p0_irmax ({p0_irmax}) is below p0_ss ({p0_ss})")]
    InfeasibleHeadroom { p0_irmax: f64, p0_ss: f64 },

    #[error("infeasible assignment: {0}")]
    InfeasibleAssignment(String),

    #[error("droop curve leaves the feasible area at {} frequency point(s): {:?}", .frequencies.len(), .frequencies)]
    FeasibilityViolation { frequencies: Vec<f64> },

    #[error("droop distribution failed: {0}")]
    Distribution(String),

    #[error("fault at `{0}` is not connected to the external source")]
    UnreachableFault(String),

    #[error("singular nodal system in component rooted at `{bus}`: {detail}")]
    Numerical { bus: String, detail: String },

    #[error("no relay settings for topology and no prior configuration to hold")]
    Unconfigured,

    #[error("no fault signature within tolerance (nearest distance {nearest})")]
    NoFaultDetected { nearest: f64 },

    #[error("ambiguous fault location: `{first}` and `{second}` are {separation} apart")]
    AmbiguousLocation {
        first: String,
        second: String,
        separation: f64,
    },

    #[error("synchronization rejected: |df| = {freq_diff} Hz, |dphi| = {phase_diff} rad")]
    SyncRejected { freq_diff: f64, phase_diff: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInput {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed or inconsistent inputs, as opposed
    /// to failures that surface while a simulation runs.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput { .. } | Error::Validation(_) | Error::Parse(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Collects violations while walking a structure.
#[derive(Debug, Default)]
pub struct Violations(Vec<Violation>);

impl Violations {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation::new(field, message));
    }

    pub fn check(&mut self, ok: bool, field: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.push(field, message);
        }
    }

    pub fn finite(&mut self, value: f64, field: impl Into<String>) {
        if !value.is_finite() {
            self.push(field, format!("must be finite, got {value}"));
        }
    }

    pub fn extend(&mut self, other: Violations) {
        self.0.extend(other.0);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Prepends `prefix` to every field path, for nested structures.
    pub fn prefix(&mut self, prefix: &str) {
        for v in &mut self.0 {
            v.field.insert_str(0, prefix);
        }
    }

    pub fn into_vec(self) -> Vec<Violation> {
        self.0
    }

    pub fn into_result(self) -> Result<()> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self.0))
        }
    }
}

/// Types that can report every broken invariant in one pass.
pub trait Validate {
    fn violations(&self) -> Violations;

    fn validate(&self) -> Result<()> {
        self.violations().into_result()
    }
}
