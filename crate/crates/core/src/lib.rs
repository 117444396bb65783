//! Simulation toolkit for power-system resilience studies.

// NaN must fail every range check, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod format;
pub mod benchmarks;
pub mod blackstart;
pub mod coordination;
pub mod frequency;
pub mod metrics;
pub mod protection;
pub mod rng;

pub use error::{Error, Result, Validate, Violation, Violations};

/// Current version of every scenario document format.
pub const SCHEMA_VERSION: u32 = 1;

pub(crate) fn schema_version() -> u32 {
    SCHEMA_VERSION
}

pub(crate) fn check_schema_version(v: &mut Violations, found: u32) {
    v.check(
        found == SCHEMA_VERSION,
        "schema_version",
        format!("unsupported version {found}, expected {SCHEMA_VERSION}"),
    );
}
