//! TSO-DSO exchanges for DER-provided inertia and droop reserves, plus the
//! regulatory checks on a frequency containment reserve portfolio.
//!
//! Both services follow the same two-phase pattern. The DSO first reports
//! what its aggregated fleet can deliver (a maximum inertia constant, or a
//! feasible area of droop curves). The TSO then picks a target inside that
//! capability, and the DSO splits it across its units.

mod droop;
mod inertia;
mod protocol;
mod reserve;
mod rules;

pub use droop::{
    compute_droop_envelope, distribute_droop, distribute_droop_with, select_droop, Corner,
    Corners, DroopEnvelope, EnvelopeRow, FrequencyGrid,
};
pub use inertia::{
    compute_h_ag_max, compute_p0_ir, distribute_inertia, distribute_inertia_with,
    InertiaAssignment, InertiaPhase1, InertiaRequest, InertiaResponse,
};
pub use protocol::{
    CoordinationOutcome, CoordinationScenario, DroopAssignment, DroopRequest, Dso,
    InertiaTarget, ReserveCheck,
};
pub use reserve::{
    check_reserve_rules, ReserveRule, ReserveRuleReport, ReserveShare, RuleViolation, SINGLE_UNIT_CAP,
};
pub use rules::{DistributionRule, ProportionalToHeadroom, ProportionalToRating};

use serde::{Deserialize, Serialize};

use crate::error::{Validate, Violations};

/// A distributed energy resource as seen by the DSO. Powers are per unit on
/// a common base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerUnit {
    pub id: String,
    pub p_rating: f64,
    /// Current operating point.
    pub p_available: f64,
    #[serde(default)]
    pub bus: String,
    #[serde(default)]
    pub in_reference_incident: bool,
}

impl DerUnit {
    pub fn new(id: impl Into<String>, p_rating: f64, p_available: f64) -> Self {
        Self {
            id: id.into(),
            p_rating,
            p_available,
            bus: String::new(),
            in_reference_incident: false,
        }
    }

    /// Unused capacity kept free for reserve provision.
    pub fn headroom(&self) -> f64 {
        self.p_rating - self.p_available
    }

    pub(crate) fn violations_at(&self, prefix: &str) -> Violations {
        let mut v = Violations::new();
        v.finite(self.p_rating, format!("{prefix}p_rating"));
        v.finite(self.p_available, format!("{prefix}p_available"));
        v.check(
            self.p_available >= 0.0,
            format!("{prefix}p_available"),
            "must be >= 0",
        );
        v.check(
            self.p_available <= self.p_rating,
            format!("{prefix}p_available"),
            format!("must not exceed p_rating ({})", self.p_rating),
        );
        v
    }
}

impl Validate for DerUnit {
    fn violations(&self) -> Violations {
        self.violations_at("")
    }
}

pub(crate) fn fleet_violations(units: &[DerUnit], prefix: &str) -> Violations {
    let mut v = Violations::new();
    let mut seen = std::collections::BTreeSet::new();
    for (i, u) in units.iter().enumerate() {
        v.extend(u.violations_at(&format!("{prefix}[{i}].")));
        v.check(
            seen.insert(u.id.as_str()),
            format!("{prefix}[{i}].id"),
            format!("duplicate unit id `{}`", u.id),
        );
    }
    v
}

/// Aggregate base of a fleet: the sum of unit ratings.
pub(crate) fn aggregate_rating(units: &[DerUnit]) -> f64 {
    units.iter().map(|u| u.p_rating).sum()
}
