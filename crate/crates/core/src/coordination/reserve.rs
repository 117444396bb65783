use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest fraction of the total FCR a single unit may provide.
pub const SINGLE_UNIT_CAP: f64 = 0.05;

/// One unit's contribution to the frequency containment reserve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReserveShare {
    pub unit: String,
    /// pu, same base as the total.
    pub share: f64,
    #[serde(default)]
    pub in_reference_incident: bool,
}

impl ReserveShare {
    pub fn new(unit: impl Into<String>, share: f64) -> Self {
        Self {
            unit: unit.into(),
            share,
            in_reference_incident: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReserveRule {
    CapExceeded,
    IncidentUnitIncluded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleViolation {
    pub unit: String,
    pub rule: ReserveRule,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReserveRuleReport {
    pub violations: Vec<RuleViolation>,
}

impl ReserveRuleReport {
    pub fn is_compliant(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, rule: ReserveRule) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }
}

/// Checks the single-unit cap and the exclusion of units that are part of
/// the reference incident. Units are listed in input order; a unit can
/// appear under both rules.
pub fn check_reserve_rules(
    shares: &[ReserveShare],
    total_fcr: f64,
    reference_incident: &[String],
) -> Result<ReserveRuleReport> {
    if !(total_fcr > 0.0) || !total_fcr.is_finite() {
        return Err(Error::invalid("total_fcr", format!("must be > 0, got {total_fcr}")));
    }
    let mut violations = Vec::new();
    for s in shares {
        if !s.share.is_finite() || s.share < 0.0 {
            return Err(Error::invalid(
                format!("shares[{}].share", s.unit),
                "must be finite and >= 0",
            ));
        }
        let fraction = s.share / total_fcr;
        if fraction > SINGLE_UNIT_CAP {
            violations.push(RuleViolation {
                unit: s.unit.clone(),
                rule: ReserveRule::CapExceeded,
                detail: format!(
                    "provides {:.4}% of total FCR, cap is {}%",
                    fraction * 100.0,
                    SINGLE_UNIT_CAP * 100.0
                ),
            });
        }
        let incident = s.in_reference_incident || reference_incident.contains(&s.unit);
        if incident && s.share > 0.0 {
            violations.push(RuleViolation {
                unit: s.unit.clone(),
                rule: ReserveRule::IncidentUnitIncluded,
                detail: format!("part of the reference incident but contributes {}", s.share),
            });
        }
    }
    Ok(ReserveRuleReport { violations })
}
