use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::droop::{compute_droop_envelope, distribute_droop, select_droop, DroopEnvelope, FrequencyGrid};
use super::inertia::{InertiaAssignment, InertiaPhase1, InertiaRequest};
use super::reserve::{check_reserve_rules, ReserveRuleReport, ReserveShare};
use super::{fleet_violations, DerUnit};
use crate::error::{Result, Validate, Violations};
use crate::frequency::DroopCurve;

/// The DSO side of both exchanges, holding the fleet it aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dso {
    pub units: Vec<DerUnit>,
    /// Steady-state exchange with the upstream grid (pu of the fleet rating).
    pub p0_ss: f64,
    pub f_n: f64,
}

/// Phase 2 result of the droop exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroopAssignment {
    pub curve: DroopCurve,
    pub per_unit: BTreeMap<String, DroopCurve>,
}

impl Dso {
    pub fn new(units: Vec<DerUnit>, p0_ss: f64, f_n: f64) -> Self {
        Self { units, p0_ss, f_n }
    }

    pub fn inertia_phase1(&self, request: InertiaRequest) -> Result<InertiaPhase1> {
        InertiaPhase1::from_fleet(request, &self.units, self.p0_ss, self.f_n)
    }

    pub fn inertia_phase2(&self, phase1: &InertiaPhase1, h_ag_tso: f64) -> Result<InertiaAssignment> {
        phase1.assign(h_ag_tso, &self.units, self.f_n)
    }

    pub fn droop_phase1(&self, grid: &FrequencyGrid) -> Result<DroopEnvelope> {
        compute_droop_envelope(&self.units, grid)
    }

    pub fn droop_phase2(&self, envelope: &DroopEnvelope, candidate: &DroopCurve) -> Result<DroopAssignment> {
        let curve = select_droop(envelope, candidate)?;
        let per_unit = distribute_droop(&curve, &self.units, &envelope.grid)?;
        Ok(DroopAssignment { curve, per_unit })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaTarget {
    pub rocof_max: f64,
    pub h_ag_tso: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroopRequest {
    pub grid: FrequencyGrid,
    pub candidate: DroopCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReserveCheck {
    pub total_fcr: f64,
    pub shares: Vec<ReserveShare>,
    #[serde(default)]
    pub reference_incident: Vec<String>,
}

/// Scenario document for the `coordinate` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinationScenario {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_f_n")]
    pub f_n: f64,
    #[serde(default)]
    pub p0_ss: f64,
    pub units: Vec<DerUnit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<InertiaTarget>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub droop: Option<DroopRequest>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reserves: Option<ReserveCheck>,
}

fn default_f_n() -> f64 {
    50.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoordinationOutcome {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia_phase1: Option<InertiaPhase1>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia: Option<InertiaAssignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub envelope: Option<DroopEnvelope>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub droop: Option<DroopAssignment>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reserve_report: Option<ReserveRuleReport>,
}

impl CoordinationScenario {
    /// Runs every exchange the scenario asks for.
    pub fn run(&self) -> Result<CoordinationOutcome> {
        self.validate()?;
        let dso = Dso::new(self.units.clone(), self.p0_ss, self.f_n);
        let mut out = CoordinationOutcome::default();
        if let Some(t) = &self.inertia {
            let phase1 = dso.inertia_phase1(InertiaRequest { rocof_max: t.rocof_max })?;
            out.inertia = Some(dso.inertia_phase2(&phase1, t.h_ag_tso)?);
            out.inertia_phase1 = Some(phase1);
        }
        if let Some(d) = &self.droop {
            let env = dso.droop_phase1(&d.grid)?;
            out.droop = Some(dso.droop_phase2(&env, &d.candidate)?);
            out.envelope = Some(env);
        }
        if let Some(r) = &self.reserves {
            out.reserve_report = Some(check_reserve_rules(&r.shares, r.total_fcr, &r.reference_incident)?);
        }
        Ok(out)
    }
}

impl Validate for CoordinationScenario {
    fn violations(&self) -> Violations {
        let mut v = Violations::new();
        crate::check_schema_version(&mut v, self.schema_version);
        v.check(self.f_n > 0.0 && self.f_n.is_finite(), "f_n", "must be finite and > 0");
        v.finite(self.p0_ss, "p0_ss");
        v.extend(fleet_violations(&self.units, "units"));
        if let Some(t) = &self.inertia {
            v.check(t.rocof_max > 0.0 && t.rocof_max.is_finite(), "inertia.rocof_max", "must be finite and > 0");
            v.check(t.h_ag_tso >= 0.0 && t.h_ag_tso.is_finite(), "inertia.h_ag_tso", "must be finite and >= 0");
        }
        if let Some(d) = &self.droop {
            for x in d.grid.violations().into_vec() {
                v.push(format!("droop.grid.{}", x.field), x.message);
            }
            v.extend(d.candidate.violations_at("droop.candidate."));
        }
        if let Some(r) = &self.reserves {
            v.check(r.total_fcr > 0.0 && r.total_fcr.is_finite(), "reserves.total_fcr", "must be finite and > 0");
            for (i, s) in r.shares.iter().enumerate() {
                v.check(
                    s.share >= 0.0 && s.share.is_finite(),
                    format!("reserves.shares[{i}].share"),
                    "must be finite and >= 0",
                );
            }
        }
        v
    }
}
