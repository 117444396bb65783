use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rules::{shares, DistributionRule, ProportionalToHeadroom};
use super::{aggregate_rating, DerUnit};
use crate::error::{Error, Result};

/// Phase 1 request from the TSO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaRequest {
    /// Largest ROCOF the inertial reserve must cover (Hz/s).
    pub rocof_max: f64,
}

/// Phase 1 answer from the DSO. Powers are per unit of the aggregated fleet
/// rating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaResponse {
    pub h_ag_max: f64,
    /// Exchange with the upstream grid in normal operation.
    pub p0_ss: f64,
    /// Exchange while the whole inertial reserve is injected.
    pub p0_irmax: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaPhase1 {
    pub request: InertiaRequest,
    pub response: InertiaResponse,
}

impl InertiaPhase1 {
    /// Builds the DSO's answer for a fleet: the maximum exchange adds the
    /// whole fleet headroom to the steady-state exchange.
    pub fn from_fleet(
        request: InertiaRequest,
        units: &[DerUnit],
        p0_ss: f64,
        f_n: f64,
    ) -> Result<Self> {
        let s_ag = aggregate_rating(units);
        let headroom: f64 = units.iter().map(|u| u.headroom().max(0.0)).sum();
        let p0_irmax = if s_ag > 0.0 { p0_ss + headroom / s_ag } else { p0_ss };
        let h_ag_max = compute_h_ag_max(p0_irmax, p0_ss, f_n, request.rocof_max)?;
        Ok(Self {
            request,
            response: InertiaResponse {
                h_ag_max,
                p0_ss,
                p0_irmax,
            },
        })
    }

    /// Phase 2: accepts `h_ag_tso` only strictly below the offered maximum.
    pub fn assign(&self, h_ag_tso: f64, units: &[DerUnit], f_n: f64) -> Result<InertiaAssignment> {
        self.assign_with(&ProportionalToHeadroom, h_ag_tso, units, f_n)
    }

    pub fn assign_with(
        &self,
        rule: &dyn DistributionRule,
        h_ag_tso: f64,
        units: &[DerUnit],
        f_n: f64,
    ) -> Result<InertiaAssignment> {
        if !(h_ag_tso >= 0.0) || !h_ag_tso.is_finite() {
            return Err(Error::invalid("h_ag_tso", "must be finite and >= 0"));
        }
        if !(h_ag_tso < self.response.h_ag_max) {
            return Err(Error::InfeasibleAssignment(format!(
                "h_ag_tso ({h_ag_tso} s) must be strictly below h_ag_max ({} s)",
                self.response.h_ag_max
            )));
        }
        let per_unit = distribute_inertia_with(rule, h_ag_tso, units, self.request.rocof_max, f_n)?;
        let p0_ir = compute_p0_ir(h_ag_tso, self.request.rocof_max, f_n, self.response.p0_ss)?;
        Ok(InertiaAssignment {
            h_ag_tso,
            p0_ir,
            per_unit,
        })
    }
}

/// Phase 2 result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InertiaAssignment {
    pub h_ag_tso: f64,
    /// Exchange with the upstream grid while the selected reserve is injected.
    pub p0_ir: f64,
    pub per_unit: BTreeMap<String, f64>,
}

/// Largest aggregate inertia constant the headroom supports:
/// `H = (f_n / 2) * (p0_irmax - p0_ss) / rocof_max`.
pub fn compute_h_ag_max(p0_irmax: f64, p0_ss: f64, f_n: f64, rocof_max: f64) -> Result<f64> {
    if !(rocof_max > 0.0) || !rocof_max.is_finite() {
        return Err(Error::invalid("rocof_max", format!("must be > 0, got {rocof_max}")));
    }
    if !(f_n > 0.0) || !f_n.is_finite() {
        return Err(Error::invalid("f_n", format!("must be > 0, got {f_n}")));
    }
    if !p0_irmax.is_finite() || !p0_ss.is_finite() {
        return Err(Error::invalid("p0_irmax", "powers must be finite"));
    }
    if p0_irmax < p0_ss {
        return Err(Error::InfeasibleHeadroom { p0_irmax, p0_ss });
    }
    Ok(f_n / 2.0 * (p0_irmax - p0_ss) / rocof_max)
}

/// Exchange at the point of connection when `h_ag_tso` is delivered at
/// `rocof_max`: `2 * H * rocof_max / f_n + p0_ss`.
pub fn compute_p0_ir(h_ag_tso: f64, rocof_max: f64, f_n: f64, p0_ss: f64) -> Result<f64> {
    if !(f_n > 0.0) || !f_n.is_finite() {
        return Err(Error::invalid("f_n", format!("must be > 0, got {f_n}")));
    }
    if !(h_ag_tso >= 0.0) {
        return Err(Error::invalid("h_ag_tso", format!("must be >= 0, got {h_ag_tso}")));
    }
    Ok(2.0 * h_ag_tso * rocof_max / f_n + p0_ss)
}

/// Splits `h_ag_tso` into per-unit inertia constants, with inertial power
/// shared in proportion to headroom.
pub fn distribute_inertia(
    h_ag_tso: f64,
    units: &[DerUnit],
    rocof_max: f64,
    f_n: f64,
) -> Result<BTreeMap<String, f64>> {
    distribute_inertia_with(&ProportionalToHeadroom, h_ag_tso, units, rocof_max, f_n)
}

pub fn distribute_inertia_with(
    rule: &dyn DistributionRule,
    h_ag_tso: f64,
    units: &[DerUnit],
    rocof_max: f64,
    f_n: f64,
) -> Result<BTreeMap<String, f64>> {
    if !(rocof_max > 0.0) || !(f_n > 0.0) {
        return Err(Error::invalid("rocof_max", "rocof_max and f_n must be > 0"));
    }
    if !(h_ag_tso >= 0.0) || !h_ag_tso.is_finite() {
        return Err(Error::invalid("h_ag_tso", "must be finite and >= 0"));
    }
    let s_ag = aggregate_rating(units);
    let required = 2.0 * h_ag_tso * s_ag / f_n * rocof_max;
    let headroom: f64 = units.iter().map(|u| u.headroom().max(0.0)).sum();
    let slack = 1e-12 * headroom.max(1.0);
    if required > headroom + slack {
        return Err(Error::InfeasibleAssignment(format!(
            "aggregate inertial power {required} exceeds total headroom {headroom}"
        )));
    }
    if required == 0.0 {
        return Ok(units.iter().map(|u| (u.id.clone(), 0.0)).collect());
    }
    let shares = shares(rule, units).ok_or_else(|| {
        Error::InfeasibleAssignment("distribution rule gives every unit zero weight".into())
    })?;

    let mut out = BTreeMap::new();
    for (u, share) in units.iter().zip(shares) {
        let p = required * share;
        if p > u.headroom().max(0.0) + slack {
            return Err(Error::InfeasibleAssignment(format!(
                "unit `{}` would inject {p} with headroom {}",
                u.id,
                u.headroom()
            )));
        }
        let h = if p > 0.0 {
            p * f_n / (2.0 * u.p_rating * rocof_max)
        } else {
            0.0
        };
        out.insert(u.id.clone(), h);
    }
    Ok(out)
}
