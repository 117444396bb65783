use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{DerCapability, RestorationScenario, SyncPolicy};
use crate::error::{Error, Result};

/// Independently supplied set of areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Microgrid {
    /// Id of the first area that formed it.
    pub id: String,
    pub areas: Vec<String>,
    pub forming: Vec<String>,
    /// Started grid-supporting and grid-feeding units.
    pub followers: Vec<String>,
    pub frequency: f64,
    pub phase: f64,
    pub generation_mw: f64,
    pub served_mw: f64,
    pub served_critical_mw: f64,
    pub margin_mw: f64,
}

impl Microgrid {
    pub fn contains_area(&self, area: &str) -> bool {
        self.areas.iter().any(|a| a == area)
    }

    /// Buses of all member areas.
    pub fn buses<'a>(&self, scenario: &'a RestorationScenario) -> Vec<&'a str> {
        scenario
            .buses
            .iter()
            .filter(|b| self.contains_area(&b.area))
            .map(|b| b.id.as_str())
            .collect()
    }

    /// Adds an area without starting anything in it.
    pub fn absorb_area(&mut self, area: &str, scenario: &RestorationScenario) {
        if !self.contains_area(area) {
            self.areas.push(area.to_string());
            self.areas.sort();
        }
        dispatch(self, scenario);
    }
}

fn in_areas(scenario: &RestorationScenario, areas: &[String], bus: &str) -> bool {
    scenario
        .area_of_bus(bus)
        .is_some_and(|a| areas.iter().any(|x| x == a))
}

/// Serves load in the member areas from running generation, critical load
/// first. Loads are divisible.
pub fn dispatch(mg: &mut Microgrid, scenario: &RestorationScenario) {
    let running: BTreeSet<&str> = mg.forming.iter().chain(&mg.followers).map(String::as_str).collect();
    mg.generation_mw = scenario
        .ders
        .iter()
        .filter(|d| running.contains(d.id.as_str()))
        .map(|d| d.capacity_mw)
        .sum();
    let (mut critical, mut other) = (0.0, 0.0);
    for l in scenario.loads.iter().filter(|l| in_areas(scenario, &mg.areas, &l.bus)) {
        if l.critical {
            critical += l.demand_mw;
        } else {
            other += l.demand_mw;
        }
    }
    mg.served_critical_mw = critical.min(mg.generation_mw);
    mg.served_mw = mg.served_critical_mw + other.min(mg.generation_mw - mg.served_critical_mw);
    mg.margin_mw = (mg.generation_mw - mg.served_mw).max(0.0);
}

/// One microgrid per area holding grid-forming units, ordered by the
/// area's first bus.
pub fn form_microgrids(scenario: &RestorationScenario) -> Vec<Microgrid> {
    let mut out: Vec<Microgrid> = Vec::new();
    for bus in &scenario.buses {
        let formers: Vec<String> = scenario
            .ders
            .iter()
            .filter(|d| d.capability == DerCapability::GridForming && d.capacity_mw > 0.0)
            .filter(|d| scenario.area_of_bus(&d.bus) == Some(bus.area.as_str()))
            .map(|d| d.id.clone())
            .collect();
        if formers.is_empty() || out.iter().any(|m| m.contains_area(&bus.area)) {
            continue;
        }
        let mut mg = Microgrid {
            id: bus.area.clone(),
            areas: vec![bus.area.clone()],
            forming: formers,
            followers: Vec::new(),
            frequency: scenario.f_n,
            phase: 0.0,
            generation_mw: 0.0,
            served_mw: 0.0,
            served_critical_mw: 0.0,
            margin_mw: 0.0,
        };
        dispatch(&mut mg, scenario);
        out.push(mg);
    }
    out
}

/// Starts follower units inside the microgrid: grid-supporting first, then
/// grid-feeding, each group by id. A unit whose start-up draw exceeds the
/// current margin is skipped and can be retried later.
pub fn reconnect_followers(mg: &Microgrid, scenario: &RestorationScenario) -> Microgrid {
    let mut mg = mg.clone();
    for kind in [DerCapability::GridSupporting, DerCapability::GridFeeding] {
        let mut candidates: Vec<_> = scenario
            .ders
            .iter()
            .filter(|d| d.capability == kind && in_areas(scenario, &mg.areas, &d.bus))
            .filter(|d| !mg.followers.contains(&d.id))
            .collect();
        candidates.sort_by(|a, b| a.id.cmp(&b.id));
        for d in candidates {
            if d.aux_load_mw <= mg.margin_mw {
                mg.followers.push(d.id.clone());
                dispatch(&mut mg, scenario);
            }
        }
    }
    mg.followers.sort();
    mg
}

/// Energizes a neighbouring area in two steps: its follower units are
/// started from the current margin while the area's load is still
/// disconnected, then the load is picked up.
pub fn pick_up_area(mg: &Microgrid, area: &str, scenario: &RestorationScenario) -> Microgrid {
    let mut mg = mg.clone();
    let areas = [area.to_string()];
    for kind in [DerCapability::GridSupporting, DerCapability::GridFeeding] {
        let mut candidates: Vec<_> = scenario
            .ders
            .iter()
            .filter(|d| d.capability == kind && in_areas(scenario, &areas, &d.bus))
            .filter(|d| !mg.followers.contains(&d.id))
            .collect();
        candidates.sort_by(|a, b| a.id.cmp(&b.id));
        for d in candidates {
            if d.aux_load_mw <= mg.margin_mw {
                mg.followers.push(d.id.clone());
                dispatch(&mut mg, scenario);
            }
        }
    }
    mg.absorb_area(area, scenario);
    reconnect_followers(&mg, scenario)
}

/// Phase difference folded into [0, pi].
pub fn wrapped_phase_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        2.0 * PI - d
    } else {
        d
    }
}

/// Closes the tie between two microgrids if they are in synchronism.
/// Generation, load and units are pooled; the result keeps `a`'s id,
/// frequency and phase. Served load is not re-dispatched.
pub fn synchronize_and_merge(a: &Microgrid, b: &Microgrid, policy: &SyncPolicy) -> Result<Microgrid> {
    if a.id == b.id {
        return Err(Error::invalid("b", format!("cannot merge microgrid `{}` with itself", a.id)));
    }
    let freq_diff = (a.frequency - b.frequency).abs();
    let phase_diff = wrapped_phase_difference(a.phase, b.phase);
    if !(freq_diff <= policy.max_frequency_difference && phase_diff < policy.max_phase_shift) {
        return Err(Error::SyncRejected { freq_diff, phase_diff });
    }
    let union = |x: &[String], y: &[String]| {
        let mut v: Vec<String> = x.iter().chain(y).cloned().collect();
        v.sort();
        v.dedup();
        v
    };
    Ok(Microgrid {
        id: a.id.clone(),
        areas: union(&a.areas, &b.areas),
        forming: union(&a.forming, &b.forming),
        followers: union(&a.followers, &b.followers),
        frequency: a.frequency,
        phase: a.phase,
        generation_mw: a.generation_mw + b.generation_mw,
        served_mw: a.served_mw + b.served_mw,
        served_critical_mw: a.served_critical_mw + b.served_critical_mw,
        margin_mw: a.margin_mw + b.margin_mw,
    })
}
