//! Centralized adaptive protection: locate a fault from the pattern of DER
//! contributions, then isolate it with the nearest working breakers,
//! widening the cut whenever a commanded breaker fails to open.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::network::{FaultScenario, RadialNetwork};
use super::solver::solve_with_open;
use crate::error::{Error, Result};

/// Expected DER contributions for one candidate fault location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signature {
    /// Faulted line.
    pub location: String,
    /// Per-DER contribution to the fault current, in `der_order`.
    pub vector: Vec<f64>,
    pub plan: IsolationPlan,
}

/// Offline table for one topology: a bolted midpoint fault on every line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSignatureMap {
    pub der_order: Vec<String>,
    pub entries: Vec<Signature>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationPlan {
    pub location: String,
    /// Breakers to open, sorted by id.
    pub breakers: Vec<String>,
    /// DER inside the isolated region.
    pub ders_to_disconnect: Vec<String>,
    /// Lines de-energized by the plan.
    pub region: Vec<String>,
    /// The external source sits inside the region and must be disconnected
    /// upstream.
    pub includes_source: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocatedFault {
    pub location: String,
    pub distance: f64,
    /// Distance to the second-best signature minus `distance`.
    pub margin: f64,
    pub plan: IsolationPlan,
}

/// Signature vector of a solved fault.
pub fn contribution_vector(net: &RadialNetwork, fault: &FaultScenario) -> Result<Vec<f64>> {
    let sol = solve_with_open(net, fault, &BTreeSet::new())?;
    Ok(sol.contributions.ders.values().copied().collect())
}

pub fn build_signature_map(net: &RadialNetwork) -> Result<FaultSignatureMap> {
    let mut der_order: Vec<String> = net.ders.iter().map(|d| d.id.clone()).collect();
    der_order.sort();
    let mut entries = Vec::with_capacity(net.lines.len());
    for l in &net.lines {
        let vector = contribution_vector(net, &FaultScenario::bolted_line(&l.id))?;
        let plan = isolation_plan(net, &l.id, &BTreeSet::new())?;
        entries.push(Signature {
            location: l.id.clone(),
            vector,
            plan,
        });
    }
    Ok(FaultSignatureMap { der_order, entries })
}

/// Region around a faulted line bounded by working breakers.
///
/// The search starts inside the faulted line and spreads over every line
/// without a working breaker. A working breaker on any line it reaches ends
/// the search there and joins the plan. Breakers in `failed` count as
/// missing.
pub fn isolation_plan(net: &RadialNetwork, location: &str, failed: &BTreeSet<String>) -> Result<IsolationPlan> {
    let faulted = net
        .line(location)
        .ok_or_else(|| Error::invalid("location", format!("unknown line `{location}`")))?;
    let working = |line: &str| net.breaker_on(line).filter(|b| !failed.contains(&b.id)).map(|b| b.id.clone());
    let adj = net.adjacency();

    let mut breakers = BTreeSet::new();
    let mut region = BTreeSet::from([faulted.id.clone()]);
    let mut buses = BTreeSet::new();
    let mut queue = VecDeque::new();
    let to = net.bus_index(&faulted.to).expect("validated");
    let from = net.bus_index(&faulted.from).expect("validated");
    buses.insert(to);
    queue.push_back(to);
    match working(&faulted.id) {
        Some(b) => {
            breakers.insert(b);
        }
        None => {
            buses.insert(from);
            queue.push_back(from);
        }
    }
    while let Some(n) = queue.pop_front() {
        for &(m, li) in &adj[n] {
            let line = &net.lines[li].id;
            if region.contains(line) {
                continue;
            }
            if let Some(b) = working(line) {
                breakers.insert(b);
                continue;
            }
            region.insert(line.clone());
            if buses.insert(m) {
                queue.push_back(m);
            }
        }
    }
    let names: BTreeSet<&str> = buses.iter().map(|&i| net.buses[i].as_str()).collect();
    let mut ders: Vec<String> = net
        .ders
        .iter()
        .filter(|d| names.contains(d.bus.as_str()))
        .map(|d| d.id.clone())
        .collect();
    ders.sort();
    Ok(IsolationPlan {
        location: location.to_string(),
        breakers: breakers.into_iter().collect(),
        ders_to_disconnect: ders,
        region: region.into_iter().collect(),
        includes_source: names.contains(net.source.bus.as_str()),
    })
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Nearest-signature lookup with a uniqueness margin.
pub fn centralized_locate_fault(
    measured: &[f64],
    map: &FaultSignatureMap,
    tolerance: f64,
) -> Result<LocatedFault> {
    if measured.len() != map.der_order.len() {
        return Err(Error::invalid(
            "measured",
            format!("expected {} contributions, got {}", map.der_order.len(), measured.len()),
        ));
    }
    if !(tolerance > 0.0) {
        return Err(Error::invalid("tolerance", "must be > 0"));
    }
    let mut ranked: Vec<(f64, &Signature)> =
        map.entries.iter().map(|s| (distance(measured, &s.vector), s)).collect();
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.location.cmp(&b.1.location)));
    let norm = measured.iter().map(|x| x * x).sum::<f64>().sqrt();
    let Some(&(d1, best)) = ranked.first() else {
        return Err(Error::NoFaultDetected { nearest: f64::INFINITY });
    };
    if norm <= tolerance || d1 > tolerance {
        return Err(Error::NoFaultDetected { nearest: d1 });
    }
    let margin = ranked.get(1).map_or(f64::INFINITY, |x| x.0 - d1);
    if margin < tolerance {
        let (d2, second) = ranked[1];
        return Err(Error::AmbiguousLocation {
            first: best.location.clone(),
            second: second.location.clone(),
            separation: d2 - d1,
        });
    }
    Ok(LocatedFault {
        location: best.location.clone(),
        distance: d1,
        margin,
        plan: best.plan.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClearingStep {
    pub plan: IsolationPlan,
    /// Commanded breakers that stayed closed.
    pub failed: Vec<String>,
    /// Fault current after this step.
    pub i_fault: f64,
    pub cleared: bool,
}

/// Executes `plan` against the real fault, treating breakers in `stuck` as
/// unable to open. Each time the fault persists, breakers that failed are
/// written off and the region is widened.
pub fn clear_fault(
    net: &RadialNetwork,
    fault: &FaultScenario,
    plan: IsolationPlan,
    stuck: &BTreeSet<String>,
) -> Result<Vec<ClearingStep>> {
    let mut failed = BTreeSet::new();
    let mut plan = plan;
    let mut steps = Vec::new();
    loop {
        let open: BTreeSet<String> = plan.breakers.iter().filter(|b| !stuck.contains(*b)).cloned().collect();
        let mut trial = net.clone();
        for d in &mut trial.ders {
            if plan.ders_to_disconnect.contains(&d.id) {
                d.injecting = false;
            }
        }
        let sol = solve_with_open(&trial, fault, &open)?;
        let newly: Vec<String> = plan.breakers.iter().filter(|b| stuck.contains(*b)).cloned().collect();
        let cleared = sol.i_fault.abs() <= 1e-9;
        steps.push(ClearingStep {
            plan: plan.clone(),
            failed: newly.clone(),
            i_fault: sol.i_fault,
            cleared,
        });
        if cleared || newly.iter().all(|b| failed.contains(b)) {
            return Ok(steps);
        }
        failed.extend(newly);
        plan = isolation_plan(net, &plan.location, &failed)?;
    }
}
