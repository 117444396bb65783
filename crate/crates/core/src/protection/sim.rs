use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::network::{settings_violations, FaultScenario, RadialNetwork};
use super::solver::{label_components, solve_with_open, FaultSolution, Graph};
use crate::error::Result;

/// Slack when comparing relay expiry times.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripEvent {
    pub breaker: String,
    pub time: f64,
    /// Current the relay measured when it picked up.
    pub current: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueKind {
    Blinding,
    SympatheticTrip,
    EnergizedAfterTrip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub elements: Vec<String>,
    pub explanation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectionReport {
    pub trips: Vec<TripEvent>,
    pub issues: Vec<Issue>,
    pub open_breakers: Vec<String>,
    /// Fault current once no relay is picked up any more.
    pub final_i_fault: f64,
}

impl ProtectionReport {
    pub fn tripped(&self, breaker: &str) -> bool {
        self.trips.iter().any(|t| t.breaker == breaker)
    }

    pub fn has(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }
}

/// Runs definite-time relays to a fixpoint and then looks for
/// misoperations.
///
/// A relay picks up while its line current exceeds its setting and trips
/// once it has stayed picked up for its delay. Relays that drop out reset.
/// All relays whose delay expires at the same instant trip together, after
/// which the network is solved again.
pub fn simulate_protection(
    net: &RadialNetwork,
    fault: &FaultScenario,
    settings: &BTreeMap<String, f64>,
) -> Result<ProtectionReport> {
    settings_violations(net, settings, "settings.").into_result()?;

    let mut open = BTreeSet::new();
    let mut trips = Vec::new();
    let mut picked: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut t = 0.0;
    let solution = loop {
        let sol = solve_with_open(net, fault, &open)?;
        for b in &net.breakers {
            if open.contains(&b.id) {
                continue;
            }
            let i = sol.branch_currents[&b.line];
            if i > settings[&b.id] {
                picked.entry(b.id.clone()).or_insert((t, i));
            } else {
                picked.remove(&b.id);
            }
        }
        let expiry = |id: &str, start: f64| start + net.breaker(id).expect("known").delay;
        let Some(next) = picked
            .iter()
            .map(|(id, (start, _))| expiry(id, *start))
            .min_by(f64::total_cmp)
        else {
            break sol;
        };
        let due: Vec<String> = picked
            .iter()
            .filter(|(id, (start, _))| expiry(id, *start) <= next + TIME_EPS)
            .map(|(id, _)| id.clone())
            .collect();
        t = next;
        for id in due {
            let (_, current) = picked.remove(&id).expect("picked");
            trips.push(TripEvent { breaker: id.clone(), time: t, current });
            open.insert(id);
        }
    };

    let mut issues = detect_blinding(net, fault, &open, settings, &solution)?;
    issues.extend(detect_sympathetic(net, fault, &trips));
    issues.extend(detect_energized(net, fault, &open));
    Ok(ProtectionReport {
        trips,
        issues,
        open_breakers: open.into_iter().collect(),
        final_i_fault: solution.i_fault,
    })
}

/// Edges on the path between two nodes, over closed edges or all edges.
fn path_edges(graph: &Graph, from: usize, to: usize, all: bool) -> Option<Vec<usize>> {
    let adj = graph.adjacency(all);
    let mut prev = vec![None; graph.nodes];
    let mut seen = vec![false; graph.nodes];
    seen[from] = true;
    let mut q = VecDeque::from([from]);
    while let Some(n) = q.pop_front() {
        for &(m, ei) in &adj[n] {
            if !seen[m] {
                seen[m] = true;
                prev[m] = Some((n, ei));
                q.push_back(m);
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut out = Vec::new();
    let mut n = to;
    while let Some((p, ei)) = prev[n] {
        out.push(ei);
        n = p;
    }
    Some(out)
}

/// Breakers whose interrupting segment lies on `edges`.
fn breakers_on(net: &RadialNetwork, graph: &Graph, edges: &[usize]) -> BTreeSet<String> {
    edges
        .iter()
        .filter(|&&ei| graph.edges[ei].breaker_end)
        .filter_map(|&ei| net.breaker_on(&net.lines[graph.edges[ei].line].id))
        .map(|b| b.id.clone())
        .collect()
}

/// Closed breakers on the live source-to-fault path that would trip without
/// DER in-feed but do not trip with it.
pub fn detect_blinding(
    net: &RadialNetwork,
    fault: &FaultScenario,
    open: &BTreeSet<String>,
    settings: &BTreeMap<String, f64>,
    solution: &FaultSolution,
) -> Result<Vec<Issue>> {
    let graph = Graph::build(net, fault, open);
    let (Some(f), true) = (graph.fault, net.source.available) else {
        return Ok(Vec::new());
    };
    let src = net.bus_index(&net.source.bus).expect("validated");
    let Some(path) = path_edges(&graph, src, f, false) else {
        return Ok(Vec::new());
    };
    let candidates = breakers_on(net, &graph, &path);
    if candidates.is_empty() {
        return Ok(Vec::new());
    }
    let bare = solve_with_open(&net.without_der(), fault, open)?;
    let mut out = Vec::new();
    for id in candidates.into_iter().filter(|id| !open.contains(id)) {
        let b = net.breaker(&id).expect("known");
        let (with, without, limit) = (
            solution.branch_currents[&b.line],
            bare.branch_currents[&b.line],
            settings[&id],
        );
        if with <= limit && without > limit {
            out.push(Issue {
                kind: IssueKind::Blinding,
                elements: vec![id.clone()],
                explanation: format!(
                    "breaker {id} sees {with:.6} pu with DER in-feed, below its {limit} pu setting; \
                     without DER it would see {without:.6} pu and trip"
                ),
            });
        }
    }
    Ok(out)
}

/// Tripped breakers that are not on the source-to-fault path.
pub fn detect_sympathetic(net: &RadialNetwork, fault: &FaultScenario, trips: &[TripEvent]) -> Vec<Issue> {
    let graph = Graph::build(net, fault, &BTreeSet::new());
    let Some(f) = graph.fault else {
        return Vec::new();
    };
    let src = net.bus_index(&net.source.bus).expect("validated");
    let on_path = path_edges(&graph, src, f, true)
        .map(|p| breakers_on(net, &graph, &p))
        .unwrap_or_default();
    trips
        .iter()
        .filter(|t| !on_path.contains(&t.breaker))
        .map(|t| Issue {
            kind: IssueKind::SympatheticTrip,
            elements: vec![t.breaker.clone()],
            explanation: format!(
                "breaker {} tripped at {:.3} s on {:.6} pu although it is outside the faulted path",
                t.breaker, t.time, t.current
            ),
        })
        .collect()
}

/// Segments cut off from the source by open breakers that still hold an
/// injecting DER.
pub fn detect_energized(net: &RadialNetwork, fault: &FaultScenario, open: &BTreeSet<String>) -> Vec<Issue> {
    if open.is_empty() {
        return Vec::new();
    }
    let graph = Graph::build(net, fault, open);
    let now = graph.components();
    let before = label_components(&graph.adjacency(true), graph.nodes);
    let src = net.bus_index(&net.source.bus).expect("validated");
    let n_comp = now.iter().copied().max().map_or(0, |m| m + 1);
    let mut out = Vec::new();
    for c in 0..n_comp {
        let members: Vec<usize> = (0..graph.nodes).filter(|&n| now[n] == c).collect();
        if net.source.available && now[src] == c {
            continue;
        }
        let base = before[members[0]];
        let split = (0..graph.nodes).any(|n| before[n] == base && now[n] != c);
        if !split {
            continue;
        }
        let ders: Vec<String> = net
            .ders
            .iter()
            .filter(|d| d.injecting && d.i_der > 0.0)
            .filter(|d| now[net.bus_index(&d.bus).expect("validated")] == c)
            .map(|d| d.id.clone())
            .collect();
        if ders.is_empty() {
            continue;
        }
        let buses: Vec<String> = members
            .iter()
            .filter(|&&n| n < net.buses.len())
            .map(|&n| net.buses[n].clone())
            .collect();
        let mut elements = buses.clone();
        elements.extend(ders.iter().cloned());
        out.push(Issue {
            kind: IssueKind::EnergizedAfterTrip,
            elements,
            explanation: format!(
                "buses {} are disconnected from the grid but DER {} keep injecting",
                buses.join(", "),
                ders.join(", ")
            ),
        });
    }
    out
}
