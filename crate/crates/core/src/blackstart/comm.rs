use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::RestorationScenario;

/// Disk graph over the communication stations that are currently up.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommGraph {
    /// Station ids, in scenario order.
    pub stations: Vec<String>,
    pub operational: Vec<bool>,
    pub edges: Vec<(usize, usize)>,
    /// Component label per station; `None` for stations that are down.
    pub component: Vec<Option<usize>>,
}

impl CommGraph {
    fn index(&self, id: &str) -> Option<usize> {
        self.stations.iter().position(|s| s == id)
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(i), Some(j)) => self.edges.iter().any(|&e| e == (i.min(j), i.max(j))),
            _ => false,
        }
    }

    /// Whether two stations can exchange messages, possibly over relays.
    pub fn connected(&self, a: &str, b: &str) -> bool {
        match (self.index(a), self.index(b)) {
            (Some(i), Some(j)) => self.component[i].is_some() && self.component[i] == self.component[j],
            _ => false,
        }
    }

    /// Stations an area agent can reach: those up and covering its control
    /// bus with their cell.
    pub fn attachments(&self, scenario: &RestorationScenario, area: usize) -> Vec<usize> {
        let Some(control) = scenario.bus(&scenario.areas[area].control_bus) else {
            return Vec::new();
        };
        scenario
            .comm
            .iter()
            .enumerate()
            .filter(|(i, c)| {
                self.operational[*i]
                    && scenario
                        .station_position(c)
                        .is_some_and(|(x, y)| (x - control.x_km).hypot(y - control.y_km) <= c.cell_radius_km)
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Labels of the components each area agent is attached to.
    pub fn agent_reach(&self, scenario: &RestorationScenario) -> Vec<BTreeSet<usize>> {
        (0..scenario.areas.len())
            .map(|a| {
                self.attachments(scenario, a)
                    .into_iter()
                    .filter_map(|i| self.component[i])
                    .collect()
            })
            .collect()
    }

    /// Whether the agents of two areas share a reachable component.
    pub fn agents_connected(&self, scenario: &RestorationScenario, a: usize, b: usize) -> bool {
        let reach = |x: usize| -> BTreeSet<usize> {
            self.attachments(scenario, x)
                .into_iter()
                .filter_map(|i| self.component[i])
                .collect()
        };
        !reach(a).is_disjoint(&reach(b))
    }
}

/// Builds the communication graph for the current grid state.
///
/// A station is up when its bus is powered or when it has a battery with
/// charge left. Two stations that are up are linked when each lies inside
/// the other's cell. `charge_kwh` gives remaining battery energy per
/// station id; stations missing from it are taken at full charge.
pub fn comm_reachable(
    scenario: &RestorationScenario,
    powered: &BTreeSet<String>,
    charge_kwh: &BTreeMap<String, f64>,
) -> CommGraph {
    let n = scenario.comm.len();
    let operational: Vec<bool> = scenario
        .comm
        .iter()
        .map(|c| {
            c.bus.as_ref().is_some_and(|b| powered.contains(b))
                || (c.has_battery && charge_kwh.get(&c.id).copied().unwrap_or(c.battery_kwh) > 0.0)
        })
        .collect();
    let pos: Vec<Option<(f64, f64)>> = scenario.comm.iter().map(|c| scenario.station_position(c)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if !(operational[i] && operational[j]) {
                continue;
            }
            let (a, b) = (&scenario.comm[i], &scenario.comm[j]);
            let reach = a.cell_radius_km.min(b.cell_radius_km);
            if let (Some(p), Some(q)) = (pos[i], pos[j]) {
                if (p.0 - q.0).hypot(p.1 - q.1) <= reach {
                    edges.push((i, j));
                }
            }
        }
    }
    let mut adjacent = vec![Vec::new(); n];
    for &(i, j) in &edges {
        adjacent[i].push(j);
        adjacent[j].push(i);
    }
    let mut component = vec![None; n];
    let mut next = 0;
    for s in 0..n {
        if !operational[s] || component[s].is_some() {
            continue;
        }
        component[s] = Some(next);
        let mut stack = vec![s];
        while let Some(x) = stack.pop() {
            for &y in &adjacent[x] {
                if component[y].is_none() {
                    component[y] = Some(next);
                    stack.push(y);
                }
            }
        }
        next += 1;
    }
    CommGraph {
        stations: scenario.comm.iter().map(|c| c.id.clone()).collect(),
        operational,
        edges,
        component,
    }
}
