use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Validate, Violations};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Resistive magnitude (pu).
    pub impedance: f64,
}

/// Upstream grid as an ideal voltage behind an impedance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub bus: String,
    #[serde(default = "one")]
    pub voltage: f64,
    pub impedance: f64,
    #[serde(default = "yes")]
    pub available: bool,
}

/// DER modelled as an ideal current source at its fault-injection cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerSource {
    pub id: String,
    pub bus: String,
    pub i_der: f64,
    #[serde(default = "yes")]
    pub injecting: bool,
}

/// Definite-time overcurrent breaker sitting at the `from` end of a line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breaker {
    pub id: String,
    pub line: String,
    pub i_trip: f64,
    #[serde(default)]
    pub delay: f64,
}

/// Constant-current load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: String,
    pub current: f64,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

/// Radial feeder network with DER current sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialNetwork {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    pub buses: Vec<String>,
    pub lines: Vec<Line>,
    pub source: Source,
    #[serde(default)]
    pub ders: Vec<DerSource>,
    #[serde(default)]
    pub breakers: Vec<Breaker>,
    #[serde(default)]
    pub loads: Vec<Load>,
}

/// Where a fault sits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultElement {
    Bus(String),
    Line {
        id: String,
        /// Fraction of the line impedance between `from` and the fault.
        #[serde(default = "half")]
        position: f64,
    },
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultScenario {
    pub element: FaultElement,
    /// Fault impedance (pu); 0 is a bolted fault, infinity means no fault.
    #[serde(default)]
    pub impedance: f64,
}

impl FaultScenario {
    pub fn bolted_bus(bus: impl Into<String>) -> Self {
        Self {
            element: FaultElement::Bus(bus.into()),
            impedance: 0.0,
        }
    }

    pub fn bolted_line(id: impl Into<String>) -> Self {
        Self {
            element: FaultElement::Line {
                id: id.into(),
                position: 0.5,
            },
            impedance: 0.0,
        }
    }

    /// A network with no fault applied.
    pub fn healthy(bus: impl Into<String>) -> Self {
        Self {
            element: FaultElement::Bus(bus.into()),
            impedance: f64::INFINITY,
        }
    }

    pub fn is_healthy(&self) -> bool {
        self.impedance == f64::INFINITY
    }

    pub fn label(&self) -> String {
        match &self.element {
            FaultElement::Bus(b) => b.clone(),
            FaultElement::Line { id, .. } => id.clone(),
        }
    }

    pub(crate) fn violations_for(&self, net: &RadialNetwork) -> Violations {
        let mut v = Violations::new();
        match &self.element {
            FaultElement::Bus(b) => {
                v.check(net.bus_index(b).is_some(), "fault.element.bus", format!("unknown bus `{b}`"));
            }
            FaultElement::Line { id, position } => {
                v.check(net.line(id).is_some(), "fault.element.line.id", format!("unknown line `{id}`"));
                v.check(
                    *position > 0.0 && *position < 1.0,
                    "fault.element.line.position",
                    "must lie strictly between 0 and 1",
                );
            }
        }
        v.check(
            self.impedance >= 0.0,
            "fault.impedance",
            "must be >= 0 (0 is bolted, infinity is no fault)",
        );
        v
    }
}

impl RadialNetwork {
    pub fn bus_index(&self, bus: &str) -> Option<usize> {
        self.buses.iter().position(|b| b == bus)
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    pub fn breaker(&self, id: &str) -> Option<&Breaker> {
        self.breakers.iter().find(|b| b.id == id)
    }

    pub fn breaker_on(&self, line: &str) -> Option<&Breaker> {
        self.breakers.iter().find(|b| b.line == line)
    }

    /// Settings as shipped with the network.
    pub fn default_settings(&self) -> BTreeMap<String, f64> {
        self.breakers.iter().map(|b| (b.id.clone(), b.i_trip)).collect()
    }

    /// Copy with every DER injection switched off.
    pub fn without_der(&self) -> Self {
        let mut n = self.clone();
        for d in &mut n.ders {
            d.injecting = false;
        }
        n
    }

    /// Lines on the path from the source bus to `bus`, ignoring breaker
    /// states. `None` when the bus is not connected to the source.
    pub fn path_from_source(&self, bus: &str) -> Option<Vec<String>> {
        let target = self.bus_index(bus)?;
        let start = self.bus_index(&self.source.bus)?;
        let adj = self.adjacency();
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.buses.len()];
        let mut seen = vec![false; self.buses.len()];
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(n) = queue.pop_front() {
            for &(m, li) in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    prev[m] = Some((n, li));
                    queue.push_back(m);
                }
            }
        }
        if !seen[target] {
            return None;
        }
        let mut out = Vec::new();
        let mut n = target;
        while let Some((p, li)) = prev[n] {
            out.push(self.lines[li].id.clone());
            n = p;
        }
        out.reverse();
        Some(out)
    }

    /// Per bus, the (neighbour, line index) pairs.
    pub(crate) fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.buses.len()];
        for (li, l) in self.lines.iter().enumerate() {
            if let (Some(a), Some(b)) = (self.bus_index(&l.from), self.bus_index(&l.to)) {
                adj[a].push((b, li));
                adj[b].push((a, li));
            }
        }
        adj
    }
}

impl Validate for RadialNetwork {
    fn violations(&self) -> Violations {
        let mut v = Violations::new();
        crate::check_schema_version(&mut v, self.schema_version);
        let mut buses = BTreeSet::new();
        for (i, b) in self.buses.iter().enumerate() {
            v.check(buses.insert(b.as_str()), format!("buses[{i}]"), format!("duplicate bus `{b}`"));
        }
        let known = |b: &str| buses.contains(b);

        // Union-find over buses to detect cycles.
        let mut parent: Vec<usize> = (0..self.buses.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut line_ids = BTreeSet::new();
        for (i, l) in self.lines.iter().enumerate() {
            let f = |n: &str| format!("lines[{i}].{n}");
            v.check(line_ids.insert(l.id.as_str()), f("id"), format!("duplicate line `{}`", l.id));
            v.check(known(&l.from), f("from"), format!("unknown bus `{}`", l.from));
            v.check(known(&l.to), f("to"), format!("unknown bus `{}`", l.to));
            v.check(
                l.impedance > 0.0 && l.impedance.is_finite(),
                f("impedance"),
                "must be finite and > 0",
            );
            if let (Some(a), Some(b)) = (self.bus_index(&l.from), self.bus_index(&l.to)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    v.push(
                        f("to"),
                        format!("line `{}` closes a cycle; the network must be radial", l.id),
                    );
                } else {
                    parent[ra] = rb;
                }
            }
        }

        v.check(known(&self.source.bus), "source.bus", format!("unknown bus `{}`", self.source.bus));
        v.check(
            self.source.impedance > 0.0 && self.source.impedance.is_finite(),
            "source.impedance",
            "must be finite and > 0",
        );
        v.finite(self.source.voltage, "source.voltage");
        v.check(self.source.voltage >= 0.0, "source.voltage", "must be >= 0");

        let mut der_ids = BTreeSet::new();
        for (i, d) in self.ders.iter().enumerate() {
            let f = |n: &str| format!("ders[{i}].{n}");
            v.check(der_ids.insert(d.id.as_str()), f("id"), format!("duplicate DER `{}`", d.id));
            v.check(known(&d.bus), f("bus"), format!("unknown bus `{}`", d.bus));
            v.check(d.i_der >= 0.0 && d.i_der.is_finite(), f("i_der"), "must be finite and >= 0");
        }

        let mut breaker_ids = BTreeSet::new();
        let mut guarded = BTreeSet::new();
        for (i, b) in self.breakers.iter().enumerate() {
            let f = |n: &str| format!("breakers[{i}].{n}");
            v.check(breaker_ids.insert(b.id.as_str()), f("id"), format!("duplicate breaker `{}`", b.id));
            v.check(line_ids.contains(b.line.as_str()), f("line"), format!("unknown line `{}`", b.line));
            v.check(
                guarded.insert(b.line.as_str()),
                f("line"),
                format!("line `{}` already has a breaker", b.line),
            );
            v.check(b.i_trip > 0.0 && b.i_trip.is_finite(), f("i_trip"), "must be finite and > 0");
            v.check(b.delay >= 0.0 && b.delay.is_finite(), f("delay"), "must be finite and >= 0");
        }

        for (i, l) in self.loads.iter().enumerate() {
            v.check(known(&l.bus), format!("loads[{i}].bus"), format!("unknown bus `{}`", l.bus));
            v.check(
                l.current >= 0.0 && l.current.is_finite(),
                format!("loads[{i}].current"),
                "must be finite and >= 0",
            );
        }
        v
    }
}

/// Breaker settings file: breaker id to trip current.
pub(crate) fn settings_violations(net: &RadialNetwork, settings: &BTreeMap<String, f64>, prefix: &str) -> Violations {
    let mut v = Violations::new();
    for b in &net.breakers {
        match settings.get(&b.id) {
            None => v.push(format!("{prefix}{}", b.id), "no trip setting for breaker"),
            Some(x) => v.check(*x > 0.0 && x.is_finite(), format!("{prefix}{}", b.id), "must be finite and > 0"),
        }
    }
    for k in settings.keys() {
        v.check(net.breaker(k).is_some(), format!("{prefix}{k}"), "unknown breaker");
    }
    v
}
