use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Validate, Violations};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum DerCapability {
    /// Sets voltage and frequency on its own.
    GridForming,
    /// Regulates voltage and frequency once a grid exists.
    GridSupporting,
    /// Injects current without regulating anything.
    GridFeeding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    pub x_km: f64,
    pub y_km: f64,
    pub area: String,
}

/// Switch-delimited grid area with the bus hosting its agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub id: String,
    pub control_bus: String,
}

/// Divisible load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadSpec {
    pub id: String,
    pub bus: String,
    pub demand_mw: f64,
    #[serde(default)]
    pub critical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerSpec {
    pub id: String,
    pub bus: String,
    pub capability: DerCapability,
    pub capacity_mw: f64,
    /// Power drawn from the grid while the unit starts up.
    #[serde(default)]
    pub aux_load_mw: f64,
}

/// Normally open switch joining two areas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Switch {
    pub id: String,
    pub a: String,
    pub b: String,
}

/// Communication station. A station on a bus is supplied whenever the bus
/// is; a free-standing relay at `position_km` runs on its battery only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommNode {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position_km: Option<[f64; 2]>,
    #[serde(default)]
    pub has_battery: bool,
    #[serde(default)]
    pub battery_kwh: f64,
    #[serde(default)]
    pub drain_kw: f64,
    pub cell_radius_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncPolicy {
    /// Phase difference that must not be reached when closing (rad).
    #[serde(default = "default_phase")]
    pub max_phase_shift: f64,
    #[serde(default = "default_freq")]
    pub max_frequency_difference: f64,
    /// Wait between failed closing attempts (s).
    #[serde(default = "default_alignment")]
    pub alignment_delay_s: f64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
}

fn default_phase() -> f64 {
    0.2
}

fn default_freq() -> f64 {
    0.1
}

fn default_alignment() -> f64 {
    2.0
}

fn default_attempts() -> u32 {
    5
}

impl Default for SyncPolicy {
    fn default() -> Self {
        Self {
            max_phase_shift: default_phase(),
            max_frequency_difference: default_freq(),
            alignment_delay_s: default_alignment(),
            max_attempts: default_attempts(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Duration of one switching action (s).
    #[serde(default = "default_switching")]
    pub switching_s: f64,
}

fn default_switching() -> f64 {
    60.0
}

impl Default for Timing {
    fn default() -> Self {
        Self {
            switching_s: default_switching(),
        }
    }
}

fn default_f_n() -> f64 {
    50.0
}

/// Grid state right after a total collapse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorationScenario {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    #[serde(default = "default_f_n")]
    pub f_n: f64,
    pub buses: Vec<Bus>,
    pub areas: Vec<Area>,
    #[serde(default)]
    pub loads: Vec<LoadSpec>,
    #[serde(default)]
    pub ders: Vec<DerSpec>,
    #[serde(default)]
    pub switches: Vec<Switch>,
    #[serde(default)]
    pub comm: Vec<CommNode>,
    #[serde(default)]
    pub sync_policy: SyncPolicy,
    #[serde(default)]
    pub timing: Timing,
}

impl RestorationScenario {
    pub fn bus(&self, id: &str) -> Option<&Bus> {
        self.buses.iter().find(|b| b.id == id)
    }

    pub fn area_index(&self, id: &str) -> Option<usize> {
        self.areas.iter().position(|a| a.id == id)
    }

    pub fn area_of_bus(&self, bus: &str) -> Option<&str> {
        self.bus(bus).map(|b| b.area.as_str())
    }

    pub fn total_load(&self) -> f64 {
        self.loads.iter().map(|l| l.demand_mw).sum()
    }

    pub fn total_critical(&self) -> f64 {
        self.loads.iter().filter(|l| l.critical).map(|l| l.demand_mw).sum()
    }

    pub fn distance_km(&self, a: &str, b: &str) -> Option<f64> {
        let (a, b) = (self.bus(a)?, self.bus(b)?);
        Some((a.x_km - b.x_km).hypot(a.y_km - b.y_km))
    }

    /// Location of a station: its bus, or its own position for relays.
    pub fn station_position(&self, station: &CommNode) -> Option<(f64, f64)> {
        match (&station.bus, station.position_km) {
            (Some(bus), _) => self.bus(bus).map(|b| (b.x_km, b.y_km)),
            (None, Some([x, y])) => Some((x, y)),
            (None, None) => None,
        }
    }

    /// Copy with every comm cell set to `radius_km`.
    pub fn with_radius(&self, radius_km: f64) -> Self {
        let mut s = self.clone();
        for c in &mut s.comm {
            c.cell_radius_km = radius_km;
        }
        s
    }
}

impl Validate for RestorationScenario {
    fn violations(&self) -> Violations {
        let mut v = Violations::new();
        crate::check_schema_version(&mut v, self.schema_version);
        v.check(self.f_n > 0.0 && self.f_n.is_finite(), "f_n", "must be finite and > 0");

        let areas: BTreeSet<&str> = self.areas.iter().map(|a| a.id.as_str()).collect();
        v.check(areas.len() == self.areas.len(), "areas", "area ids must be unique");
        let mut buses: BTreeMap<&str, &str> = BTreeMap::new();
        for (i, b) in self.buses.iter().enumerate() {
            let f = |n: &str| format!("buses[{i}].{n}");
            v.check(buses.insert(&b.id, &b.area).is_none(), f("id"), format!("duplicate bus `{}`", b.id));
            v.check(b.x_km.is_finite() && b.y_km.is_finite(), f("x_km"), "position must be finite");
            v.check(areas.contains(b.area.as_str()), f("area"), format!("unknown area `{}`", b.area));
        }
        for (i, a) in self.areas.iter().enumerate() {
            v.check(
                buses.get(a.control_bus.as_str()) == Some(&a.id.as_str()),
                format!("areas[{i}].control_bus"),
                format!("bus `{}` must exist and belong to area `{}`", a.control_bus, a.id),
            );
        }
        let mut ids = BTreeSet::new();
        for (i, l) in self.loads.iter().enumerate() {
            let f = |n: &str| format!("loads[{i}].{n}");
            v.check(ids.insert(format!("load:{}", l.id)), f("id"), format!("duplicate load `{}`", l.id));
            v.check(buses.contains_key(l.bus.as_str()), f("bus"), format!("unknown bus `{}`", l.bus));
            v.check(l.demand_mw >= 0.0 && l.demand_mw.is_finite(), f("demand_mw"), "must be finite and >= 0");
        }
        for (i, d) in self.ders.iter().enumerate() {
            let f = |n: &str| format!("ders[{i}].{n}");
            v.check(ids.insert(format!("der:{}", d.id)), f("id"), format!("duplicate DER `{}`", d.id));
            v.check(buses.contains_key(d.bus.as_str()), f("bus"), format!("unknown bus `{}`", d.bus));
            v.check(d.capacity_mw >= 0.0 && d.capacity_mw.is_finite(), f("capacity_mw"), "must be finite and >= 0");
            v.check(d.aux_load_mw >= 0.0 && d.aux_load_mw.is_finite(), f("aux_load_mw"), "must be finite and >= 0");
        }
        for (i, s) in self.switches.iter().enumerate() {
            let f = |n: &str| format!("switches[{i}].{n}");
            v.check(ids.insert(format!("switch:{}", s.id)), f("id"), format!("duplicate switch `{}`", s.id));
            v.check(areas.contains(s.a.as_str()), f("a"), format!("unknown area `{}`", s.a));
            v.check(areas.contains(s.b.as_str()), f("b"), format!("unknown area `{}`", s.b));
            v.check(s.a != s.b, f("b"), "a switch must join two different areas");
        }
        let mut comm_ids = BTreeSet::new();
        let mut comm_buses = BTreeSet::new();
        for (i, c) in self.comm.iter().enumerate() {
            let f = |n: &str| format!("comm[{i}].{n}");
            v.check(comm_ids.insert(c.id.as_str()), f("id"), format!("duplicate comm node `{}`", c.id));
            match (&c.bus, c.position_km) {
                (Some(bus), None) => {
                    v.check(buses.contains_key(bus.as_str()), f("bus"), format!("unknown bus `{bus}`"));
                    v.check(comm_buses.insert(bus.as_str()), f("bus"), "one comm node per bus");
                }
                (None, Some([x, y])) => v.check(x.is_finite() && y.is_finite(), f("position_km"), "must be finite"),
                _ => v.push(f("bus"), "exactly one of `bus` and `position_km` must be given"),
            }
            v.check(c.cell_radius_km > 0.0 && c.cell_radius_km.is_finite(), f("cell_radius_km"), "must be finite and > 0");
            v.check(c.battery_kwh >= 0.0 && c.battery_kwh.is_finite(), f("battery_kwh"), "must be finite and >= 0");
            v.check(c.drain_kw >= 0.0 && c.drain_kw.is_finite(), f("drain_kw"), "must be finite and >= 0");
        }
        let p = &self.sync_policy;
        v.check(
            p.max_phase_shift > 0.0 && p.max_phase_shift <= std::f64::consts::PI,
            "sync_policy.max_phase_shift",
            "must lie in (0, pi]",
        );
        v.check(p.max_frequency_difference >= 0.0, "sync_policy.max_frequency_difference", "must be >= 0");
        v.check(p.alignment_delay_s >= 0.0 && p.alignment_delay_s.is_finite(), "sync_policy.alignment_delay_s", "must be finite and >= 0");
        v.check(p.max_attempts >= 1, "sync_policy.max_attempts", "must be >= 1");
        v.check(
            self.timing.switching_s > 0.0 && self.timing.switching_s.is_finite(),
            "timing.switching_s",
            "must be finite and > 0",
        );
        v
    }
}
