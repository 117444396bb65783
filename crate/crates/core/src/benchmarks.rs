//! Bundled benchmark scenarios.
//!
//! The fixture files under `fixtures/` are these builders serialized; a test
//! keeps the two in sync.

use crate::blackstart::{
    Area, Bus, CommNode, DerCapability, DerSpec, LoadSpec, RestorationScenario, Switch, SyncPolicy, Timing,
};
use crate::coordination::{
    CoordinationScenario, DerUnit, DroopRequest, FrequencyGrid, InertiaTarget, ReserveCheck, ReserveShare,
};
use crate::frequency::{
    DisturbanceEvent, DroopCurve, DroopUnit, FcrProduct, FrequencyScenario, SecondaryReserve,
    SystemParameters,
};
use crate::protection::{Breaker, DerSource, FaultScenario, Line, Load, ProtectionCase, RadialNetwork, Source};

/// 1000 MVA system losing 10% of its generation one second in, with FCR,
/// secondary reserve and a 200 MW DER droop fleet.
pub fn frequency_benchmark(h_sys: f64) -> FrequencyScenario {
    FrequencyScenario {
        schema_version: crate::SCHEMA_VERSION,
        system: SystemParameters::new(1000.0, h_sys),
        event: DisturbanceEvent {
            t_event: 1.0,
            delta_p: -0.1,
        },
        fcr: FcrProduct::new(100.0),
        secondary: SecondaryReserve::new(100.0),
        droop_fleet: vec![DroopUnit {
            curve: DroopCurve::new(50.0, 0.02, 0.5, (1.0, 49.5), (0.0, 50.5)),
            rating_mw: 200.0,
        }],
        horizon: 600.0,
        dt: crate::frequency::DEFAULT_DT,
    }
}

fn line(id: &str, from: &str, to: &str, impedance: f64) -> Line {
    Line {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        impedance,
    }
}

fn breaker(id: &str, line: &str, i_trip: f64, delay: f64) -> Breaker {
    Breaker {
        id: id.into(),
        line: line.into(),
        i_trip,
        delay,
    }
}

fn der(id: &str, bus: &str, i_der: f64) -> DerSource {
    DerSource {
        id: id.into(),
        bus: bus.into(),
        i_der,
        injecting: true,
    }
}

/// Two feeders behind a common busbar. Breaker C protects the supply line,
/// A and B the heads of the left and right feeders.
///
/// ```text
/// grid --C-- bb --A-- a1 ---- a2
///             \
///              --B-- b1 ---- b2
/// ```
pub fn two_feeder() -> RadialNetwork {
    RadialNetwork {
        schema_version: crate::SCHEMA_VERSION,
        buses: ["grid", "bb", "a1", "a2", "b1", "b2"].map(String::from).to_vec(),
        lines: vec![
            line("lc", "grid", "bb", 0.05),
            line("la1", "bb", "a1", 0.1),
            line("la2", "a1", "a2", 0.3),
            line("lb1", "bb", "b1", 0.1),
            line("lb2", "b1", "b2", 0.3),
        ],
        source: Source {
            bus: "grid".into(),
            voltage: 1.0,
            impedance: 0.05,
            available: true,
        },
        ders: vec![],
        breakers: vec![
            breaker("C", "lc", 4.0, 0.5),
            breaker("A", "la1", 1.5, 0.1),
            breaker("B", "lb1", 1.5, 0.1),
        ],
        loads: vec![
            Load { bus: "a1".into(), current: 0.1 },
            Load { bus: "b2".into(), current: 0.1 },
        ],
    }
}

/// Bolted fault at the end of the left feeder.
pub fn two_feeder_fault() -> FaultScenario {
    FaultScenario::bolted_bus("a2")
}

/// Left-feeder DER large enough to pull the grid current through A below
/// its setting.
pub fn two_feeder_blinding() -> RadialNetwork {
    let mut n = two_feeder();
    n.ders.push(der("DER_A", "a1", 1.5));
    n
}

/// Grid unavailable; a right-feeder DER supplies the fault through both
/// feeder breakers.
pub fn two_feeder_sympathetic() -> RadialNetwork {
    let mut n = two_feeder();
    n.source.available = false;
    n.ders.push(der("DER_B", "b1", 2.0));
    n
}

/// Small left-feeder DER that keeps injecting after A clears the fault.
pub fn two_feeder_energized() -> RadialNetwork {
    let mut n = two_feeder();
    n.ders.push(der("DER_A", "a1", 0.5));
    n
}

/// The four two-feeder protection cases, by name: plain fault, blinding,
/// sympathetic trip and energized-after-trip.
pub fn two_feeder_cases() -> Vec<(&'static str, ProtectionCase)> {
    vec![
        ("two_feeder_fault", ProtectionCase::new(two_feeder(), two_feeder_fault())),
        ("two_feeder_blinding", ProtectionCase::new(two_feeder_blinding(), two_feeder_fault())),
        ("two_feeder_sympathetic", ProtectionCase::new(two_feeder_sympathetic(), two_feeder_fault())),
        ("two_feeder_energized", ProtectionCase::new(two_feeder_energized(), two_feeder_fault())),
    ]
}

/// Two-feeder grid with a breaker on every feeder section and a DER at
/// each feeder end, as used by the centralized scheme.
pub fn two_feeder_sectionalized() -> RadialNetwork {
    let mut n = two_feeder();
    n.breakers.push(breaker("A2", "la2", 1.5, 0.1));
    n.breakers.push(breaker("B2", "lb2", 1.5, 0.1));
    n.ders.push(der("DER_A", "a2", 0.8));
    n.ders.push(der("DER_B", "b2", 0.6));
    n
}

const LATTICE_SPACING_KM: f64 = 1.5;
/// Lattice steps between the first columns (rows) of neighbouring villages.
const VILLAGE_STRIDE: u8 = 6;
const VILLAGES: u8 = 3;

fn village_id(col: u8, row: u8) -> String {
    let forming = matches!((col, row), (0, 0) | (2, 0) | (1, 2));
    format!("{}{}{}", if forming { 'F' } else { 'U' }, col, row)
}

/// Three by three villages of four buses each, 9 km apart, on a 1.5 km
/// lattice whose remaining points hold free-standing relay towers. Three
/// villages have a grid-forming unit, the others a grid-supporting unit
/// sized to their load and a small PV plant. Neighbouring villages are
/// joined by a tie switch. Every station has battery backup, which Monte
/// Carlo studies redraw at random; the control bus
/// of each village is the 2x2 corner facing the next village on the right
/// and above.
pub fn restoration_benchmark() -> RestorationScenario {
    let side = VILLAGES * VILLAGE_STRIDE - (VILLAGE_STRIDE - 2);
    let mut buses = Vec::new();
    let mut areas = Vec::new();
    let mut loads = Vec::new();
    let mut ders = Vec::new();
    let mut comm = Vec::new();
    let station = |id: String, bus: Option<String>, position_km: Option<[f64; 2]>| CommNode {
        id,
        bus,
        position_km,
        has_battery: true,
        battery_kwh: 0.5,
        drain_kw: 0.25,
        cell_radius_km: 6.0,
    };
    for col in 0..VILLAGES {
        for row in 0..VILLAGES {
            let id = village_id(col, row);
            let (x0, y0) = (col * VILLAGE_STRIDE, row * VILLAGE_STRIDE);
            let control = lattice_bus(x0 + 1, y0 + 1);
            areas.push(Area {
                id: id.clone(),
                control_bus: control.clone(),
            });
            let mut area_load = 0.0;
            for (k, (x, y)) in [(x0, y0), (x0 + 1, y0), (x0, y0 + 1), (x0 + 1, y0 + 1)].into_iter().enumerate() {
                let bus = lattice_bus(x, y);
                buses.push(Bus {
                    id: bus.clone(),
                    x_km: f64::from(x) * LATTICE_SPACING_KM,
                    y_km: f64::from(y) * LATTICE_SPACING_KM,
                    area: id.clone(),
                });
                let demand = 0.8 + 0.1 * f64::from((x + 2 * y) % 5);
                area_load += demand;
                loads.push(LoadSpec {
                    id: format!("L_{bus}"),
                    bus: bus.clone(),
                    demand_mw: demand,
                    critical: k == 0,
                });
                comm.push(station(format!("C_{bus}"), Some(bus), None));
            }
            if id.starts_with('F') {
                ders.push(DerSpec {
                    id: format!("GF_{id}"),
                    bus: control,
                    capability: DerCapability::GridForming,
                    capacity_mw: 5.0,
                    aux_load_mw: 0.0,
                });
            } else {
                ders.push(DerSpec {
                    id: format!("GS_{id}"),
                    bus: control.clone(),
                    capability: DerCapability::GridSupporting,
                    capacity_mw: (area_load * 10.0_f64).round() / 10.0,
                    aux_load_mw: 0.2,
                });
                ders.push(DerSpec {
                    id: format!("PV_{id}"),
                    bus: control,
                    capability: DerCapability::GridFeeding,
                    capacity_mw: 0.3,
                    aux_load_mw: 0.0,
                });
            }
        }
    }
    for x in 0..side {
        for y in 0..side {
            let in_village = x % VILLAGE_STRIDE < 2 && y % VILLAGE_STRIDE < 2;
            if !in_village {
                comm.push(station(
                    format!("R_{x:02}_{y:02}"),
                    None,
                    Some([f64::from(x) * LATTICE_SPACING_KM, f64::from(y) * LATTICE_SPACING_KM]),
                ));
            }
        }
    }
    let mut switches = Vec::new();
    for col in 0..VILLAGES {
        for row in 0..VILLAGES {
            for (dc, dr) in [(1, 0), (0, 1)] {
                if col + dc < VILLAGES && row + dr < VILLAGES {
                    let (a, b) = (village_id(col, row), village_id(col + dc, row + dr));
                    switches.push(Switch {
                        id: format!("S_{a}_{b}"),
                        a,
                        b,
                    });
                }
            }
        }
    }
    RestorationScenario {
        schema_version: crate::SCHEMA_VERSION,
        f_n: 50.0,
        buses,
        areas,
        loads,
        ders,
        switches,
        comm,
        sync_policy: SyncPolicy::default(),
        timing: Timing::default(),
    }
}

fn lattice_bus(x: u8, y: u8) -> String {
    format!("n{x:02}_{y:02}")
}

/// Five-unit DSO fleet answering an inertia request, a droop request on a
/// 0.1 Hz grid, and a 25-unit reserve portfolio check.
pub fn coordination_benchmark() -> CoordinationScenario {
    let units = [("pv1", 0.3, 0.2), ("pv2", 0.25, 0.2), ("bess1", 0.2, 0.1), ("wind1", 0.15, 0.1), ("chp1", 0.1, 0.05)]
        .into_iter()
        .map(|(id, rating, avail)| DerUnit::new(id, rating, avail))
        .collect();
    CoordinationScenario {
        schema_version: crate::SCHEMA_VERSION,
        f_n: 50.0,
        p0_ss: 0.1,
        units,
        inertia: Some(InertiaTarget { rocof_max: 0.5, h_ag_tso: 5.0 }),
        droop: Some(DroopRequest {
            grid: FrequencyGrid::new(49.5, 50.5, 0.1),
            candidate: DroopCurve::new(50.0, 0.02, 0.65, (0.9, 49.6), (0.1, 50.4)),
        }),
        reserves: Some(ReserveCheck {
            total_fcr: 1.0,
            shares: (0..25).map(|i| ReserveShare::new(format!("fcr{i:02}"), 0.04)).collect(),
            reference_incident: Vec::new(),
        }),
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("benchmarks serialize");
    s.push('\n');
    s
}

/// Every bundled scenario as `(file stem, pretty JSON)`, in the layout of
/// the `fixtures/` directory.
pub fn fixtures() -> Vec<(String, String)> {
    let mut out = vec![
        ("frequency_h2".to_string(), pretty(&frequency_benchmark(2.0))),
        ("frequency_h5".to_string(), pretty(&frequency_benchmark(5.0))),
        ("coordination".to_string(), pretty(&coordination_benchmark())),
    ];
    for (name, case) in two_feeder_cases() {
        out.push((name.to_string(), pretty(&case)));
    }
    out.push((
        "two_feeder_sectionalized".to_string(),
        pretty(&ProtectionCase::new(two_feeder_sectionalized(), FaultScenario::bolted_line("la2"))),
    ));
    out.push(("restoration".to_string(), pretty(&restoration_benchmark())));
    out
}
