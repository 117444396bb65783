use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use gridres_core::benchmarks::restoration_benchmark;
use gridres_core::blackstart::*;
use gridres_core::Validate;
use proptest::prelude::*;
use serde_json::json;

const TOL: f64 = 1e-9;

fn two_areas(comm_radius: f64, battery_b: bool) -> RestorationScenario {
    serde_json::from_value(json!({
        "buses": [
            {"id": "a1", "x_km": 0.0, "y_km": 0.0, "area": "A"},
            {"id": "b1", "x_km": 1.5, "y_km": 0.0, "area": "B"}
        ],
        "areas": [{"id": "A", "control_bus": "a1"}, {"id": "B", "control_bus": "b1"}],
        "loads": [
            {"id": "la", "bus": "a1", "demand_mw": 0.5, "critical": true},
            {"id": "lb", "bus": "b1", "demand_mw": 0.5}
        ],
        "ders": [{"id": "gf", "bus": "a1", "capability": "GridForming", "capacity_mw": 2.0}],
        "switches": [{"id": "s_ab", "a": "A", "b": "B"}],
        "comm": [
            {"id": "ca", "bus": "a1", "cell_radius_km": comm_radius},
            {"id": "cb", "bus": "b1", "has_battery": battery_b, "battery_kwh": 1.0,
             "drain_kw": 0.1, "cell_radius_km": comm_radius}
        ]
    }))
    .unwrap()
}

fn check_invariants(sc: &RestorationScenario, tl: &RestorationTimeline) {
    let agents = sc.areas.len();
    assert!(tl.rounds <= agents * agents + 1, "{} rounds for {agents} agents", tl.rounds);
    assert_eq!(tl.events[0].stage, Stage::S2);
    for w in tl.events.windows(2) {
        assert!(w[1].t >= w[0].t);
        assert!(w[1].served_total >= w[0].served_total - TOL, "served load dropped");
        assert!(w[1].stage.rank() >= w[0].stage.rank() || w[1].stage == Stage::S4p);
    }
    for e in &tl.events {
        assert!(e.served_total <= e.generation_mw + TOL);
        assert!(e.served_critical <= e.served_total + TOL);
        assert!(e.served_total <= tl.total_load + TOL);
    }
    for m in &tl.merges {
        if m.accepted {
            assert!(m.phase_diff < sc.sync_policy.max_phase_shift);
            assert!(m.freq_diff <= sc.sync_policy.max_frequency_difference);
        }
    }
    let grid_areas: Vec<&String> = tl.microgrids.iter().flat_map(|m| &m.areas).collect();
    let unique: BTreeSet<&&String> = grid_areas.iter().collect();
    assert_eq!(unique.len(), grid_areas.len(), "area in two microgrids");
}

#[test]
fn benchmark_restores_everything_with_full_batteries() {
    let sc = restoration_benchmark();
    let tl = run_restoration(&sc, 1).unwrap();
    check_invariants(&sc, &tl);
    assert_eq!(tl.final_event().service_class, ServiceClass::Acceptable);
    assert!((tl.restored_fraction() - 1.0).abs() < TOL);
    assert_eq!(tl.events.last().unwrap().stage, Stage::S5p);
}

#[test]
fn restoration_is_deterministic() {
    let sc = place_batteries(&restoration_benchmark(), 0.5, 9, 3);
    let a = run_restoration(&sc, 42).unwrap();
    let b = run_restoration(&sc, 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn no_forming_unit_means_nothing_happens() {
    let mut sc = two_areas(2.0, true);
    sc.ders[0].capability = DerCapability::GridFeeding;
    let tl = run_restoration(&sc, 0).unwrap();
    assert_eq!(tl.events.len(), 1);
    assert_eq!(tl.events[0].stage, Stage::S2);
    assert_eq!(tl.restored_fraction(), 0.0);
    assert_eq!(tl.final_event().service_class, ServiceClass::Unacceptable);
}

#[test]
fn single_former_with_comm_serves_both_areas() {
    let sc = two_areas(2.0, true);
    let tl = run_restoration(&sc, 0).unwrap();
    check_invariants(&sc, &tl);
    assert_eq!(tl.final_event().service_class, ServiceClass::Acceptable);
    let stages: Vec<Stage> = tl.events.iter().map(|e| e.stage).collect();
    assert!(stages.contains(&Stage::S3));
    assert!(stages.contains(&Stage::S4p));
}

fn relayed(relay_battery: bool) -> RestorationScenario {
    let mut sc = two_areas(2.0, false);
    sc.buses[1].x_km = 3.0;
    sc.comm.push(CommNode {
        id: "relay".into(),
        bus: None,
        position_km: Some([1.5, 0.0]),
        has_battery: relay_battery,
        battery_kwh: 1.0,
        drain_kw: 0.1,
        cell_radius_km: 2.0,
    });
    sc
}

#[test]
fn neighbour_reached_through_battery_relay() {
    let tl = run_restoration(&relayed(true), 0).unwrap();
    assert_eq!(tl.final_event().service_class, ServiceClass::Acceptable);

    let tl = run_restoration(&relayed(false), 0).unwrap();
    assert_eq!(tl.final_event().service_class, ServiceClass::Impaired);
    assert!((tl.final_event().served_total - 0.5).abs() < TOL);
}

#[test]
fn cells_must_cover_the_spacing() {
    let sc = two_areas(1.4, true);
    let tl = run_restoration(&sc, 0).unwrap();
    assert!((tl.final_event().served_total - 0.5).abs() < TOL);
}

fn chain(spacing: f64, radius: f64) -> RestorationScenario {
    let buses: Vec<_> = (0..3)
        .map(|i| json!({"id": format!("n{i}"), "x_km": spacing * i as f64, "y_km": 0.0, "area": "A"}))
        .collect();
    let comm: Vec<_> = (0..3)
        .map(|i| json!({"id": format!("c{i}"), "bus": format!("n{i}"), "has_battery": true,
                        "battery_kwh": 1.0, "cell_radius_km": radius}))
        .collect();
    serde_json::from_value(json!({
        "buses": buses,
        "areas": [{"id": "A", "control_bus": "n0"}],
        "comm": comm
    }))
    .unwrap()
}

#[test]
fn comm_disk_examples() {
    let none = BTreeSet::new();
    let full = BTreeMap::new();
    let g = comm_reachable(&chain(1.9, 2.0), &none, &full);
    assert!(g.has_edge("c0", "c1") && g.has_edge("c1", "c2"));
    assert!(!g.has_edge("c0", "c2"));
    assert!(g.connected("c0", "c2"));

    let g = comm_reachable(&chain(1.9, 1.8), &none, &full);
    assert!(g.edges.is_empty());
    assert!(!g.connected("c0", "c1"));

    let drained: BTreeMap<String, f64> = [("c1".to_string(), 0.0)].into();
    let g = comm_reachable(&chain(1.9, 2.0), &none, &drained);
    assert!(!g.operational[1]);
    assert!(!g.connected("c0", "c2"));
    let powered: BTreeSet<String> = ["n1".to_string()].into();
    assert!(comm_reachable(&chain(1.9, 2.0), &powered, &drained).connected("c0", "c2"));
}

fn grid(id: &str, f: f64, phase: f64) -> Microgrid {
    Microgrid {
        id: id.into(),
        areas: vec![id.into()],
        forming: vec![format!("gf_{id}")],
        followers: vec![],
        frequency: f,
        phase,
        generation_mw: 2.0,
        served_mw: 1.0,
        served_critical_mw: 0.5,
        margin_mw: 1.0,
    }
}

#[test]
fn synchronism_gate_examples() {
    let p = SyncPolicy::default();
    let merged = synchronize_and_merge(&grid("a", 50.0, 0.0), &grid("b", 50.05, 0.19), &p).unwrap();
    assert_eq!(merged.areas, vec!["a", "b"]);
    assert!((merged.generation_mw - 4.0).abs() < TOL);

    assert!(synchronize_and_merge(&grid("a", 50.0, 0.0), &grid("b", 50.0, 0.2), &p).is_err());
    assert!(synchronize_and_merge(&grid("a", 50.0, 0.0), &grid("b", 50.11, 0.0), &p).is_err());
    assert!(synchronize_and_merge(&grid("a", 50.0, 0.05), &grid("b", 50.0, 2.0 * PI - 0.05), &p).is_ok());
    assert!(synchronize_and_merge(&grid("a", 50.0, 0.0), &grid("a", 50.0, 0.0), &p).is_err());
    assert!((wrapped_phase_difference(0.1, 2.0 * PI + 0.3) - 0.2).abs() < 1e-12);
}

#[test]
fn alignment_band_halves() {
    assert_eq!(alignment_band(0), PI);
    assert_eq!(alignment_band(3), PI / 8.0);
}

#[test]
fn timeline_csv_round_trip() {
    let tl = run_restoration(&restoration_benchmark(), 5).unwrap();
    let back = RestorationTimeline::events_from_csv(&tl.to_csv()).unwrap();
    assert_eq!(back.len(), tl.events.len());
    for (a, b) in back.iter().zip(&tl.events) {
        assert_eq!(a.stage, b.stage);
        assert_eq!(a.service_class, b.service_class);
        assert!((a.served_total - b.served_total).abs() < 1e-6);
    }
}

#[test]
fn monte_carlo_argument_errors() {
    let sc = restoration_benchmark();
    assert!(monte_carlo(&sc, 1.5, 6.0, 10, 0).is_err());
    assert!(monte_carlo(&sc, -0.1, 6.0, 10, 0).is_err());
    assert!(monte_carlo(&sc, 0.5, 0.0, 10, 0).is_err());
    assert!(monte_carlo(&sc, 0.5, 6.0, 0, 0).is_err());
}

#[test]
fn monte_carlo_is_reproducible() {
    let sc = restoration_benchmark();
    let a = monte_carlo(&sc, 0.5, 6.0, 8, 11).unwrap();
    let b = monte_carlo(&sc, 0.5, 6.0, 8, 11).unwrap();
    assert_eq!(a.fractions, b.fractions);
    assert!(a.min <= a.median && a.median <= a.max);
}

#[test]
fn battery_placement_extremes() {
    let sc = restoration_benchmark();
    assert!(place_batteries(&sc, 0.0, 1, 0).comm.iter().all(|c| !c.has_battery));
    assert!(place_batteries(&sc, 1.0, 1, 0).comm.iter().all(|c| c.has_battery));
}

#[test]
fn scenario_validation_catches_bad_references() {
    let mut sc = two_areas(2.0, true);
    sc.loads[0].bus = "nowhere".into();
    sc.switches[0].b = "A".into();
    sc.comm[1].position_km = Some([0.0, 0.0]);
    let fields: Vec<String> = sc.violations().into_vec().into_iter().map(|v| v.field).collect();
    assert!(fields.contains(&"loads[0].bus".to_string()));
    assert!(fields.contains(&"switches[0].b".to_string()));
    assert!(fields.iter().any(|f| f.starts_with("comm[1]")));
    assert!(run_restoration(&sc, 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn invariants_hold_for_random_batteries(p in 0.0f64..1.0, place_seed in 0u64..1000, seed in 0u64..1000, radius in 2.0f64..10.0) {
        let sc = place_batteries(&restoration_benchmark().with_radius(radius), p, place_seed, 0);
        let tl = run_restoration(&sc, seed).unwrap();
        check_invariants(&sc, &tl);
        let f = tl.restored_fraction();
        prop_assert!((0.0..=1.0 + TOL).contains(&f));
    }
}
