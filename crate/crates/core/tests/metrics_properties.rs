use gridres_core::benchmarks::{frequency_benchmark, restoration_benchmark};
use gridres_core::blackstart::{place_batteries, run_restoration, ServiceClass};
use gridres_core::metrics::*;
use proptest::prelude::*;

/// Dense midpoint sum of the clipped deficit, independent of the exact
/// segment integration.
fn numeric_area(points: &[(f64, f64)], baseline: f64) -> f64 {
    let n = 20_000;
    let mut area = 0.0;
    for w in points.windows(2) {
        let ((t0, l0), (t1, l1)) = (w[0], w[1]);
        let h = (t1 - t0) / n as f64;
        for k in 0..n {
            let s = (k as f64 + 0.5) / n as f64;
            area += h * (baseline - (l0 + s * (l1 - l0))).max(0.0);
        }
    }
    area
}

fn trajectory() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.01f64..5.0, 0.0f64..=1.0), 2..12).prop_map(|v| {
        let mut t = 0.0;
        v.into_iter()
            .map(|(dt, l)| {
                t += dt;
                (t, l)
            })
            .collect()
    })
}

#[test]
fn reference_areas() {
    let flat = ServiceTrajectory::linear(&[(0.0, 1.0), (20.0, 1.0)]).unwrap();
    let tri = ServiceTrajectory::linear(&[(0.0, 0.0), (10.0, 1.0)]).unwrap();
    let mut rect = ServiceTrajectory::linear(&[(0.0, 0.5), (10.0, 1.0), (20.0, 1.0)]).unwrap();
    rect.interpolation = Interpolation::Hold;
    assert_eq!(degradation_area(&flat, 1.0).unwrap(), 0.0);
    assert_eq!(degradation_area(&tri, 1.0).unwrap(), 5.0);
    assert_eq!(degradation_area(&rect, 1.0).unwrap(), 5.0);
}

#[test]
fn invalid_trajectories_are_rejected() {
    assert!(ServiceTrajectory::linear(&[(0.0, 1.2)]).is_err());
    assert!(ServiceTrajectory::linear(&[(1.0, 1.0), (1.0, 0.5)]).is_err());
    assert!(ServiceTrajectory::linear(&[(0.0, f64::NAN)]).is_err());
    let t = ServiceTrajectory::linear(&[(0.0, 1.0)]).unwrap();
    assert!(degradation_area(&t, f64::INFINITY).is_err());
}

#[test]
fn frequency_service_dips_and_recovers() {
    let mut s = frequency_benchmark(2.0);
    s.system.band_half_width = 0.2;
    let tr = s.simulate().unwrap();
    let traj = service_from_frequency(&tr, &s.system, DEFAULT_FLOOR_DEVIATION).unwrap();
    let low = traj.samples.iter().map(|x| x.level).fold(1.0, f64::min);
    assert!(low < 1.0);
    assert_eq!(traj.samples.last().unwrap().level, 1.0);
    assert!(service_from_frequency(&tr, &s.system, s.system.band_half_width).is_err());

    let ann = annotate_phases(&traj, &PhaseEvents::infer(&traj, 1.0).unwrap()).unwrap();
    let len: f64 = ann.intervals.iter().map(|i| i.t_end - i.t_start).sum();
    assert!((len - (traj.end().unwrap() - traj.start().unwrap())).abs() < 1e-9);

    let mut h5 = frequency_benchmark(5.0);
    h5.system.band_half_width = 0.2;
    let t5 = service_from_frequency(&h5.simulate().unwrap(), &h5.system, DEFAULT_FLOOR_DEVIATION).unwrap();
    assert!(degradation_area(&traj, 1.0).unwrap() >= degradation_area(&t5, 1.0).unwrap());
}

#[test]
fn restoration_state_space_path() {
    let tl = run_restoration(&restoration_benchmark(), 3).unwrap();
    let traj = service_from_restoration(&tl, tl.total_load).unwrap();
    let metric = restoration_state_metric(&tl);
    let path = state_space_path(&traj, &metric).unwrap();
    assert!(path.points.len() <= traj.samples.len());
    assert_eq!(path.transitions.len(), path.points.len() - 1);
    assert_eq!(path.points.last().unwrap().service, 1.0);
    for p in &path.points {
        assert!((0.0..=1.0).contains(&p.degradation));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_area_matches_dense_sum(pts in trajectory(), baseline in 0.0f64..=1.0) {
        let exact = degradation_area(&ServiceTrajectory::linear(&pts).unwrap(), baseline).unwrap();
        let span = pts.last().unwrap().0 - pts[0].0;
        prop_assert!((exact - numeric_area(&pts, baseline)).abs() < 1e-6 * span.max(1.0));
    }

    #[test]
    fn area_is_additive_over_a_split(pts in trajectory(), cut in 0usize..100) {
        let k = cut % pts.len();
        let traj = ServiceTrajectory::linear(&pts).unwrap();
        let (t0, tk, tn) = (pts[0].0, pts[k].0, pts.last().unwrap().0);
        let whole = degradation_area(&traj, 1.0).unwrap();
        let parts = degradation_area(&traj.window(t0, tk).unwrap(), 1.0).unwrap()
            + degradation_area(&traj.window(tk, tn).unwrap(), 1.0).unwrap();
        prop_assert!((whole - parts).abs() < 1e-12 * whole.max(1.0));
    }

    #[test]
    fn full_deficit_scales_with_level(pts in trajectory(), k in 0.0f64..=1.0) {
        // With the level never above the baseline, shifting the whole curve
        // down by k adds k times the span.
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(t, l)| (t, l * (1.0 - k))).collect();
        let a = degradation_area(&ServiceTrajectory::linear(&pts).unwrap(), 1.0).unwrap();
        let b = degradation_area(&ServiceTrajectory::linear(&scaled).unwrap(), 1.0).unwrap();
        let mass: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
        prop_assert!((b - (a + k * mass)).abs() < 1e-9 * (1.0 + mass));
    }

    #[test]
    fn phases_partition_the_span(pts in trajectory(), baseline in 0.0f64..=1.0) {
        let traj = ServiceTrajectory::linear(&pts).unwrap();
        let ev = PhaseEvents::infer(&traj, baseline).unwrap();
        let ann = annotate_phases(&traj, &ev).unwrap();
        let (start, end) = (traj.start().unwrap(), traj.end().unwrap());
        prop_assert_eq!(ann.intervals.first().unwrap().t_start, start);
        prop_assert_eq!(ann.intervals.last().unwrap().t_end, end);
        for w in ann.intervals.windows(2) {
            prop_assert_eq!(w[0].t_end, w[1].t_start);
        }
        let d = ann.durations;
        prop_assert!(d.detection >= 0.0 && d.activation >= 0.0 && d.remediation >= 0.0 && d.recovery >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pointwise_dominance_orders_areas(
        pts in trajectory(),
        lift in prop::collection::vec(0.0f64..=1.0, 12),
        hold in any::<bool>(),
    ) {
        let better: Vec<(f64, f64)> = pts
            .iter()
            .zip(&lift)
            .map(|(&(t, l), &u)| (t, l + u * (1.0 - l)))
            .collect();
        let mode = if hold { Interpolation::Hold } else { Interpolation::Linear };
        let mut a = ServiceTrajectory::linear(&better).unwrap();
        let mut b = ServiceTrajectory::linear(&pts).unwrap();
        a.interpolation = mode;
        b.interpolation = mode;
        prop_assert!(degradation_area(&a, 1.0).unwrap() <= degradation_area(&b, 1.0).unwrap() + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn full_service_iff_acceptable(p in 0.0f64..1.0, seed in 0u64..500) {
        let sc = place_batteries(&restoration_benchmark().with_radius(3.0), p, seed, 0);
        let tl = run_restoration(&sc, seed).unwrap();
        for e in &tl.events {
            let level = (e.served_total / tl.total_load).clamp(0.0, 1.0);
            let full = level >= 1.0 - 1e-9;
            prop_assert_eq!(full, e.service_class == ServiceClass::Acceptable);
        }
    }
}
