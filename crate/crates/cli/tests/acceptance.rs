//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gridres_core::benchmarks::{coordination_benchmark, frequency_benchmark, restoration_benchmark, two_feeder_cases};
use gridres_core::blackstart::{monte_carlo, place_batteries, run_restoration, MergeAttempt};
use gridres_core::coordination::{
    check_reserve_rules, compute_droop_envelope, compute_h_ag_max, compute_p0_ir, distribute_droop, select_droop,
    ReserveRule, ReserveShare,
};
use gridres_core::frequency::{fcr_ramp_output, trace_metrics, DroopCurve, FcrProduct};
use gridres_core::metrics::{degradation_area, Interpolation, ServiceTrajectory};
use gridres_core::protection::IssueKind;
use gridres_core::{rng, Error};
use rand::Rng;

const ROUND_TRIP_REL: f64 = 1e-12;
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(1);
const ORDERING_BUDGET: Duration = Duration::from_secs(5);
const ROCOF_TOL: f64 = 1e-6;
const NADIR_TOL: f64 = 1e-4;
const DROOP_TOL: f64 = 1e-9;
const ORACLE_REL: f64 = 1e-9;
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const MAX_PHASE: f64 = 0.2;
const MERGE_ATTEMPTS: usize = 1000;
const MC_RUNS: usize = 200;
const MC_BUDGET: Duration = Duration::from_secs(120);
const MC_MEDIAN_FLOOR: f64 = 0.5;
const MC_ALL_RUNS_FLOOR: f64 = 0.8;
const METRIC_PAIRS: usize = 1000;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn round_trip() -> Check {
    let mut r = rng::stream(rng::DEFAULT_SEED, 900, 1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p0_ss = r.random_range(0.0..1.0);
        let p0_irmax = p0_ss + r.random_range(1e-6..2.0);
        let f_n = if r.random_bool(0.5) { 50.0 } else { 60.0 };
        let rocof = r.random_range(0.01..5.0);
        let h = compute_h_ag_max(p0_irmax, p0_ss, f_n, rocof).map_err(|e| e.to_string())?;
        let back = compute_p0_ir(h, rocof, f_n, p0_ss).map_err(|e| e.to_string())?;
        worst = worst.max(((back - p0_irmax) / p0_irmax).abs());
    }
    let took = start.elapsed();
    ensure(
        worst < ROUND_TRIP_REL && took < ROUND_TRIP_BUDGET,
        format!("max rel err {worst:.2e}, {took:.2?}"),
    )
}

fn hand_value() -> Check {
    let h = compute_h_ag_max(0.2, 0.0, 50.0, 1.0).map_err(|e| e.to_string())?;
    ensure(h == 5.0, format!("h_ag_max = {h}"))
}

fn fcr_ramp() -> Check {
    let p = FcrProduct::new(100.0);
    let half = fcr_ramp_output(15.0, &p).map_err(|e| e.to_string())?;
    let full = fcr_ramp_output(30.0, &p).map_err(|e| e.to_string())?;
    ensure(half == 50.0 && full == 100.0, format!("15 s -> {half}%, 30 s -> {full}%"))
}

fn inertia_ordering() -> Check {
    let start = Instant::now();
    let run = |h: f64| {
        let s = frequency_benchmark(h);
        let tr = s.simulate().map_err(|e| e.to_string())?;
        trace_metrics(&tr, &s.system).map_err(|e| e.to_string())
    };
    let (low, high) = (run(2.0)?, run(5.0)?);
    let took = start.elapsed();
    ensure(
        low.nadir < high.nadir && low.max_abs_rocof > high.max_abs_rocof && took < ORDERING_BUDGET,
        format!(
            "nadir {:.6} < {:.6}, |rocof| {:.4} > {:.4}, {took:.2?}",
            low.nadir, high.nadir, low.max_abs_rocof, high.max_abs_rocof
        ),
    )
}

fn swing_equation() -> Check {
    let s = frequency_benchmark(2.0);
    let tr = s.simulate().map_err(|e| e.to_string())?;
    let expected = s.system.f_n * s.event.delta_p / (2.0 * s.system.h_sys);
    let at_event = tr
        .samples
        .iter()
        .find(|x| x.t >= s.event.t_event - 1e-12)
        .ok_or("no sample at the event")?;
    let rocof_err = (at_event.rocof - expected).abs();

    let mut fine = s.clone();
    fine.dt = s.dt / 2.0;
    let nadir = |sc: &gridres_core::frequency::FrequencyScenario| -> Result<f64, String> {
        let tr = sc.simulate().map_err(|e| e.to_string())?;
        Ok(trace_metrics(&tr, &sc.system).map_err(|e| e.to_string())?.nadir)
    };
    let dn = (nadir(&s)? - nadir(&fine)?).abs();
    ensure(
        rocof_err < ROCOF_TOL && dn < NADIR_TOL,
        format!("rocof err {rocof_err:.2e} Hz/s, |dnadir| {dn:.2e} Hz"),
    )
}

fn droop_protocol() -> Check {
    let sc = coordination_benchmark();
    let req = sc.droop.as_ref().ok_or("benchmark has no droop request")?;
    let env = compute_droop_envelope(&sc.units, &req.grid).map_err(|e| e.to_string())?;
    let fs = req.grid.frequencies().map_err(|e| e.to_string())?;
    let p_max = env.rows[0].p_max;

    // For every grid row, a curve that leaves the envelope at that row.
    let mut missed = Vec::new();
    for &f in &fs {
        let outside = if f < 50.0 - 0.02 {
            DroopCurve::new(50.0, 0.02, 0.5 * p_max, (p_max * 1.5, f), (0.0, 50.5))
        } else if f > 50.0 + 0.02 {
            DroopCurve::new(50.0, 0.02, 0.5 * p_max, (p_max, 49.5), (-0.5 * p_max, f))
        } else {
            DroopCurve::new(50.0, 0.02, 1.1 * p_max, (1.2 * p_max, 49.5), (1.05 * p_max, 50.5))
        };
        if !matches!(select_droop(&env, &outside), Err(Error::FeasibilityViolation { ref frequencies }) if frequencies.contains(&f)) {
            missed.push(f);
        }
    }
    let chosen = select_droop(&env, &req.candidate).map_err(|e| e.to_string())?;
    let split = distribute_droop(&chosen, &sc.units, &req.grid).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for &f in &fs {
        let total: f64 = split.values().map(|c| c.evaluate(f).unwrap_or(f64::NAN)).sum();
        worst = worst.max((total - chosen.evaluate(f).map_err(|e| e.to_string())?).abs());
    }
    ensure(
        missed.is_empty() && worst < DROOP_TOL,
        format!("out-of-envelope curves accepted at {missed:?}, re-aggregation err {worst:.2e}"),
    )
}

fn reserve_rules() -> Check {
    let mut one_big: Vec<ReserveShare> = (0..47).map(|i| ReserveShare::new(format!("u{i}"), 0.02)).collect();
    one_big.push(ReserveShare::new("big", 0.06));
    let total: f64 = one_big.iter().map(|s| s.share).sum();
    let a = check_reserve_rules(&one_big, total, &[]).map_err(|e| e.to_string())?;
    let even: Vec<ReserveShare> = (0..25).map(|i| ReserveShare::new(format!("u{i}"), 0.04)).collect();
    let b = check_reserve_rules(&even, 1.0, &[]).map_err(|e| e.to_string())?;
    let (na, nb) = (a.count(ReserveRule::CapExceeded), b.count(ReserveRule::CapExceeded));
    ensure(na == 1 && nb == 0, format!("6% portfolio: {na} CapExceeded, 25x4%: {nb}"))
}

fn fault_oracle() -> Check {
    let mut r = rng::stream(rng::DEFAULT_SEED, 901, 0);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (net, fault) = common::random_case(&mut r);
        worst = worst.max(common::solver_error(&net, &fault));
    }
    let took = start.elapsed();
    ensure(
        worst < ORACLE_REL && took < ORACLE_BUDGET,
        format!("max rel err {worst:.2e} over 100 networks, {took:.2?}"),
    )
}

fn misoperation_suite() -> Check {
    let cases: BTreeMap<&str, _> = two_feeder_cases().into_iter().collect();
    let run = |name: &str| {
        cases
            .get(name)
            .ok_or(format!("missing case {name}"))?
            .run()
            .map(|o| o.report)
            .map_err(|e| e.to_string())
    };
    let fault = run("two_feeder_fault")?;
    let a = fault.trips.len() == 1 && fault.tripped("A");

    let blind = run("two_feeder_blinding")?;
    let mut no_der = cases["two_feeder_blinding"].clone();
    no_der.network = no_der.network.without_der();
    let cleared = no_der.run().map_err(|e| e.to_string())?.report.tripped("A");
    let b = blind.trips.is_empty() && blind.has(IssueKind::Blinding) && cleared;

    let symp = run("two_feeder_sympathetic")?;
    let c = symp.tripped("A") && symp.tripped("B") && symp.has(IssueKind::SympatheticTrip);

    let energized = run("two_feeder_energized")?;
    let d = energized.has(IssueKind::EnergizedAfterTrip);
    ensure(a && b && c && d, format!("fault {a}, blinding {b}, sympathetic {c}, energized {d}"))
}

fn sync_gate() -> Check {
    let template = restoration_benchmark();
    let mut log: Vec<MergeAttempt> = Vec::new();
    let mut run = 0u64;
    while log.len() < MERGE_ATTEMPTS {
        let sc = place_batteries(&template, 0.9, rng::DEFAULT_SEED, run);
        let tl = run_restoration(&sc, rng::DEFAULT_SEED.wrapping_add(run)).map_err(|e| e.to_string())?;
        log.extend(tl.merges);
        run += 1;
        if run > 100_000 {
            return Err(format!("only {} merge attempts logged", log.len()));
        }
    }
    log.truncate(MERGE_ATTEMPTS);
    let bad = log.iter().filter(|m| m.accepted && m.phase_diff >= MAX_PHASE).count();
    let rejected = log.iter().filter(|m| !m.accepted).count();
    let gate_holds = log.iter().all(|m| m.accepted == (m.phase_diff < MAX_PHASE));
    ensure(
        bad == 0 && gate_holds,
        format!("{} attempts from {run} runs, {rejected} rejected, {bad} accepted at >= {MAX_PHASE} rad", log.len()),
    )
}

fn black_start_monte_carlo() -> Check {
    let template = restoration_benchmark();
    let ps = [0.1, 0.5, 0.9];
    let rs = [2.0, 6.0, 10.0];
    let start = Instant::now();
    let mut cells = BTreeMap::new();
    for (i, &p) in ps.iter().enumerate() {
        for (j, &r) in rs.iter().enumerate() {
            let res = monte_carlo(&template, p, r, MC_RUNS, rng::DEFAULT_SEED).map_err(|e| e.to_string())?;
            cells.insert((i, j), res);
        }
    }
    let took = start.elapsed();
    let mean = |i: usize, j: usize| cells[&(i, j)].mean;
    let mut monotone = true;
    for j in 0..3 {
        for i in 0..2 {
            monotone &= mean(i + 1, j) >= mean(i, j);
            monotone &= mean(j, i + 1) >= mean(j, i);
        }
    }
    let medians = [(2, 0), (1, 1), (0, 2)].map(|k| cells[&k].median);
    let b = medians.iter().all(|&m| m >= MC_MEDIAN_FLOOR);
    let c_min = cells[&(2, 1)].min;
    let c = c_min > MC_ALL_RUNS_FLOOR;
    let grid: Vec<String> = (0..3)
        .map(|i| format!("p={}: {:.3}/{:.3}/{:.3}", ps[i], mean(i, 0), mean(i, 1), mean(i, 2)))
        .collect();
    ensure(
        monotone && b && c && took < MC_BUDGET,
        format!(
            "monotone {monotone}; medians {:.3}/{:.3}/{:.3}; min at (0.9, 6 km) {c_min:.3}; means [{}]; {took:.2?}",
            medians[0],
            medians[1],
            medians[2],
            grid.join(", ")
        ),
    )
}

fn metrics() -> Check {
    let area = |pts: &[(f64, f64)], hold: bool| -> Result<f64, String> {
        let mut t = ServiceTrajectory::linear(pts).map_err(|e| e.to_string())?;
        if hold {
            t.interpolation = Interpolation::Hold;
        }
        degradation_area(&t, 1.0).map_err(|e| e.to_string())
    };
    let constant = area(&[(0.0, 1.0), (20.0, 1.0)], false)?;
    let rectangle = area(&[(0.0, 0.5), (10.0, 1.0), (20.0, 1.0)], true)?;
    let triangle = area(&[(0.0, 0.0), (10.0, 1.0)], false)?;

    let mut r = rng::stream(rng::DEFAULT_SEED, 902, 0);
    let mut violations = 0;
    for _ in 0..METRIC_PAIRS {
        let n = r.random_range(2..12);
        let mut t = 0.0;
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for _ in 0..n {
            t += r.random_range(0.01..5.0);
            let l: f64 = r.random_range(0.0..=1.0);
            lo.push((t, l));
            hi.push((t, l + r.random_range(0.0..=1.0) * (1.0 - l)));
        }
        if area(&hi, false)? > area(&lo, false)? + 1e-12 {
            violations += 1;
        }
    }
    ensure(
        constant == 0.0 && rectangle == 5.0 && triangle == 5.0 && violations == 0,
        format!("areas {constant}/{rectangle}/{triangle}, dominance violations {violations}/{METRIC_PAIRS}"),
    )
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(entries) = std::fs::read_dir(&d) else { continue };
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if let Ok(bytes) = std::fs::read(&p) {
                out.insert(p.strip_prefix(dir).unwrap_or(&p).to_path_buf(), bytes);
            }
        }
    }
    out
}

fn cli_reproducibility() -> Check {
    let exe = env!("CARGO_BIN_EXE_gridres");
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let fx = |n: &str| fixtures.join(n).display().to_string();
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = work.path().join("out");
    let o = out.display().to_string();
    let trace = work.path().join("trace.csv");
    let timeline = work.path().join("timeline.csv");

    // Inputs for the metrics runs, produced once.
    let prep = |args: &[&str], file: &str, dest: &Path| -> Result<(), String> {
        let dir = work.path().join("prep");
        let status = Command::new(exe)
            .args(args)
            .args(["--out", &dir.display().to_string()])
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("{args:?} failed"));
        }
        std::fs::copy(dir.join(file), dest).map_err(|e| e.to_string())?;
        Ok(())
    };
    prep(&["frequency", "--scenario", &fx("frequency_h2.json")], "trace.csv", &trace)?;
    prep(&["blackstart", "--scenario", &fx("restoration.json")], "timeline.csv", &timeline)?;

    let runs: Vec<(&str, Vec<String>)> = vec![
        ("frequency", vec!["frequency".into(), "--scenario".into(), fx("frequency_h5.json"), "--out".into(), o.clone()]),
        ("coordinate", vec!["coordinate".into(), "--scenario".into(), fx("coordination.json"), "--out".into(), o.clone()]),
        ("protection", vec!["protection".into(), "--scenario".into(), fx("two_feeder_sympathetic.json"), "--out".into(), o.clone()]),
        ("blackstart", vec!["blackstart".into(), "--scenario".into(), fx("restoration.json"), "--seed".into(), "11".into(), "--out".into(), o.clone()]),
        (
            "blackstart --p",
            vec![
                "blackstart".into(), "--scenario".into(), fx("restoration.json"), "--p".into(), "0.5".into(),
                "--radius-km".into(), "6".into(), "--runs".into(), "20".into(), "--seed".into(), "11".into(),
                "--out".into(), o.clone(),
            ],
        ),
        ("metrics --trace", vec!["metrics".into(), "--trace".into(), trace.display().to_string(), "--out".into(), o.clone()]),
        (
            "metrics --timeline",
            vec![
                "metrics".into(), "--timeline".into(), timeline.display().to_string(), "--total-load".into(),
                "36".into(), "--out".into(), o.clone(),
            ],
        ),
        ("validate", vec!["validate".into(), fx("two_feeder_fault.json")]),
        ("export-benchmarks", vec!["export-benchmarks".into(), "--out".into(), o.clone()]),
    ];

    let mut differing = Vec::new();
    for (name, args) in &runs {
        let mut seen = Vec::new();
        for _ in 0..2 {
            let _ = std::fs::remove_dir_all(&out);
            let output = Command::new(exe).args(args).output().map_err(|e| e.to_string())?;
            if !output.status.success() {
                return Err(format!("`{name}` exited with {}", output.status));
            }
            seen.push((output.stdout, snapshot(&out)));
        }
        if seen[0] != seen[1] || (seen[0].1.is_empty() && seen[0].0.is_empty()) {
            differing.push(*name);
        }
    }
    ensure(
        differing.is_empty(),
        format!("{} subcommand runs compared, differing: {differing:?}", runs.len()),
    )
}

fn main() {
    let criteria: [Criterion; 13] = [
        ("inertia maximum / exchange round trip", round_trip),
        ("h_ag_max hand value", hand_value),
        ("FCR ramp points", fcr_ramp),
        ("inertia ordering on the benchmark", inertia_ordering),
        ("initial ROCOF and nadir convergence", swing_equation),
        ("droop selection and distribution", droop_protocol),
        ("reserve rules", reserve_rules),
        ("fault solver against dense nodal solve", fault_oracle),
        ("two-feeder misoperation suite", misoperation_suite),
        ("synchronism gate audit", sync_gate),
        ("black-start Monte Carlo", black_start_monte_carlo),
        ("degradation area", metrics),
        ("CLI reproducibility", cli_reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
