use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::restoration::run_indexed;
use super::RestorationScenario;
use crate::error::{Error, Result, Validate};
use crate::rng;

/// Restored-load statistics for one `(p, radius)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    /// Probability that a station has battery backup.
    pub p: f64,
    pub radius_km: f64,
    pub runs: usize,
    pub seed: u64,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Restored fraction per run, in run order.
    pub fractions: Vec<f64>,
}

impl MonteCarloResult {
    /// Per-run table `run,restored_fraction`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("run,restored_fraction\n");
        for (i, f) in self.fractions.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", crate::format::sig9(*f)));
        }
        out
    }
}

/// Draws battery placement for run `run`. One uniform draw per station in
/// order, so cells with different `p` share random numbers and a station
/// backed at `p` stays backed at any larger `p`.
pub fn place_batteries(template: &RestorationScenario, p: f64, seed: u64, run: u64) -> RestorationScenario {
    let mut sc = template.clone();
    let mut stream = rng::stream(seed, rng::purpose::BATTERY_PLACEMENT, run);
    for c in &mut sc.comm {
        c.has_battery = stream.random::<f64>() < p;
    }
    sc
}

/// Repeats the restoration `runs` times with random battery placement at
/// probability `p` and cell radius `radius_km` on every station.
pub fn monte_carlo(
    template: &RestorationScenario,
    p: f64,
    radius_km: f64,
    runs: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", "must lie in [0, 1]"));
    }
    if !(radius_km.is_finite() && radius_km > 0.0) {
        return Err(Error::invalid("radius_km", "must be positive and finite"));
    }
    if runs == 0 {
        return Err(Error::invalid("runs", "must be at least 1"));
    }
    let base = template.with_radius(radius_km);
    base.validate()?;
    let fractions: Vec<f64> = (0..runs as u64)
        .into_par_iter()
        .map(|run| run_indexed(&place_batteries(&base, p, seed, run), seed, run).restored_fraction())
        .collect();
    let mut sorted = fractions.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    Ok(MonteCarloResult {
        p,
        radius_km,
        runs,
        seed,
        mean: fractions.iter().sum::<f64>() / n as f64,
        median,
        min: sorted[0],
        max: sorted[n - 1],
        fractions,
    })
}
