use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rules::{shares, DistributionRule, ProportionalToRating};
use super::DerUnit;
use crate::error::{Error, Result, Validate, Violations};
use crate::frequency::DroopCurve;

/// Frequencies at which the feasible area is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub f_min: f64,
    pub f_max: f64,
    pub f_step: f64,
    /// Nominal frequency, used to pick the middle corner pair.
    #[serde(default = "default_f_n")]
    pub f_n: f64,
}

fn default_f_n() -> f64 {
    50.0
}

impl FrequencyGrid {
    pub fn new(f_min: f64, f_max: f64, f_step: f64) -> Self {
        Self {
            f_min,
            f_max,
            f_step,
            f_n: default_f_n(),
        }
    }

    /// Rows from `f_min` in steps of `f_step` until one reaches or exceeds
    /// `f_max`; the last row may lie above `f_max`.
    pub fn frequencies(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let eps = 1e-9 * self.f_step;
        let mut out = Vec::new();
        let mut k = 0u64;
        loop {
            let f = self.f_min + k as f64 * self.f_step;
            out.push(f);
            if f >= self.f_max - eps {
                return Ok(out);
            }
            k += 1;
        }
    }
}

impl Validate for FrequencyGrid {
    fn violations(&self) -> Violations {
        let mut v = Violations::new();
        for (name, x) in [
            ("f_min", self.f_min),
            ("f_max", self.f_max),
            ("f_step", self.f_step),
            ("f_n", self.f_n),
        ] {
            v.finite(x, name);
        }
        v.check(self.f_step > 0.0, "f_step", "must be > 0");
        v.check(self.f_min < self.f_max, "f_min", "must be < f_max");
        if self.f_step > 0.0 && self.f_max > self.f_min {
            v.check(
                (self.f_max - self.f_min) / self.f_step <= 1e7,
                "f_step",
                "grid would exceed 10^7 rows",
            );
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub f: f64,
    pub p_min: f64,
    pub p_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corner {
    pub f: f64,
    pub p: f64,
}

/// Named corners of the feasible area: A/B at the top of the grid, C/D at
/// nominal frequency, E/F at the bottom. The first of each pair is the
/// minimum power, the second the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Corners {
    pub a: Corner,
    pub b: Corner,
    pub c: Corner,
    pub d: Corner,
    pub e: Corner,
    pub f: Corner,
}

/// Aggregated feasible area of droop curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroopEnvelope {
    pub grid: FrequencyGrid,
    pub rows: Vec<EnvelopeRow>,
    pub corners: Corners,
}

impl DroopEnvelope {
    /// Builds an envelope from explicit rows, filling the corners.
    pub fn from_rows(grid: FrequencyGrid, rows: Vec<EnvelopeRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("rows", "envelope needs at least one row"));
        }
        for (i, r) in rows.iter().enumerate() {
            if !(r.p_min <= r.p_max) {
                return Err(Error::invalid(
                    format!("rows[{i}]"),
                    format!("p_min {} exceeds p_max {}", r.p_min, r.p_max),
                ));
            }
        }
        let nearest = |target: f64| {
            *rows
                .iter()
                .min_by(|x, y| (x.f - target).abs().total_cmp(&(y.f - target).abs()))
                .expect("non-empty")
        };
        let pair = |r: EnvelopeRow| {
            (
                Corner { f: r.f, p: r.p_min },
                Corner { f: r.f, p: r.p_max },
            )
        };
        let (a, b) = pair(nearest(grid.f_max));
        let (c, d) = pair(nearest(grid.f_n));
        let (e, f) = pair(nearest(grid.f_min));
        Ok(Self {
            grid,
            rows,
            corners: Corners { a, b, c, d, e, f },
        })
    }

    /// Frequencies at which `curve` leaves the area.
    pub fn violations_of(&self, curve: &DroopCurve) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| {
                let p = curve.eval(r.f);
                let tol = 1e-12 * r.p_max.abs().max(1.0);
                !(p >= r.p_min - tol && p <= r.p_max + tol)
            })
            .map(|r| r.f)
            .collect()
    }
}

/// Feasible area of a fleet, taken as the sum of unit capabilities: each
/// unit can deliver between 0 and its rating at every frequency.
pub fn compute_droop_envelope(units: &[DerUnit], grid: &FrequencyGrid) -> Result<DroopEnvelope> {
    let fs = grid.frequencies()?;
    let p_max: f64 = units.iter().map(|u| u.p_rating).sum();
    let rows = fs
        .into_iter()
        .map(|f| EnvelopeRow { f, p_min: 0.0, p_max })
        .collect();
    DroopEnvelope::from_rows(*grid, rows)
}

/// Accepts `candidate` if it stays inside the envelope at every grid row.
pub fn select_droop(envelope: &DroopEnvelope, candidate: &DroopCurve) -> Result<DroopCurve> {
    candidate.validate()?;
    let bad = envelope.violations_of(candidate);
    if bad.is_empty() {
        Ok(*candidate)
    } else {
        Err(Error::FeasibilityViolation { frequencies: bad })
    }
}

/// Splits `selected` across units in proportion to their rating.
pub fn distribute_droop(
    selected: &DroopCurve,
    units: &[DerUnit],
    grid: &FrequencyGrid,
) -> Result<BTreeMap<String, DroopCurve>> {
    distribute_droop_with(&ProportionalToRating, selected, units, grid)
}

pub fn distribute_droop_with(
    rule: &dyn DistributionRule,
    selected: &DroopCurve,
    units: &[DerUnit],
    grid: &FrequencyGrid,
) -> Result<BTreeMap<String, DroopCurve>> {
    selected.validate()?;
    let fs = grid.frequencies()?;
    let shares = shares(rule, units)
        .ok_or_else(|| Error::Distribution("no unit has positive weight".into()))?;

    let mut out = BTreeMap::new();
    for (u, share) in units.iter().zip(&shares) {
        let curve = selected.scaled(*share);
        for &f in &fs {
            let p = curve.eval(f);
            let tol = 1e-12 * u.p_rating.max(1.0);
            if p < -tol || p > u.p_rating + tol {
                return Err(Error::Distribution(format!(
                    "unit `{}` would deliver {p} at {f} Hz, outside [0, {}]",
                    u.id, u.p_rating
                )));
            }
        }
        out.insert(u.id.clone(), curve);
    }
    for &f in &fs {
        let total: f64 = out.values().map(|c| c.eval(f)).sum();
        let want = selected.eval(f);
        if (total - want).abs() > 1e-9 {
            return Err(Error::Distribution(format!(
                "re-aggregated power {total} differs from {want} at {f} Hz"
            )));
        }
    }
    Ok(out)
}
