use serde::{Deserialize, Serialize};

use crate::blackstart::RestorationTimeline;
use crate::error::{Error, Result, Validate, Violations};
use crate::format::sig9;
use crate::frequency::{FrequencyTrace, SystemParameters};

/// Frequency deviation (Hz) at which the frequency service level reaches 0.
pub const DEFAULT_FLOOR_DEVIATION: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceSample {
    pub t: f64,
    pub level: f64,
    #[serde(default)]
    pub state: String,
}

/// How the level behaves between samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Straight line between neighbouring samples.
    #[default]
    Linear,
    /// Each level holds until the next sample.
    Hold,
}

/// Delivered service over time, as a fraction of the requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceTrajectory {
    #[serde(default)]
    pub interpolation: Interpolation,
    pub samples: Vec<ServiceSample>,
}

impl Validate for ServiceTrajectory {
    fn violations(&self) -> Violations {
        let mut v = Violations::new();
        for (i, s) in self.samples.iter().enumerate() {
            v.check(s.t.is_finite(), format!("samples[{i}].t"), "must be finite");
            v.check((0.0..=1.0).contains(&s.level), format!("samples[{i}].level"), "must lie in [0, 1]");
            if i > 0 {
                v.check(
                    s.t > self.samples[i - 1].t,
                    format!("samples[{i}].t"),
                    "times must be strictly increasing",
                );
            }
        }
        v
    }
}

impl ServiceTrajectory {
    pub fn new(interpolation: Interpolation, samples: Vec<ServiceSample>) -> Result<Self> {
        let out = Self { interpolation, samples };
        out.validate()?;
        Ok(out)
    }

    /// Linear trajectory from `(t, level)` pairs with empty state labels.
    pub fn linear(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            Interpolation::Linear,
            points
                .iter()
                .map(|&(t, level)| ServiceSample { t, level, state: String::new() })
                .collect(),
        )
    }

    pub fn start(&self) -> Option<f64> {
        self.samples.first().map(|s| s.t)
    }

    pub fn end(&self) -> Option<f64> {
        self.samples.last().map(|s| s.t)
    }

    /// Copy with one sample inserted before the first, e.g. the pre-event
    /// operating point.
    pub fn preceded_by(&self, t: f64, level: f64, state: &str) -> Result<Self> {
        let mut samples = vec![ServiceSample { t, level, state: state.to_string() }];
        samples.extend(self.samples.iter().cloned());
        Self::new(self.interpolation, samples)
    }

    /// Samples with `t` in `[from, to]`, for partitioned integration.
    pub fn window(&self, from: f64, to: f64) -> Result<Self> {
        Self::new(
            self.interpolation,
            self.samples.iter().filter(|s| s.t >= from && s.t <= to).cloned().collect(),
        )
    }

    /// Plot table `t,level,state`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,level,state\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{}\n", sig9(s.t), sig9(s.level), s.state));
        }
        out
    }
}

/// Integral of the linear deficit `max(baseline - level, 0)` between two
/// samples, split where the deficit changes sign.
fn clipped_segment(dt: f64, d0: f64, d1: f64) -> f64 {
    if d0 >= 0.0 && d1 >= 0.0 {
        0.5 * dt * (d0 + d1)
    } else if d0 <= 0.0 && d1 <= 0.0 {
        0.0
    } else {
        let pos = d0.max(d1);
        let cross = dt * pos / (d0 - d1).abs();
        0.5 * cross * pos
    }
}

/// Area between `baseline` and the service level wherever the level falls
/// short, over the trajectory span. Levels above the baseline contribute
/// nothing.
pub fn degradation_area(trajectory: &ServiceTrajectory, baseline: f64) -> Result<f64> {
    if trajectory.samples.is_empty() {
        return Err(Error::invalid("trajectory", "must contain at least one sample"));
    }
    if !baseline.is_finite() {
        return Err(Error::invalid("baseline", "must be finite"));
    }
    trajectory.validate()?;
    let mut area = 0.0;
    for w in trajectory.samples.windows(2) {
        let dt = w[1].t - w[0].t;
        let d0 = baseline - w[0].level;
        area += match trajectory.interpolation {
            Interpolation::Linear => clipped_segment(dt, d0, baseline - w[1].level),
            Interpolation::Hold => dt * d0.max(0.0),
        };
    }
    Ok(area)
}

/// Frequency service level: 1 inside the allowed band, falling linearly to
/// 0 at `floor_deviation` from nominal.
pub fn service_from_frequency(
    trace: &FrequencyTrace,
    params: &SystemParameters,
    floor_deviation: f64,
) -> Result<ServiceTrajectory> {
    let band = params.band_half_width;
    if !(floor_deviation.is_finite() && floor_deviation > band) {
        return Err(Error::invalid(
            "floor_deviation",
            format!("must be finite and exceed the band half-width {band} Hz"),
        ));
    }
    let samples = trace
        .samples
        .iter()
        .map(|s| {
            let dev = (s.f - params.f_n).abs();
            let level = (1.0 - (dev - band).max(0.0) / (floor_deviation - band)).clamp(0.0, 1.0);
            let state = if dev <= band { "in_band" } else { "out_of_band" };
            ServiceSample { t: s.t, level, state: state.into() }
        })
        .collect();
    ServiceTrajectory::new(Interpolation::Linear, samples)
}

/// Restoration service level: served load over `total_load` at every
/// event, held until the next one. Labels are the stage names.
pub fn service_from_restoration(timeline: &RestorationTimeline, total_load: f64) -> Result<ServiceTrajectory> {
    if !(total_load.is_finite() && total_load > 0.0) {
        return Err(Error::invalid("total_load", "must be finite and > 0"));
    }
    let mut samples: Vec<ServiceSample> = Vec::new();
    for e in &timeline.events {
        let s = ServiceSample {
            t: e.t,
            level: (e.served_total / total_load).clamp(0.0, 1.0),
            state: e.stage.to_string(),
        };
        // Events at the same instant collapse onto the latest.
        match samples.last_mut() {
            Some(last) if last.t == s.t => *last = s,
            _ => samples.push(s),
        }
    }
    ServiceTrajectory::new(Interpolation::Hold, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_shapes() {
        let flat = ServiceTrajectory::linear(&[(0.0, 1.0), (20.0, 1.0)]).unwrap();
        assert_eq!(degradation_area(&flat, 1.0).unwrap(), 0.0);
        let tri = ServiceTrajectory::linear(&[(0.0, 0.0), (10.0, 1.0)]).unwrap();
        assert_eq!(degradation_area(&tri, 1.0).unwrap(), 5.0);
        let mut rect = ServiceTrajectory::linear(&[(0.0, 0.5), (10.0, 1.0), (20.0, 1.0)]).unwrap();
        rect.interpolation = Interpolation::Hold;
        assert_eq!(degradation_area(&rect, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn clips_above_baseline() {
        let t = ServiceTrajectory::linear(&[(0.0, 0.0), (2.0, 1.0)]).unwrap();
        // Deficit 0.5 -> -0.5 crosses zero at t = 1.
        assert!((degradation_area(&t, 0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_is_rejected() {
        let t = ServiceTrajectory { interpolation: Interpolation::Linear, samples: vec![] };
        assert!(degradation_area(&t, 1.0).is_err());
    }

    #[test]
    fn frequency_mapping() {
        let params = SystemParameters::new(1000.0, 5.0);
        let trace = FrequencyTrace::from_csv("t,f,rocof\n0,50,0\n1,48.5,0\n2,47.5,0\n3,46,0\n").unwrap();
        let s = service_from_frequency(&trace, &params, 2.5).unwrap();
        let levels: Vec<f64> = s.samples.iter().map(|x| x.level).collect();
        assert_eq!(levels, vec![1.0, 0.5, 0.0, 0.0]);
        assert!(service_from_frequency(&trace, &params, 0.5).is_err());
    }
}
