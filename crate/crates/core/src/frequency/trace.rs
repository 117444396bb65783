use serde::{Deserialize, Serialize};

use super::SystemParameters;
use crate::error::{Error, Result};
use crate::format::sig9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencySample {
    pub t: f64,
    pub f: f64,
    pub rocof: f64,
}

/// Fixed-step frequency time series.
///
/// `rocof[i]` is the forward difference `(f[i+1] - f[i]) / dt`; the last
/// sample carries the instantaneous derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTrace {
    pub dt: f64,
    pub samples: Vec<FrequencySample>,
    /// Time at which the containment reserve was triggered, if it was.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fcr_activation: Option<f64>,
}

impl FrequencyTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// First sample at or after `t`.
    pub fn sample_at(&self, t: f64) -> Option<&FrequencySample> {
        self.samples.iter().find(|s| s.t >= t - 1e-9 * self.dt)
    }

    /// `t,f,rocof` CSV with nine significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * (self.samples.len() + 1));
        out.push_str("t,f,rocof\n");
        for s in &self.samples {
            out.push_str(&sig9(s.t));
            out.push(',');
            out.push_str(&sig9(s.f));
            out.push(',');
            out.push_str(&sig9(s.rocof));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["t", "f", "rocof"] {
            return Err(Error::Parse(format!(
                "expected header `t,f,rocof`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut samples = Vec::new();
        for row in reader.deserialize() {
            let s: FrequencySample = row?;
            samples.push(s);
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].t > w[0].t) {
                return Err(Error::Parse(format!(
                    "row {}: time {} does not increase",
                    i + 2,
                    w[1].t
                )));
            }
        }
        let dt = if samples.len() >= 2 {
            samples[1].t - samples[0].t
        } else {
            0.0
        };
        Ok(Self {
            dt,
            samples,
            fcr_activation: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMetrics {
    pub nadir: f64,
    pub max_abs_rocof: f64,
    pub time_outside_band: f64,
    pub settled: bool,
}

/// Nadir, peak ROCOF, time spent outside the allowed band and whether the
/// final 10% of the trace stays inside it.
///
/// Each sample stands for the interval `[t, t + dt)` when measuring time
/// outside the band.
pub fn trace_metrics(trace: &FrequencyTrace, params: &SystemParameters) -> Result<TraceMetrics> {
    if trace.samples.is_empty() {
        return Err(Error::invalid("trace", "must contain at least one sample"));
    }
    let outside = |f: f64| (f - params.f_n).abs() > params.band_half_width;
    let nadir = trace
        .samples
        .iter()
        .map(|s| s.f)
        .fold(f64::INFINITY, f64::min);
    let max_abs_rocof = trace
        .samples
        .iter()
        .map(|s| s.rocof.abs())
        .fold(0.0, f64::max);
    let time_outside_band = trace.samples.iter().filter(|s| outside(s.f)).count() as f64 * trace.dt;
    let n = trace.samples.len();
    let tail = n.div_ceil(10).max(1);
    let settled = trace.samples[n - tail..].iter().all(|s| !outside(s.f));
    Ok(TraceMetrics {
        nadir,
        max_abs_rocof,
        time_outside_band,
        settled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_of(fs: &[f64], dt: f64) -> FrequencyTrace {
        let samples = fs
            .iter()
            .enumerate()
            .map(|(i, &f)| FrequencySample {
                t: i as f64 * dt,
                f,
                rocof: fs.get(i + 1).map_or(0.0, |n| (n - f) / dt),
            })
            .collect();
        FrequencyTrace {
            dt,
            samples,
            fcr_activation: None,
        }
    }

    fn params() -> SystemParameters {
        SystemParameters::new(100.0, 5.0)
    }

    #[test]
    fn nadir_is_minimum() {
        let t = trace_of(&[50.0, 49.8, 49.6, 49.7, 49.9, 50.0], 1.0);
        let m = trace_metrics(&t, &params()).unwrap();
        assert_eq!(m.nadir, 49.6);
        assert!(m.settled);
    }

    #[test]
    fn in_band_trace_spends_no_time_outside() {
        let t = trace_of(&[50.0, 49.5, 50.5, 49.51, 50.0], 0.5);
        assert_eq!(trace_metrics(&t, &params()).unwrap().time_outside_band, 0.0);
    }

    #[test]
    fn two_seconds_at_49_4() {
        let dt = 0.01;
        let mut fs = vec![50.0; 100];
        fs.extend(std::iter::repeat_n(49.4, 200));
        fs.extend(std::iter::repeat_n(50.0, 100));
        let m = trace_metrics(&trace_of(&fs, dt), &params()).unwrap();
        assert!((m.time_outside_band - 2.0).abs() <= dt, "{}", m.time_outside_band);
    }

    #[test]
    fn unsettled_tail() {
        let mut fs = vec![50.0; 95];
        fs.extend(std::iter::repeat_n(49.0, 5));
        assert!(!trace_metrics(&trace_of(&fs, 1.0), &params()).unwrap().settled);
    }

    #[test]
    fn empty_trace_is_rejected() {
        let t = FrequencyTrace {
            dt: 0.1,
            samples: vec![],
            fcr_activation: None,
        };
        assert!(trace_metrics(&t, &params()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = trace_of(&[50.0, 49.75, 49.5], 0.01);
        let back = FrequencyTrace::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back.samples.len(), 3);
        assert!((back.dt - 0.01).abs() < 1e-12);
        assert_eq!(back.samples[1].f, 49.75);
    }
}
