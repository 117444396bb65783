use serde::{Deserialize, Serialize};

use super::ServiceTrajectory;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Defend,
    Detect,
    Remediate,
    Recover,
}

/// Times of the four inner-loop milestones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEvents {
    pub challenge: f64,
    pub detection: f64,
    pub remediation_start: f64,
    pub recovery_complete: f64,
}

/// Half-open `[t_start, t_end)`; the last interval is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseInterval {
    pub phase: Phase,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseDurations {
    /// Challenge to detection.
    pub detection: f64,
    /// Detection to start of remediation.
    pub activation: f64,
    /// Start of remediation to recovery.
    pub remediation: f64,
    /// Recovery to the end of the trajectory.
    pub recovery: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseAnnotation {
    pub intervals: Vec<PhaseInterval>,
    pub durations: PhaseDurations,
}

impl PhaseAnnotation {
    /// Phase active at `t`, if `t` lies in the annotated span.
    pub fn phase_at(&self, t: f64) -> Option<Phase> {
        let last = self.intervals.last()?;
        if t == last.t_end {
            return Some(last.phase);
        }
        self.intervals
            .iter()
            .find(|i| t >= i.t_start && t < i.t_end)
            .map(|i| i.phase)
    }
}

impl PhaseEvents {
    /// Milestones read off the trajectory itself: the challenge is the
    /// first sample below `baseline`, detection and remediation are taken
    /// as immediate, and recovery completes at the first sample after the
    /// lowest level that reaches the final level. A trajectory that never
    /// drops places every milestone at its end.
    pub fn infer(trajectory: &ServiceTrajectory, baseline: f64) -> Result<Self> {
        let s = &trajectory.samples;
        let Some(last) = s.last() else {
            return Err(Error::invalid("trajectory", "must contain at least one sample"));
        };
        let Some(first_drop) = s.iter().position(|x| x.level < baseline) else {
            let t = last.t;
            return Ok(Self { challenge: t, detection: t, remediation_start: t, recovery_complete: t });
        };
        let lowest = s
            .iter()
            .enumerate()
            .skip(first_drop)
            .min_by(|a, b| a.1.level.total_cmp(&b.1.level))
            .map(|(i, _)| i)
            .unwrap_or(first_drop);
        let recovered = s[lowest..]
            .iter()
            .find(|x| x.level >= last.level)
            .map_or(last.t, |x| x.t);
        let t = s[first_drop].t;
        Ok(Self { challenge: t, detection: t, remediation_start: t, recovery_complete: recovered })
    }
}

/// Splits the trajectory span into Defend, Detect, Remediate and Recover.
pub fn annotate_phases(trajectory: &ServiceTrajectory, events: &PhaseEvents) -> Result<PhaseAnnotation> {
    let (Some(start), Some(end)) = (trajectory.start(), trajectory.end()) else {
        return Err(Error::invalid("trajectory", "must contain at least one sample"));
    };
    let marks = [
        ("challenge", events.challenge),
        ("detection", events.detection),
        ("remediation_start", events.remediation_start),
        ("recovery_complete", events.recovery_complete),
    ];
    let mut prev = ("start of trajectory", start);
    for (name, t) in marks {
        if !t.is_finite() || t < prev.1 {
            return Err(Error::invalid(name, format!("must not precede {} ({})", prev.0, prev.1)));
        }
        prev = (name, t);
    }
    if events.recovery_complete > end {
        return Err(Error::invalid("recovery_complete", format!("must not exceed the end of the trajectory ({end})")));
    }
    let cuts = [start, events.challenge, events.detection, events.recovery_complete, end];
    let phases = [Phase::Defend, Phase::Detect, Phase::Remediate, Phase::Recover];
    let intervals = phases
        .iter()
        .zip(cuts.windows(2))
        .map(|(&phase, w)| PhaseInterval { phase, t_start: w[0], t_end: w[1] })
        .collect();
    Ok(PhaseAnnotation {
        intervals,
        durations: PhaseDurations {
            detection: events.detection - events.challenge,
            activation: events.remediation_start - events.detection,
            remediation: events.recovery_complete - events.remediation_start,
            recovery: end - events.recovery_complete,
        },
    })
}
