use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ServiceTrajectory;
use crate::blackstart::{RestorationTimeline, Stage};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePoint {
    pub t: f64,
    /// Fraction of the system state that is degraded.
    pub degradation: f64,
    pub service: f64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    /// Service drops, or the state degrades at equal service.
    Challenge,
    /// Service improves while the state is still degraded.
    Remediation,
    /// Service improves and the state is fully restored.
    Recovery,
}

/// Arrow between consecutive points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub kind: TransitionKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpacePath {
    pub points: Vec<StatePoint>,
    pub transitions: Vec<Transition>,
}

/// Walks the trajectory through the (state degradation, service level)
/// plane. `state_metric` gives the degradation for every sample label; a
/// point is emitted whenever either coordinate changes.
pub fn state_space_path(
    trajectory: &ServiceTrajectory,
    state_metric: &BTreeMap<String, f64>,
) -> Result<StateSpacePath> {
    let mut points: Vec<StatePoint> = Vec::new();
    let mut transitions = Vec::new();
    for s in &trajectory.samples {
        let Some(&degradation) = state_metric.get(&s.state) else {
            return Err(Error::invalid("state_metric", format!("label `{}` has no degradation value", s.state)));
        };
        if !(0.0..=1.0).contains(&degradation) {
            return Err(Error::invalid("state_metric", format!("degradation of `{}` must lie in [0, 1]", s.state)));
        }
        if let Some(last) = points.last() {
            if last.degradation == degradation && last.service == s.level {
                continue;
            }
            let kind = if s.level < last.service || (s.level == last.service && degradation > last.degradation) {
                TransitionKind::Challenge
            } else if degradation == 0.0 {
                TransitionKind::Recovery
            } else {
                TransitionKind::Remediation
            };
            transitions.push(Transition { from: points.len() - 1, to: points.len(), kind });
        }
        points.push(StatePoint { t: s.t, degradation, service: s.level, label: s.state.clone() });
    }
    Ok(StateSpacePath { points, transitions })
}

/// Degradation per stage label for a restoration run: one minus running
/// generation over installed generation, taken at the last event of each
/// stage. `S1` (normal operation) maps to 0.
pub fn restoration_state_metric(timeline: &RestorationTimeline) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    out.insert(Stage::S1.to_string(), 0.0);
    for e in &timeline.events {
        let d = if timeline.total_generation > 0.0 {
            (1.0 - e.generation_mw / timeline.total_generation).clamp(0.0, 1.0)
        } else {
            1.0
        };
        out.insert(e.stage.to_string(), d);
    }
    out
}
