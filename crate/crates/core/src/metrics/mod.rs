//! Resilience quantities derived from simulation output.
//!
//! Everything is computed on a [`ServiceTrajectory`]: the fraction of the
//! required service delivered over time. Frequency traces map onto it
//! through a linear ramp outside the allowed band, restoration timelines
//! through served load.

mod phases;
mod state_space;
mod trajectory;

pub use phases::{annotate_phases, Phase, PhaseAnnotation, PhaseDurations, PhaseEvents, PhaseInterval};
pub use state_space::{restoration_state_metric, state_space_path, StatePoint, StateSpacePath, Transition, TransitionKind};
pub use trajectory::{
    degradation_area, service_from_frequency, service_from_restoration, Interpolation, ServiceSample,
    ServiceTrajectory, DEFAULT_FLOOR_DEVIATION,
};
