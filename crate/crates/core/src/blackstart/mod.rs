//! Bottom-up restoration after a total collapse.
//!
//! Grid-forming DER start isolated microgrids in their own area (S3),
//! followers join them (S4), and area agents that can reach each other over
//! the surviving communication network pick up neighbouring areas (S4') and
//! merge microgrids once they are in synchronism (S5), until nothing more
//! can be done (S5').

mod comm;
mod microgrid;
mod monte_carlo;
mod restoration;
mod scenario;
mod service;

pub use comm::{comm_reachable, CommGraph};
pub use microgrid::{
    dispatch, form_microgrids, pick_up_area, reconnect_followers, synchronize_and_merge, wrapped_phase_difference,
    Microgrid,
};
pub use monte_carlo::{monte_carlo, place_batteries, MonteCarloResult};
pub use restoration::{
    alignment_band, run_restoration, MergeAttempt, Restoration, RestorationTimeline, Stage, TimelineEvent,
};
pub use scenario::{
    Area, Bus, CommNode, DerCapability, DerSpec, LoadSpec, RestorationScenario, Switch, SyncPolicy, Timing,
};
pub use service::{classify_service, ServiceClass};
