//! Short-circuit currents on radial feeders with DER in-feed, breaker
//! operation, and detection of the misoperations DER cause: blinding,
//! sympathetic tripping and lines left energized after a trip.

mod case;
mod centralized;
mod network;
mod settings;
mod sim;
mod solver;

pub use case::{ProtectionCase, ProtectionOutcome};
pub use centralized::{
    build_signature_map, centralized_locate_fault, clear_fault, contribution_vector, isolation_plan,
    ClearingStep, FaultSignatureMap, IsolationPlan, LocatedFault, Signature,
};
pub use network::{Breaker, DerSource, FaultElement, FaultScenario, Line, Load, RadialNetwork, Source};
pub use settings::{apply_setting_group, AppliedSettings, SettingController, SettingGroup, SettingGroupTable, TopologyKey};
pub use sim::{
    detect_blinding, detect_energized, detect_sympathetic, simulate_protection, Issue, IssueKind,
    ProtectionReport, TripEvent,
};
pub use solver::{solve_fault_currents, solve_with_open, FaultContributions, FaultSolution};
