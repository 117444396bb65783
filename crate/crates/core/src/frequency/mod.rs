//! Aggregate grid frequency after a power imbalance.
//!
//! The grid is a single equivalent machine obeying the swing equation
//! `df/dt = f_n * dP / (2 * H)` with `dP` in per unit of the system base.
//! The imbalance terms are the disturbance step, linear load damping, the
//! frequency containment reserve (FCR), a secondary reserve and a fleet of
//! DER droop controllers.

mod droop;
mod presets;
mod reserves;
mod sim;
mod trace;

pub use droop::{evaluate_droop, DroopCurve, OverAnchor, UnderAnchor};
pub use presets::{preset, InertiaOutlook, COUNTRY_OUTLOOK};
pub use reserves::{fcr_ramp_output, inertial_power, FcrProduct, SecondaryReserve};
pub use sim::{simulate_disturbance, DEFAULT_DT, DisturbanceEvent, DroopUnit, FrequencyScenario};
pub use trace::{trace_metrics, FrequencySample, FrequencyTrace, TraceMetrics};

use serde::{Deserialize, Serialize};

use crate::error::{Validate, Violations};

/// Aggregate grid model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParameters {
    /// Nominal frequency (Hz).
    #[serde(default = "default_f_n")]
    pub f_n: f64,
    /// System base power (MVA).
    pub s_base: f64,
    /// Aggregate inertia constant (s).
    pub h_sys: f64,
    /// Load self-regulation (pu power per Hz).
    #[serde(default)]
    pub damping: f64,
    /// Allowed deviation around `f_n` (Hz).
    #[serde(default = "default_band")]
    pub band_half_width: f64,
}

fn default_f_n() -> f64 {
    50.0
}

fn default_band() -> f64 {
    0.5
}

impl SystemParameters {
    pub fn new(s_base: f64, h_sys: f64) -> Self {
        Self {
            f_n: default_f_n(),
            s_base,
            h_sys,
            damping: 0.0,
            band_half_width: default_band(),
        }
    }

    pub fn with_damping(mut self, damping: f64) -> Self {
        self.damping = damping;
        self
    }

    pub(crate) fn violations_at(&self, prefix: &str) -> Violations {
        let mut v = Violations::new();
        let p = |name: &str| format!("{prefix}{name}");
        for (name, value) in [
            ("f_n", self.f_n),
            ("s_base", self.s_base),
            ("h_sys", self.h_sys),
            ("damping", self.damping),
            ("band_half_width", self.band_half_width),
        ] {
            v.finite(value, p(name));
        }
        v.check(self.f_n > 0.0, p("f_n"), "must be > 0");
        v.check(self.s_base > 0.0, p("s_base"), "must be > 0");
        v.check(self.h_sys >= 0.0, p("h_sys"), "must be >= 0");
        v.check(self.damping >= 0.0, p("damping"), "must be >= 0");
        v.check(
            self.band_half_width > 0.0,
            p("band_half_width"),
            "must be > 0",
        );
        v
    }
}

impl Validate for SystemParameters {
    fn violations(&self) -> Violations {
        self.violations_at("")
    }
}
