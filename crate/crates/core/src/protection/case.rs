use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::network::settings_violations;
use super::{simulate_protection, solve_fault_currents, FaultScenario, FaultSolution, ProtectionReport, RadialNetwork};
use crate::error::{Result, Validate, Violations};

/// A network, a fault on it and optional relay settings overriding the
/// breakers' own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtectionCase {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    pub network: RadialNetwork,
    pub fault: FaultScenario,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub settings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtectionOutcome {
    /// Currents before any breaker opens.
    pub initial: FaultSolution,
    pub report: ProtectionReport,
}

impl ProtectionCase {
    pub fn new(network: RadialNetwork, fault: FaultScenario) -> Self {
        Self {
            schema_version: crate::SCHEMA_VERSION,
            network,
            fault,
            settings: BTreeMap::new(),
        }
    }

    /// Settings in force: the overrides if any, else the breaker defaults.
    pub fn effective_settings(&self) -> BTreeMap<String, f64> {
        if self.settings.is_empty() {
            self.network.default_settings()
        } else {
            self.settings.clone()
        }
    }

    pub fn run(&self) -> Result<ProtectionOutcome> {
        self.validate()?;
        Ok(ProtectionOutcome {
            initial: solve_fault_currents(&self.network, &self.fault)?,
            report: simulate_protection(&self.network, &self.fault, &self.effective_settings())?,
        })
    }
}

impl Validate for ProtectionCase {
    fn violations(&self) -> Violations {
        let mut v = Violations::new();
        crate::check_schema_version(&mut v, self.schema_version);
        let mut net = self.network.violations();
        net.prefix("network.");
        v.extend(net);
        if !v.is_empty() {
            return v;
        }
        v.extend(self.fault.violations_for(&self.network));
        if !self.settings.is_empty() {
            v.extend(settings_violations(&self.network, &self.settings, "settings."));
        }
        v
    }
}
