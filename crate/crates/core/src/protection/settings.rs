use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::network::{settings_violations, RadialNetwork};
use crate::error::{Error, Result, Validate, Violations};

/// Grid configuration a setting group is prepared for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TopologyKey {
    pub islanded: bool,
    pub ders: BTreeSet<String>,
}

impl TopologyKey {
    pub fn new<I, S>(islanded: bool, ders: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            islanded,
            ders: ders.into_iter().map(Into::into).collect(),
        }
    }

    /// Key describing the network's current state.
    pub fn of(net: &RadialNetwork) -> Self {
        Self::new(
            !net.source.available,
            net.ders.iter().filter(|d| d.injecting).map(|d| d.id.clone()),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingGroup {
    pub key: TopologyKey,
    pub settings: BTreeMap<String, f64>,
}

/// Relay settings pre-computed per grid configuration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SettingGroupTable {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    pub groups: Vec<SettingGroup>,
}

impl SettingGroupTable {
    pub fn get(&self, key: &TopologyKey) -> Option<&BTreeMap<String, f64>> {
        self.groups.iter().find(|g| g.key == *key).map(|g| &g.settings)
    }

    /// Every group must set every breaker of `net`; keys must be unique.
    pub fn violations_for(&self, net: &RadialNetwork) -> Violations {
        let mut v = self.violations();
        for (i, g) in self.groups.iter().enumerate() {
            v.extend(settings_violations(net, &g.settings, &format!("groups[{i}].settings.")));
        }
        v
    }
}

impl Validate for SettingGroupTable {
    fn violations(&self) -> Violations {
        let mut v = Violations::new();
        crate::check_schema_version(&mut v, self.schema_version);
        let mut keys = BTreeSet::new();
        for (i, g) in self.groups.iter().enumerate() {
            v.check(keys.insert(&g.key), format!("groups[{i}].key"), "duplicate topology key");
            for (b, x) in &g.settings {
                v.check(
                    *x > 0.0 && x.is_finite(),
                    format!("groups[{i}].settings.{b}"),
                    "must be finite and > 0",
                );
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedSettings {
    /// Configuration the settings were prepared for.
    pub key: TopologyKey,
    pub settings: BTreeMap<String, f64>,
    /// True when the previous settings were kept.
    pub held: bool,
}

/// Looks up the group for `key`. When the key has no group, the previous
/// settings are kept unchanged until a matching configuration appears.
pub fn apply_setting_group(
    table: &SettingGroupTable,
    key: &TopologyKey,
    prior: Option<&AppliedSettings>,
) -> Result<AppliedSettings> {
    match (table.get(key), prior) {
        (Some(s), _) => Ok(AppliedSettings {
            key: key.clone(),
            settings: s.clone(),
            held: false,
        }),
        (None, Some(p)) => Ok(AppliedSettings {
            held: true,
            ..p.clone()
        }),
        (None, None) => Err(Error::Unconfigured),
    }
}

/// Relay controller following topology changes. While communication is
/// down it does not switch groups at all.
#[derive(Debug, Clone, Default)]
pub struct SettingController {
    pub table: SettingGroupTable,
    pub current: Option<AppliedSettings>,
}

impl SettingController {
    pub fn new(table: SettingGroupTable) -> Self {
        Self { table, current: None }
    }

    pub fn update(&mut self, key: &TopologyKey, comm_ok: bool) -> Result<&AppliedSettings> {
        let next = if comm_ok {
            apply_setting_group(&self.table, key, self.current.as_ref())?
        } else {
            match &self.current {
                Some(p) => AppliedSettings { held: true, ..p.clone() },
                None => return Err(Error::Unconfigured),
            }
        };
        Ok(self.current.insert(next))
    }
}
