use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ServiceClass {
    /// Critical load not fully served.
    Unacceptable,
    /// All critical load served, some other load missing.
    Impaired,
    /// Every load served.
    Acceptable,
}

impl ServiceClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ServiceClass::Unacceptable => "Unacceptable",
            ServiceClass::Impaired => "Impaired",
            ServiceClass::Acceptable => "Acceptable",
        }
    }
}

impl std::fmt::Display for ServiceClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ServiceClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Unacceptable" => Ok(ServiceClass::Unacceptable),
            "Impaired" => Ok(ServiceClass::Impaired),
            "Acceptable" => Ok(ServiceClass::Acceptable),
            _ => Err(Error::Parse(format!("unknown service class `{s}`"))),
        }
    }
}

/// Totals are compared with a relative slack so that sums of the same
/// loads in a different order still count as complete.
fn complete(served: f64, total: f64) -> bool {
    served >= total - 1e-9 * total.abs().max(1.0)
}

pub fn classify_service(
    served_critical: f64,
    total_critical: f64,
    served_total: f64,
    total_load: f64,
) -> Result<ServiceClass> {
    let slack = |t: f64| 1e-9 * t.abs().max(1.0);
    for (name, served, total) in [
        ("served_critical", served_critical, total_critical),
        ("served_total", served_total, total_load),
    ] {
        if !(served >= 0.0) || !total.is_finite() || served > total + slack(total) {
            return Err(Error::invalid(name, format!("{served} must lie in [0, {total}]")));
        }
    }
    Ok(if complete(served_total, total_load) {
        ServiceClass::Acceptable
    } else if complete(served_critical, total_critical) {
        ServiceClass::Impaired
    } else {
        ServiceClass::Unacceptable
    })
}
