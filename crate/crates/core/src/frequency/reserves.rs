use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};

/// Time after activation at which FCR must deliver half its capacity (s).
pub const FCR_HALF_TIME: f64 = 15.0;
/// Time after activation at which FCR must deliver full capacity (s).
pub const FCR_FULL_TIME: f64 = 30.0;

/// Frequency containment reserve.
///
/// Delivered power is proportional to the frequency deviation, reaching
/// `capacity` at `full_activation_deviation`, and is limited by the
/// activation ramp in [`fcr_ramp_output`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcrProduct {
    /// MW.
    pub capacity: f64,
    /// Deviation that triggers activation (Hz).
    #[serde(default = "default_dead_band")]
    pub dead_band: f64,
    /// Deviation at which the proportional response is saturated (Hz).
    #[serde(default = "default_full_deviation")]
    pub full_activation_deviation: f64,
}

fn default_dead_band() -> f64 {
    super::droop::DEFAULT_DEAD_BAND
}

fn default_full_deviation() -> f64 {
    0.2
}

impl FcrProduct {
    pub fn new(capacity: f64) -> Self {
        Self {
            capacity,
            dead_band: default_dead_band(),
            full_activation_deviation: default_full_deviation(),
        }
    }

    pub fn none() -> Self {
        Self::new(0.0)
    }

    pub(crate) fn violations_at(&self, prefix: &str) -> Violations {
        let mut v = Violations::new();
        v.finite(self.capacity, format!("{prefix}capacity"));
        v.check(self.capacity >= 0.0, format!("{prefix}capacity"), "must be >= 0");
        v.check(
            self.dead_band >= 0.0 && self.dead_band.is_finite(),
            format!("{prefix}dead_band"),
            "must be finite and >= 0",
        );
        v.check(
            self.full_activation_deviation > 0.0 && self.full_activation_deviation.is_finite(),
            format!("{prefix}full_activation_deviation"),
            "must be finite and > 0",
        );
        v
    }
}

/// Secondary reserve: ramps linearly from FCR full activation up to
/// `capacity` at `full_activation_time` (measured from the FCR trigger), then
/// holds for `sustain_duration` and is withdrawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondaryReserve {
    /// MW.
    pub capacity: f64,
    #[serde(default = "default_full_activation")]
    pub full_activation_time: f64,
    #[serde(default = "default_sustain")]
    pub sustain_duration: f64,
}

fn default_full_activation() -> f64 {
    300.0
}

fn default_sustain() -> f64 {
    900.0
}

impl SecondaryReserve {
    pub fn new(capacity: f64) -> Self {
        Self {
            capacity,
            full_activation_time: default_full_activation(),
            sustain_duration: default_sustain(),
        }
    }

    pub fn none() -> Self {
        Self::new(0.0)
    }

    /// Fraction of the secondary target delivered `t` seconds after the
    /// FCR trigger.
    pub(crate) fn fraction(&self, t: f64, regime_t: f64) -> f64 {
        let start = FCR_FULL_TIME;
        let full = self.full_activation_time;
        if regime_t >= full + self.sustain_duration || t <= start {
            0.0
        } else if t >= full {
            1.0
        } else {
            (t - start) / (full - start)
        }
    }

    pub(crate) fn violations_at(&self, prefix: &str) -> Violations {
        let mut v = Violations::new();
        v.finite(self.capacity, format!("{prefix}capacity"));
        v.check(self.capacity >= 0.0, format!("{prefix}capacity"), "must be >= 0");
        v.check(
            self.full_activation_time > FCR_FULL_TIME && self.full_activation_time.is_finite(),
            format!("{prefix}full_activation_time"),
            format!("must be finite and > {FCR_FULL_TIME} s"),
        );
        v.check(
            self.sustain_duration >= 0.0,
            format!("{prefix}sustain_duration"),
            "must be >= 0",
        );
        v
    }
}

/// Maximum FCR output `t_since_activation` seconds after the trigger:
/// 0 at the trigger, half capacity at 15 s, full capacity from 30 s on.
pub fn fcr_ramp_output(t_since_activation: f64, product: &FcrProduct) -> Result<f64> {
    if !(t_since_activation >= 0.0) {
        return Err(Error::invalid(
            "t_since_activation",
            format!("must be >= 0, got {t_since_activation}"),
        ));
    }
    Ok(ramp_fraction(t_since_activation) * product.capacity)
}

pub(crate) fn ramp_fraction(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t < FCR_HALF_TIME {
        0.5 * t / FCR_HALF_TIME
    } else if t < FCR_FULL_TIME {
        0.5 + 0.5 * (t - FCR_HALF_TIME) / (FCR_FULL_TIME - FCR_HALF_TIME)
    } else {
        1.0
    }
}

/// Power (MW) injected by inertia `h` at rate of change `rocof`:
/// `2 * h * (s_base / f_n) * rocof`.
pub fn inertial_power(h: f64, rocof: f64, f_n: f64, s_base: f64) -> Result<f64> {
    if !(f_n > 0.0) {
        return Err(Error::invalid("f_n", format!("must be > 0, got {f_n}")));
    }
    if !(h >= 0.0) {
        return Err(Error::invalid("h", format!("must be >= 0, got {h}")));
    }
    Ok(2.0 * h * (s_base / f_n) * rocof)
}
