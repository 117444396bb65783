use serde::{Deserialize, Serialize};

use super::reserves::{ramp_fraction, FCR_FULL_TIME, FCR_HALF_TIME};
use super::{
    DroopCurve, FcrProduct, FrequencySample, FrequencyTrace, SecondaryReserve, SystemParameters,
};
use crate::error::{Error, Result, Validate, Violations};

/// Step change in the power balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisturbanceEvent {
    /// s.
    pub t_event: f64,
    /// pu of `s_base`; negative means lost generation.
    pub delta_p: f64,
}

/// A droop-controlled DER (or aggregate of them) with its rating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroopUnit {
    pub curve: DroopCurve,
    /// MW corresponding to 1 pu on the curve.
    pub rating_mw: f64,
}

/// Scenario document for the `frequency` subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyScenario {
    #[serde(default = "crate::schema_version")]
    pub schema_version: u32,
    pub system: SystemParameters,
    pub event: DisturbanceEvent,
    #[serde(default = "FcrProduct::none")]
    pub fcr: FcrProduct,
    #[serde(default = "SecondaryReserve::none")]
    pub secondary: SecondaryReserve,
    #[serde(default)]
    pub droop_fleet: Vec<DroopUnit>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
}

fn default_horizon() -> f64 {
    600.0
}

/// Fixed RK4 step used unless a scenario overrides it (s).
pub const DEFAULT_DT: f64 = 0.01;

fn default_dt() -> f64 {
    DEFAULT_DT
}

impl FrequencyScenario {
    pub fn simulate(&self) -> Result<FrequencyTrace> {
        self.validate()?;
        simulate_disturbance(
            &self.system,
            &self.event,
            &self.fcr,
            &self.secondary,
            &self.droop_fleet,
            self.horizon,
            self.dt,
        )
    }
}

impl Validate for FrequencyScenario {
    fn violations(&self) -> Violations {
        let mut v = Violations::new();
        crate::check_schema_version(&mut v, self.schema_version);
        v.extend(self.system.violations_at("system."));
        v.finite(self.event.t_event, "event.t_event");
        v.finite(self.event.delta_p, "event.delta_p");
        v.check(self.event.t_event >= 0.0, "event.t_event", "must be >= 0");
        v.extend(self.fcr.violations_at("fcr."));
        v.extend(self.secondary.violations_at("secondary."));
        for (i, unit) in self.droop_fleet.iter().enumerate() {
            let prefix = format!("droop_fleet[{i}].curve.");
            v.extend(unit.curve.violations_at(&prefix));
            v.check(
                unit.rating_mw >= 0.0 && unit.rating_mw.is_finite(),
                format!("droop_fleet[{i}].rating_mw"),
                "must be finite and >= 0",
            );
        }
        v.check(self.dt > 0.0 && self.dt.is_finite(), "dt", "must be finite and > 0");
        v.check(
            self.horizon > self.event.t_event && self.horizon.is_finite(),
            "horizon",
            "must be finite and exceed event.t_event",
        );
        v.check(
            self.system.h_sys > 0.0 || self.event.delta_p == 0.0,
            "system.h_sys",
            "must be > 0 when the disturbance is non-zero",
        );
        v
    }
}

struct Dynamics<'a> {
    params: &'a SystemParameters,
    event: &'a DisturbanceEvent,
    fcr: &'a FcrProduct,
    secondary: &'a SecondaryReserve,
    fleet: &'a [DroopUnit],
    activation: Option<f64>,
}

impl Dynamics<'_> {
    /// df/dt at `(t, f)`. Terms that jump in time (disturbance step,
    /// secondary withdrawal) are gated on `regime_t`, a point strictly inside
    /// the integration interval, so RK4 stages never straddle a jump.
    fn rocof(&self, t: f64, f: f64, regime_t: f64) -> f64 {
        let p = self.params;
        let df = f - p.f_n;
        let mut mw = 0.0;
        if let Some(t_act) = self.activation {
            let since = t - t_act;
            if self.fcr.capacity > 0.0 {
                let available = ramp_fraction(since) * self.fcr.capacity;
                let proportional =
                    self.fcr.capacity * (df.abs() / self.fcr.full_activation_deviation).min(1.0);
                mw -= df.signum() * available.min(proportional);
            }
            if self.secondary.capacity > 0.0 {
                let target = self.secondary.capacity.min(self.event.delta_p.abs() * p.s_base);
                mw -= self.event.delta_p.signum()
                    * target
                    * self.secondary.fraction(since, regime_t - t_act);
            }
        }
        for unit in self.fleet {
            mw += unit.rating_mw * (unit.curve.eval(f) - unit.curve.p_nominal);
        }
        let mut pu = mw / p.s_base - p.damping * df;
        if regime_t >= self.event.t_event {
            pu += self.event.delta_p;
        }
        p.f_n * pu / (2.0 * p.h_sys)
    }

    fn rk4(&self, t: f64, f: f64, h: f64) -> f64 {
        let regime = t + 0.5 * h;
        let k1 = self.rocof(t, f, regime);
        let k2 = self.rocof(t + 0.5 * h, f + 0.5 * h * k1, regime);
        let k3 = self.rocof(t + 0.5 * h, f + 0.5 * h * k2, regime);
        let k4 = self.rocof(t + h, f + h * k3, regime);
        f + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    }

    /// Times at which a right-hand-side term has a kink or jump.
    fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![self.event.t_event];
        if let Some(t) = self.activation {
            out.extend([
                t + FCR_HALF_TIME,
                t + FCR_FULL_TIME,
                t + self.secondary.full_activation_time,
                t + self.secondary.full_activation_time + self.secondary.sustain_duration,
            ]);
        }
        out
    }

    fn triggered(&self, f: f64) -> bool {
        (f - self.params.f_n).abs() > self.fcr.dead_band
    }

    /// Integrates from `(t0, f0)` to `t1`, splitting at breakpoints and at
    /// the reserve trigger.
    fn advance(&mut self, t0: f64, f0: f64, t1: f64) -> f64 {
        let mut cuts: Vec<f64> = self
            .breakpoints()
            .into_iter()
            .filter(|&b| b > t0 && b < t1)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.push(t1);

        let (mut t, mut f) = (t0, f0);
        for b in cuts {
            if b - t <= 0.0 {
                continue;
            }
            let next = self.rk4(t, f, b - t);
            if self.activation.is_none() && t >= self.event.t_event && self.triggered(next) {
                let tau = self.locate_trigger(t, f, b - t);
                let f_star = self.rk4(t, f, tau);
                self.activation = Some(t + tau);
                return self.advance(t + tau, f_star, t1);
            }
            t = b;
            f = next;
        }
        f
    }

    /// Bisection for the step length at which |f - f_n| first exceeds the
    /// dead band.
    fn locate_trigger(&self, t: f64, f: f64, h: f64) -> f64 {
        let (mut lo, mut hi) = (0.0, h);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.triggered(self.rk4(t, f, mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-15 * h.max(1.0) {
                break;
            }
        }
        hi
    }
}

/// Integrates the aggregate swing equation over `[0, horizon]` with a
/// fixed RK4 step `dt`.
///
/// Reserves trigger when `|f - f_n|` first exceeds `fcr.dead_band`; the
/// secondary reserve then starts ramping once FCR is fully activated and
/// targets the disturbance magnitude, pulling the frequency back to `f_n`.
pub fn simulate_disturbance(
    params: &SystemParameters,
    event: &DisturbanceEvent,
    fcr: &FcrProduct,
    secondary: &SecondaryReserve,
    droop_fleet: &[DroopUnit],
    horizon: f64,
    dt: f64,
) -> Result<FrequencyTrace> {
    params.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", format!("must be finite and > 0, got {dt}")));
    }
    if !event.t_event.is_finite() || event.t_event < 0.0 {
        return Err(Error::invalid("event.t_event", "must be finite and >= 0"));
    }
    if !(horizon > event.t_event) || !horizon.is_finite() {
        return Err(Error::invalid(
            "horizon",
            format!("must exceed t_event ({}), got {horizon}", event.t_event),
        ));
    }
    if params.h_sys == 0.0 && event.delta_p != 0.0 {
        return Err(Error::InfiniteRocof {
            delta_p: event.delta_p,
        });
    }

    let steps = (horizon / dt - 1e-9).ceil().max(1.0) as usize;
    let mut fs = Vec::with_capacity(steps + 1);
    fs.push(params.f_n);

    let mut dynamics = Dynamics {
        params,
        event,
        fcr,
        secondary,
        fleet: droop_fleet,
        activation: None,
    };
    if params.h_sys > 0.0 {
        let mut f = params.f_n;
        for k in 0..steps {
            let t0 = k as f64 * dt;
            let t1 = (k + 1) as f64 * dt;
            f = dynamics.advance(t0, f, t1);
            fs.push(f);
        }
    } else {
        fs.resize(steps + 1, params.f_n);
    }

    let mut samples = Vec::with_capacity(fs.len());
    for (k, &f) in fs.iter().enumerate() {
        let t = k as f64 * dt;
        let rocof = match fs.get(k + 1) {
            Some(next) => (next - f) / dt,
            None if params.h_sys > 0.0 => dynamics.rocof(t, f, t),
            None => 0.0,
        };
        samples.push(FrequencySample { t, f, rocof });
    }
    Ok(FrequencyTrace {
        dt,
        samples,
        fcr_activation: dynamics.activation,
    })
}
