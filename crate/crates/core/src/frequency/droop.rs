use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Validate, Violations};

/// Power-frequency pair defining the under-frequency slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnderAnchor {
    pub p_max: f64,
    pub f_min: f64,
}

/// Power-frequency pair defining the over-frequency slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverAnchor {
    pub p_min: f64,
    pub f_max: f64,
}

/// Piecewise-linear P(f) control law with a dead band around `f_n`.
///
/// Inside the dead band the output is `p_nominal`. Outside it the output
/// moves linearly from the dead-band edge to the anchor and saturates beyond
/// the anchor frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroopCurve {
    #[serde(default = "default_f_n")]
    pub f_n: f64,
    #[serde(default = "default_dead_band")]
    pub dead_band_half_width: f64,
    pub p_nominal: f64,
    pub under_anchor: UnderAnchor,
    pub over_anchor: OverAnchor,
}

fn default_f_n() -> f64 {
    50.0
}

/// The dead band is configurable; 20 mHz is used when none is given.
pub const DEFAULT_DEAD_BAND: f64 = 0.02;

fn default_dead_band() -> f64 {
    DEFAULT_DEAD_BAND
}

impl DroopCurve {
    pub fn new(
        f_n: f64,
        dead_band_half_width: f64,
        p_nominal: f64,
        (p_max, f_min): (f64, f64),
        (p_min, f_max): (f64, f64),
    ) -> Self {
        Self {
            f_n,
            dead_band_half_width,
            p_nominal,
            under_anchor: UnderAnchor { p_max, f_min },
            over_anchor: OverAnchor { p_min, f_max },
        }
    }

    /// Flat curve returning `p` at every frequency. The anchors sit `span`
    /// away from the dead band.
    pub fn flat(f_n: f64, dead_band_half_width: f64, p: f64, span: f64) -> Self {
        Self::new(
            f_n,
            dead_band_half_width,
            p,
            (p, f_n - dead_band_half_width - span),
            (p, f_n + dead_band_half_width + span),
        )
    }

    /// Same frequencies, every power multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self {
            p_nominal: self.p_nominal * k,
            under_anchor: UnderAnchor {
                p_max: self.under_anchor.p_max * k,
                ..self.under_anchor
            },
            over_anchor: OverAnchor {
                p_min: self.over_anchor.p_min * k,
                ..self.over_anchor
            },
            ..*self
        }
    }

    pub fn evaluate(&self, f: f64) -> Result<f64> {
        evaluate_droop(self, f)
    }

    /// Evaluation without the finiteness check, for hot loops over
    /// already-validated inputs.
    pub(crate) fn eval(&self, f: f64) -> f64 {
        let lower_edge = self.f_n - self.dead_band_half_width;
        let upper_edge = self.f_n + self.dead_band_half_width;
        let UnderAnchor { p_max, f_min } = self.under_anchor;
        let OverAnchor { p_min, f_max } = self.over_anchor;
        if f < lower_edge {
            if f <= f_min {
                p_max
            } else {
                self.p_nominal + (p_max - self.p_nominal) * (lower_edge - f) / (lower_edge - f_min)
            }
        } else if f > upper_edge {
            if f >= f_max {
                p_min
            } else {
                self.p_nominal + (p_min - self.p_nominal) * (f - upper_edge) / (f_max - upper_edge)
            }
        } else {
            self.p_nominal
        }
    }

    pub(crate) fn violations_at(&self, prefix: &str) -> Violations {
        let mut v = Violations::new();
        let p = |name: &str| format!("{prefix}{name}");
        for (name, value) in [
            ("f_n", self.f_n),
            ("dead_band_half_width", self.dead_band_half_width),
            ("p_nominal", self.p_nominal),
            ("under_anchor.p_max", self.under_anchor.p_max),
            ("under_anchor.f_min", self.under_anchor.f_min),
            ("over_anchor.p_min", self.over_anchor.p_min),
            ("over_anchor.f_max", self.over_anchor.f_max),
        ] {
            v.finite(value, p(name));
        }
        v.check(
            self.dead_band_half_width >= 0.0,
            p("dead_band_half_width"),
            "must be >= 0",
        );
        v.check(
            self.under_anchor.f_min < self.f_n - self.dead_band_half_width,
            p("under_anchor.f_min"),
            format!(
                "must be below the dead band edge f_n - dead_band = {}",
                self.f_n - self.dead_band_half_width
            ),
        );
        v.check(
            self.over_anchor.f_max > self.f_n + self.dead_band_half_width,
            p("over_anchor.f_max"),
            format!(
                "must be above the dead band edge f_n + dead_band = {}",
                self.f_n + self.dead_band_half_width
            ),
        );
        v.check(
            self.over_anchor.p_min <= self.p_nominal,
            p("over_anchor.p_min"),
            "must be <= p_nominal",
        );
        v.check(
            self.p_nominal <= self.under_anchor.p_max,
            p("under_anchor.p_max"),
            "must be >= p_nominal",
        );
        v
    }
}

impl Validate for DroopCurve {
    fn violations(&self) -> Violations {
        self.violations_at("")
    }
}

/// Output of `curve` at frequency `f`.
pub fn evaluate_droop(curve: &DroopCurve, f: f64) -> Result<f64> {
    if !f.is_finite() {
        return Err(Error::invalid("f", format!("must be finite, got {f}")));
    }
    Ok(curve.eval(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example() -> DroopCurve {
        DroopCurve::new(50.0, 0.02, 0.8, (1.0, 49.8), (0.0, 50.2))
    }

    #[test]
    fn dead_band_returns_nominal() {
        assert_eq!(evaluate_droop(&example(), 50.0).unwrap(), 0.8);
        assert_eq!(evaluate_droop(&example(), 49.985).unwrap(), 0.8);
    }

    #[test]
    fn anchor_endpoint() {
        assert_eq!(evaluate_droop(&example(), 49.8).unwrap(), 1.0);
        assert_eq!(evaluate_droop(&example(), 50.2).unwrap(), 0.0);
    }

    #[test]
    fn interpolates_between_edge_and_anchor() {
        // (49.98, 0.8) -> (49.8, 1.0), halfway at 49.89.
        let p = evaluate_droop(&example(), 49.89).unwrap();
        assert!((p - 0.9).abs() < 1e-12, "{p}");
    }

    #[test]
    fn saturates_outside_anchors() {
        assert_eq!(evaluate_droop(&example(), 47.0).unwrap(), 1.0);
        assert_eq!(evaluate_droop(&example(), 53.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_non_finite_frequency() {
        assert!(matches!(
            evaluate_droop(&example(), f64::NAN),
            Err(Error::InvalidInput { .. })
        ));
    }

    #[test]
    fn invariant_violations_are_named() {
        let mut c = example();
        c.under_anchor.f_min = 49.99;
        let v = c.violations().into_vec();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "under_anchor.f_min");
    }

    proptest! {
        #[test]
        fn non_increasing_in_frequency(
            db in 0.0..0.1f64,
            p_nom in 0.2..0.8f64,
            up in 0.0..0.5f64,
            down in 0.0..0.5f64,
            span_lo in 0.05..1.0f64,
            span_hi in 0.05..1.0f64,
            fa in 48.0..52.0f64,
            fb in 48.0..52.0f64,
        ) {
            let c = DroopCurve::new(50.0, db, p_nom, (p_nom + up, 50.0 - db - span_lo), (p_nom - down, 50.0 + db + span_hi));
            let (lo, hi) = if fa <= fb { (fa, fb) } else { (fb, fa) };
            prop_assert!(c.eval(lo) >= c.eval(hi) - 1e-12);
        }
    }
}
