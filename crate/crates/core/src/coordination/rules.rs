use super::DerUnit;

/// How an aggregate target is split across units. Implementations return one
/// non-negative weight per unit; shares are the weights normalised to 1.
pub trait DistributionRule {
    fn weights(&self, units: &[DerUnit]) -> Vec<f64>;
}

/// Weight each unit by its free headroom.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProportionalToHeadroom;

impl DistributionRule for ProportionalToHeadroom {
    fn weights(&self, units: &[DerUnit]) -> Vec<f64> {
        units.iter().map(|u| u.headroom().max(0.0)).collect()
    }
}

/// Weight each unit by its rating.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProportionalToRating;

impl DistributionRule for ProportionalToRating {
    fn weights(&self, units: &[DerUnit]) -> Vec<f64> {
        units.iter().map(|u| u.p_rating.max(0.0)).collect()
    }
}

/// Normalised shares, or `None` when every weight is zero.
pub(crate) fn shares(rule: &dyn DistributionRule, units: &[DerUnit]) -> Option<Vec<f64>> {
    let w = rule.weights(units);
    let total: f64 = w.iter().sum();
    if total > 0.0 && total.is_finite() {
        Some(w.into_iter().map(|x| x / total).collect())
    } else {
        None
    }
}
