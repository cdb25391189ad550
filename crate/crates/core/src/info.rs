//! Divergences between Bernoulli observation laws, and the price at which two
//! demand models are easiest to tell apart.

use serde::{Deserialize, Serialize};

use crate::demand::{clamp_prob, DemandModel, Interval};
use crate::optimize::{self, GridConfig};

/// Chernoff optimizer stops once the bracket on `t` is this narrow.
pub const CHERNOFF_T_TOLERANCE: f64 = 1e-10;

/// Which distance an exploration price maximizes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Chernoff,
    Harmonic,
}

impl Metric {
    pub fn distance(self, alpha: f64, beta: f64) -> f64 {
        match self {
            Metric::Chernoff => chernoff_bernoulli(alpha, beta).distance,
            Metric::Harmonic => chernoff_harmonic_approx(alpha, beta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChernoffResult {
    /// Nats, never negative.
    pub distance: f64,
    /// Exponent in `[0, 1]` attaining the maximum.
    pub t_star: f64,
}

/// `I(α ‖ β)` between Bernoulli(α) and Bernoulli(β), in nats.
pub fn kl_bernoulli(alpha: f64, beta: f64) -> f64 {
    let a = clamp_prob(alpha);
    let b = clamp_prob(beta);
    if a == b {
        return 0.0;
    }
    let kl = a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln();
    // Rounding can push a tiny true divergence a few ulps below zero.
    kl.max(0.0)
}

/// `log μ(t)` for Bernoulli(α), Bernoulli(β), evaluated in log space.
pub fn log_mu(alpha: f64, beta: f64, t: f64) -> f64 {
    let a = clamp_prob(alpha);
    let b = clamp_prob(beta);
    let success = (1.0 - t) * a.ln() + t * b.ln();
    let failure = (1.0 - t) * (1.0 - a).ln() + t * (1.0 - b).ln();
    let hi = success.max(failure);
    hi + ((success - hi).exp() + (failure - hi).exp()).ln()
}

/// Chernoff distance `max_t −log μ(t)` between two Bernoulli laws.
///
/// `−log μ` is concave in `t`, so golden-section search on `[0, 1]` finds
/// the global maximum.
pub fn chernoff_bernoulli(alpha: f64, beta: f64) -> ChernoffResult {
    let a = clamp_prob(alpha);
    let b = clamp_prob(beta);
    if a == b {
        return ChernoffResult {
            distance: 0.0,
            t_star: 0.5,
        };
    }
    let (t_star, value) =
        optimize::golden_section_max(|t| -log_mu(a, b, t), 0.0, 1.0, CHERNOFF_T_TOLERANCE);
    ChernoffResult {
        distance: value.max(0.0),
        t_star,
    }
}

/// Harmonic mean of the two KL divergences, halved: `1 / (1/I(α‖β) + 1/I(β‖α))`.
///
/// Returns 0 for equal inputs.
pub fn chernoff_harmonic_approx(alpha: f64, beta: f64) -> f64 {
    let forward = kl_bernoulli(alpha, beta);
    let backward = kl_bernoulli(beta, alpha);
    if forward == 0.0 || backward == 0.0 {
        return 0.0;
    }
    1.0 / (1.0 / forward + 1.0 / backward)
}

/// Price on `interval` where Bernoulli(ρ_i(p)) and Bernoulli(ρ_h(p)) are
/// farthest apart under `metric`. Ties go to the lowest price.
pub fn exploration_price(
    model_i: &DemandModel,
    model_h: &DemandModel,
    interval: Interval,
    grid: &GridConfig,
    metric: Metric,
) -> f64 {
    let objective = |p: f64| metric.distance(model_i.eval(p), model_h.eval(p));
    optimize::maximize(objective, interval.l, interval.u, grid).0
}
