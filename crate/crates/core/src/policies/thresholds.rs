//! Exploration bands for XLRT and EXLRT.
//!
//! A threshold `η_{d1,d2}` must sit strictly below the smallest of three
//! divergences `I(ρ_d1(p) ‖ ρ_d2(p))`, taken at `p_d1*`, `p_x^{d1,d2}` and
//! `p_d2*`. Below that bound the log-likelihood statistic under the true
//! model still drifts past the threshold, which is what keeps the number of
//! exploration and wrong-arm pulls finite.

use crate::demand::Scenario;
use crate::info::{exploration_price, kl_bernoulli, Metric};

use super::PolicyError;

/// Upper limits for every ordered pair, plus the exploration prices they use.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdLimits {
    /// `exploration[i][h] = p_x^{i,h}`; symmetric, diagonal unused.
    pub exploration: Vec<Vec<f64>>,
    /// `pair[d1][d2]`: the minimum of the three KL terms for `η_{d1,d2}`.
    pub pair: Vec<Vec<f64>>,
}

impl ThresholdLimits {
    /// Bound on `η_1` in the two-model case (true model ρ_1 leading).
    pub fn eta1(&self) -> f64 {
        self.pair[1][0]
    }

    /// Bound on `η_0` in the two-model case.
    pub fn eta0(&self) -> f64 {
        self.pair[0][1]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    pub eta0: f64,
    pub eta1: f64,
    /// `eta_pair[d1][d2]`; for two models `eta_pair[1][0] = eta1` and `eta_pair[0][1] = eta0`.
    pub eta_pair: Vec<Vec<f64>>,
}

impl Thresholds {
    /// Two-model thresholds given explicitly.
    pub fn two_model(eta0: f64, eta1: f64) -> Self {
        Thresholds {
            eta0,
            eta1,
            eta_pair: vec![vec![0.0, eta0], vec![eta1, 0.0]],
        }
    }

    /// Every η must be finite, nonnegative and strictly below its limit.
    pub fn validate(&self, limits: &ThresholdLimits) -> Result<(), PolicyError> {
        let n = limits.pair.len();
        if self.eta_pair.len() != n || self.eta_pair.iter().any(|r| r.len() != n) {
            return Err(PolicyError::InvalidParameter {
                name: "eta_pair".into(),
                value: f64::NAN,
                reason: format!("must be {n}x{n}"),
            });
        }
        for d1 in 0..n {
            for d2 in 0..n {
                if d1 == d2 {
                    continue;
                }
                let eta = self.eta_pair[d1][d2];
                let name = if n == 2 {
                    if d1 == 1 { "eta1" } else { "eta0" }.to_string()
                } else {
                    format!("eta[{d1},{d2}]")
                };
                if !(eta.is_finite() && eta >= 0.0) {
                    return Err(PolicyError::InvalidParameter {
                        name,
                        value: eta,
                        reason: "must be finite and nonnegative".into(),
                    });
                }
                let bound = limits.pair[d1][d2];
                if eta >= bound {
                    return Err(PolicyError::ThresholdViolation { name, value: eta, bound });
                }
            }
        }
        Ok(())
    }
}

/// Exploration prices and KL limits for every pair of models.
#[allow(clippy::needless_range_loop)]
pub fn threshold_limits(scenario: &Scenario, metric: Metric) -> ThresholdLimits {
    let n = scenario.n_models();
    let mut exploration = vec![vec![f64::NAN; n]; n];
    for i in 0..n {
        for h in (i + 1)..n {
            let px = exploration_price(
                scenario.model(i),
                scenario.model(h),
                scenario.interval(),
                scenario.grid(),
                metric,
            );
            exploration[i][h] = px;
            exploration[h][i] = px;
        }
    }
    let mut pair = vec![vec![0.0; n]; n];
    for d1 in 0..n {
        for d2 in 0..n {
            if d1 == d2 {
                continue;
            }
            let kl_at = |p: f64| kl_bernoulli(scenario.model(d1).eval(p), scenario.model(d2).eval(p));
            pair[d1][d2] = [
                scenario.optimal_price(d1),
                exploration[d1][d2],
                scenario.optimal_price(d2),
            ]
            .into_iter()
            .map(kl_at)
            .fold(f64::INFINITY, f64::min);
        }
    }
    ThresholdLimits { exploration, pair }
}

/// `κ` times each limit.
pub fn default_thresholds(scenario: &Scenario, kappa: f64, metric: Metric) -> Thresholds {
    scaled_thresholds(&threshold_limits(scenario, metric), kappa)
}

pub fn scaled_thresholds(limits: &ThresholdLimits, kappa: f64) -> Thresholds {
    let eta_pair: Vec<Vec<f64>> = limits
        .pair
        .iter()
        .map(|row| row.iter().map(|b| kappa * b).collect())
        .collect();
    let (eta0, eta1) = if eta_pair.len() == 2 {
        (eta_pair[0][1], eta_pair[1][0])
    } else {
        (f64::NAN, f64::NAN)
    };
    Thresholds {
        eta0,
        eta1,
        eta_pair,
    }
}
