//! Numeric values of the constants behind the bounded-regret guarantees.
//!
//! For a true model `i` and a competitor `h`, the per-step log-likelihood
//! increments `Z = log f_i(y) / f_h(y)` are bounded in `[m, M]` over the
//! prices a policy can offer, and have mean at least `a` (the smallest KL
//! divergence over those prices, less the threshold). Hoeffding then gives
//! `Pr{(1/t) Σ Z < η} ≤ exp(−t / C)` with `C = (M − m)² / (2a²)`, and
//! summing over `t` caps the expected number of non-optimal offers by `C`.

use std::fmt;

use thiserror::Error;

use crate::demand::{validate_scenario, Scenario};
use crate::info::{exploration_price, kl_bernoulli, Metric};
use crate::policies::Thresholds;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("scenario failed validation: {0} informativeness violations")]
    InvalidScenario(usize),
    #[error("{policy} bounds need exactly 2 models, got {got}")]
    ModelCount { policy: &'static str, got: usize },
    #[error("true model index {index} out of range for {n} models")]
    TrueModelOutOfRange { index: usize, n: usize },
    #[error("threshold {eta} leaves no drift against model {competitor}: a = {a} <= 0")]
    ThresholdViolation { competitor: usize, eta: f64, a: f64 },
}

/// Constants for one competing model.
#[derive(Clone, Debug, PartialEq)]
pub struct CompetitorBound {
    pub competitor: usize,
    /// Smallest expected drift of `Z`, net of the threshold (nats).
    pub a: f64,
    /// Range of the increments `Z` over prices and outcomes.
    pub m: f64,
    pub big_m: f64,
    /// `(M − m)² / (2a²)`.
    pub c: f64,
    /// The price attaining the smallest KL term.
    pub worst_price: f64,
    /// Threshold subtracted from the KL minimum.
    pub eta: f64,
}

impl CompetitorBound {
    /// Hoeffding tail `exp(−t / C)`.
    pub fn tail_bound(&self, t: usize) -> f64 {
        (-(t as f64) / self.c).exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub policy: &'static str,
    pub true_model: usize,
    /// Prices the policy can offer, in the order used for the bound.
    pub price_set: Vec<f64>,
    pub competitors: Vec<CompetitorBound>,
    /// `C` for two models, `(N − 1) · max_h C_h` in general.
    pub total_pull_cap: f64,
    /// `Σ_h C_h`, never larger than `total_pull_cap`.
    pub sum_pull_cap: f64,
    /// `total_pull_cap` times the largest per-step revenue loss in the price set.
    pub regret_cap: f64,
    pub max_gap: f64,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.competitors {
            writeln!(
                f,
                "{:<6} true={} vs={} a={:.6} m={:.6} M={:.6} C={:.4} total={:.4} sum={:.4} regret_cap={:.4}",
                self.policy,
                self.true_model,
                c.competitor,
                c.a,
                c.m,
                c.big_m,
                c.c,
                self.total_pull_cap,
                self.sum_pull_cap,
                self.regret_cap
            )?;
        }
        Ok(())
    }
}

fn check(scenario: &Scenario, true_index: usize) -> Result<(), BoundError> {
    let n = scenario.n_models();
    if true_index >= n {
        return Err(BoundError::TrueModelOutOfRange { index: true_index, n });
    }
    let report = validate_scenario(scenario);
    if !report.is_valid() {
        return Err(BoundError::InvalidScenario(report.violations.len()));
    }
    Ok(())
}

/// Constants for true model `i` against `h` over `prices`, with the KL minimum reduced by `eta`.
fn competitor_bound(
    scenario: &Scenario,
    i: usize,
    h: usize,
    prices: &[f64],
    eta: f64,
) -> Result<CompetitorBound, BoundError> {
    let (mi, mh) = (scenario.model(i), scenario.model(h));
    let mut min_kl = f64::INFINITY;
    let mut worst_price = prices[0];
    let mut m = f64::INFINITY;
    let mut big_m = f64::NEG_INFINITY;
    for &p in prices {
        let (ri, rh) = (mi.eval(p), mh.eval(p));
        let kl = kl_bernoulli(ri, rh);
        if kl < min_kl {
            min_kl = kl;
            worst_price = p;
        }
        for z in [(ri / rh).ln(), ((1.0 - ri) / (1.0 - rh)).ln()] {
            m = m.min(z);
            big_m = big_m.max(z);
        }
    }
    let a = min_kl - eta;
    if a <= 0.0 {
        return Err(BoundError::ThresholdViolation { competitor: h, eta, a });
    }
    Ok(CompetitorBound {
        competitor: h,
        a,
        m,
        big_m,
        c: (big_m - m).powi(2) / (2.0 * a * a),
        worst_price,
        eta,
    })
}

fn assemble(
    policy: &'static str,
    scenario: &Scenario,
    true_index: usize,
    price_set: Vec<f64>,
    competitors: Vec<CompetitorBound>,
) -> BoundReport {
    let max_c = competitors.iter().map(|c| c.c).fold(0.0, f64::max);
    let total_pull_cap = competitors.len() as f64 * max_c;
    let sum_pull_cap = competitors.iter().map(|c| c.c).sum();
    let truth = scenario.model(true_index);
    let best = scenario.optimal_price(true_index);
    let best_rev = scenario.revenue_at_optimal()[true_index];
    let max_gap = price_set
        .iter()
        .filter(|&&p| p != best)
        .map(|&p| (best_rev - truth.revenue(p)).max(0.0))
        .fold(0.0, f64::max);
    BoundReport {
        policy,
        true_model: true_index,
        price_set,
        competitors,
        total_pull_cap,
        sum_pull_cap,
        regret_cap: total_pull_cap * max_gap,
        max_gap,
    }
}

/// LRT: the two arm prices, zero threshold.
pub fn lrt_bound(scenario: &Scenario, true_index: usize) -> Result<BoundReport, BoundError> {
    if scenario.n_models() != 2 {
        return Err(BoundError::ModelCount {
            policy: "lrt",
            got: scenario.n_models(),
        });
    }
    let mut report = elrt_bound(scenario, true_index)?;
    report.policy = "lrt";
    Ok(report)
}

/// XLRT: prices `{p_0*, p_x, p_1*}`, KL minimum reduced by `η_1` (truth 1) or `η_0` (truth 0).
pub fn xlrt_bound(
    scenario: &Scenario,
    true_index: usize,
    thresholds: &Thresholds,
    metric: Metric,
) -> Result<BoundReport, BoundError> {
    if scenario.n_models() != 2 {
        return Err(BoundError::ModelCount {
            policy: "xlrt",
            got: scenario.n_models(),
        });
    }
    check(scenario, true_index)?;
    let px = exploration_price(
        scenario.model(0),
        scenario.model(1),
        scenario.interval(),
        scenario.grid(),
        metric,
    );
    let prices = vec![scenario.optimal_price(0), px, scenario.optimal_price(1)];
    let h = 1 - true_index;
    let eta = if true_index == 1 { thresholds.eta1 } else { thresholds.eta0 };
    let comp = competitor_bound(scenario, true_index, h, &prices, eta)?;
    Ok(assemble("xlrt", scenario, true_index, prices, vec![comp]))
}

/// ELRT: the `N` arm prices, one set of constants per competitor.
pub fn elrt_bound(scenario: &Scenario, true_index: usize) -> Result<BoundReport, BoundError> {
    check(scenario, true_index)?;
    let prices = scenario.optimal_prices().to_vec();
    let competitors = (0..scenario.n_models())
        .filter(|&h| h != true_index)
        .map(|h| competitor_bound(scenario, true_index, h, &prices, 0.0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(assemble("elrt", scenario, true_index, prices, competitors))
}
