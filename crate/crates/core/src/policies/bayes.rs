//! Myopic Bayesian pricing for two candidate models, with and without the
//! δ-discriminative restriction.

use crate::demand::{DemandModel, Interval, Scenario};
use crate::optimize::{argmax_first, golden_section_max, improves, GridConfig};

use super::PolicyError;

/// Posterior probability that model 1 is the true one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeliefState {
    pub q: f64,
}

impl BeliefState {
    pub fn new(q0: f64) -> Self {
        BeliefState { q: q0 }
    }

    /// Bayes' rule for one Bernoulli outcome given `ρ_0(p)` and `ρ_1(p)`.
    pub fn update(&mut self, rho0: f64, rho1: f64, outcome: bool) {
        self.q = belief_update(self.q, rho0, rho1, outcome);
    }
}

/// `q f_1 / (q f_1 + (1 − q) f_0)` with `f_i = ρ_i` on success, `1 − ρ_i` on failure.
///
/// An outcome with `f_0 = f_1` returns `q` bit for bit.
pub fn belief_update(q: f64, rho0: f64, rho1: f64, outcome: bool) -> f64 {
    let (f0, f1) = if outcome {
        (rho0, rho1)
    } else {
        (1.0 - rho0, 1.0 - rho1)
    };
    if f0 == f1 {
        return q;
    }
    let num = q * f1;
    let den = num + (1.0 - q) * f0;
    if den == 0.0 {
        q
    } else {
        num / den
    }
}

/// Precomputed grid revenues shared by every episode of an MBP or CMBP run.
#[derive(Clone, Debug)]
pub(crate) struct BayesPlan {
    model0: DemandModel,
    model1: DemandModel,
    interval: Interval,
    grid: GridConfig,
    nodes: Vec<f64>,
    rev0: Vec<f64>,
    rev1: Vec<f64>,
    /// `Some(δ)` for CMBP.
    delta: Option<f64>,
    admissible: Vec<bool>,
    pub(crate) q0: f64,
}

impl BayesPlan {
    pub(crate) fn new(scenario: &Scenario, q0: f64, delta: Option<f64>) -> Result<Self, PolicyError> {
        let model0 = scenario.model(0).clone();
        let model1 = scenario.model(1).clone();
        let interval = scenario.interval();
        let grid = *scenario.grid();
        let nodes: Vec<f64> = grid.nodes(interval.l, interval.u).collect();
        let rev0 = nodes.iter().map(|&p| model0.revenue(p)).collect();
        let rev1 = nodes.iter().map(|&p| model1.revenue(p)).collect();
        let admissible: Vec<bool> = nodes
            .iter()
            .map(|&p| discriminates(&model0, &model1, p, delta))
            .collect();
        if let Some(d) = delta {
            if !admissible.iter().any(|&a| a) {
                return Err(PolicyError::NoDiscriminativePrice { delta: d });
            }
        }
        Ok(BayesPlan {
            model0,
            model1,
            interval,
            grid,
            nodes,
            rev0,
            rev1,
            delta,
            admissible,
            q0,
        })
    }

    pub(crate) fn rho(&self, price: f64) -> (f64, f64) {
        (self.model0.eval(price), self.model1.eval(price))
    }

    /// Price maximizing `q r_1(p) + (1 − q) r_0(p)`, restricted to
    /// discriminative prices for CMBP.
    pub(crate) fn choose(&self, q: f64) -> f64 {
        let objective = |i: usize| q * self.rev1[i] + (1.0 - q) * self.rev0[i];
        let (best, value) = argmax_first(
            (0..self.nodes.len()).map(|i| self.admissible[i].then(|| objective(i))),
        )
        .expect("plan guarantees an admissible node");
        let last = self.nodes.len() - 1;
        let lo = if best > 0 && self.admissible[best - 1] { best - 1 } else { best };
        let hi = if best < last && self.admissible[best + 1] { best + 1 } else { best };
        let x0 = self.nodes[best];
        if lo == hi {
            return x0;
        }
        let f = |p: f64| q * self.model1.revenue(p) + (1.0 - q) * self.model0.revenue(p);
        let (x, v) = golden_section_max(f, self.nodes[lo], self.nodes[hi], self.grid.tolerance);
        if improves(v, value)
            && self.interval.contains(x)
            && discriminates(&self.model0, &self.model1, x, self.delta)
        {
            x
        } else {
            x0
        }
    }
}

fn discriminates(m0: &DemandModel, m1: &DemandModel, p: f64, delta: Option<f64>) -> bool {
    match delta {
        None => true,
        Some(d) => (m0.eval(p) - m1.eval(p)).abs() > d,
    }
}
