use crate::demand::{clamp_prob, Scenario, INFORMATIVENESS_TOLERANCE};

use super::PolicyError;

/// What a policy is told about the hypothesis set.
///
/// The likelihood-ratio policies without exploration only ever offer arm
/// prices, so the probabilities `ρ_i(p_k*)` are all they need. Everything
/// that offers other prices needs the whole curves.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicyKnowledge {
    MatrixOnly(ArmMatrix),
    FullCurves(Scenario),
}

/// Arm prices `p_k*` and the matrix `ρ_i(p_k*)` (row `i` = model, column `k` = arm).
#[derive(Clone, Debug, PartialEq)]
pub struct ArmMatrix {
    optimal_prices: Vec<f64>,
    prob_matrix: Vec<Vec<f64>>,
}

impl ArmMatrix {
    pub fn new(optimal_prices: Vec<f64>, prob_matrix: Vec<Vec<f64>>) -> Result<Self, PolicyError> {
        let n = optimal_prices.len();
        if n < 2 {
            return Err(PolicyError::ModelCount {
                kind: "arm matrix".into(),
                expected: "at least 2",
                got: n,
            });
        }
        if prob_matrix.len() != n || prob_matrix.iter().any(|row| row.len() != n) {
            return Err(PolicyError::InvalidParameter {
                name: "prob_matrix".into(),
                value: f64::NAN,
                reason: format!("must be {n}x{n}"),
            });
        }
        let prob_matrix = prob_matrix
            .into_iter()
            .map(|row| row.into_iter().map(clamp_prob).collect())
            .collect();
        Ok(ArmMatrix {
            optimal_prices,
            prob_matrix,
        })
    }

    pub fn optimal_prices(&self) -> &[f64] {
        &self.optimal_prices
    }

    pub fn prob(&self, model: usize, arm: usize) -> f64 {
        self.prob_matrix[model][arm]
    }

    fn arm_of(&self, price: f64) -> Option<usize> {
        self.optimal_prices.iter().position(|&p| p == price)
    }
}

impl PolicyKnowledge {
    pub fn matrix_only(scenario: &Scenario) -> Self {
        PolicyKnowledge::MatrixOnly(ArmMatrix {
            optimal_prices: scenario.optimal_prices().to_vec(),
            prob_matrix: scenario.prob_matrix().to_vec(),
        })
    }

    pub fn full_curves(scenario: &Scenario) -> Self {
        PolicyKnowledge::FullCurves(scenario.clone())
    }

    pub fn n_models(&self) -> usize {
        self.arms().len()
    }

    pub fn arms(&self) -> &[f64] {
        match self {
            PolicyKnowledge::MatrixOnly(m) => m.optimal_prices(),
            PolicyKnowledge::FullCurves(s) => s.optimal_prices(),
        }
    }

    pub fn scenario(&self) -> Option<&Scenario> {
        match self {
            PolicyKnowledge::FullCurves(s) => Some(s),
            PolicyKnowledge::MatrixOnly(_) => None,
        }
    }

    /// `ρ_model(price)`, or `None` if the knowledge has no entry for `price`.
    pub fn prob(&self, model: usize, price: f64) -> Option<f64> {
        match self {
            PolicyKnowledge::MatrixOnly(m) => m.arm_of(price).map(|k| m.prob(model, k)),
            PolicyKnowledge::FullCurves(s) => Some(s.model(model).eval(price)),
        }
    }

    /// `(arm, i, j)` triples where two models agree at an arm price.
    pub(crate) fn uninformative_arms(&self) -> Vec<(usize, usize, usize)> {
        let n = self.n_models();
        let prob = |i: usize, k: usize| match self {
            PolicyKnowledge::MatrixOnly(m) => m.prob(i, k),
            PolicyKnowledge::FullCurves(s) => s.prob(i, k),
        };
        let mut out = Vec::new();
        for k in 0..n {
            for i in 0..n {
                for j in (i + 1)..n {
                    if (prob(i, k) - prob(j, k)).abs() <= INFORMATIVENESS_TOLERANCE {
                        out.push((k, i, j));
                    }
                }
            }
        }
        out
    }
}
