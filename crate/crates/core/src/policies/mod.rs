//! Pricing policies: likelihood-ratio tests (LRT, XLRT, ELRT, EXLRT), myopic
//! Bayesian baselines (MBP, CMBP) and a known-model oracle.
//!
//! Construction happens in two stages. [`PreparedPolicy::new`] validates the
//! spec against the available knowledge and precomputes everything that does
//! not depend on the episode (exploration prices, thresholds, grid revenues).
//! [`PreparedPolicy::instantiate`] then produces a fresh [`Policy`] with its
//! own random stream for each episode.

mod bayes;
mod knowledge;
mod likelihood;
mod thresholds;

use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::info::Metric;

pub use bayes::{belief_update, BeliefState};
pub use knowledge::{ArmMatrix, PolicyKnowledge};
pub use likelihood::LikelihoodState;
pub use thresholds::{default_thresholds, threshold_limits, ThresholdLimits, Thresholds};

use bayes::BayesPlan;
use likelihood::Choice;

pub const DEFAULT_KAPPA: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 0.05;
pub const DEFAULT_Q0: f64 = 0.5;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("{kind}: full curves required (only arm prices and the probability matrix were supplied)")]
    KnowledgeInsufficient { kind: PolicyKind },
    #[error("{kind} needs {expected} demand models, got {got}")]
    ModelCount {
        kind: String,
        expected: &'static str,
        got: usize,
    },
    #[error("threshold {name} = {value} violates its bound: must be < {bound} (smallest KL term)")]
    ThresholdViolation { name: String, value: f64, bound: f64 },
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: String,
    },
    #[error("parameter `{name}` does not apply to policy {kind}")]
    ParameterNotApplicable { name: &'static str, kind: PolicyKind },
    #[error("scenario is not informative: models {model_i} and {model_j} coincide at arm {arm}")]
    Uninformative {
        arm: usize,
        model_i: usize,
        model_j: usize,
    },
    #[error("no grid price separates the two models by more than delta = {delta}")]
    NoDiscriminativePrice { delta: f64 },
    #[error("oracle policy needs the true model index")]
    OracleNeedsTrueModel,
    #[error("true model index {index} out of range for {n} models")]
    TrueModelOutOfRange { index: usize, n: usize },
    #[error("no likelihood entry for price {0}")]
    UnknownPrice(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Lrt,
    Xlrt,
    Elrt,
    Exlrt,
    Mbp,
    Cmbp,
    Oracle,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Lrt => "lrt",
            PolicyKind::Xlrt => "xlrt",
            PolicyKind::Elrt => "elrt",
            PolicyKind::Exlrt => "exlrt",
            PolicyKind::Mbp => "mbp",
            PolicyKind::Cmbp => "cmbp",
            PolicyKind::Oracle => "oracle",
        }
    }

    /// Policies whose guarantees rest on the informativeness assumption.
    pub fn is_likelihood_ratio(self) -> bool {
        matches!(
            self,
            PolicyKind::Lrt | PolicyKind::Xlrt | PolicyKind::Elrt | PolicyKind::Exlrt
        )
    }

    /// Whether the policy can run on arm prices and `ρ_i(p_k*)` alone.
    pub fn needs_full_curves(self) -> bool {
        !matches!(self, PolicyKind::Lrt | PolicyKind::Elrt | PolicyKind::Oracle)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A policy and its tuning knobs. Unset knobs take their defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    /// Threshold scale for XLRT/EXLRT, in `[0, 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    /// Explicit XLRT thresholds; override `kappa` when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta1: Option<f64>,
    /// CMBP discrimination margin.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Initial belief for MBP/CMBP.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        PolicySpec {
            kind,
            kappa: None,
            eta0: None,
            eta1: None,
            delta: None,
            q0: None,
            metric: None,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = Some(kappa);
        self
    }

    pub fn with_etas(mut self, eta0: f64, eta1: f64) -> Self {
        self.eta0 = Some(eta0);
        self.eta1 = Some(eta1);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_q0(mut self, q0: f64) -> Self {
        self.q0 = Some(q0);
        self
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = Some(metric);
        self
    }

    /// Reject knobs that mean nothing for this kind, and out-of-range values.
    pub fn check(&self) -> Result<(), PolicyError> {
        use PolicyKind::*;
        let allowed: &[&str] = match self.kind {
            Lrt | Elrt | Oracle => &[],
            Xlrt => &["kappa", "eta0", "eta1", "metric"],
            Exlrt => &["kappa", "metric"],
            Mbp => &["q0"],
            Cmbp => &["q0", "delta"],
        };
        let present = [
            ("kappa", self.kappa.is_some()),
            ("eta0", self.eta0.is_some()),
            ("eta1", self.eta1.is_some()),
            ("delta", self.delta.is_some()),
            ("q0", self.q0.is_some()),
            ("metric", self.metric.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(PolicyError::ParameterNotApplicable {
                    name,
                    kind: self.kind,
                });
            }
        }
        let bad = |name: &str, value: f64, reason: &str| PolicyError::InvalidParameter {
            name: name.into(),
            value,
            reason: reason.into(),
        };
        if let Some(k) = self.kappa {
            if !(0.0..1.0).contains(&k) {
                return Err(bad("kappa", k, "must be in [0, 1)"));
            }
        }
        if self.eta0.is_some() != self.eta1.is_some() {
            let (name, v) = match self.eta0 {
                Some(v) => ("eta1", v),
                None => ("eta0", self.eta1.unwrap_or(f64::NAN)),
            };
            return Err(bad(name, v, "eta0 and eta1 must be given together"));
        }
        if let Some(q) = self.q0 {
            if !(0.0..=1.0).contains(&q) {
                return Err(bad("q0", q, "must be in [0, 1]"));
            }
        }
        if let Some(d) = self.delta {
            if !(d.is_finite() && d >= 0.0) {
                return Err(bad("delta", d, "must be finite and nonnegative"));
            }
        }
        Ok(())
    }
}

/// Something that prices one customer at a time and learns from the outcome.
pub trait PricingPolicy {
    fn choose_price(&mut self) -> f64;
    fn observe(&mut self, price: f64, outcome: bool) -> Result<(), PolicyError>;
}

#[derive(Debug)]
enum Plan {
    Lrt {
        knowledge: PolicyKnowledge,
    },
    Xlrt {
        knowledge: PolicyKnowledge,
        exploration: f64,
        thresholds: Thresholds,
    },
    Elrt {
        knowledge: PolicyKnowledge,
    },
    Exlrt {
        knowledge: PolicyKnowledge,
        exploration: Vec<Vec<f64>>,
        thresholds: Thresholds,
    },
    Bayes(BayesPlan),
    Oracle {
        arms: Vec<f64>,
    },
}

/// Validated, precomputed policy ready to be instantiated per episode.
#[derive(Clone, Debug)]
pub struct PreparedPolicy {
    spec: PolicySpec,
    plan: Arc<Plan>,
}

impl PreparedPolicy {
    pub fn new(spec: &PolicySpec, knowledge: &PolicyKnowledge) -> Result<Self, PolicyError> {
        spec.check()?;
        let kind = spec.kind;
        let n = knowledge.n_models();
        if matches!(kind, PolicyKind::Lrt | PolicyKind::Xlrt | PolicyKind::Mbp | PolicyKind::Cmbp) && n != 2 {
            return Err(PolicyError::ModelCount {
                kind: kind.name().into(),
                expected: "exactly 2",
                got: n,
            });
        }
        let scenario = match (kind.needs_full_curves(), knowledge.scenario()) {
            (true, None) => return Err(PolicyError::KnowledgeInsufficient { kind }),
            (_, s) => s,
        };
        if kind.is_likelihood_ratio() {
            if let Some(&(arm, model_i, model_j)) = knowledge.uninformative_arms().first() {
                return Err(PolicyError::Uninformative {
                    arm,
                    model_i,
                    model_j,
                });
            }
        }
        let metric = spec.metric.unwrap_or_default();
        let kappa = spec.kappa.unwrap_or(DEFAULT_KAPPA);
        let plan = match kind {
            PolicyKind::Lrt => Plan::Lrt {
                knowledge: knowledge.clone(),
            },
            PolicyKind::Elrt => Plan::Elrt {
                knowledge: knowledge.clone(),
            },
            PolicyKind::Xlrt => {
                let scenario = scenario.expect("checked above");
                let limits = threshold_limits(scenario, metric);
                let thresholds = match (spec.eta0, spec.eta1) {
                    (Some(e0), Some(e1)) => Thresholds::two_model(e0, e1),
                    _ => thresholds::scaled_thresholds(&limits, kappa),
                };
                thresholds.validate(&limits)?;
                Plan::Xlrt {
                    knowledge: knowledge.clone(),
                    exploration: limits.exploration[0][1],
                    thresholds,
                }
            }
            PolicyKind::Exlrt => {
                let scenario = scenario.expect("checked above");
                let limits = threshold_limits(scenario, metric);
                let thresholds = thresholds::scaled_thresholds(&limits, kappa);
                thresholds.validate(&limits)?;
                Plan::Exlrt {
                    knowledge: knowledge.clone(),
                    exploration: limits.exploration,
                    thresholds,
                }
            }
            PolicyKind::Mbp | PolicyKind::Cmbp => {
                let scenario = scenario.expect("checked above");
                let q0 = spec.q0.unwrap_or(DEFAULT_Q0);
                let delta = (kind == PolicyKind::Cmbp).then(|| spec.delta.unwrap_or(DEFAULT_DELTA));
                Plan::Bayes(BayesPlan::new(scenario, q0, delta)?)
            }
            PolicyKind::Oracle => Plan::Oracle {
                arms: knowledge.arms().to_vec(),
            },
        };
        Ok(PreparedPolicy {
            spec: spec.clone(),
            plan: Arc::new(plan),
        })
    }

    pub fn spec(&self) -> &PolicySpec {
        &self.spec
    }

    pub fn kind(&self) -> PolicyKind {
        self.spec.kind
    }

    /// Thresholds in force, for the exploring policies.
    pub fn thresholds(&self) -> Option<&Thresholds> {
        match &*self.plan {
            Plan::Xlrt { thresholds, .. } | Plan::Exlrt { thresholds, .. } => Some(thresholds),
            _ => None,
        }
    }

    /// Exploration price between models 0 and 1 (XLRT) or the given pair (EXLRT).
    pub fn exploration_price(&self, i: usize, h: usize) -> Option<f64> {
        match &*self.plan {
            Plan::Xlrt { exploration, .. } => Some(*exploration),
            Plan::Exlrt { exploration, .. } if i != h => Some(exploration[i][h]),
            _ => None,
        }
    }

    /// A fresh policy for one episode. `true_model` is used only by the oracle.
    pub fn instantiate(&self, true_model: Option<usize>, rng: ChaCha8Rng) -> Result<Policy, PolicyError> {
        let state = match &*self.plan {
            Plan::Lrt { knowledge }
            | Plan::Xlrt { knowledge, .. }
            | Plan::Elrt { knowledge }
            | Plan::Exlrt { knowledge, .. } => PolicyState::Likelihood(LikelihoodState::new(knowledge.n_models())),
            Plan::Bayes(plan) => PolicyState::Belief(BeliefState::new(plan.q0)),
            Plan::Oracle { arms } => {
                let i = true_model.ok_or(PolicyError::OracleNeedsTrueModel)?;
                let p = *arms.get(i).ok_or(PolicyError::TrueModelOutOfRange { index: i, n: arms.len() })?;
                PolicyState::Fixed(p)
            }
        };
        Ok(Policy {
            plan: Arc::clone(&self.plan),
            state,
            rng,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PolicyState {
    Likelihood(LikelihoodState),
    Belief(BeliefState),
    Fixed(f64),
}

/// One episode's worth of policy: shared plan, private state and randomness.
#[derive(Debug)]
pub struct Policy {
    plan: Arc<Plan>,
    state: PolicyState,
    rng: ChaCha8Rng,
}

/// Validate, precompute and instantiate in one go.
pub fn policy_init(
    spec: &PolicySpec,
    knowledge: &PolicyKnowledge,
    true_model: Option<usize>,
    rng: ChaCha8Rng,
) -> Result<Policy, PolicyError> {
    PreparedPolicy::new(spec, knowledge)?.instantiate(true_model, rng)
}

impl Policy {
    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn belief(&self) -> Option<f64> {
        match &self.state {
            PolicyState::Belief(b) => Some(b.q),
            _ => None,
        }
    }

    pub fn likelihood(&self) -> Option<&LikelihoodState> {
        match &self.state {
            PolicyState::Likelihood(s) => Some(s),
            _ => None,
        }
    }

    /// Overwrite the likelihood sums, e.g. to resume or probe a decision.
    pub fn set_likelihood(&mut self, state: LikelihoodState) {
        if let PolicyState::Likelihood(s) = &mut self.state {
            *s = state;
        }
    }

    pub fn set_belief(&mut self, q: f64) {
        if let PolicyState::Belief(b) = &mut self.state {
            b.q = q;
        }
    }
}

impl PricingPolicy for Policy {
    fn choose_price(&mut self) -> f64 {
        let rng = &mut self.rng;
        match (&*self.plan, &self.state) {
            (Plan::Oracle { .. }, PolicyState::Fixed(p)) => *p,
            (Plan::Bayes(plan), PolicyState::Belief(b)) => plan.choose(b.q),
            (Plan::Lrt { knowledge }, PolicyState::Likelihood(s)) => {
                knowledge.arms()[likelihood::lrt_arm(s, rng)]
            }
            (Plan::Elrt { knowledge }, PolicyState::Likelihood(s)) => {
                knowledge.arms()[likelihood::elrt_arm(s, rng)]
            }
            (
                Plan::Xlrt {
                    knowledge,
                    exploration,
                    thresholds,
                },
                PolicyState::Likelihood(s),
            ) => match likelihood::xlrt_choice(s, thresholds.eta0, thresholds.eta1, rng) {
                Choice::Arm(k) => knowledge.arms()[k],
                Choice::Explore(..) => *exploration,
            },
            (
                Plan::Exlrt {
                    knowledge,
                    exploration,
                    thresholds,
                },
                PolicyState::Likelihood(s),
            ) => match likelihood::exlrt_choice(s, &thresholds.eta_pair, rng) {
                Choice::Arm(k) => knowledge.arms()[k],
                Choice::Explore(i, h) => exploration[i][h],
            },
            _ => unreachable!("policy state always matches its plan"),
        }
    }

    fn observe(&mut self, price: f64, outcome: bool) -> Result<(), PolicyError> {
        match (&*self.plan, &mut self.state) {
            (Plan::Oracle { .. }, _) => Ok(()),
            (Plan::Bayes(plan), PolicyState::Belief(b)) => {
                let (rho0, rho1) = plan.rho(price);
                b.update(rho0, rho1, outcome);
                Ok(())
            }
            (
                Plan::Lrt { knowledge }
                | Plan::Elrt { knowledge }
                | Plan::Xlrt { knowledge, .. }
                | Plan::Exlrt { knowledge, .. },
                PolicyState::Likelihood(s),
            ) => s.observe(knowledge, price, outcome),
            _ => unreachable!("policy state always matches its plan"),
        }
    }
}
