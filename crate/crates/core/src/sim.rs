//! Bernoulli customers, episode runner, Monte Carlo aggregation and regret accounting.
//!
//! Reproducibility rests on two rules. Every episode's seed is a pure
//! function of `(base_seed, policy, true_model, replication)`, so the worker
//! that happens to run it does not matter. Inside an episode the customer
//! draws and the policy's own coin flips come from separate ChaCha streams,
//! so a policy that randomizes more or less often never shifts the outcomes
//! the environment produces.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::demand::{validate_scenario, DemandError, Scenario};
use crate::policies::{PolicyError, PolicyKind, PolicyKnowledge, PolicySpec, PreparedPolicy, PricingPolicy};

pub const DEFAULT_REPLICATIONS: usize = 500;

const ENV_STREAM: u64 = 0;
const POLICY_STREAM: u64 = 1;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Demand(#[from] DemandError),
    #[error("scenario has no true model index")]
    NoTrueModel,
    #[error("scenario failed validation ({0} informativeness violations); likelihood-ratio policies refuse to run")]
    InvalidScenario(usize),
    #[error("{0}")]
    Config(String),
    #[error("worker pool: {0}")]
    Pool(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
}

/// Everything that happened in one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub prices: Vec<f64>,
    pub outcomes: Vec<bool>,
    /// `pseudo_regret[t-1]` = cumulative expected revenue gap after step `t`.
    pub pseudo_regret: Vec<f64>,
    pub realized_revenue: f64,
    pub nonoptimal_pulls: usize,
    pub seed: u64,
}

impl EpisodeResult {
    pub fn horizon(&self) -> usize {
        self.prices.len()
    }

    pub fn final_regret(&self) -> f64 {
        self.pseudo_regret.last().copied().unwrap_or(0.0)
    }

    /// Cumulative regret at step `t` (1-based); zero at `t = 0`.
    pub fn regret_at(&self, t: usize) -> f64 {
        if t == 0 {
            0.0
        } else {
            self.pseudo_regret[t - 1]
        }
    }
}

/// `(t, cumulative pseudo-regret)` at each checkpoint not beyond the horizon.
pub fn regret_trajectory(episode: &EpisodeResult, checkpoints: &[usize]) -> Vec<(usize, f64)> {
    checkpoints
        .iter()
        .filter(|&&t| t >= 1 && t <= episode.horizon())
        .map(|&t| (t, episode.regret_at(t)))
        .collect()
}

/// Every step up to 100, then ten log-spaced points per decade, always ending at `horizon`.
pub fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (1..=horizon.min(100)).collect();
    let mut k = 21; // 10^(21/10) ≈ 126
    loop {
        let t = 10f64.powf(k as f64 / 10.0).round() as usize;
        if t >= horizon {
            break;
        }
        if out.last().is_none_or(|&last| t > last) {
            out.push(t);
        }
        k += 1;
    }
    if out.last() != Some(&horizon) && horizon > 0 {
        out.push(horizon);
    }
    out
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Platform-independent seed for one episode.
pub fn episode_seed(base_seed: u64, policy_index: usize, true_model: usize, replication: usize) -> u64 {
    [policy_index as u64, true_model as u64, replication as u64]
        .into_iter()
        .fold(mix64(base_seed), |acc, x| mix64(acc ^ mix64(x)))
}

/// The `(environment, policy)` random streams of an episode.
pub fn episode_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut env = ChaCha8Rng::seed_from_u64(seed);
    env.set_stream(ENV_STREAM);
    let mut pol = ChaCha8Rng::seed_from_u64(seed);
    pol.set_stream(POLICY_STREAM);
    (env, pol)
}

/// Run any policy against the true model for `horizon` steps.
pub fn run_episode_with<P, R>(
    scenario: &Scenario,
    true_model: usize,
    policy: &mut P,
    horizon: usize,
    env_rng: &mut R,
    seed: u64,
) -> Result<EpisodeResult, SimError>
where
    P: PricingPolicy + ?Sized,
    R: Rng + ?Sized,
{
    let truth = scenario.model(true_model);
    let best_price = scenario.optimal_price(true_model);
    let best_revenue = scenario.revenue_at_optimal()[true_model];
    let mut prices = Vec::with_capacity(horizon);
    let mut outcomes = Vec::with_capacity(horizon);
    let mut pseudo_regret = Vec::with_capacity(horizon);
    let mut cumulative = 0.0;
    let mut realized = 0.0;
    let mut nonoptimal = 0;
    for _ in 0..horizon {
        let price = policy.choose_price();
        let outcome = env_rng.random_bool(truth.eval(price));
        policy.observe(price, outcome)?;
        if price != best_price {
            nonoptimal += 1;
            cumulative += (best_revenue - truth.revenue(price)).max(0.0);
        }
        if outcome {
            realized += price;
        }
        prices.push(price);
        outcomes.push(outcome);
        pseudo_regret.push(cumulative);
    }
    Ok(EpisodeResult {
        prices,
        outcomes,
        pseudo_regret,
        realized_revenue: realized,
        nonoptimal_pulls: nonoptimal,
        seed,
    })
}

fn knowledge_for(kind: PolicyKind, scenario: &Scenario) -> PolicyKnowledge {
    if kind.needs_full_curves() {
        PolicyKnowledge::full_curves(scenario)
    } else {
        PolicyKnowledge::matrix_only(scenario)
    }
}

/// Validate the scenario for `spec` and precompute the policy.
pub fn prepare_policy(scenario: &Scenario, spec: &PolicySpec) -> Result<PreparedPolicy, SimError> {
    if spec.kind.is_likelihood_ratio() {
        let report = validate_scenario(scenario);
        if !report.is_valid() {
            return Err(SimError::InvalidScenario(report.violations.len()));
        }
    }
    Ok(PreparedPolicy::new(spec, &knowledge_for(spec.kind, scenario))?)
}

/// One episode of `spec` against the scenario's true model.
pub fn run_episode(
    scenario: &Scenario,
    spec: &PolicySpec,
    horizon: usize,
    seed: u64,
) -> Result<EpisodeResult, SimError> {
    let true_model = scenario.true_model_index().ok_or(SimError::NoTrueModel)?;
    let prepared = prepare_policy(scenario, spec)?;
    run_prepared(scenario, &prepared, true_model, horizon, seed)
}

fn run_prepared(
    scenario: &Scenario,
    prepared: &PreparedPolicy,
    true_model: usize,
    horizon: usize,
    seed: u64,
) -> Result<EpisodeResult, SimError> {
    let (mut env, pol) = episode_streams(seed);
    let mut policy = prepared.instantiate(Some(true_model), pol)?;
    run_episode_with(scenario, true_model, &mut policy, horizon, &mut env, seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonteCarloConfig {
    pub horizon: usize,
    pub replications: usize,
    pub base_seed: u64,
    pub workers: usize,
    /// Empty means [`default_checkpoints`].
    pub checkpoints: Vec<usize>,
    /// Which models to treat as the truth, one cell per (policy, model).
    pub true_models: Vec<usize>,
}

impl MonteCarloConfig {
    pub fn new(horizon: usize, replications: usize, base_seed: u64) -> Self {
        MonteCarloConfig {
            horizon,
            replications,
            base_seed,
            workers: 1,
            checkpoints: Vec::new(),
            true_models: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Summary {
    /// Mean, sample standard deviation and normal 95% interval.
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let half = 1.96 * std / n.sqrt();
        Summary {
            mean,
            std,
            ci_lo: mean - half,
            ci_hi: mean + half,
        }
    }

    pub fn std_error(&self, replications: usize) -> f64 {
        self.std / (replications as f64).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckpointStat {
    pub t: usize,
    pub regret: Summary,
}

/// Aggregates for one (policy, true model) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub policy: String,
    pub policy_index: usize,
    pub true_model: usize,
    pub checkpoints: Vec<CheckpointStat>,
    pub nonoptimal_pulls: Summary,
    pub realized_revenue: Summary,
    pub replications: usize,
}

impl CellResult {
    pub fn final_regret(&self) -> &Summary {
        &self.checkpoints.last().expect("at least one checkpoint").regret
    }

    pub fn regret_at(&self, t: usize) -> Option<&Summary> {
        self.checkpoints.iter().find(|c| c.t == t).map(|c| &c.regret)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentResult {
    pub horizon: usize,
    pub cells: Vec<CellResult>,
}

impl ExperimentResult {
    pub fn cell(&self, policy: &str, true_model: usize) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.policy == policy && c.true_model == true_model)
    }

    /// One row per (policy, true model, checkpoint).
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), SimError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "policy",
            "true_model",
            "t",
            "mean_regret",
            "std_regret",
            "ci_lo",
            "ci_hi",
            "mean_nonoptimal_pulls",
            "replications",
        ])?;
        for cell in &self.cells {
            for cp in &cell.checkpoints {
                w.write_record([
                    cell.policy.clone(),
                    cell.true_model.to_string(),
                    cp.t.to_string(),
                    cp.regret.mean.to_string(),
                    cp.regret.std.to_string(),
                    cp.regret.ci_lo.to_string(),
                    cp.regret.ci_hi.to_string(),
                    cell.nonoptimal_pulls.mean.to_string(),
                    cell.replications.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Per-episode numbers kept after the episode's trace is dropped.
struct EpisodeDigest {
    regrets: Vec<f64>,
    nonoptimal: f64,
    realized: f64,
}

/// Labels: the kind name, suffixed with its position when a kind repeats.
pub fn policy_labels(specs: &[PolicySpec]) -> Vec<String> {
    specs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let repeated = specs.iter().filter(|o| o.kind == s.kind).count() > 1;
            if repeated {
                format!("{}#{}", s.kind, i)
            } else {
                s.kind.to_string()
            }
        })
        .collect()
}

/// Run every policy against every requested true model, `replications` times each.
///
/// Output is bit-identical for any worker count.
pub fn run_monte_carlo(
    scenario: &Scenario,
    specs: &[PolicySpec],
    config: &MonteCarloConfig,
) -> Result<ExperimentResult, SimError> {
    if config.replications == 0 {
        return Err(SimError::Config("replications must be at least 1".into()));
    }
    if config.horizon == 0 {
        return Err(SimError::Config("horizon must be at least 1".into()));
    }
    let true_models: Vec<usize> = if config.true_models.is_empty() {
        match scenario.true_model_index() {
            Some(i) => vec![i],
            None => (0..scenario.n_models()).collect(),
        }
    } else {
        config.true_models.clone()
    };
    if let Some(&bad) = true_models.iter().find(|&&i| i >= scenario.n_models()) {
        return Err(DemandError::TrueModelOutOfRange {
            index: bad,
            n: scenario.n_models(),
        }
        .into());
    }
    let checkpoints: Vec<usize> = if config.checkpoints.is_empty() {
        default_checkpoints(config.horizon)
    } else {
        let mut c: Vec<usize> = config
            .checkpoints
            .iter()
            .copied()
            .filter(|&t| t >= 1 && t <= config.horizon)
            .collect();
        c.sort_unstable();
        c.dedup();
        if c.last() != Some(&config.horizon) {
            c.push(config.horizon);
        }
        c
    };
    let prepared: Vec<PreparedPolicy> = specs
        .iter()
        .map(|s| prepare_policy(scenario, s))
        .collect::<Result<_, _>>()?;
    let labels = policy_labels(specs);

    let jobs: Vec<(usize, usize, usize)> = (0..prepared.len())
        .flat_map(|pi| {
            true_models
                .iter()
                .flat_map(move |&tm| (0..config.replications).map(move |r| (pi, tm, r)))
        })
        .collect();
    let run_job = |&(pi, tm, r): &(usize, usize, usize)| -> Result<EpisodeDigest, SimError> {
        let seed = episode_seed(config.base_seed, pi, tm, r);
        let ep = run_prepared(scenario, &prepared[pi], tm, config.horizon, seed)?;
        Ok(EpisodeDigest {
            regrets: checkpoints.iter().map(|&t| ep.regret_at(t)).collect(),
            nonoptimal: ep.nonoptimal_pulls as f64,
            realized: ep.realized_revenue,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))?;
    let digests: Vec<EpisodeDigest> =
        pool.install(|| jobs.par_iter().map(run_job).collect::<Result<Vec<_>, _>>())?;

    let mut cells = Vec::new();
    for (chunk_index, chunk) in digests.chunks(config.replications).enumerate() {
        let pi = chunk_index / true_models.len();
        let tm = true_models[chunk_index % true_models.len()];
        let stats = checkpoints
            .iter()
            .enumerate()
            .map(|(ci, &t)| {
                let values: Vec<f64> = chunk.iter().map(|d| d.regrets[ci]).collect();
                CheckpointStat {
                    t,
                    regret: Summary::of(&values),
                }
            })
            .collect();
        let pulls: Vec<f64> = chunk.iter().map(|d| d.nonoptimal).collect();
        let revenue: Vec<f64> = chunk.iter().map(|d| d.realized).collect();
        cells.push(CellResult {
            policy: labels[pi].clone(),
            policy_index: pi,
            true_model: tm,
            checkpoints: stats,
            nonoptimal_pulls: Summary::of(&pulls),
            realized_revenue: Summary::of(&revenue),
            replications: config.replications,
        });
    }
    Ok(ExperimentResult {
        horizon: config.horizon,
        cells,
    })
}
