//! Dynamic pricing against a finite set of candidate demand curves.
//!
//! A seller offers prices to one customer at a time and sees only whether
//! each sale happened. The demand curve is one of `N` known candidates, but
//! which one is unknown. Taking each candidate's revenue-maximizing price as
//! an arm turns this into a bandit whose arms share one underlying model, so
//! every observation informs every arm. Likelihood-ratio policies exploit
//! that to keep the number of wrong-price offers bounded in the horizon.
//!
//! Modules:
//! - [`demand`]: curves, revenue, optimal prices, scenario validation.
//! - [`info`]: Bernoulli KL and Chernoff distances, exploration prices.
//! - [`policies`]: LRT, XLRT, ELRT, EXLRT, MBP, CMBP and an oracle.
//! - [`sim`]: episodes, Monte Carlo experiments, CSV output.
//! - [`bounds`]: the pull-count and regret caps implied by Hoeffding's inequality.

pub mod bounds;
pub mod demand;
pub mod info;
pub mod optimize;
pub mod policies;
pub mod sim;

pub use bounds::{elrt_bound, lrt_bound, xlrt_bound, BoundError, BoundReport, CompetitorBound};
pub use demand::{
    validate_scenario, DemandError, DemandModel, Interval, Scenario, ValidationReport,
};
pub use info::{
    chernoff_bernoulli, chernoff_harmonic_approx, exploration_price, kl_bernoulli, ChernoffResult,
    Metric,
};
pub use optimize::GridConfig;
pub use policies::{
    default_thresholds, policy_init, Policy, PolicyError, PolicyKind, PolicyKnowledge, PolicySpec,
    PreparedPolicy, PricingPolicy, Thresholds,
};
pub use sim::{
    regret_trajectory, run_episode, run_monte_carlo, EpisodeResult, ExperimentResult,
    MonteCarloConfig, SimError,
};
