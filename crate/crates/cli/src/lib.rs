//! Subcommands behind the `dynprice` binary.
//!
//! Each `cmd_*` function writes its report to the given writer and returns
//! an error whose [`CliError::exit_code`] the binary exits with.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use dynprice_core::policies::PreparedPolicy;
use dynprice_core::sim::{policy_labels, SimError};
use dynprice_core::{
    chernoff_bernoulli, elrt_bound, exploration_price, lrt_bound, run_monte_carlo,
    validate_scenario, xlrt_bound, BoundError, BoundReport, Metric, PolicyKind, PolicyKnowledge,
    PolicySpec,
};
use thiserror::Error;

pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Parse(String),
    #[error("config: {0}")]
    Invalid(config::Invalid),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("scenario failed validation")]
    ScenarioInvalid,
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    /// 2 for I/O failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Sim(SimError::Io(_) | SimError::Csv(_)) => 2,
            _ => 1,
        }
    }
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Command-line overrides for `run`.
#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

/// Run the Monte Carlo experiment, write the CSV and print final regrets.
pub fn cmd_run(config_path: &Path, overrides: &RunOverrides, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = ExperimentConfig::load(config_path)?;
    if let Some(seed) = overrides.seed {
        cfg.run.base_seed = seed;
    }
    if let Some(w) = overrides.workers {
        cfg.run.workers = w.max(1);
    }
    if cfg.policies.is_empty() {
        return Err(CliError::Usage("config: no [[policies]] to run".into()));
    }
    let csv_path = overrides
        .out
        .clone()
        .or_else(|| cfg.output.csv.clone())
        .ok_or_else(|| CliError::Usage("no CSV destination: set output.csv or pass --out".into()))?;
    for (i, spec) in cfg.policies.iter().enumerate() {
        if let Err(e) = dynprice_core::sim::prepare_policy(&cfg.scenario, spec) {
            if matches!(e, SimError::InvalidScenario(_)) {
                write!(stdout, "{}", validate_scenario(&cfg.scenario)).map_err(stdout_err)?;
            }
            return Err(CliError::Usage(format!("policies[{i}] (kind = {}): {e}", spec.kind)));
        }
    }

    let result = run_monte_carlo(&cfg.scenario, &cfg.policies, &cfg.monte_carlo())?;
    let mut file = create(&csv_path)?;
    result.write_csv(&mut file)?;
    file.flush().map_err(|e| CliError::Io {
        path: csv_path.clone(),
        source: e,
    })?;

    let labels = policy_labels(&cfg.policies);
    let width = labels.iter().map(|l| l.len()).max().unwrap_or(6).max(6);
    writeln!(
        stdout,
        "{:<width$}  {:>10}  {:>12}  {:>12}  {:>12}  {:>10}",
        "policy", "true_model", "mean_regret", "ci_lo", "ci_hi", "nonoptimal"
    )
    .map_err(stdout_err)?;
    for cell in &result.cells {
        let r = cell.final_regret();
        writeln!(
            stdout,
            "{:<width$}  {:>10}  {:>12.4}  {:>12.4}  {:>12.4}  {:>10.2}",
            cell.policy, cell.true_model, r.mean, r.ci_lo, r.ci_hi, cell.nonoptimal_pulls.mean
        )
        .map_err(stdout_err)?;
    }
    writeln!(
        stdout,
        "T = {}, R = {}, seed = {}; wrote {}",
        cfg.run.horizon,
        cfg.run.replications,
        cfg.run.base_seed,
        csv_path.display()
    )
    .map_err(stdout_err)?;
    Ok(())
}

fn bound_reports(cfg: &ExperimentConfig) -> Result<Vec<BoundReport>, CliError> {
    let s = &cfg.scenario;
    let mut specs: Vec<&PolicySpec> = cfg
        .policies
        .iter()
        .filter(|p| matches!(p.kind, PolicyKind::Lrt | PolicyKind::Xlrt | PolicyKind::Elrt))
        .collect();
    let fallback = PolicySpec::new(if s.n_models() == 2 {
        PolicyKind::Lrt
    } else {
        PolicyKind::Elrt
    });
    if specs.is_empty() {
        specs.push(&fallback);
    }
    let mut out = Vec::new();
    for spec in specs {
        for i in cfg.true_model_indices() {
            let report = match spec.kind {
                PolicyKind::Lrt => lrt_bound(s, i)?,
                PolicyKind::Elrt => elrt_bound(s, i)?,
                _ => {
                    let prepared = PreparedPolicy::new(spec, &PolicyKnowledge::full_curves(s))
                        .map_err(|e| CliError::Usage(format!("xlrt: {e}")))?;
                    let thresholds = prepared.thresholds().expect("xlrt has thresholds");
                    xlrt_bound(s, i, thresholds, spec.metric.unwrap_or_default())?
                }
            };
            out.push(report);
        }
    }
    Ok(out)
}

fn write_bounds(reports: &[BoundReport], w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "policy,true_model,competitor,a,m,M,C,total_pull_cap,sum_pull_cap,regret_cap")?;
    for r in reports {
        for c in &r.competitors {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{}",
                r.policy, r.true_model, c.competitor, c.a, c.m, c.big_m, c.c, r.total_pull_cap, r.sum_pull_cap, r.regret_cap
            )?;
        }
    }
    Ok(())
}

/// Print the pull-count and regret caps for the likelihood-ratio policies in the config.
pub fn cmd_bounds(config_path: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let report = validate_scenario(&cfg.scenario);
    if !report.is_valid() {
        write!(stdout, "{report}").map_err(stdout_err)?;
        return Err(CliError::ScenarioInvalid);
    }
    let reports = bound_reports(&cfg)?;
    write_bounds(&reports, stdout).map_err(stdout_err)?;
    if let Some(path) = out.map(Path::to_path_buf).or_else(|| cfg.output.bounds.clone()) {
        let mut f = create(&path)?;
        write_bounds(&reports, &mut f)
            .and_then(|_| f.flush())
            .map_err(|e| CliError::Io { path, source: e })?;
    }
    Ok(())
}

/// Parse `"i,h"`.
pub fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected i,h, got {s:?}"))?;
    let idx = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((idx(a)?, idx(b)?))
}

/// Exploration price and Chernoff distance for one model pair.
pub fn cmd_chernoff(config_path: &Path, pair: (usize, usize), stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let s = &cfg.scenario;
    let (i, h) = pair;
    let n = s.n_models();
    if i >= n || h >= n {
        return Err(CliError::Usage(format!("--pair {i},{h}: indices must be below {n}")));
    }
    let (mi, mh) = (s.model(i), s.model(h));
    let px = exploration_price(mi, mh, s.interval(), s.grid(), Metric::Chernoff);
    let c = chernoff_bernoulli(mi.eval(px), mh.eval(px));
    let ph = exploration_price(mi, mh, s.interval(), s.grid(), Metric::Harmonic);
    let lines = [
        format!("pair: {i},{h}"),
        format!("exploration_price: {px}"),
        format!("chernoff_distance: {}", c.distance),
        format!("t_star: {}", c.t_star),
        format!("harmonic_price: {ph}"),
        format!(
            "harmonic_distance: {}",
            Metric::Harmonic.distance(mi.eval(ph), mh.eval(ph))
        ),
        format!("chernoff_at_harmonic_price: {}", chernoff_bernoulli(mi.eval(ph), mh.eval(ph)).distance),
    ];
    for l in lines {
        writeln!(stdout, "{l}").map_err(stdout_err)?;
    }
    Ok(())
}

/// Print arms, the probability matrix and any informativeness violations.
pub fn cmd_validate(config_path: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let cfg = ExperimentConfig::load(config_path)?;
    let s = &cfg.scenario;
    let mut text = String::new();
    for (k, m) in s.models().iter().enumerate() {
        text += &format!(
            "model {k}: {m}  p* = {}  r* = {}\n",
            s.optimal_price(k),
            s.revenue_at_optimal()[k]
        );
    }
    text += "rho_i(p_k*):\n";
    for row in s.prob_matrix() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
        text += &format!("  {}\n", cells.join("  "));
    }
    let report = validate_scenario(s);
    text += &report.to_string();
    stdout.write_all(text.as_bytes()).map_err(stdout_err)?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::ScenarioInvalid)
    }
}
