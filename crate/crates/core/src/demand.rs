//! Demand curves, expected revenue, and the hypothesis set a seller prices against.

use std::fmt;

use thiserror::Error;

use crate::optimize::{self, GridConfig};

/// Probabilities are clamped to `[PROB_EPSILON, 1 - PROB_EPSILON]` before any log.
pub const PROB_EPSILON: f64 = 1e-12;

/// Two models closer than this at an arm price are considered indistinguishable there.
pub const INFORMATIVENESS_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemandError {
    #[error("invalid price interval [{l}, {u}]: need finite l < u")]
    BadInterval { l: f64, u: f64 },
    #[error("a scenario needs at least two demand models, got {0}")]
    TooFewModels(usize),
    #[error("tabulated curve: {0}")]
    BadKnots(String),
    #[error("demand model parameter is not finite: {0}")]
    NonFinite(String),
    #[error("grid needs at least 3 points, got {0}")]
    BadGrid(usize),
    #[error("true model index {index} out of range for {n} models")]
    TrueModelOutOfRange { index: usize, n: usize },
}

/// Closed price interval `[l, u]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub l: f64,
    pub u: f64,
}

impl Interval {
    pub fn new(l: f64, u: f64) -> Result<Self, DemandError> {
        if !(l.is_finite() && u.is_finite() && l < u) {
            return Err(DemandError::BadInterval { l, u });
        }
        Ok(Interval { l, u })
    }

    pub fn contains(&self, p: f64) -> bool {
        self.l <= p && p <= self.u
    }
}

/// Piecewise-linear curve through `(price, probability)` knots.
///
/// Prices outside the knot range take the nearest end value.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedCurve {
    knots: Vec<(f64, f64)>,
}

impl TabulatedCurve {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, DemandError> {
        if knots.len() < 2 {
            return Err(DemandError::BadKnots(format!(
                "need at least 2 knots, got {}",
                knots.len()
            )));
        }
        for (i, &(p, q)) in knots.iter().enumerate() {
            if !p.is_finite() || !(0.0..=1.0).contains(&q) {
                return Err(DemandError::BadKnots(format!(
                    "knot {i} = ({p}, {q}): price must be finite and probability in [0, 1]"
                )));
            }
        }
        if let Some(i) = knots.windows(2).position(|w| w[1].0 <= w[0].0) {
            return Err(DemandError::BadKnots(format!(
                "prices must be strictly increasing (knot {} <= knot {})",
                i + 1,
                i
            )));
        }
        Ok(TabulatedCurve { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    fn eval(&self, p: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if p <= first.0 {
            return first.1;
        }
        if p >= last.0 {
            return last.1;
        }
        // First knot strictly right of p; p > first.0 guarantees idx >= 1.
        let idx = self.knots.partition_point(|&(x, _)| x <= p);
        let (x0, y0) = self.knots[idx - 1];
        let (x1, y1) = self.knots[idx];
        y0 + (y1 - y0) * (p - x0) / (x1 - x0)
    }
}

/// A price → purchase-probability curve.
#[derive(Clone, Debug, PartialEq)]
pub enum DemandModel {
    /// `intercept + slope * p`.
    Linear { intercept: f64, slope: f64 },
    /// `1 / (1 + exp(c0 + c1 * p))`.
    Logistic { c0: f64, c1: f64 },
    Tabulated(TabulatedCurve),
}

impl DemandModel {
    pub fn linear(intercept: f64, slope: f64) -> Self {
        DemandModel::Linear { intercept, slope }
    }

    pub fn logistic(c0: f64, c1: f64) -> Self {
        DemandModel::Logistic { c0, c1 }
    }

    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self, DemandError> {
        TabulatedCurve::new(knots).map(DemandModel::Tabulated)
    }

    fn check_finite(&self) -> Result<(), DemandError> {
        let ok = match self {
            DemandModel::Linear { intercept, slope } => intercept.is_finite() && slope.is_finite(),
            DemandModel::Logistic { c0, c1 } => c0.is_finite() && c1.is_finite(),
            DemandModel::Tabulated(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(DemandError::NonFinite(format!("{self}")))
        }
    }

    /// The curve value with no clamping; may leave `[0, 1]` for linear models.
    pub fn eval_raw(&self, p: f64) -> f64 {
        match self {
            DemandModel::Linear { intercept, slope } => intercept + slope * p,
            DemandModel::Logistic { c0, c1 } => 1.0 / (1.0 + (c0 + c1 * p).exp()),
            DemandModel::Tabulated(curve) => curve.eval(p),
        }
    }

    /// Purchase probability at `p`, clamped to `[ε, 1 − ε]`.
    pub fn eval(&self, p: f64) -> f64 {
        clamp_prob(self.eval_raw(p))
    }

    /// Expected revenue `p · ρ(p)`.
    pub fn revenue(&self, p: f64) -> f64 {
        p * self.eval(p)
    }

    /// Revenue-maximizing price on `interval` and the revenue it earns.
    pub fn optimal_price(&self, interval: Interval, grid: &GridConfig) -> (f64, f64) {
        optimize::maximize(|p| self.revenue(p), interval.l, interval.u, grid)
    }
}

impl fmt::Display for DemandModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemandModel::Linear { intercept, slope } => write!(f, "linear({intercept}, {slope})"),
            DemandModel::Logistic { c0, c1 } => write!(f, "logistic({c0}, {c1})"),
            DemandModel::Tabulated(c) => write!(f, "tabulated({} knots)", c.knots.len()),
        }
    }
}

pub fn clamp_prob(q: f64) -> f64 {
    if q.is_nan() {
        return PROB_EPSILON;
    }
    q.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON)
}

/// Free-function form of [`DemandModel::eval`].
pub fn eval(model: &DemandModel, p: f64) -> f64 {
    model.eval(p)
}

pub fn revenue(model: &DemandModel, p: f64) -> f64 {
    model.revenue(p)
}

pub fn optimal_price(model: &DemandModel, interval: Interval, grid: &GridConfig) -> (f64, f64) {
    model.optimal_price(interval, grid)
}

/// The finite hypothesis set together with everything derived from it:
/// per-model optimal prices (the arms) and the matrix `ρ_i(p_k*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    models: Vec<DemandModel>,
    interval: Interval,
    grid: GridConfig,
    optimal_prices: Vec<f64>,
    revenue_at_optimal: Vec<f64>,
    /// `prob_matrix[i][k] = ρ_i(p_k*)`, clamped.
    prob_matrix: Vec<Vec<f64>>,
    true_model_index: Option<usize>,
}

impl Scenario {
    pub fn new(
        models: Vec<DemandModel>,
        interval: Interval,
        grid: GridConfig,
    ) -> Result<Self, DemandError> {
        if models.len() < 2 {
            return Err(DemandError::TooFewModels(models.len()));
        }
        if grid.points < 3 {
            return Err(DemandError::BadGrid(grid.points));
        }
        for m in &models {
            m.check_finite()?;
        }
        let (optimal_prices, revenue_at_optimal): (Vec<f64>, Vec<f64>) = models
            .iter()
            .map(|m| m.optimal_price(interval, &grid))
            .unzip();
        let prob_matrix = models
            .iter()
            .map(|m| optimal_prices.iter().map(|&p| m.eval(p)).collect())
            .collect();
        Ok(Scenario {
            models,
            interval,
            grid,
            optimal_prices,
            revenue_at_optimal,
            prob_matrix,
            true_model_index: None,
        })
    }

    pub fn with_true_model(mut self, index: usize) -> Result<Self, DemandError> {
        self.set_true_model(index)?;
        Ok(self)
    }

    pub fn set_true_model(&mut self, index: usize) -> Result<(), DemandError> {
        if index >= self.models.len() {
            return Err(DemandError::TrueModelOutOfRange {
                index,
                n: self.models.len(),
            });
        }
        self.true_model_index = Some(index);
        Ok(())
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn models(&self) -> &[DemandModel] {
        &self.models
    }

    pub fn model(&self, i: usize) -> &DemandModel {
        &self.models[i]
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn grid(&self) -> &GridConfig {
        &self.grid
    }

    pub fn optimal_prices(&self) -> &[f64] {
        &self.optimal_prices
    }

    pub fn optimal_price(&self, k: usize) -> f64 {
        self.optimal_prices[k]
    }

    pub fn revenue_at_optimal(&self) -> &[f64] {
        &self.revenue_at_optimal
    }

    pub fn prob_matrix(&self) -> &[Vec<f64>] {
        &self.prob_matrix
    }

    /// `ρ_i(p_k*)`.
    pub fn prob(&self, model: usize, arm: usize) -> f64 {
        self.prob_matrix[model][arm]
    }

    pub fn true_model_index(&self) -> Option<usize> {
        self.true_model_index
    }

    pub fn validate(&self) -> ValidationReport {
        validate_scenario(self)
    }
}

/// Two models agree (within tolerance) at an arm price.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InformativenessViolation {
    pub arm: usize,
    pub model_i: usize,
    pub model_j: usize,
    pub gap: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    /// Every ordered `(k, i, j)`, `i != j`, with `|ρ_i(p_k*) − ρ_j(p_k*)|` at or below tolerance.
    pub violations: Vec<InformativenessViolation>,
    /// Arms whose optimal price sits on an interval endpoint. Warning only.
    pub boundary_arms: Vec<usize>,
    /// `(model, arm)` pairs whose raw probability had to be clamped.
    pub clamped: Vec<(usize, usize)>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "status: {}", if self.is_valid() { "valid" } else { "invalid" })?;
        for v in &self.violations {
            writeln!(
                f,
                "violation: arm {} models ({}, {}) gap {:.3e}",
                v.arm, v.model_i, v.model_j, v.gap
            )?;
        }
        for k in &self.boundary_arms {
            writeln!(f, "warning: optimal price of model {k} is on the interval boundary")?;
        }
        for (i, k) in &self.clamped {
            writeln!(f, "warning: probability of model {i} at arm {k} was clamped")?;
        }
        Ok(())
    }
}

/// Check that every arm price separates every pair of models.
pub fn validate_scenario(scenario: &Scenario) -> ValidationReport {
    validate_with_tolerance(scenario, INFORMATIVENESS_TOLERANCE)
}

pub fn validate_with_tolerance(scenario: &Scenario, tolerance: f64) -> ValidationReport {
    let n = scenario.n_models();
    let mut report = ValidationReport::default();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let gap = (scenario.prob(i, k) - scenario.prob(j, k)).abs();
                if gap <= tolerance {
                    report.violations.push(InformativenessViolation {
                        arm: k,
                        model_i: i,
                        model_j: j,
                        gap,
                    });
                }
            }
        }
    }
    let iv = scenario.interval();
    for (k, &p) in scenario.optimal_prices().iter().enumerate() {
        if p == iv.l || p == iv.u {
            report.boundary_arms.push(k);
        }
    }
    for i in 0..n {
        for (k, &p) in scenario.optimal_prices().iter().enumerate() {
            let raw = scenario.model(i).eval_raw(p);
            if !(PROB_EPSILON..=1.0 - PROB_EPSILON).contains(&raw) {
                report.clamped.push((i, k));
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case1() -> Scenario {
        Scenario::new(
            vec![DemandModel::linear(1.4, -0.9), DemandModel::linear(0.8, -0.3)],
            Interval::new(0.5, 1.5).unwrap(),
            GridConfig::default(),
        )
        .unwrap()
    }

    /// Dense-grid argmax; independent of the golden-section path.
    fn grid_oracle(m: &DemandModel, l: f64, u: f64, n: usize) -> (f64, f64) {
        (0..n)
            .map(|i| l + (u - l) * i as f64 / (n - 1) as f64)
            .map(|p| (p, p * m.eval(p)))
            .fold((l, f64::MIN), |best, c| if c.1 > best.1 { c } else { best })
    }

    #[test]
    fn eval_examples() {
        let m = DemandModel::linear(1.4, -0.9);
        assert!((m.eval(0.5) - 0.95).abs() < 1e-12);
        assert!((m.eval(1.5) - 0.05).abs() < 1e-12);
        assert_eq!(DemandModel::logistic(-10.0, 10.0).eval(1.0), 0.5);
    }

    #[test]
    fn eval_clamps() {
        let m = DemandModel::linear(2.0, -1.0);
        assert_eq!(m.eval(0.0), 1.0 - PROB_EPSILON);
        assert_eq!(m.eval(5.0), PROB_EPSILON);
        assert_eq!(DemandModel::logistic(-1e6, 1.0).eval(0.0), 1.0 - PROB_EPSILON);
    }

    #[test]
    fn revenue_examples() {
        let m = DemandModel::linear(0.8, -0.3);
        assert!((m.revenue(4.0 / 3.0) - 0.533_333_333_333).abs() < 1e-9);
        assert_eq!(m.revenue(0.0), 0.0);
        assert!((DemandModel::linear(1.4, -0.9).revenue(7.0 / 9.0) - 0.544_444_444_444).abs() < 1e-9);
    }

    #[test]
    fn optimal_price_linear_vertices() {
        let iv = Interval::new(0.5, 1.5).unwrap();
        let (p, r) = DemandModel::linear(1.4, -0.9).optimal_price(iv, &GridConfig::default());
        assert!((p - 7.0 / 9.0).abs() < 1e-6, "p = {p}");
        assert!((r - 0.544_444_444_444).abs() < 1e-9);
        let (p, r) = DemandModel::linear(0.8, -0.3).optimal_price(iv, &GridConfig::default());
        assert!((p - 4.0 / 3.0).abs() < 1e-6);
        assert!((r - 0.533_333_333_333).abs() < 1e-9);
    }

    #[test]
    fn optimal_price_logistic_matches_fine_grid() {
        let m = DemandModel::logistic(-1.0, 0.5);
        let iv = Interval::new(0.0, 4.0).unwrap();
        let (p, r) = m.optimal_price(iv, &GridConfig::default());
        let (po, ro) = grid_oracle(&m, 0.0, 4.0, 40_001);
        assert!((p - 3.15).abs() <= 0.05);
        assert!((r - 1.134).abs() < 1e-3);
        assert!((p - po).abs() < 1e-3);
        assert!(r >= ro - 1e-12);
    }

    #[test]
    fn tabulated_interpolates_and_validates() {
        let m = DemandModel::tabulated(vec![(0.0, 0.9), (1.0, 0.5), (2.0, 0.1)]).unwrap();
        assert!((m.eval(0.5) - 0.7).abs() < 1e-15);
        assert!((m.eval(1.0) - 0.5).abs() < 1e-15);
        assert!((m.eval(1.75) - 0.2).abs() < 1e-15);
        assert_eq!(m.eval(-1.0), 0.9);
        assert_eq!(m.eval(3.0), 0.1);
        assert!(DemandModel::tabulated(vec![(0.0, 0.5)]).is_err());
        assert!(DemandModel::tabulated(vec![(1.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(DemandModel::tabulated(vec![(0.0, 0.5), (1.0, 1.4)]).is_err());
    }

    #[test]
    fn scenario_rejects_bad_inputs() {
        assert!(Interval::new(1.0, 1.0).is_err());
        assert!(Interval::new(f64::NAN, 1.0).is_err());
        let iv = Interval::new(0.0, 1.0).unwrap();
        let one = vec![DemandModel::linear(1.0, -0.5)];
        assert_eq!(
            Scenario::new(one, iv, GridConfig::default()).unwrap_err(),
            DemandError::TooFewModels(1)
        );
        let two = vec![DemandModel::linear(1.0, -0.5), DemandModel::linear(f64::INFINITY, 0.0)];
        assert!(Scenario::new(two, iv, GridConfig::default()).is_err());
        assert!(case1().with_true_model(2).is_err());
    }

    #[test]
    fn case1_is_valid() {
        let s = case1();
        let report = validate_scenario(&s);
        assert!(report.is_valid(), "{report}");
        assert!(report.boundary_arms.is_empty());
        assert!(report.clamped.is_empty());
        for k in 0..2 {
            assert!((s.prob(0, k) - s.prob(1, k)).abs() > 0.1);
        }
    }

    #[test]
    fn identical_models_list_every_ordered_pair() {
        let m = DemandModel::linear(1.0, -0.5);
        let s = Scenario::new(vec![m.clone(), m], Interval::new(0.0, 1.5).unwrap(), GridConfig::default())
            .unwrap();
        let report = validate_scenario(&s);
        assert!(!report.is_valid());
        assert_eq!(report.violations.len(), 4);
    }

    #[test]
    fn crossing_at_first_arm_is_flagged() {
        // ρ_1 is flat at ρ_0(p_0*) so the curves cross exactly at p_0* = 1.
        let m0 = DemandModel::linear(1.0, -0.5);
        let s = Scenario::new(
            vec![m0.clone(), DemandModel::linear(0.5, 0.0)],
            Interval::new(0.0, 1.5).unwrap(),
            GridConfig::default(),
        )
        .unwrap();
        assert!((s.optimal_price(0) - 1.0).abs() < 1e-7);
        // Golden refinement can leave p_0* a hair away from 1; the gap is far below tolerance.
        let report = validate_scenario(&s);
        assert!(report
            .violations
            .iter()
            .any(|v| (v.arm, v.model_i, v.model_j) == (0, 0, 1)));
    }

    #[test]
    fn boundary_and_clamp_warnings() {
        // ρ_1 = 0.9 flat → p_1* = u; ρ_0 exceeds 1 at the low end of the interval.
        let s = Scenario::new(
            vec![DemandModel::linear(1.2, -0.5), DemandModel::linear(0.9, 0.0)],
            Interval::new(0.1, 1.5).unwrap(),
            GridConfig::default(),
        )
        .unwrap();
        let report = validate_scenario(&s);
        assert_eq!(report.boundary_arms, vec![1]);
        assert!(report.is_valid());
        let raw_clamped = Scenario::new(
            vec![DemandModel::linear(2.0, 0.0), DemandModel::linear(0.5, 0.0)],
            Interval::new(0.1, 1.5).unwrap(),
            GridConfig::default(),
        )
        .unwrap();
        let report = validate_scenario(&raw_clamped);
        assert!(report.clamped.contains(&(0, 0)));
    }
}
