use dynprice_core::policies::{threshold_limits, Thresholds};
use dynprice_core::{
    default_thresholds, elrt_bound, lrt_bound, xlrt_bound, DemandModel, GridConfig, Interval,
    Metric, Scenario,
};

fn case1() -> Scenario {
    Scenario::new(
        vec![DemandModel::linear(1.4, -0.9), DemandModel::linear(0.8, -0.3)],
        Interval::new(0.5, 1.5).unwrap(),
        GridConfig::default(),
    )
    .unwrap()
}

fn four_lines() -> Scenario {
    Scenario::new(
        vec![
            DemandModel::linear(1.44, -0.69),
            DemandModel::linear(0.96, -0.62),
            DemandModel::linear(1.1, -0.62),
            DemandModel::linear(1.21, -0.64),
        ],
        Interval::new(0.5, 2.0).unwrap(),
        GridConfig::default(),
    )
    .unwrap()
}

#[test]
fn four_model_constants() {
    let s = four_lines();
    // (N−1)·max C_h and Σ C_h per true model, from closed-form optimal prices at 40 digits.
    let expected = [
        (656.481_293_376_589, 326.340_311_640_982),
        (451.747_687_597_008, 233.935_134_962_829),
        (1_281.871_518_073_8, 647.613_701_275_25),
        (1_280.405_067_608_49, 672.768_572_078_327),
    ];
    for (i, &(total, sum)) in expected.iter().enumerate() {
        let r = elrt_bound(&s, i).unwrap();
        assert_eq!(r.competitors.len(), 3);
        assert!((r.total_pull_cap / total - 1.0).abs() < 1e-6, "{i}: {}", r.total_pull_cap);
        assert!((r.sum_pull_cap / sum - 1.0).abs() < 1e-6, "{i}: {}", r.sum_pull_cap);
        let max_c = r.competitors.iter().map(|c| c.c).fold(0.0, f64::max);
        assert_eq!(r.total_pull_cap, 3.0 * max_c);
        assert!(r.sum_pull_cap <= r.total_pull_cap);
        for c in &r.competitors {
            assert!(c.a > 0.0 && c.c > 0.0 && c.m < c.big_m);
        }
        assert!(r.regret_cap >= 0.0);
    }
}

#[test]
fn geometric_sum_is_below_c() {
    for r in (0..2).map(|i| lrt_bound(&case1(), i).unwrap()).chain((0..4).map(|i| elrt_bound(&four_lines(), i).unwrap())) {
        for c in &r.competitors {
            let terms: f64 = (1..200_000).map(|t| (-(t as f64) / c.c).exp()).sum();
            assert!(terms <= c.c, "{} > {}", terms, c.c);
        }
    }
}

#[test]
fn two_models_lrt_equals_elrt() {
    let s = case1();
    for i in 0..2 {
        let a = lrt_bound(&s, i).unwrap();
        let b = elrt_bound(&s, i).unwrap();
        assert_eq!(a.competitors, b.competitors);
        assert_eq!(a.total_pull_cap, b.total_pull_cap);
        assert_eq!(a.policy, "lrt");
        assert_eq!(b.policy, "elrt");
    }
}

#[test]
fn xlrt_thresholds_inflate_c() {
    let s = case1();
    let th = default_thresholds(&s, 0.5, Metric::Chernoff);
    let zero = Thresholds::two_model(0.0, 0.0);
    for i in 0..2 {
        let with = xlrt_bound(&s, i, &th, Metric::Chernoff).unwrap();
        let without = xlrt_bound(&s, i, &zero, Metric::Chernoff).unwrap();
        assert_eq!(with.price_set.len(), 3);
        assert!(with.competitors[0].a > 0.0);
        assert!(with.total_pull_cap > without.total_pull_cap);
    }
}

#[test]
fn threshold_near_limit_blows_up() {
    let s = case1();
    let limits = threshold_limits(&s, Metric::Chernoff);
    let near = Thresholds::two_model(0.99 * limits.eta0(), 0.99 * limits.eta1());
    let half = Thresholds::two_model(0.5 * limits.eta0(), 0.5 * limits.eta1());
    for i in 0..2 {
        let big = xlrt_bound(&s, i, &near, Metric::Chernoff).unwrap();
        let mid = xlrt_bound(&s, i, &half, Metric::Chernoff).unwrap();
        assert!(big.total_pull_cap.is_finite());
        // a shrinks a hundredfold against a halved margin, so C grows by ~2500.
        assert!(big.total_pull_cap > 1000.0 * mid.total_pull_cap);
    }
    let over = Thresholds::two_model(limits.eta0(), limits.eta1());
    assert!(xlrt_bound(&s, 0, &over, Metric::Chernoff).is_err());
}

#[test]
fn uninformative_scenario_is_rejected() {
    let m = DemandModel::linear(1.0, -0.5);
    let s = Scenario::new(vec![m.clone(), m], Interval::new(0.5, 1.5).unwrap(), GridConfig::default()).unwrap();
    assert!(lrt_bound(&s, 0).is_err());
    assert!(elrt_bound(&s, 1).is_err());
    assert!(lrt_bound(&four_lines(), 0).is_err());
    assert!(elrt_bound(&four_lines(), 4).is_err());
}
