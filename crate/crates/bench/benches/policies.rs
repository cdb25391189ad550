use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use dynprice_core::sim::{episode_streams, run_episode_with};
use dynprice_core::{
    chernoff_bernoulli, exploration_price, kl_bernoulli, DemandModel, GridConfig, Interval, Metric,
    PolicyKind, PolicyKnowledge, PolicySpec, PreparedPolicy, PricingPolicy, Scenario,
};

fn case1() -> Scenario {
    Scenario::new(
        vec![DemandModel::linear(1.4, -0.9), DemandModel::linear(0.8, -0.3)],
        Interval::new(0.5, 1.5).unwrap(),
        GridConfig::default(),
    )
    .unwrap()
}

fn bench_info(c: &mut Criterion) {
    c.bench_function("kl_bernoulli", |b| b.iter(|| kl_bernoulli(black_box(0.3), black_box(0.7))));
    c.bench_function("chernoff_bernoulli", |b| {
        b.iter(|| chernoff_bernoulli(black_box(0.3), black_box(0.7)))
    });
    let s = case1();
    c.bench_function("exploration_price/chernoff", |b| {
        b.iter(|| exploration_price(s.model(0), s.model(1), s.interval(), s.grid(), Metric::Chernoff))
    });
}

fn bench_episodes(c: &mut Criterion) {
    let s = case1();
    let mut group = c.benchmark_group("episode_1000");
    for kind in [PolicyKind::Lrt, PolicyKind::Xlrt, PolicyKind::Elrt, PolicyKind::Cmbp] {
        let prepared = PreparedPolicy::new(&PolicySpec::new(kind), &PolicyKnowledge::full_curves(&s)).unwrap();
        group.bench_function(kind.name(), |b| {
            let mut seed = 0u64;
            b.iter(|| {
                seed += 1;
                let (mut env, pol) = episode_streams(seed);
                let mut policy = prepared.instantiate(Some(1), pol).unwrap();
                run_episode_with(&s, 1, &mut policy, 1000, &mut env, seed).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_mbp_step(c: &mut Criterion) {
    let s = case1();
    let prepared = PreparedPolicy::new(&PolicySpec::new(PolicyKind::Mbp), &PolicyKnowledge::full_curves(&s)).unwrap();
    let (_, pol) = episode_streams(7);
    let mut policy = prepared.instantiate(None, pol).unwrap();
    c.bench_function("mbp_choose_price", |b| {
        b.iter(|| {
            policy.set_belief(black_box(0.37));
            policy.choose_price()
        })
    });
}

criterion_group!(benches, bench_info, bench_episodes, bench_mbp_step);
criterion_main!(benches);
