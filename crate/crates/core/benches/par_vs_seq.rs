use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stable_est::estimators::{heavy_tail_estimator, HeavyMode, HeavyTailSpec};
use stable_est::risk::{mc_risk, sweep, SweepConfig, SweepProblem};
use stable_est::stability::certify_sup_with;
use stable_est::{DistributionSpec, EstimatorHandle, Exec, SearchBudget, SearchDomain, Seed, StabilityOrder};

fn execs() -> [(&'static str, Exec); 2] {
    [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)]
}

fn bench_mc_risk(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc_risk");
    let est = EstimatorHandle::sample_mean(1);
    let dist = DistributionSpec::BinaryPmR { r: 1.0, prob_plus: 0.5 };
    for (name, exec) in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| mc_risk(&est, &dist, 200, 2000, Seed(1), exec).unwrap())
        });
    }
    g.finish();
}

fn bench_certify(c: &mut Criterion) {
    let mut g = c.benchmark_group("certify_sup");
    g.sample_size(10);
    let est = heavy_tail_estimator(&HeavyTailSpec { r: 1.0, k: 2.0, n: 20, beta: 0.5, mode: HeavyMode::AverageCase, d: 1 })
        .unwrap();
    let dom = SearchDomain::unbounded(20, 1, 50.0);
    for (name, exec) in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| certify_sup_with(&est, &dom, StabilityOrder::P(1.0), &SearchBudget::default(), Seed(2), exec).unwrap())
        });
    }
    g.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("heavy_sweep");
    g.sample_size(10);
    let betas: Vec<f64> = (1..=5).map(|i| i as f64 * 0.01).collect();
    let cfg = SweepConfig::new(SweepProblem::Heavy { k: 2.0 }, StabilityOrder::Inf, betas, 500, 1.0);
    for (name, exec) in execs() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| b.iter(|| sweep(&cfg, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_mc_risk, bench_certify, bench_sweep);
criterion_main!(benches);
