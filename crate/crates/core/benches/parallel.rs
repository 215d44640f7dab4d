use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use spinerase::microsim::{
    chi_square_gof, exact_joint_marginal, mc_reservoir_bath, mc_reservoir_bath_replicas,
    ExchangeParams,
};
use spinerase::parallel::{map_ordered, Execution};
use spinerase::protocol::{spin_cost_bounds, total_spin_cost};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn replicas(c: &mut Criterion) {
    let params = ExchangeParams {
        n_spins: 8,
        m_spins: 56,
        total_up: 16,
        burn_in: 100,
        samples: 2_000,
    };
    let mut group = c.benchmark_group("exchange_replicas");
    group.throughput(Throughput::Elements(8 * 2_100 * 64));
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new(name, 8), |b| {
            b.iter(|| mc_reservoir_bath_replicas(black_box(&params), 1, 8, exec).unwrap())
        });
    }
    group.finish();
}

fn shell_grid(c: &mut Criterion) {
    let cases: Vec<ExchangeParams> = (1..=6u32)
        .flat_map(|n| (1..=6u32).map(move |m| (n, m)))
        .map(|(n, m)| ExchangeParams {
            n_spins: n,
            m_spins: m,
            total_up: (n + m) / 2,
            burn_in: 10,
            samples: 5_000,
        })
        .collect();
    let mut group = c.benchmark_group("chi_square_grid");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                map_ordered(exec, &cases, |p| {
                    let stats = mc_reservoir_bath(p, 0, 0).unwrap();
                    let exact = exact_joint_marginal(p.n_spins, p.m_spins, p.total_up).unwrap();
                    chi_square_gof(&stats.occupation_histogram, exact.probabilities()).p_value
                })
            })
        });
    }
    group.finish();
}

fn cost_sweep(c: &mut Criterion) {
    let grid: Vec<f64> = (0..200)
        .map(|i| 0.01 * (500f64).powf(i as f64 / 199.0))
        .collect();
    let mut group = c.benchmark_group("spin_cost_sweep");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                map_ordered(exec, &grid, |&g| {
                    let v = total_spin_cost(g, 1e-14).unwrap().value;
                    let (lo, hi) = spin_cost_bounds(g, false).unwrap();
                    (lo, v, hi)
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, replicas, shell_grid, cost_sweep);
criterion_main!(benches);
