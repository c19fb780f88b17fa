use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use reslab::bath::{discretize_bath, evolve_with, InitialCondition};
use reslab::experiments::{run_experiment, Experiment, ExperimentConfig};
use reslab::{EnsembleSpec, Exec, ReservoirSpec, TimeGrid};

const MODES: [Exec; 2] = [Exec::Sequential, Exec::Parallel];

fn label(exec: Exec) -> &'static str {
    match exec {
        Exec::Sequential => "sequential",
        Exec::Parallel => "parallel",
    }
}

fn bath_evolution(c: &mut Criterion) {
    let spec = ReservoirSpec::new(0.5, 5.0).unwrap();
    let ens = EnsembleSpec::new(4).unwrap();
    let bath = discretize_bath(&spec, 4000, 50.0).unwrap();
    let grid = TimeGrid::new(0.0, 0.5, 10).unwrap();
    let mut group = c.benchmark_group("bath_evolution");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(
            BenchmarkId::from_parameter(label(exec)),
            &exec,
            |b, &exec| {
                b.iter(|| {
                    evolve_with(
                        &bath,
                        &ens,
                        &grid,
                        2e-3,
                        InitialCondition::WatchedExcited,
                        exec,
                    )
                    .unwrap()
                })
            },
        );
    }
    group.finish();
}

fn sweep(c: &mut Criterion, name: &str, cfg: ExperimentConfig) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(
            BenchmarkId::from_parameter(label(exec)),
            &exec,
            |b, &exec| b.iter(|| run_experiment(black_box(&cfg), exec).unwrap()),
        );
    }
    group.finish();
}

fn qfi_sweep(c: &mut Criterion) {
    let mut cfg = ExperimentConfig::defaults(Experiment::Fig1);
    cfg.n_list = (1..=16).collect();
    cfg.n_samples = 3001;
    sweep(c, "qfi_sweep", cfg);
}

fn gp_sweep(c: &mut Criterion) {
    let mut cfg = ExperimentConfig::defaults(Experiment::Fig4);
    cfg.n_list = vec![1, 4, 16, 64, 256];
    sweep(c, "gp_sweep", cfg);
}

criterion_group!(benches, bath_evolution, qfi_sweep, gp_sweep);
criterion_main!(benches);
