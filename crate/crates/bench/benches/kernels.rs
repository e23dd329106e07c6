use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use slowbond::pde::step;
use slowbond::ssep::{replica_rng, sample_initial};
use slowbond::{Beta, InitialProfile, Mode};
use slowbond_bench::{interval, particle_system, pde_fixture};

fn advance(c: &mut Criterion) {
    let mut group = c.benchmark_group("dynamics_advance");
    for side in [128usize, 512] {
        let system = particle_system(side, Beta::Finite(1.0)).unwrap();
        let profile = InitialProfile::indicator(interval());
        group.bench_with_input(BenchmarkId::from_parameter(side), &side, |b, _| {
            let mut rng = replica_rng(1, 0);
            let init = sample_initial(&system.lattice, &profile, &mut rng);
            b.iter(|| {
                let mut config = init.clone();
                black_box(system.dynamics().advance(&mut config, 0.0, 1e-3, &mut rng, &mut ()))
            });
        });
    }
    group.finish();
}

fn crank_nicolson(c: &mut Criterion) {
    let mut group = c.benchmark_group("cn_step");
    for mode in Mode::ALL {
        for side in [256usize, 1024] {
            let (g, rho) = pde_fixture(side, mode).unwrap();
            let dt = 0.25 / side as f64;
            group.bench_with_input(BenchmarkId::new(mode.name(), side), &side, |b, _| {
                b.iter(|| black_box(step(&rho, &g, dt).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, advance, crank_nicolson);
criterion_main!(benches);
