use criterion::{black_box, criterion_group, criterion_main, Criterion};
use vpair::{expansion_state, Functional, Mode, PairConfig, Solver};

fn reference() -> PairConfig {
    PairConfig::new(Mode::CoRotating, [1.0, 2.0], [1.0, 1.0], 5.0)
}

fn residual(c: &mut Criterion) {
    let mut group = c.benchmark_group("residual");
    for (modes, grid) in [(16, 128), (32, 256)] {
        let cfg = reference().with_discretization(modes, grid);
        let f = Functional::new(cfg.clone()).unwrap();
        let g = expansion_state(&cfg, 0.2).unwrap();
        group.bench_function(format!("N{modes}_M{grid}"), |b| {
            b.iter(|| f.residual_vec(black_box(0.2), black_box(&g)).unwrap())
        });
    }
    group.finish();
}

fn jacobian(c: &mut Criterion) {
    let cfg = reference().with_discretization(16, 128);
    let solver = Solver::new(cfg.clone()).unwrap();
    let g = expansion_state(&cfg, 0.2).unwrap();
    let mut group = c.benchmark_group("jacobian");
    group.sample_size(10);
    group.bench_function("N16_M128", |b| b.iter(|| solver.jacobian_fd(black_box(0.2), &g).unwrap()));
    group.finish();
}

fn newton(c: &mut Criterion) {
    let cfg = reference().with_discretization(16, 128);
    let solver = Solver::new(cfg.clone()).unwrap();
    let init = expansion_state(&cfg, 0.4).unwrap();
    let mut group = c.benchmark_group("newton");
    group.sample_size(10);
    group.bench_function("N16_M128_eps0.4", |b| b.iter(|| solver.newton_solve(black_box(0.4), &init).unwrap()));
    group.finish();
}

criterion_group!(benches, residual, jacobian, newton);
criterion_main!(benches);
