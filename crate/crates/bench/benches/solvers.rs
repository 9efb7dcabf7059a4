use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fluxsim::phase_plane::gamma_star_separatrix;
use fluxsim::{gamma_star_shooting, integrate, shoot_concave};
use fluxsim_bench::{bounded_ivp, unbounded_ivp, Params, SolveOptions, GAMMA_STAR_CASES, SHOOT_CASES};

fn bench_integrate(c: &mut Criterion) {
    let mut g = c.benchmark_group("integrate");
    for t in [50.0, 1000.0] {
        let b = bounded_ivp(t);
        let u = unbounded_ivp(t);
        g.bench_with_input(BenchmarkId::new("bounded", t), &b, |bn, s| bn.iter(|| integrate(black_box(s)).unwrap()));
        g.bench_with_input(BenchmarkId::new("unbounded", t), &u, |bn, s| bn.iter(|| integrate(black_box(s)).unwrap()));
    }
    g.finish();
}

fn bench_shoot(c: &mut Criterion) {
    let opts = SolveOptions::default();
    let mut g = c.benchmark_group("shoot_concave");
    g.sample_size(10);
    for (m, gamma) in SHOOT_CASES {
        let p = Params::new(m, gamma).unwrap();
        g.bench_function(format!("m={m},gamma={gamma}"), |b| b.iter(|| shoot_concave(black_box(p), None, &opts).unwrap()));
    }
    g.finish();
}

fn bench_gamma_star(c: &mut Criterion) {
    let opts = SolveOptions::default();
    let mut g = c.benchmark_group("gamma_star");
    g.sample_size(10);
    for m in GAMMA_STAR_CASES {
        g.bench_function(format!("separatrix/m={m}"), |b| b.iter(|| gamma_star_separatrix(black_box(m)).unwrap()));
        g.bench_function(format!("shooting/m={m}"), |b| b.iter(|| gamma_star_shooting(black_box(m), &opts).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, bench_integrate, bench_shoot, bench_gamma_star);
criterion_main!(benches);
