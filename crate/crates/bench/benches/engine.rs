use criterion::{black_box, criterion_group, criterion_main, Criterion};
use jacobi_cyclic::catalog::{Params, PeriodKind};
use jacobi_cyclic::cyclic::{verify, PreparedIdentity, SampleGrid};
use jacobi_cyclic::master::{gamma_set, GammaVariant, Predictor};
use jacobi_cyclic::{Complex64, ModulusContext};
use jacobi_cyclic_bench::{corpus_entry, product};

fn functions(c: &mut Criterion) {
    let ctx = ModulusContext::new(0.7).unwrap();
    c.bench_function("context_new", |b| b.iter(|| ModulusContext::new(black_box(0.7)).unwrap()));
    c.bench_function("sncndn_real", |b| b.iter(|| ctx.sncndn_real(black_box(1.234))));
    let z = Complex64::new(1.234, 0.4);
    c.bench_function("sncndn_complex", |b| b.iter(|| ctx.sncndn(black_box(z)).unwrap()));
    c.bench_function("zeta_complex", |b| b.iter(|| ctx.zeta_complex(black_box(z)).unwrap()));
}

fn engine(c: &mut Criterion) {
    let ctx = ModulusContext::new(0.5).unwrap();
    let spec = corpus_entry("basic.ddd1");
    let prep = PreparedIdentity::new(spec, &ctx, Params::new(7, 1)).unwrap();
    let x0 = Complex64::new(0.41, 0.1);
    c.bench_function("identity_eval_p7", |b| b.iter(|| prep.eval(black_box(x0)).unwrap()));

    let f = product("dn[0]^2*dn[+1]^2", PeriodKind::TwoK, 5, 1);
    c.bench_function("gamma_set_dn2_dn2", |b| b.iter(|| gamma_set(&f, &ctx, GammaVariant::Ordinary).unwrap()));
    let pred = Predictor::new(&f, &ctx).unwrap();
    c.bench_function("predict_eval", |b| b.iter(|| pred.eval(black_box(x0)).unwrap()));

    let grid = SampleGrid::default_grid(1);
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    g.bench_function("basic.iiii", |b| b.iter(|| verify(corpus_entry("basic.iiii"), &grid, 1e-9).unwrap()));
    g.finish();
}

criterion_group!(benches, functions, engine);
criterion_main!(benches);
