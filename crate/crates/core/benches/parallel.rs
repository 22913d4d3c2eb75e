//! Criterion benches for the data-parallel hot paths.
//!
//! Build with the default `parallel` feature for the rayon-backed paths and
//! with `--no-default-features` for the sequential fallback; compare with
//! criterion baselines:
//!
//! ```text
//! cargo bench -p llv-core -- --save-baseline parallel
//! cargo bench -p llv-core --no-default-features -- --baseline parallel
//! ```
//!
//! With the `parallel` feature enabled, each group also reports a 1-thread
//! rayon pool next to the default pool, which isolates scheduling overhead
//! from algorithmic cost on the same binary.

use criterion::{criterion_group, criterion_main, Criterion};

use llv_core::lefschetz::{gtot_closure, gtot_setup};
use llv_core::quadspace::QuadraticSpace;
use llv_core::quatmodel::{build_quaternion_model, exterior_operators, verify_so41};
use llv_core::verbitsky::{build_model, fujiki_verify};

fn run_modes(c: &mut Criterion, name: &str, f: impl Fn() + Copy) {
    let mut group = c.benchmark_group(name);
    group.sample_size(10);
    #[cfg(feature = "parallel")]
    {
        group.bench_function("default-pool", |b| b.iter(f));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .expect("1-thread pool");
        group.bench_function("one-thread-pool", |b| b.iter(|| pool.install(f)));
    }
    #[cfg(not(feature = "parallel"))]
    group.bench_function("sequential", |b| b.iter(f));
    group.finish();
}

fn bench_build_model(c: &mut Criterion) {
    let space = QuadraticSpace::diagonal(&[1, 1, 1, 1, 1]);
    run_modes(c, "build_model/diag5_n2", || {
        let m = build_model(&space, 2).unwrap();
        assert_eq!(m.dims(), &[1, 5, 15, 5, 1]);
    });
}

fn bench_fujiki(c: &mut Criterion) {
    let space = QuadraticSpace::diagonal(&[1, 1, 1, 1, 1]);
    let model = build_model(&space, 2).unwrap();
    run_modes(c, "fujiki_verify/diag5_n2", || {
        assert!(fujiki_verify(&model).pass);
    });
}

fn bench_closure(c: &mut Criterion) {
    let space = QuadraticSpace::diagonal(&[1, 1, 1, 1, 1]);
    let model = build_model(&space, 2).unwrap();
    run_modes(c, "gtot_closure/diag5_n2", || {
        let setup = gtot_setup(&model).unwrap();
        let basis = gtot_closure(&setup);
        assert_eq!(basis.dim(), 21);
    });
}

fn bench_so41(c: &mut Criterion) {
    let module = build_quaternion_model(1);
    run_modes(c, "so41/n1", || {
        let ops = exterior_operators(&module).unwrap();
        assert!(verify_so41(&ops).pass);
    });
}

criterion_group!(
    benches,
    bench_build_model,
    bench_fujiki,
    bench_closure,
    bench_so41
);
criterion_main!(benches);
