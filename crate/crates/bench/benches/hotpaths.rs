//! Criterion benchmarks for the hot paths: kernel assembly, the energy
//! report, and one evolution step.

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use fracwell_core::evolve::{Scheme, Stepper};
use fracwell_core::functionals::{energy_report, gaussian_bump, ProblemParams};
use fracwell_core::grid::{build_kernel, Domain1D, MagneticField};
use fracwell_core::nfunc::NFunction;

fn setup(m: usize) -> (ProblemParams, fracwell_core::grid::KernelTable) {
    let domain = Domain1D::new(-1.0, 1.0, m, m).unwrap();
    let params = ProblemParams {
        domain,
        s: 0.4,
        p: 3.0,
        nfunc: NFunction::power(2.0).unwrap(),
        magnetic: MagneticField::Constant(1.0),
    };
    let table = build_kernel(domain, params.s, &params.magnetic).unwrap();
    (params, table)
}

fn bench_kernel(c: &mut Criterion) {
    let domain = Domain1D::new(-1.0, 1.0, 64, 64).unwrap();
    c.bench_function("build_kernel m=64", |b| {
        b.iter(|| build_kernel(domain, 0.4, &MagneticField::Constant(1.0)).unwrap())
    });
}

fn bench_energy(c: &mut Criterion) {
    let (params, table) = setup(64);
    let u = gaussian_bump(params.domain, 0.0, 0.3, 1.0, 0.5);
    c.bench_function("energy_report m=64", |b| {
        b.iter(|| energy_report(&u, &params, &table).unwrap())
    });
}

fn bench_step(c: &mut Criterion) {
    let (params, table) = setup(64);
    let u = gaussian_bump(params.domain, 0.0, 0.3, 1.0, 0.5);
    let stepper = Stepper::new(&params, &table, Scheme::Explicit, 1e-3).unwrap();
    c.bench_function("euler step m=64", |b| {
        b.iter(|| stepper.step(&u, &params, &table).unwrap())
    });
    let _ = Complex64::new(0.0, 0.0);
}

criterion_group!(benches, bench_kernel, bench_energy, bench_step);
criterion_main!(benches);
