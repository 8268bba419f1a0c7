use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fragile_core::bell::AngleGrid;
use fragile_core::prelude::*;
use fragile_core::random::{random_observable, random_permutation, random_state, seeded_rng};

const SIZES: [usize; 3] = [8, 32, 64];

fn observable(size: usize) -> Observable {
    random_observable(&mut seeded_rng(size as u64), "X", size, 16.min(size))
}

fn kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernels");
    for m in SIZES {
        let obs = observable(m);
        group.bench_with_input(BenchmarkId::new("scramble", m), &obs, |b, obs| {
            b.iter(|| build_scrambling_kernel(black_box(obs)))
        });
        group.bench_with_input(BenchmarkId::new("birkhoff", m), &obs, |b, obs| {
            b.iter(|| build_birkhoff_kernel(black_box(obs), 7, 3).unwrap())
        });
        let k = build_birkhoff_kernel(&obs, 7, 3).unwrap();
        group.bench_with_input(BenchmarkId::new("fixed_points", m), &obs, |b, obs| {
            b.iter(|| check_fixed_points(&k, black_box(obs), 1e-12).unwrap())
        });
        let s = random_state(&mut seeded_rng(1), m);
        group.bench_with_input(BenchmarkId::new("sequential_joint", m), &obs, |b, obs| {
            b.iter(|| sequential_joint((obs, &k), (obs, &k), black_box(&s)).unwrap())
        });
    }
    group.finish();
}

fn operators(c: &mut Criterion) {
    let mut group = c.benchmark_group("operators");
    for m in SIZES {
        let obs = observable(m);
        let k = build_scrambling_kernel(&obs);
        let basis = build_basis(&obs, BasisMode::Outcome);
        group.bench_with_input(BenchmarkId::new("observable_operator", m), &obs, |b, obs| {
            b.iter(|| build_observable_operator(black_box(obs), &k, &basis).unwrap())
        });
        let op = build_observable_operator(&obs, &k, &basis).unwrap();
        group.bench_with_input(BenchmarkId::new("eigensolve", m), &op, |b, op| {
            b.iter(|| eigensolve(black_box(op)).unwrap())
        });
        let psi = ComplexBasisChange::fourier(basis.dim());
        group.bench_with_input(BenchmarkId::new("to_complex", m), &op, |b, op| {
            b.iter(|| to_complex(black_box(op), &psi).unwrap())
        });
    }
    group.finish();
}

fn evolution(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolution");
    for m in SIZES {
        let space = HiddenVariableSpace::new(m).unwrap();
        let full = build_basis(&space.maximal_observable(), BasisMode::Full);
        let dynamics = DynamicsKernel::permutation(random_permutation(&mut seeded_rng(3), m)).unwrap();
        let u = build_propagator(&dynamics, &full).unwrap().operator;
        group.bench_with_input(BenchmarkId::new("extract_generator", m), &u, |b, u| {
            b.iter(|| extract_generator(black_box(u), 1.0).unwrap())
        });
        let position = build_observable_operator(&space.maximal_observable(), &identity_kernel(&space), &full).unwrap();
        let s = random_state(&mut seeded_rng(4), m);
        let rho = build_density(&eigensolve(&position).unwrap(), s.probs()).unwrap();
        group.bench_with_input(BenchmarkId::new("evolve_density", m), &rho, |b, rho| {
            b.iter(|| evolve_density(black_box(rho), &u).unwrap())
        });
    }
    group.finish();
}

fn bell(c: &mut Criterion) {
    let singlet = singlet_model();
    c.bench_function("bell/chsh_canonical", |b| b.iter(|| chsh(&singlet, black_box(ChshSettings::canonical()))));
    let grid = AngleGrid::uniform(0.0, std::f64::consts::PI, 8);
    c.bench_function("bell/chsh_scan_8", |b| b.iter(|| chsh_scan(&singlet, black_box(&grid)).unwrap()));
    c.bench_function("bell/local_strategy_oracle", |b| b.iter(local_strategy_oracle));
}

criterion_group!(benches, kernels, operators, evolution, bell);
criterion_main!(benches);
