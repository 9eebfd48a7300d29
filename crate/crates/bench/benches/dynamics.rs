// SPDX-License-Identifier: Apache-2.0

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cpgate::dynamics::{run_gate_ideal, LindbladModel};
use cpgate::operators::{identity, kron, ZERO};
use cpgate::{superposition_input, DensityMatrix, EvolutionConfig, SystemParams};

fn schrodinger_gate(c: &mut Criterion) {
    let mut group = c.benchmark_group("schrodinger_gate");
    group.sample_size(10);
    for cutoff in [1, 5] {
        let p = SystemParams::reference_point().with_cutoff(cutoff);
        let psi = superposition_input(&p.space().unwrap()).unwrap();
        let cfg = EvolutionConfig::for_state(&p);
        group.bench_with_input(BenchmarkId::from_parameter(cutoff), &cutoff, |b, _| {
            b.iter(|| run_gate_ideal(black_box(&p), &psi, &cfg).unwrap())
        });
    }
    group.finish();
}

fn lindblad_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("lindblad_rhs");
    for cutoff in [1, 5] {
        let p = SystemParams::reference_point().with_cutoff(cutoff).with_uniform_noise(0.01, 2e-4, 0.01);
        let model = LindbladModel::new(&p).unwrap();
        let rho = DensityMatrix::from_pure(&superposition_input(&p.space().unwrap()).unwrap());
        let flat = rho.matrix().as_slice().unwrap().to_vec();
        let mut out = vec![ZERO; flat.len()];
        group.bench_with_input(BenchmarkId::from_parameter(cutoff), &cutoff, |b, _| {
            b.iter(|| model.rhs(black_box(3.0), black_box(&flat), &mut out))
        });
    }
    group.finish();
}

fn kron_product(c: &mut Criterion) {
    let a = identity(9);
    let b = identity(18);
    c.bench_function("kron_9x18", |bench| bench.iter(|| kron(black_box(&a), black_box(&b)).unwrap()));
}

criterion_group!(benches, schrodinger_gate, lindblad_rhs, kron_product);
criterion_main!(benches);
