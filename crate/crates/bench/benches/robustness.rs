use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qrobust_bench::{qutrit_mub, werner_xz, xyz, xz};
use qrobust_core::*;

fn measurements(c: &mut Criterion) {
    let opts = RobustnessOptions::default();
    let mut group = c.benchmark_group("incompatibility");
    for (name, m) in [("xz", xz()), ("xyz", xyz()), ("qutrit_mub", qutrit_mub())] {
        group.bench_function(name, |b| b.iter(|| incompatibility_robustness(black_box(&m), &opts).unwrap()));
    }
    group.finish();

    let m = xz();
    let spec = FreeSetSpec::coexistent(Shape::new(2, 2, 2));
    c.bench_function("coexistence/xz", |b| b.iter(|| generalized_measurement_robustness(black_box(&m), &spec, &opts).unwrap()));
}

fn steering(c: &mut Criterion) {
    let opts = RobustnessOptions::default();
    let asm = werner_xz(0.9);
    let spec = FreeSetSpec::local_hidden_state(Shape::new(2, 2, 2));
    c.bench_function("lhs/werner_0.9", |b| b.iter(|| assemblage_robustness(black_box(&asm), &spec, &opts).unwrap()));
    c.bench_function("verify/werner_0.9", |b| {
        b.iter(|| verify_ratio(&QuantumObject::Assemblage(black_box(asm.clone())), &spec, &opts).unwrap())
    });
}

fn ensembles(c: &mut Criterion) {
    let opts = RobustnessOptions::default();
    let instr = phase_instrument(3, 3).unwrap();
    let plus = HermitianMatrix::outer(&[C64::new(1.0 / 3f64.sqrt(), 0.0); 3]);
    let (ens, _) = PartitionedEnsemble::from_weighted_blocks(&instr.ensemble_blocks(&plus), 3).unwrap();
    let spec = FreeSetSpec::incoherent(3, 3);
    c.bench_function("ensemble/qutrit_plus", |b| b.iter(|| ensemble_robustness(black_box(&ens), &instr, &spec, &opts).unwrap()));
}

criterion_group!(benches, measurements, steering, ensembles);
criterion_main!(benches);
