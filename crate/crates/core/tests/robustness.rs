mod common;

use common::oracle::{coherence_robustness, generated_robustness, jm_robustness, lhs_robustness};
use common::*;
use num_complex::Complex64;
use proptest::prelude::*;

use qrobust_core::hermitian::paulis;
use qrobust_core::*;

fn opts() -> RobustnessOptions {
    RobustnessOptions::default()
}

fn lhs22() -> FreeSetSpec {
    FreeSetSpec::local_hidden_state(Shape::new(2, 2, 2))
}

fn padded_pvm(p: &HermitianMatrix) -> Povm {
    let [a, b] = paulis::eigenprojectors(p);
    Povm::new(vec![a, b, HermitianMatrix::zeros(2)]).unwrap()
}

fn trine() -> MeasurementAssemblage {
    let effects = (0..3)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
            (&(&HermitianMatrix::identity(2) + &paulis::z().scale(th.cos())) + &paulis::x().scale(th.sin())).scale(1.0 / 3.0)
        })
        .collect();
    MeasurementAssemblage::single(Povm::new(effects).unwrap())
}

fn phase_ensemble(rho: &HermitianMatrix) -> (PartitionedEnsemble, Instrument) {
    let instr = phase_instrument(2, 2).unwrap();
    let (ens, _) = PartitionedEnsemble::from_weighted_blocks(&instr.ensemble_blocks(rho), 2).unwrap();
    (ens, instr)
}

#[test]
fn compatible_measurements_have_zero_robustness() {
    let mut r = rng(21);
    assert!(incompatibility_robustness(&assemblage(&[random_povm(&mut r, 3, 3)]), &opts()).unwrap().t <= 1e-7);
    let z = pvm_of(&paulis::z());
    let zz = MeasurementAssemblage::new(vec![z.clone(), z]).unwrap();
    assert!(incompatibility_robustness(&zz, &opts()).unwrap().t <= 1e-7);
}

#[test]
fn xz_matches_oracle_and_depolarizing_bound() {
    let r = incompatibility_robustness(&xz(), &opts()).unwrap();
    let oracle = jm_robustness(&rows_of(&xz()));
    assert!((r.t - oracle).abs() < 1e-5, "{} vs {oracle}", r.t);
    assert!(r.t > 0.0 && r.t <= 2f64.sqrt() - 1.0);
    let joint = r.cone_point.iter().fold(HermitianMatrix::zeros(2), |acc, g| &acc + g);
    assert!(joint.max_abs_diff(&HermitianMatrix::identity(2).scale(joint.trace() / 2.0)) < 1e-8);
}

#[test]
fn trine_against_pauli_generators() {
    let gens: Vec<_> = [paulis::x(), paulis::y(), paulis::z()].iter().map(|p| MeasurementAssemblage::single(padded_pvm(p))).collect();
    let expanded = expand_generators_postprocessing(&gens).unwrap();
    let spec = FreeSetSpec::generated_measurements(&expanded).unwrap();
    let r = generalized_measurement_robustness(&trine(), &spec, &opts()).unwrap();
    let oracle = generated_robustness(&rows_of(&trine()).concat(), &expanded.iter().map(|m| rows_of(m).concat()).collect::<Vec<_>>());
    assert!(r.t > 0.0);
    assert!((r.t - oracle).abs() < 1e-5);
}

#[test]
fn steering_examples() {
    assert!(assemblage_robustness(&werner_xz(0.5), &lhs22(), &opts()).unwrap().t <= 1e-7);
    assert!(assemblage_robustness(&werner_xz(0.9), &lhs22(), &opts()).unwrap().t > 0.0);
    let maximal = werner_xz(1.0);
    let r = assemblage_robustness(&maximal, &lhs22(), &opts()).unwrap();
    assert!((r.t - lhs_robustness(&state_rows(&maximal))).abs() < 1e-5);
    assert!(r.witness.min_eigenvalue() >= -1e-8);
}

#[test]
fn ensemble_examples() {
    let spec = FreeSetSpec::incoherent(2, 2);
    for p in [0.0, 0.25, 0.5] {
        let (ens, instr) = phase_ensemble(&HermitianMatrix::from_diagonal(&[p, 1.0 - p]));
        assert!(ensemble_robustness(&ens, &instr, &spec, &opts()).unwrap().t <= 1e-7);
    }
    let plus = CMat::from_element(2, 2, Complex64::new(0.5, 0.0));
    let (ens, instr) = phase_ensemble(&herm(&plus));
    let t = ensemble_robustness(&ens, &instr, &spec, &opts()).unwrap().t;
    // (Σ|c_i|)² − 1 for |+⟩.
    assert!((t - 1.0).abs() < 1e-6);
    assert!((coherence_robustness(&plus) - 1.0).abs() < 1e-6);
}

#[test]
fn ensemble_outside_the_image_is_rejected() {
    let instr = phase_instrument(2, 2).unwrap();
    let states = vec![paulis::eigenprojectors(&paulis::x())[0].clone(), paulis::eigenprojectors(&paulis::z())[0].clone()];
    let ens = PartitionedEnsemble::single(vec![0.5, 0.5], states).unwrap();
    let e = ensemble_robustness(&ens, &instr, &FreeSetSpec::incoherent(2, 2), &opts()).unwrap_err();
    assert!(matches!(e, Error::NotInImage(_)), "{e}");
}

#[test]
fn wrong_free_set_is_a_kind_mismatch() {
    let e = generalized_robustness(&QuantumObject::Measurement(xz()), &lhs22(), &opts()).unwrap_err();
    assert!(matches!(e, Error::KindMismatch { .. }), "{e}");
}

fn permute(m: &MeasurementAssemblage) -> MeasurementAssemblage {
    MeasurementAssemblage::new(m.settings().iter().map(|p| Povm::new(p.effects().iter().rev().cloned().collect()).unwrap()).collect()).unwrap()
}

fn conjugate(m: &MeasurementAssemblage, u: &CMat) -> MeasurementAssemblage {
    MeasurementAssemblage::new(m.settings().iter().map(|p| Povm::new(p.effects().iter().map(|e| e.conjugate_by(u)).collect()).unwrap()).collect()).unwrap()
}

fn random_asm(seed: u64) -> StateAssemblage {
    let mut r = rng(seed);
    let rho = random_state(&mut r, 4, 1 + (seed % 3) as usize);
    StateAssemblage::from_bipartite(&herm(&rho), &assemblage(&[random_pvm(&mut r, 2), random_pvm(&mut r, 2)])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn decomposition_identity(seed in any::<u64>(), outcomes in 2usize..4) {
        let mut r = rng(seed);
        let m = assemblage(&[random_povm(&mut r, 2, outcomes), random_povm(&mut r, 2, outcomes)]);
        let res = incompatibility_robustness(&m, &opts()).unwrap();
        prop_assert!((res.primal_value - res.dual_value).abs() <= 1e-9 * (1.0 + res.primal_value) + 1e-12);
        prop_assert!((res.witness.pair(&m.blocks()) - (1.0 + res.t)).abs() <= 1e-7);
        if let Some(noise) = &res.noise_part {
            for ((mb, nb), ob) in m.blocks().iter().zip(noise).zip(&res.free_part) {
                let lhs = mb + &nb.scale(res.t);
                prop_assert!(lhs.max_abs_diff(&ob.scale(1.0 + res.t)) <= 1e-7);
                prop_assert!(res.t < 1e-3 || nb.min_eigenvalue() >= -1e-6);
            }
            if res.t < 1e-3 {
                return Ok(());
            }
            let per_setting: Vec<HermitianMatrix> = noise.chunks(outcomes).map(|c| c.iter().fold(HermitianMatrix::zeros(2), |a, b| &a + b)).collect();
            for s in per_setting {
                prop_assert!(s.max_abs_diff(&HermitianMatrix::identity(2)) <= 1e-6);
            }
        }
    }

    #[test]
    fn jm_path_matches_dedicated_call(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = assemblage(&[random_povm(&mut r, 2, 2), random_povm(&mut r, 2, 2)]);
        let a = incompatibility_robustness(&m, &opts()).unwrap().t;
        let b = generalized_measurement_robustness(&m, &FreeSetSpec::jointly_measurable(Shape::new(2, 2, 2)), &opts()).unwrap().t;
        prop_assert!((a - b).abs() <= 1e-6);
    }

    #[test]
    fn unitary_covariance(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = assemblage(&[random_povm(&mut r, 2, 2), random_povm(&mut r, 2, 2)]);
        let u = random_unitary(&mut r, 2);
        let t = incompatibility_robustness(&m, &opts()).unwrap().t;
        let tu = incompatibility_robustness(&conjugate(&m, &u), &opts()).unwrap().t;
        prop_assert!((t - tu).abs() <= 1e-7);

        let asm = random_asm(seed);
        let rotated = StateAssemblage::new(asm.rows().iter().map(|row| row.iter().map(|b| b.conjugate_by(&u)).collect()).collect()).unwrap();
        let a = assemblage_robustness(&asm, &lhs22(), &opts()).unwrap().t;
        let b = assemblage_robustness(&rotated, &lhs22(), &opts()).unwrap().t;
        prop_assert!((a - b).abs() <= 1e-7);
    }

    #[test]
    fn relabeling_invariance(seed in any::<u64>(), outcomes in 2usize..4) {
        let mut r = rng(seed);
        let m = assemblage(&[random_povm(&mut r, 2, outcomes), random_povm(&mut r, 2, outcomes)]);
        let a = incompatibility_robustness(&m, &opts()).unwrap().t;
        let b = incompatibility_robustness(&permute(&m), &opts()).unwrap().t;
        prop_assert!((a - b).abs() <= 1e-7);
    }

    #[test]
    fn convexity(seed in any::<u64>(), p in 0.0f64..1.0) {
        let mut r = rng(seed);
        let m1 = assemblage(&[random_pvm(&mut r, 2), random_pvm(&mut r, 2)]);
        let m2 = assemblage(&[random_pvm(&mut r, 2), random_pvm(&mut r, 2)]);
        let mix = MeasurementAssemblage::mix(&[(p, &m1), (1.0 - p, &m2)]).unwrap();
        let t = |m: &MeasurementAssemblage| incompatibility_robustness(m, &opts()).unwrap().t;
        prop_assert!(t(&mix) <= p * t(&m1) + (1.0 - p) * t(&m2) + 1e-6);

        let (a1, a2) = (random_asm(seed), random_asm(seed.wrapping_add(1)));
        let rows = a1.rows().iter().zip(a2.rows()).map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| &x.scale(p) + &y.scale(1.0 - p)).collect()).collect();
        let mixed = StateAssemblage::new(rows).unwrap();
        let s = |a: &StateAssemblage| assemblage_robustness(a, &lhs22(), &opts()).unwrap().t;
        prop_assert!(s(&mixed) <= p * s(&a1) + (1.0 - p) * s(&a2) + 1e-6);
    }

    #[test]
    fn coarse_graining_never_increases_robustness(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = assemblage(&[random_povm(&mut r, 2, 3), random_povm(&mut r, 2, 3)]);
        let merged = MeasurementAssemblage::new(
            m.settings().iter().map(|p| Povm::new(vec![p.effect(0) + p.effect(1), p.effect(2).clone()]).unwrap()).collect(),
        )
        .unwrap();
        let fine = incompatibility_robustness(&m, &opts()).unwrap().t;
        let coarse = incompatibility_robustness(&merged, &opts()).unwrap().t;
        prop_assert!(coarse <= fine + 1e-7);
    }

    #[test]
    fn ensemble_matches_state_coherence(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = herm(&random_state(&mut r, 2, 2));
        let (ens, instr) = phase_ensemble(&rho);
        let e = ensemble_robustness(&ens, &instr, &FreeSetSpec::incoherent(2, 2), &opts()).unwrap().t;
        let (s, _) = state_coherence_robustness(&rho, &opts()).unwrap();
        prop_assert!((e - s).abs() <= 1e-6);
        prop_assert!((s - 2.0 * rho.get(0, 1).norm()).abs() <= 1e-6);
    }
}
