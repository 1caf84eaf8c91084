mod common;

use common::*;
use proptest::prelude::*;

use qrobust_core::hermitian::paulis;
use qrobust_core::*;

fn opts() -> RobustnessOptions {
    RobustnessOptions::default()
}

fn jm22() -> FreeSetSpec {
    FreeSetSpec::jointly_measurable(Shape::new(2, 2, 2))
}

fn measurement_witness(blocks: Vec<HermitianMatrix>, na: usize, nx: usize) -> Witness {
    let d = blocks[0].dim();
    Witness::new(ObjectClass::MeasurementAssemblage, Shape::new(d, na, nx), blocks).unwrap()
}

#[test]
fn single_block_witness() {
    let mut blocks = vec![HermitianMatrix::zeros(2); 4];
    blocks[2] = HermitianMatrix::basis_projector(2, 0);
    let g = game_from_witness(&measurement_witness(blocks, 2, 2)).unwrap();
    assert_eq!(g.ensemble.priors(), &[0.0, 1.0]);
    assert_eq!(g.ensemble.conditionals()[1], vec![1.0, 0.0]);
    assert!(g.ensemble.states()[1][0].max_abs_diff(&HermitianMatrix::basis_projector(2, 0)) < 1e-15);
}

#[test]
fn uniform_witness_gives_uniform_game() {
    let blocks = vec![HermitianMatrix::identity(2).scale(1.0 / 8.0); 4];
    let g = game_from_witness(&measurement_witness(blocks.clone(), 2, 2)).unwrap();
    assert!(g.ensemble.priors().iter().all(|&p| (p - 0.5).abs() < 1e-15));
    assert!(g.ensemble.states().iter().flatten().all(|s| s.max_abs_diff(&HermitianMatrix::identity(2).scale(0.5)) < 1e-15));
    assert!((g.tr_y - 1.0).abs() < 1e-15);

    // Blocks summing to a multiple of the identity need no completion.
    let w = Witness::new(ObjectClass::StateAssemblage, Shape::new(2, 2, 2), blocks).unwrap();
    let sg = subchannel_game_from_witness(&w, None).unwrap();
    assert_eq!(sg.instrument.num_outcomes(), 3);
    assert!(sg.instrument.choi()[2].max_abs_entry() < 1e-12);
}

#[test]
fn single_block_subchannel_game() {
    let mut blocks = vec![HermitianMatrix::zeros(2); 4];
    blocks[0] = HermitianMatrix::identity(2).scale(0.5);
    let w = Witness::new(ObjectClass::StateAssemblage, Shape::new(2, 2, 2), blocks).unwrap();
    let g = subchannel_game_from_witness(&w, None).unwrap();
    assert!((g.alpha - 2.0).abs() < 1e-12);
    let back = g.instrument.adjoint(0, &HermitianMatrix::basis_projector(2, 0));
    assert!(back.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-12);
}

#[test]
fn xz_witness_game_identities() {
    let r = incompatibility_robustness(&xz(), &opts()).unwrap();
    let g = game_from_witness(&r.witness).unwrap();
    let p = p_guess_prior(&g.ensemble, &xz()).unwrap();
    assert!((p * g.tr_y - r.witness.pair(&xz().blocks())).abs() < 1e-10);
    let free = max_psucc_free(&Game::Discrimination(g.clone()), &jm22(), &opts()).unwrap();
    assert!((free - 1.0 / g.tr_y).abs() < 1e-6);
}

#[test]
fn steering_subchannel_identity() {
    let asm = werner_xz(0.9);
    let r = assemblage_robustness(&asm, &FreeSetSpec::local_hidden_state(Shape::new(2, 2, 2)), &opts()).unwrap();
    let g = subchannel_game_from_witness(&r.witness, None).unwrap();
    let p = p_succ_assemblage(&asm, &g).unwrap();
    assert!((p - g.alpha * r.witness.pair(&asm.blocks())).abs() < 1e-10);
}

#[test]
fn single_setting_free_maximum_is_helstrom() {
    let plus = paulis::eigenprojectors(&paulis::x())[0].clone();
    let ens = PartitionedEnsemble::single(vec![0.5, 0.5], vec![HermitianMatrix::basis_projector(2, 0), plus]).unwrap();
    let game = Game::Discrimination(DiscriminationGame { ensemble: ens, tr_y: 1.0 });
    let spec = FreeSetSpec::jointly_measurable(Shape::new(2, 2, 1));
    let helstrom = 0.5 * (1.0 + 0.5f64.sqrt());
    assert!((max_psucc_free(&game, &spec, &opts()).unwrap() - helstrom).abs() < 1e-7);
}

#[test]
fn generated_free_maximum_is_exact() {
    let z = pvm_of(&paulis::z());
    let x = pvm_of(&paulis::x());
    let zz = MeasurementAssemblage::new(vec![z.clone(), z.clone()]).unwrap();
    let xx = MeasurementAssemblage::new(vec![x.clone(), x.clone()]).unwrap();
    let states = vec![z.effects().to_vec(), x.effects().to_vec()];
    let bb84 = PartitionedEnsemble::new(vec![0.5, 0.5], vec![vec![0.5, 0.5]; 2], states).unwrap();
    let spec = FreeSetSpec::generated_measurements(&[zz.clone(), xx.clone()]).unwrap();
    let game = Game::Discrimination(DiscriminationGame { ensemble: bb84.clone(), tr_y: 1.0 });
    let direct = p_guess_prior(&bb84, &zz).unwrap().max(p_guess_prior(&bb84, &xx).unwrap());
    assert_eq!(max_psucc_free(&game, &spec, &opts()).unwrap(), direct);
    assert!((direct - 0.75).abs() < 1e-15);
}

#[test]
fn ensemble_witnesses_have_no_game() {
    let w = Witness::new(ObjectClass::StateEnsemble, Shape::new(2, 2, 1), vec![HermitianMatrix::identity(2); 2]).unwrap();
    assert!(matches!(game_for(&w, ObjectClass::StateEnsemble), Err(Error::KindMismatch { .. })));
}

#[test]
fn mismatched_game_and_object() {
    let r = incompatibility_robustness(&xz(), &opts()).unwrap();
    let game = game_for(&r.witness, ObjectClass::MeasurementAssemblage).unwrap();
    assert!(matches!(p_succ(&QuantumObject::Assemblage(werner_xz(0.5)), &game), Err(Error::KindMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn game_witness_duality_and_ratio_bound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = assemblage(&[random_povm(&mut r, 2, 2), random_povm(&mut r, 2, 2)]);
        let rep = verify_ratio(&QuantumObject::Measurement(m.clone()), &jm22(), &opts()).unwrap();
        let w = &rep.robustness.witness;
        let Game::Discrimination(g) = &rep.game else { unreachable!() };
        prop_assert!((rep.p_succ * g.tr_y - w.pair(&m.blocks())).abs() <= 1e-12);
        prop_assert!(rep.ratio >= w.pair(&m.blocks()) - 1e-7);
        prop_assert!(rep.discrepancy <= 1e-5 * rep.one_plus_r);
    }

    #[test]
    fn witness_scale_cancels(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut r = rng(seed);
        let m = assemblage(&[random_povm(&mut r, 2, 2), random_povm(&mut r, 2, 2)]);
        let res = incompatibility_robustness(&m, &opts()).unwrap();
        let g1 = game_from_witness(&res.witness).unwrap();
        let g2 = game_from_witness(&res.witness.scaled(c)).unwrap();
        let e1 = g1.ensemble.blocks();
        let e2 = g2.ensemble.blocks();
        for (a, b) in e1.iter().zip(&e2) {
            prop_assert!(a.max_abs_diff(b) <= 1e-12);
        }
        let object = QuantumObject::Measurement(m);
        let r1 = ratio_for(&object, &jm22(), &opts(), res.clone(), Game::Discrimination(g1)).unwrap().ratio;
        let r2 = ratio_for(&object, &jm22(), &opts(), res, Game::Discrimination(g2)).unwrap().ratio;
        prop_assert!((r1 - r2).abs() <= 1e-9);
    }

    #[test]
    fn jointly_measurable_objects_respect_any_witness(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = assemblage(&[random_povm(&mut r, 2, 2), random_povm(&mut r, 2, 2)]);
        let w = incompatibility_robustness(&m, &opts()).unwrap().witness;
        let pp = enumerate_postprocessings(2, 2).unwrap();
        for _ in 0..20 {
            let parent: Vec<HermitianMatrix> = random_povm(&mut r, 2, 4).iter().map(herm).collect();
            let o = postprocess_joint(&parent, &pp).unwrap();
            prop_assert!(w.pair(&o.blocks()) <= 1.0 + 1e-7);
        }
    }

    #[test]
    fn completed_instrument_never_exceeds_one(seed in any::<u64>()) {
        let asm = werner_xz(0.75 + 0.25 * (seed % 1000) as f64 / 1000.0);
        let r = assemblage_robustness(&asm, &FreeSetSpec::local_hidden_state(Shape::new(2, 2, 2)), &opts()).unwrap();
        let g = subchannel_game_from_witness(&r.witness, None).unwrap();
        let mut rg = rng(seed);
        let rho = herm(&random_state(&mut rg, 2, 2));
        let p = p_succ_subchannel(SubchannelInput::State(&rho), &g.instrument, &g.povm).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    }
}
