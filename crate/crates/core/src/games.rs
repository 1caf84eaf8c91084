//! Discrimination games built from robustness witnesses, the best success
//! probability achievable with free objects, and the ratio checks.

use crate::conic::{solve, ConicProgram, Sense, SolveStatus, Term};
use crate::error::{Error, Result};
use crate::free_sets::{cone_constraints_capped, FreeSetKind, FreeSetSpec};
use crate::hermitian::{operator_norm_inf, HermitianMatrix};
use crate::linmap::HermMap;
use crate::objects::{
    complete_instrument, p_guess_prior, p_succ_subchannel, Instrument, ObjectClass, PartitionedEnsemble, Povm, QuantumObject,
    StateAssemblage, SubchannelInput, PROBABILITY_FLOOR,
};
use crate::robustness::{generalized_robustness, RobustnessOptions, RobustnessResult, Witness};

/// State discrimination with prior information: `Y^{a|x} = trY·p(x)p(a|x)ρ_{a|x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscriminationGame {
    pub ensemble: PartitionedEnsemble,
    pub tr_y: f64,
}

/// Subchannel discrimination with `Λ_a†(|x⟩⟨x|) = α·Y^{a|x}` and `N_x = |x⟩⟨x|`.
/// The instrument carries one completion subchannel beyond the guesses.
#[derive(Clone, Debug, PartialEq)]
pub struct SubchannelGame {
    pub instrument: Instrument,
    pub povm: Povm,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Game {
    Discrimination(DiscriminationGame),
    Subchannel(SubchannelGame),
}

pub fn game_from_witness(w: &Witness) -> Result<DiscriminationGame> {
    check_blocks_psd(w)?;
    let (ensemble, tr_y) = PartitionedEnsemble::from_weighted_blocks(&w.blocks, w.shape.num_outcomes)?;
    Ok(DiscriminationGame { ensemble, tr_y })
}

fn check_blocks_psd(w: &Witness) -> Result<()> {
    let scale = 1.0 + w.blocks.iter().fold(0.0f64, |m, b| m.max(b.max_abs_entry()));
    let min = w.min_eigenvalue();
    if min < -1e-8 * scale {
        return Err(Error::NotPsd { what: "witness block".into(), min_eigenvalue: min });
    }
    Ok(())
}

/// Builds the subchannel game of a state-assemblage witness; `filler` is the
/// output state of the completion subchannel (maximally mixed when `None`).
pub fn subchannel_game_from_witness(w: &Witness, filler: Option<&HermitianMatrix>) -> Result<SubchannelGame> {
    check_blocks_psd(w)?;
    let (d, na, nx) = (w.shape.dim, w.shape.num_outcomes, w.shape.num_settings);
    let mut total = HermitianMatrix::zeros(d);
    for b in &w.blocks {
        total += b;
    }
    let norm = operator_norm_inf(&total);
    if norm <= PROBABILITY_FLOOR {
        return Err(Error::ZeroWitness(norm));
    }
    let alpha = 1.0 / norm;
    // Choi of ρ ↦ α Σ_x tr[Y^{a|x}ρ] |x⟩⟨x| is α Σ_x (Y^{a|x})ᵀ ⊗ |x⟩⟨x|.
    let subchannels: Vec<HermitianMatrix> = (0..na)
        .map(|a| {
            let mut c = HermitianMatrix::zeros(d * nx);
            for x in 0..nx {
                c += &w.block(a, x).transpose().kron(&HermitianMatrix::basis_projector(nx, x)).scale(alpha);
            }
            c
        })
        .collect();
    let mixed = HermitianMatrix::identity(nx).scale(1.0 / nx as f64);
    let instrument = complete_instrument(d, nx, subchannels, filler.unwrap_or(&mixed))?;
    Ok(SubchannelGame { instrument, povm: Povm::computational(nx), alpha })
}

/// Success probability of `object` in `game`.
pub fn p_succ(object: &QuantumObject, game: &Game) -> Result<f64> {
    match (object, game) {
        (QuantumObject::Measurement(m), Game::Discrimination(g)) => p_guess_prior(&g.ensemble, m),
        (QuantumObject::Assemblage(s), Game::Subchannel(g)) => p_succ_subchannel(SubchannelInput::Assemblage(s), &g.instrument, &g.povm),
        _ => Err(Error::KindMismatch { kind: game_name(game).into(), class: format!("{:?}", object.class()) }),
    }
}

fn game_name(game: &Game) -> &'static str {
    match game {
        Game::Discrimination(_) => "discrimination_game",
        Game::Subchannel(_) => "subchannel_game",
    }
}

/// Blocks `W` with `p_succ(T) = Σ ⟨W_{a|x}, T_{a|x}⟩` for objects `T` of the matching class.
fn payoff_blocks(game: &Game, class: ObjectClass) -> Result<Vec<HermitianMatrix>> {
    match (game, class) {
        (Game::Discrimination(g), ObjectClass::MeasurementAssemblage) => Ok(g.ensemble.blocks()),
        (Game::Subchannel(g), ObjectClass::StateAssemblage) => {
            let guesses = g.instrument.num_outcomes() - 1;
            let nx = g.povm.num_outcomes();
            let mut out = Vec::with_capacity(guesses * nx);
            for x in 0..nx {
                for a in 0..guesses {
                    out.push(g.instrument.adjoint(a, g.povm.effect(x)));
                }
            }
            Ok(out)
        }
        _ => Err(Error::KindMismatch { kind: game_name(game).into(), class: format!("{class:?}") }),
    }
}

/// `max_{T ∈ F} p_succ(T, game)`: exact over generators for finitely
/// generated sets, otherwise one conic maximization over `C_F` at unit scale.
pub fn max_psucc_free(game: &Game, spec: &FreeSetSpec, opts: &RobustnessOptions) -> Result<f64> {
    let payoff = payoff_blocks(game, spec.object_class)?;
    if payoff.len() != spec.shape.num_blocks() || payoff.iter().any(|p| p.dim() != spec.shape.dim) {
        return Err(Error::ShapeMismatch(format!("game does not match free-set shape {:?}", spec.shape)));
    }
    max_linear_free(&payoff, spec, opts)
}

/// `max_{T ∈ F} Σ ⟨W, T⟩`.
pub fn max_linear_free(payoff: &[HermitianMatrix], spec: &FreeSetSpec, opts: &RobustnessOptions) -> Result<f64> {
    let pair = |t: &[HermitianMatrix]| -> f64 { payoff.iter().zip(t).map(|(w, b)| w.inner_unchecked(b)).sum() };
    if let FreeSetKind::FinitelyGenerated(generators) = &spec.kind {
        return generators.iter().map(|g| pair(g)).reduce(f64::max).ok_or_else(|| Error::InvalidSize("no generators".into()));
    }
    let enc = cone_constraints_capped(spec, opts.cap)?;
    let mut objective: Vec<HermitianMatrix> = enc.cone.block_dims().into_iter().map(HermitianMatrix::zeros).collect();
    for t in &enc.object_terms {
        objective[t.var] += &t.map.adjoint().apply(&payoff[t.row]);
    }
    let mut eq_bounds: Vec<HermitianMatrix> = enc.eq_dims.iter().map(|&d| HermitianMatrix::zeros(d)).collect();
    let mut eq_terms = enc.eq_terms.clone();
    let unit_row = eq_bounds.len();
    eq_bounds.push(HermitianMatrix::identity(1));
    for (v, n) in enc.normalization.iter().enumerate() {
        eq_terms.push(Term::new(v, unit_row, HermMap::functional(n)));
    }
    let program = ConicProgram {
        sense: Sense::Maximize,
        cone: enc.cone.clone(),
        objective,
        ineq_bounds: vec![],
        ineq_terms: vec![],
        eq_bounds,
        eq_terms,
    };
    let sol = solve(&program, &opts.solver)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    Ok(sol.value)
}

/// Result of comparing the witness-game advantage with `1 + R_F`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub ratio: f64,
    pub one_plus_r: f64,
    pub discrepancy: f64,
    pub p_succ: f64,
    pub max_free: f64,
    pub game: Game,
    pub robustness: RobustnessResult,
}

/// Builds the witness game for `object` and the ratio `p_succ / max_F p_succ`.
pub fn verify_ratio(object: &QuantumObject, spec: &FreeSetSpec, opts: &RobustnessOptions) -> Result<RatioReport> {
    let robustness = generalized_robustness(object, spec, opts)?;
    let game = game_for(&robustness.witness, object.class())?;
    ratio_for(object, spec, opts, robustness, game)
}

/// The game attached to a witness of the given object class.
pub fn game_for(w: &Witness, class: ObjectClass) -> Result<Game> {
    match class {
        ObjectClass::MeasurementAssemblage => game_from_witness(w).map(Game::Discrimination),
        ObjectClass::StateAssemblage => subchannel_game_from_witness(w, None).map(Game::Subchannel),
        ObjectClass::StateEnsemble => Err(Error::KindMismatch { kind: "witness_game".into(), class: format!("{class:?}") }),
    }
}

/// The ratio for an already computed robustness and game.
pub fn ratio_for(
    object: &QuantumObject,
    spec: &FreeSetSpec,
    opts: &RobustnessOptions,
    robustness: RobustnessResult,
    game: Game,
) -> Result<RatioReport> {
    let p = p_succ(object, &game)?;
    let max_free = max_psucc_free(&game, spec, opts)?;
    if max_free <= PROBABILITY_FLOOR {
        return Err(Error::ZeroWitness(max_free));
    }
    let ratio = p / max_free;
    let one_plus_r = 1.0 + robustness.t;
    Ok(RatioReport { ratio, one_plus_r, discrepancy: (ratio - one_plus_r).abs(), p_succ: p, max_free, game, robustness })
}

/// Success probability of an assemblage in a subchannel game.
pub fn p_succ_assemblage(asm: &StateAssemblage, game: &SubchannelGame) -> Result<f64> {
    p_succ_subchannel(SubchannelInput::Assemblage(asm), &game.instrument, &game.povm)
}
