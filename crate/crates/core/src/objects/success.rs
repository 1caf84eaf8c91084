//! Success-probability functionals for the discrimination games.

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;

use super::{Instrument, MeasurementAssemblage, PartitionedEnsemble, Povm, StateAssemblage};

/// `Σ_{a,x} p(x)p(a|x) tr[M_{a|x} ρ_{a|x}]`; outcome `a` is the guess.
pub fn p_guess_prior(game: &PartitionedEnsemble, meas: &MeasurementAssemblage) -> Result<f64> {
    if game.num_partitions() != meas.num_settings() || game.num_outcomes() != meas.num_outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "ensemble is {}x{} (|x|x|a|), measurements are {}x{}",
            game.num_partitions(),
            game.num_outcomes(),
            meas.num_settings(),
            meas.num_outcomes()
        )));
    }
    if game.dim() != meas.dim() {
        return Err(Error::DimensionMismatch(game.dim(), meas.dim()));
    }
    let mut p = 0.0;
    for x in 0..meas.num_settings() {
        for a in 0..meas.num_outcomes() {
            p += game.weight(a, x) * meas.effect(a, x).inner_unchecked(&game.states()[x][a]);
        }
    }
    Ok(p)
}

/// Input of a subchannel-discrimination game.
#[derive(Clone, Copy, Debug)]
pub enum SubchannelInput<'a> {
    State(&'a HermitianMatrix),
    Assemblage(&'a StateAssemblage),
}

/// State form `Σ_a tr[Λ_a(ρ) N_a]` or assemblage form `Σ_{a,x} tr[σ_{a|x} Λ_a†(N_x)]`.
///
/// Subchannels beyond the guesses that can be reported (the completion
/// subchannel) contribute zero.
pub fn p_succ_subchannel(input: SubchannelInput<'_>, instr: &Instrument, povm: &Povm) -> Result<f64> {
    if povm.dim() != instr.dim_out() {
        return Err(Error::ShapeMismatch(format!("POVM dimension {} vs instrument output {}", povm.dim(), instr.dim_out())));
    }
    match input {
        SubchannelInput::State(rho) => {
            if rho.dim() != instr.dim_in() {
                return Err(Error::ShapeMismatch(format!("state dimension {} vs instrument input {}", rho.dim(), instr.dim_in())));
            }
            let guesses = povm.num_outcomes();
            if instr.num_outcomes() != guesses && instr.num_outcomes() != guesses + 1 {
                return Err(Error::ShapeMismatch(format!("{} subchannels for {} POVM outcomes", instr.num_outcomes(), guesses)));
            }
            Ok((0..guesses).map(|a| instr.apply(a, rho).inner_unchecked(povm.effect(a))).sum())
        }
        SubchannelInput::Assemblage(asm) => {
            if asm.dim() != instr.dim_in() {
                return Err(Error::ShapeMismatch(format!("assemblage dimension {} vs instrument input {}", asm.dim(), instr.dim_in())));
            }
            if povm.num_outcomes() != asm.num_settings() {
                return Err(Error::ShapeMismatch(format!("{} POVM outcomes for {} settings", povm.num_outcomes(), asm.num_settings())));
            }
            let guesses = asm.num_outcomes();
            if instr.num_outcomes() != guesses && instr.num_outcomes() != guesses + 1 {
                return Err(Error::ShapeMismatch(format!("{} subchannels for {} outcomes", instr.num_outcomes(), guesses)));
            }
            let mut p = 0.0;
            for a in 0..guesses {
                for x in 0..asm.num_settings() {
                    p += asm.block(a, x).inner_unchecked(&instr.adjoint(a, povm.effect(x)));
                }
            }
            Ok(p)
        }
    }
}
