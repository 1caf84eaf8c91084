//! Generalized robustness of quantum measurements, state assemblages and
//! ensembles with respect to convex free sets, computed as conic programs,
//! together with the discrimination games built from their dual witnesses.

pub mod conic;
pub mod error;
pub mod format;
pub mod free_sets;
pub mod games;
pub mod hermitian;
pub mod linmap;
pub mod objects;
pub mod robustness;

pub use conic::{
    check_slater, check_slater_from, dualize, solve, solve_with, ConeFactor, ConeSpec, ConicProgram, ConicSolution, Residuals, Sense,
    SlaterDiagnosis, SolveStatus, SolverOptions, Term,
};
pub use error::{Error, Result};
pub use hermitian::{HermitianMatrix, C64};
pub use linmap::HermMap;
pub use objects::*;
pub use free_sets::{
    cone_constraints, expand_generators_postprocessing, membership, sample_free_point, Certificate, ConeEncoding, FreeSetKind,
    FreeSetSpec, Membership, DEFAULT_TOL_MEMBERSHIP,
};
pub use robustness::{
    assemblage_robustness, ensemble_robustness, generalized_measurement_robustness, generalized_robustness,
    incompatibility_robustness, state_coherence_robustness, Diagnostics, RobustnessOptions, RobustnessResult, Witness,
};
pub use games::{
    game_for, game_from_witness, max_linear_free, max_psucc_free, p_succ, p_succ_assemblage, ratio_for,
    subchannel_game_from_witness, verify_ratio, DiscriminationGame, Game, RatioReport, SubchannelGame,
};
