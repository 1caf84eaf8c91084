//! POVMs, measurement and state assemblages, ensembles, instruments and
//! their success-probability functionals.
//!
//! Flattened block lists always use `(x, a)` order with `a` fastest.

use serde::{Deserialize, Serialize};

use crate::hermitian::HermitianMatrix;

mod instrument;
mod measurement;
mod states;
mod success;

pub use instrument::{choi_of, complete_instrument, phase_instrument, Instrument};
pub use measurement::{
    enumerate_postprocessings, enumerate_postprocessings_capped, postprocess_joint, DeterministicPostprocessing,
    MeasurementAssemblage, Povm, DEFAULT_POSTPROCESSING_CAP,
};
pub use states::{PartitionedEnsemble, StateAssemblage};
pub use success::{p_guess_prior, p_succ_subchannel, SubchannelInput};

/// Tolerance for normalization and positivity checks on constructed objects.
pub const OBJECT_TOL: f64 = 1e-8;

/// Probabilities below this are treated as zero when normalizing.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Which kind of object a block list describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    MeasurementAssemblage,
    StateAssemblage,
    StateEnsemble,
}

/// `(d, |a|, |x|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub dim: usize,
    pub num_outcomes: usize,
    pub num_settings: usize,
}

impl Shape {
    pub fn new(dim: usize, num_outcomes: usize, num_settings: usize) -> Self {
        Self { dim, num_outcomes, num_settings }
    }

    pub fn num_blocks(&self) -> usize {
        self.num_outcomes * self.num_settings
    }

    /// Flattened index of block `(a, x)`.
    pub fn index(&self, a: usize, x: usize) -> usize {
        x * self.num_outcomes + a
    }
}

/// Any of the objects whose robustness can be computed.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumObject {
    Measurement(MeasurementAssemblage),
    Assemblage(StateAssemblage),
    /// Ensembles enter through their weighted blocks `p(x)p(a|x)ρ_{a|x}`.
    Ensemble(PartitionedEnsemble),
}

impl QuantumObject {
    pub fn class(&self) -> ObjectClass {
        match self {
            QuantumObject::Measurement(_) => ObjectClass::MeasurementAssemblage,
            QuantumObject::Assemblage(_) => ObjectClass::StateAssemblage,
            QuantumObject::Ensemble(_) => ObjectClass::StateEnsemble,
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            QuantumObject::Measurement(m) => Shape::new(m.dim(), m.num_outcomes(), m.num_settings()),
            QuantumObject::Assemblage(s) => Shape::new(s.dim(), s.num_outcomes(), s.num_settings()),
            QuantumObject::Ensemble(e) => Shape::new(e.dim(), e.num_outcomes(), e.num_partitions()),
        }
    }

    pub fn blocks(&self) -> Vec<HermitianMatrix> {
        match self {
            QuantumObject::Measurement(m) => m.blocks(),
            QuantumObject::Assemblage(s) => s.blocks(),
            QuantumObject::Ensemble(e) => e.blocks(),
        }
    }
}
