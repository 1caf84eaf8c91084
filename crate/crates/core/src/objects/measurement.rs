use crate::error::{Error, Result};
use crate::hermitian::{HermitianMatrix, PSD_TOL};

use super::OBJECT_TOL;

/// Default cap on `|a|^|x|` for post-processing enumeration.
pub const DEFAULT_POSTPROCESSING_CAP: u128 = 1_000_000;

/// A POVM: PSD effects summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    effects: Vec<HermitianMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianMatrix>) -> Result<Self> {
        Self::with_tolerance(effects, OBJECT_TOL)
    }

    pub fn with_tolerance(effects: Vec<HermitianMatrix>, tol: f64) -> Result<Self> {
        let dim = effects.first().ok_or_else(|| Error::InvalidSize("a POVM needs at least one effect".into()))?.dim();
        let mut sum = HermitianMatrix::zeros(dim);
        for (a, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch(dim, e.dim()));
            }
            let min = e.min_eigenvalue();
            if min < -tol.max(PSD_TOL) * (1.0 + e.max_abs_entry()) {
                return Err(Error::NotPsd { what: format!("effect {a}"), min_eigenvalue: min });
            }
            sum += e;
        }
        let deviation = sum.max_abs_diff(&HermitianMatrix::identity(dim));
        if deviation > tol {
            return Err(Error::NotNormalized { what: "POVM effects".into(), deviation });
        }
        Ok(Self { effects })
    }

    /// Skips validation; for effects that are valid by construction.
    pub fn from_effects_unchecked(effects: Vec<HermitianMatrix>) -> Self {
        Self { effects }
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        Self { effects: (0..dim).map(|i| HermitianMatrix::basis_projector(dim, i)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn num_outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn effects(&self) -> &[HermitianMatrix] {
        &self.effects
    }

    pub fn effect(&self, a: usize) -> &HermitianMatrix {
        &self.effects[a]
    }

    fn padded(&self, outcomes: usize) -> Self {
        let mut effects = self.effects.clone();
        effects.resize(outcomes, HermitianMatrix::zeros(self.dim()));
        Self { effects }
    }
}

/// A collection of POVMs `{M_{a|x}}` sharing dimension and outcome count.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementAssemblage {
    settings: Vec<Povm>,
}

impl MeasurementAssemblage {
    /// Pads ragged outcome counts with zero effects.
    pub fn new(settings: Vec<Povm>) -> Result<Self> {
        let first = settings.first().ok_or_else(|| Error::InvalidSize("an assemblage needs at least one setting".into()))?;
        let dim = first.dim();
        if let Some(bad) = settings.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch(dim, bad.dim()));
        }
        let outcomes = settings.iter().map(Povm::num_outcomes).max().unwrap_or(0);
        Ok(Self { settings: settings.iter().map(|p| p.padded(outcomes)).collect() })
    }

    pub fn single(povm: Povm) -> Self {
        Self { settings: vec![povm] }
    }

    /// Builds from effects indexed `[x][a]`, validating every setting.
    pub fn from_effects(effects: Vec<Vec<HermitianMatrix>>) -> Result<Self> {
        Self::new(effects.into_iter().map(Povm::new).collect::<Result<_>>()?)
    }

    pub(crate) fn from_effects_unchecked(effects: Vec<Vec<HermitianMatrix>>) -> Self {
        Self { settings: effects.into_iter().map(Povm::from_effects_unchecked).collect() }
    }

    pub fn dim(&self) -> usize {
        self.settings[0].dim()
    }

    pub fn num_settings(&self) -> usize {
        self.settings.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.settings[0].num_outcomes()
    }

    pub fn settings(&self) -> &[Povm] {
        &self.settings
    }

    pub fn effect(&self, a: usize, x: usize) -> &HermitianMatrix {
        self.settings[x].effect(a)
    }

    /// Effects flattened in `(x, a)` order, `a` fastest.
    pub fn blocks(&self) -> Vec<HermitianMatrix> {
        self.settings.iter().flat_map(|p| p.effects().iter().cloned()).collect()
    }

    pub(crate) fn from_blocks_unchecked(blocks: &[HermitianMatrix], num_outcomes: usize) -> Self {
        Self::from_effects_unchecked(blocks.chunks(num_outcomes).map(<[_]>::to_vec).collect())
    }

    /// `Σ_k w_k·A_k` of assemblages with the same shape.
    pub fn mix(parts: &[(f64, &MeasurementAssemblage)]) -> Result<Self> {
        let (_, first) = parts.first().ok_or_else(|| Error::InvalidSize("empty mixture".into()))?;
        let shape = (first.dim(), first.num_outcomes(), first.num_settings());
        let mut blocks: Vec<HermitianMatrix> = vec![HermitianMatrix::zeros(shape.0); shape.1 * shape.2];
        for (w, m) in parts {
            if (m.dim(), m.num_outcomes(), m.num_settings()) != shape {
                return Err(Error::ShapeMismatch("mixture components differ in shape".into()));
            }
            for (b, e) in blocks.iter_mut().zip(m.blocks()) {
                *b += &e.scale(*w);
            }
        }
        Ok(Self::from_blocks_unchecked(&blocks, shape.1))
    }
}

/// Deterministic response function `λ: x ↦ a`, so `D(a|x,λ) = [λ(x) = a]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicPostprocessing {
    assignment: Vec<usize>,
}

impl DeterministicPostprocessing {
    pub fn new(assignment: Vec<usize>) -> Self {
        Self { assignment }
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn outcome(&self, x: usize) -> usize {
        self.assignment[x]
    }

    /// `D(a|x,λ)`.
    pub fn response(&self, a: usize, x: usize) -> f64 {
        if self.assignment[x] == a {
            1.0
        } else {
            0.0
        }
    }
}

/// All `|a|^|x|` deterministic strategies in lexicographic order of `(λ(0), …, λ(|x|−1))`.
pub fn enumerate_postprocessings(num_outcomes: usize, num_settings: usize) -> Result<Vec<DeterministicPostprocessing>> {
    enumerate_postprocessings_capped(num_outcomes, num_settings, DEFAULT_POSTPROCESSING_CAP)
}

pub fn enumerate_postprocessings_capped(
    num_outcomes: usize,
    num_settings: usize,
    cap: u128,
) -> Result<Vec<DeterministicPostprocessing>> {
    if num_outcomes == 0 || num_settings == 0 {
        return Err(Error::InvalidSize("need at least one outcome and one setting".into()));
    }
    let count = (num_outcomes as u128)
        .checked_pow(num_settings as u32)
        .filter(|&c| c <= cap)
        .ok_or(Error::SizeOverflow {
            count: (num_outcomes as u128).saturating_pow(num_settings as u32),
            cap,
        })?;
    let mut out = Vec::with_capacity(count as usize);
    let mut digits = vec![0usize; num_settings];
    for _ in 0..count {
        out.push(DeterministicPostprocessing::new(digits.clone()));
        for slot in digits.iter_mut().rev() {
            *slot += 1;
            if *slot < num_outcomes {
                break;
            }
            *slot = 0;
        }
    }
    Ok(out)
}

/// `O_{a|x} = Σ_λ D(a|x,λ) G_λ`. The outcome count is one more than the
/// largest outcome any strategy assigns.
pub fn postprocess_joint(joint: &[HermitianMatrix], pp: &[DeterministicPostprocessing]) -> Result<MeasurementAssemblage> {
    if joint.len() != pp.len() || joint.is_empty() {
        return Err(Error::InvalidJoint(format!("{} joint effects for {} post-processings", joint.len(), pp.len())));
    }
    let settings = pp[0].assignment().len();
    if settings == 0 || pp.iter().any(|p| p.assignment().len() != settings) {
        return Err(Error::InvalidJoint("post-processings disagree on the number of settings".into()));
    }
    let parent = Povm::new(joint.to_vec()).map_err(|e| Error::InvalidJoint(e.to_string()))?;
    let outcomes = pp.iter().flat_map(|p| p.assignment().iter().copied()).max().unwrap_or(0) + 1;
    let dim = parent.dim();
    let effects = (0..settings)
        .map(|x| {
            (0..outcomes)
                .map(|a| {
                    let mut o = HermitianMatrix::zeros(dim);
                    for (g, p) in joint.iter().zip(pp) {
                        if p.outcome(x) == a {
                            o += g;
                        }
                    }
                    o
                })
                .collect()
        })
        .collect();
    Ok(MeasurementAssemblage::from_effects_unchecked(effects))
}
