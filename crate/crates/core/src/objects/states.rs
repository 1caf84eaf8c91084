use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;

use super::measurement::{DeterministicPostprocessing, MeasurementAssemblage};
use super::{OBJECT_TOL, PROBABILITY_FLOOR};

/// Subnormalized states `σ_{a|x}` with a common unit-trace marginal `Σ_a σ_{a|x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateAssemblage {
    /// Indexed `[x][a]`.
    blocks: Vec<Vec<HermitianMatrix>>,
}

impl StateAssemblage {
    pub fn new(blocks: Vec<Vec<HermitianMatrix>>) -> Result<Self> {
        Self::with_tolerance(blocks, OBJECT_TOL)
    }

    pub fn with_tolerance(blocks: Vec<Vec<HermitianMatrix>>, tol: f64) -> Result<Self> {
        let first = blocks
            .first()
            .and_then(|row| row.first())
            .ok_or_else(|| Error::InvalidSize("an assemblage needs at least one block".into()))?;
        let (dim, outcomes) = (first.dim(), blocks[0].len());
        let mut marginal: Option<HermitianMatrix> = None;
        for (x, row) in blocks.iter().enumerate() {
            if row.len() != outcomes {
                return Err(Error::ShapeMismatch(format!("setting {x} has {} outcomes, expected {outcomes}", row.len())));
            }
            let mut sum = HermitianMatrix::zeros(dim);
            for (a, s) in row.iter().enumerate() {
                if s.dim() != dim {
                    return Err(Error::DimensionMismatch(dim, s.dim()));
                }
                let min = s.min_eigenvalue();
                if min < -tol {
                    return Err(Error::NotPsd { what: format!("block ({a}|{x})"), min_eigenvalue: min });
                }
                sum += s;
            }
            match &marginal {
                None => {
                    let deviation = (sum.trace() - 1.0).abs();
                    if deviation > tol {
                        return Err(Error::NotNormalized { what: "assemblage marginal trace".into(), deviation });
                    }
                    marginal = Some(sum);
                }
                Some(m) => {
                    let deviation = m.max_abs_diff(&sum);
                    if deviation > tol {
                        return Err(Error::NotNormalized { what: format!("marginal of setting {x}"), deviation });
                    }
                }
            }
        }
        Ok(Self { blocks })
    }

    /// `σ_{a|x} = Σ_λ D(a|x,λ) σ_λ` for subnormalized hidden states with total trace one.
    pub fn from_lhs_model(hidden: &[HermitianMatrix], pp: &[DeterministicPostprocessing], num_outcomes: usize) -> Result<Self> {
        if hidden.len() != pp.len() || hidden.is_empty() {
            return Err(Error::ShapeMismatch(format!("{} hidden states for {} strategies", hidden.len(), pp.len())));
        }
        let dim = hidden[0].dim();
        let settings = pp[0].assignment().len();
        let blocks = (0..settings)
            .map(|x| {
                (0..num_outcomes)
                    .map(|a| {
                        let mut s = HermitianMatrix::zeros(dim);
                        for (h, p) in hidden.iter().zip(pp) {
                            if p.outcome(x) == a {
                                s += h;
                            }
                        }
                        s
                    })
                    .collect()
            })
            .collect();
        Self::new(blocks)
    }

    /// Steering assemblage `σ_{a|x} = tr_A[(M_{a|x} ⊗ 1) ρ_AB]` with `ρ_AB` on `d_A ⊗ d_B`.
    pub fn from_bipartite(state: &HermitianMatrix, alice: &MeasurementAssemblage) -> Result<Self> {
        let da = alice.dim();
        if !state.dim().is_multiple_of(da) {
            return Err(Error::DimensionMismatch(state.dim(), da));
        }
        let db = state.dim() / da;
        let id_b = HermitianMatrix::identity(db);
        let blocks = (0..alice.num_settings())
            .map(|x| {
                (0..alice.num_outcomes())
                    .map(|a| {
                        let op = alice.effect(a, x).kron(&id_b);
                        let prod = op.matrix() * state.matrix();
                        let reduced = nalgebra::DMatrix::from_fn(db, db, |i, j| (0..da).map(|k| prod[(k * db + i, k * db + j)]).sum());
                        HermitianMatrix::from_matrix_unchecked(&reduced)
                    })
                    .collect()
            })
            .collect();
        Self::new(blocks)
    }

    pub fn dim(&self) -> usize {
        self.blocks[0][0].dim()
    }

    pub fn num_settings(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn block(&self, a: usize, x: usize) -> &HermitianMatrix {
        &self.blocks[x][a]
    }

    pub fn rows(&self) -> &[Vec<HermitianMatrix>] {
        &self.blocks
    }

    /// Blocks flattened in `(x, a)` order, `a` fastest.
    pub fn blocks(&self) -> Vec<HermitianMatrix> {
        self.blocks.iter().flatten().cloned().collect()
    }

    /// `Σ_a σ_{a|x}` for `x = 0`.
    pub fn marginal(&self) -> HermitianMatrix {
        let mut m = HermitianMatrix::zeros(self.dim());
        for s in &self.blocks[0] {
            m += s;
        }
        m
    }
}

/// Ensemble `{p(x)p(a|x), ρ_{a|x}}` partitioned by `x`. A plain ensemble has one partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedEnsemble {
    priors: Vec<f64>,
    /// Indexed `[x][a]`.
    conditionals: Vec<Vec<f64>>,
    /// Indexed `[x][a]`.
    states: Vec<Vec<HermitianMatrix>>,
}

impl PartitionedEnsemble {
    pub fn new(priors: Vec<f64>, conditionals: Vec<Vec<f64>>, states: Vec<Vec<HermitianMatrix>>) -> Result<Self> {
        let tol = OBJECT_TOL;
        check_distribution(&priors, "priors", tol)?;
        if conditionals.len() != priors.len() || states.len() != priors.len() {
            return Err(Error::ShapeMismatch("priors, conditionals and states disagree on |x|".into()));
        }
        let outcomes = conditionals.first().map_or(0, Vec::len);
        let dim = states.first().and_then(|r| r.first()).map(HermitianMatrix::dim).ok_or_else(|| Error::InvalidSize("no states".into()))?;
        for (x, (cond, row)) in conditionals.iter().zip(&states).enumerate() {
            if cond.len() != outcomes || row.len() != outcomes {
                return Err(Error::ShapeMismatch(format!("partition {x} has a ragged outcome count")));
            }
            check_distribution(cond, &format!("conditionals[{x}]"), tol)?;
            for (a, rho) in row.iter().enumerate() {
                if rho.dim() != dim {
                    return Err(Error::DimensionMismatch(dim, rho.dim()));
                }
                let min = rho.min_eigenvalue();
                if min < -tol {
                    return Err(Error::NotPsd { what: format!("state ({a}|{x})"), min_eigenvalue: min });
                }
                let deviation = (rho.trace() - 1.0).abs();
                if deviation > tol {
                    return Err(Error::NotNormalized { what: format!("trace of state ({a}|{x})"), deviation });
                }
            }
        }
        Ok(Self { priors, conditionals, states })
    }

    /// Ensemble `{p_a, ρ_a}` without partition.
    pub fn single(probabilities: Vec<f64>, states: Vec<HermitianMatrix>) -> Result<Self> {
        Self::new(vec![1.0], vec![probabilities], vec![states])
    }

    /// Decomposes weighted blocks `W_{a|x}` (PSD, `(x, a)` order) into
    /// `total·p(x)p(a|x)ρ_{a|x}`; returns the ensemble and `total = Σ tr W`.
    /// Probabilities below the floor are clamped to zero and carry the
    /// maximally mixed state.
    pub fn from_weighted_blocks(blocks: &[HermitianMatrix], num_outcomes: usize) -> Result<(Self, f64)> {
        let dim = blocks.first().map(HermitianMatrix::dim).ok_or_else(|| Error::InvalidSize("no blocks".into()))?;
        let total: f64 = blocks.iter().map(HermitianMatrix::trace).sum();
        if total <= PROBABILITY_FLOOR {
            return Err(Error::ZeroWitness(total));
        }
        let mixed = HermitianMatrix::identity(dim).scale(1.0 / dim as f64);
        let mut priors = Vec::new();
        let mut conditionals = Vec::new();
        let mut states = Vec::new();
        for row in blocks.chunks(num_outcomes) {
            let weight: f64 = row.iter().map(HermitianMatrix::trace).sum();
            let px = clamp(weight / total);
            priors.push(px);
            let mut cond = Vec::with_capacity(num_outcomes);
            let mut st = Vec::with_capacity(num_outcomes);
            for b in row {
                let tr = b.trace();
                let pa = if px > 0.0 { clamp(tr / weight) } else { 0.0 };
                cond.push(pa);
                st.push(if pa > 0.0 { b.scale(1.0 / tr) } else { mixed.clone() });
            }
            if px == 0.0 {
                cond = vec![1.0 / num_outcomes as f64; num_outcomes];
            }
            renormalize(&mut cond);
            conditionals.push(cond);
            states.push(st);
        }
        renormalize(&mut priors);
        Ok((Self { priors, conditionals, states }, total))
    }

    pub fn dim(&self) -> usize {
        self.states[0][0].dim()
    }

    pub fn num_partitions(&self) -> usize {
        self.priors.len()
    }

    pub fn num_outcomes(&self) -> usize {
        self.conditionals[0].len()
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn conditionals(&self) -> &[Vec<f64>] {
        &self.conditionals
    }

    pub fn states(&self) -> &[Vec<HermitianMatrix>] {
        &self.states
    }

    /// `p(x)p(a|x)`.
    pub fn weight(&self, a: usize, x: usize) -> f64 {
        self.priors[x] * self.conditionals[x][a]
    }

    /// Subnormalized blocks `p(x)p(a|x)ρ_{a|x}` in `(x, a)` order.
    pub fn blocks(&self) -> Vec<HermitianMatrix> {
        let mut out = Vec::new();
        for x in 0..self.num_partitions() {
            for a in 0..self.num_outcomes() {
                out.push(self.states[x][a].scale(self.weight(a, x)));
            }
        }
        out
    }
}

fn clamp(p: f64) -> f64 {
    if p < PROBABILITY_FLOOR {
        0.0
    } else {
        p
    }
}

fn renormalize(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    if s > 0.0 {
        p.iter_mut().for_each(|v| *v /= s);
    }
}

fn check_distribution(p: &[f64], what: &str, tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidSize(format!("{what} is empty")));
    }
    if let Some(v) = p.iter().find(|v| !(**v >= -tol)) {
        return Err(Error::NotNormalized { what: format!("{what} has negative entry"), deviation: *v });
    }
    let deviation = (p.iter().sum::<f64>() - 1.0).abs();
    if deviation > tol {
        return Err(Error::NotNormalized { what: what.into(), deviation });
    }
    Ok(())
}
