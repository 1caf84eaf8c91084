//! Cone programs `max ⟨A, X⟩ s.t. Λ[X] ⪯ B, X ∈ C` over products of PSD
//! blocks and finitely generated cones, with their Lagrange duals
//! `min ⟨B, Y⟩ s.t. Λ†[Y] − A ∈ C*, Y ⪰ 0`.
//!
//! Equality rows `Λ_eq[X] = B_eq` are supported directly; their multipliers
//! are free Hermitian blocks reported as `Z`.

mod dual;
mod ipm;
mod slater;
mod standard;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::linmap::HermMap;

pub use dual::dualize;
pub use ipm::IterationRecord;
pub use slater::{check_slater, check_slater_from, SlaterDiagnosis};

/// One factor of the cone `C`.
#[derive(Clone, Debug, PartialEq)]
pub enum ConeFactor {
    /// A single PSD variable block of the given dimension.
    Psd(usize),
    /// Variable blocks `X = Σ_i c_i T_i` with `c_i ≥ 0`; every generator is a
    /// list of blocks matching `block_dims`.
    FinitelyGenerated { block_dims: Vec<usize>, generators: Vec<Vec<HermitianMatrix>> },
}

impl ConeFactor {
    pub fn block_dims(&self) -> Vec<usize> {
        match self {
            ConeFactor::Psd(d) => vec![*d],
            ConeFactor::FinitelyGenerated { block_dims, .. } => block_dims.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConeSpec {
    pub factors: Vec<ConeFactor>,
}

impl ConeSpec {
    /// Dimensions of all variable blocks, factors in order.
    pub fn block_dims(&self) -> Vec<usize> {
        self.factors.iter().flat_map(ConeFactor::block_dims).collect()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims().len()
    }

    pub fn validate(&self) -> Result<()> {
        for (f, factor) in self.factors.iter().enumerate() {
            match factor {
                ConeFactor::Psd(0) => return Err(Error::UnsupportedForm(format!("factor {f}: PSD block of dimension 0"))),
                ConeFactor::Psd(_) => {}
                ConeFactor::FinitelyGenerated { block_dims, generators } => {
                    for (g, gen) in generators.iter().enumerate() {
                        if gen.len() != block_dims.len() || gen.iter().zip(block_dims).any(|(t, d)| t.dim() != *d) {
                            return Err(Error::UnsupportedForm(format!("factor {f}: generator {g} has the wrong block shape")));
                        }
                        if let Some(t) = gen.iter().find(|t| t.min_eigenvalue() < -1e-9 * (1.0 + t.max_abs_entry())) {
                            return Err(Error::NotPsd { what: format!("factor {f} generator {g}"), min_eigenvalue: t.min_eigenvalue() });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Contribution `map(X_var)` to constraint row `row`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub var: usize,
    pub row: usize,
    pub map: HermMap,
}

impl Term {
    pub fn new(var: usize, row: usize, map: HermMap) -> Self {
        Self { var, row, map }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicProgram {
    pub sense: Sense,
    pub cone: ConeSpec,
    /// `A`, one block per variable block.
    pub objective: Vec<HermitianMatrix>,
    /// `B` for the rows `Λ[X] ⪯ B`.
    pub ineq_bounds: Vec<HermitianMatrix>,
    pub ineq_terms: Vec<Term>,
    /// `B_eq` for the rows `Λ_eq[X] = B_eq`.
    pub eq_bounds: Vec<HermitianMatrix>,
    pub eq_terms: Vec<Term>,
}

impl ConicProgram {
    pub fn validate(&self) -> Result<()> {
        self.cone.validate()?;
        let dims = self.cone.block_dims();
        if self.objective.len() != dims.len() {
            return Err(Error::UnsupportedForm(format!("{} objective blocks for {} variable blocks", self.objective.len(), dims.len())));
        }
        if let Some((v, a)) = self.objective.iter().enumerate().find(|(v, a)| a.dim() != dims[*v]) {
            return Err(Error::UnsupportedForm(format!("objective block {v} has dimension {}", a.dim())));
        }
        for (terms, bounds, kind) in [(&self.ineq_terms, &self.ineq_bounds, "inequality"), (&self.eq_terms, &self.eq_bounds, "equality")] {
            for t in terms {
                if t.var >= dims.len() || t.row >= bounds.len() {
                    return Err(Error::UnsupportedForm(format!("{kind} term references variable {} / row {}", t.var, t.row)));
                }
                if t.map.dim_in() != dims[t.var] || t.map.dim_out() != bounds[t.row].dim() {
                    return Err(Error::UnsupportedForm(format!("{kind} term ({}, {}) has mismatched map dimensions", t.var, t.row)));
                }
            }
        }
        Ok(())
    }

    /// `⟨A, X⟩`.
    pub fn objective_value(&self, x: &[HermitianMatrix]) -> f64 {
        self.objective.iter().zip(x).map(|(a, xb)| a.inner_unchecked(xb)).sum()
    }

    /// `Λ[X]` for inequality rows.
    pub fn apply_ineq(&self, x: &[HermitianMatrix]) -> Vec<HermitianMatrix> {
        apply_terms(&self.ineq_terms, &self.ineq_bounds, x)
    }

    /// `Λ_eq[X]` for equality rows.
    pub fn apply_eq(&self, x: &[HermitianMatrix]) -> Vec<HermitianMatrix> {
        apply_terms(&self.eq_terms, &self.eq_bounds, x)
    }

    /// `Λ†[Y] + Λ_eq†[Z]`, one block per variable block.
    pub fn apply_adjoint(&self, y: &[HermitianMatrix], z: &[HermitianMatrix]) -> Vec<HermitianMatrix> {
        let mut out: Vec<HermitianMatrix> = self.cone.block_dims().into_iter().map(HermitianMatrix::zeros).collect();
        for t in &self.ineq_terms {
            out[t.var] += &t.map.adjoint().apply(&y[t.row]);
        }
        for t in &self.eq_terms {
            out[t.var] += &t.map.adjoint().apply(&z[t.row]);
        }
        out
    }
}

fn apply_terms(terms: &[Term], bounds: &[HermitianMatrix], x: &[HermitianMatrix]) -> Vec<HermitianMatrix> {
    let mut out: Vec<HermitianMatrix> = bounds.iter().map(|b| HermitianMatrix::zeros(b.dim())).collect();
    for t in terms {
        out[t.row] += &t.map.apply(&x[t.var]);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// Relative violation of the linear constraints.
    pub primal: f64,
    /// Relative violation of the dual linear constraints.
    pub dual: f64,
    /// Largest negative eigenvalue among cone variables and slacks.
    pub cone: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// `⟨A, X⟩`.
    pub value: f64,
    /// Dual objective value.
    pub dual_value: f64,
    pub primal: Vec<HermitianMatrix>,
    /// Nonnegative generator coefficients per finitely generated factor.
    pub coefficients: Vec<Vec<f64>>,
    /// `Y ⪰ 0`, one block per inequality row.
    pub dual: Vec<HermitianMatrix>,
    /// Free multipliers, one block per equality row.
    pub multipliers: Vec<HermitianMatrix>,
    pub gap: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol_feas: f64,
    pub tol_gap: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Mehrotra predictor-corrector; off means fixed centering.
    pub predictor_corrector: bool,
    /// Threshold for classifying a homogeneous ray as a certificate.
    pub tol_infeasible: f64,
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            tol_gap: 1e-7,
            max_iter: 200,
            step_fraction: 0.98,
            predictor_corrector: false,
            tol_infeasible: 1e-8,
            trace: false,
        }
    }
}

/// Solves `program`; failures are reported through the status.
pub fn solve(program: &ConicProgram, options: &SolverOptions) -> Result<ConicSolution> {
    program.validate()?;
    let std = standard::StandardForm::from_program(program);
    let raw = ipm::solve_standard(&std, options);
    Ok(std.to_solution(program, raw))
}

/// [`solve`] with explicit tolerances and iteration limit.
pub fn solve_with(program: &ConicProgram, tol_feas: f64, tol_gap: f64, max_iter: usize) -> Result<ConicSolution> {
    solve(program, &SolverOptions { tol_feas, tol_gap, max_iter, ..SolverOptions::default() })
}
