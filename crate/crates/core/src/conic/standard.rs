//! Translation between [`ConicProgram`] and the standard form
//! `min c·x s.t. A x = b, x ∈ K` with `K = R₊ⁿ × Π Herm₊(n_k)`.
//!
//! Variables are laid out as `[generator coefficients | PSD variables | slacks]`,
//! Hermitian blocks in orthonormal coordinates.

use nalgebra::{DMatrix, DVector};

use super::ipm::{RawSolution, RawStatus};
use super::{ConeFactor, ConicProgram, ConicSolution, Residuals, Sense, SolveStatus};
use crate::hermitian::HermitianMatrix;

/// How a program variable block is represented in standard-form coordinates.
#[derive(Clone, Debug)]
enum VarRepr {
    /// Hermitian cone block starting at this column.
    Psd { col: usize },
    /// `coords = G c` for the coefficient range `[col, col + gens)`.
    Generated { col: usize, gens: usize, basis: DMatrix<f64> },
}

#[derive(Clone, Debug)]
pub(crate) struct StandardForm {
    pub n_lp: usize,
    pub herm_dims: Vec<usize>,
    /// Constraint matrix restricted to linearly independent rows.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    /// Indices of the kept rows within the full row set.
    pub kept: Vec<usize>,
    /// Set when a dependent row contradicts the kept ones.
    pub inconsistent: bool,
    vars: Vec<VarRepr>,
    fg_ranges: Vec<(usize, usize)>,
    ineq_rows: Vec<(usize, usize)>,
    eq_rows: Vec<(usize, usize)>,
    num_rows: usize,
}

impl StandardForm {
    pub fn from_program(p: &ConicProgram) -> Self {
        // Columns: generator coefficients first, then PSD variables, then slacks.
        let mut n_lp = 0;
        let mut fg_ranges = Vec::new();
        for f in &p.cone.factors {
            if let ConeFactor::FinitelyGenerated { generators, .. } = f {
                fg_ranges.push((n_lp, generators.len()));
                n_lp += generators.len();
            }
        }
        let mut herm_dims = Vec::new();
        let mut col = n_lp;
        let mut vars = Vec::new();
        let mut fg_index = 0;
        for f in &p.cone.factors {
            match f {
                ConeFactor::Psd(d) => {
                    vars.push(VarRepr::Psd { col });
                    herm_dims.push(*d);
                    col += d * d;
                }
                ConeFactor::FinitelyGenerated { block_dims, generators } => {
                    let (start, gens) = fg_ranges[fg_index];
                    fg_index += 1;
                    for (k, d) in block_dims.iter().enumerate() {
                        let basis = DMatrix::from_fn(d * d, gens, |r, g| generators[g][k].to_coords()[r]);
                        vars.push(VarRepr::Generated { col: start, gens, basis });
                    }
                }
            }
        }
        let mut slack_cols = Vec::new();
        for bnd in &p.ineq_bounds {
            slack_cols.push(col);
            herm_dims.push(bnd.dim());
            col += bnd.dim() * bnd.dim();
        }
        let n = col;

        let mut num_rows = 0;
        let mut ineq_rows = Vec::new();
        for bnd in &p.ineq_bounds {
            ineq_rows.push((num_rows, bnd.dim()));
            num_rows += bnd.dim() * bnd.dim();
        }
        let mut eq_rows = Vec::new();
        for bnd in &p.eq_bounds {
            eq_rows.push((num_rows, bnd.dim()));
            num_rows += bnd.dim() * bnd.dim();
        }

        let mut a = DMatrix::zeros(num_rows, n);
        let mut b = DVector::zeros(num_rows);
        let place = |a: &mut DMatrix<f64>, row0: usize, var: &VarRepr, m: &DMatrix<f64>| match var {
            VarRepr::Psd { col } => {
                let mut view = a.view_mut((row0, *col), (m.nrows(), m.ncols()));
                view += m;
            }
            VarRepr::Generated { col, gens, basis } => {
                let mg = m * basis;
                let mut view = a.view_mut((row0, *col), (m.nrows(), *gens));
                view += &mg;
            }
        };
        for t in &p.ineq_terms {
            place(&mut a, ineq_rows[t.row].0, &vars[t.var], t.map.matrix());
        }
        for t in &p.eq_terms {
            place(&mut a, eq_rows[t.row].0, &vars[t.var], t.map.matrix());
        }
        for (r, bnd) in p.ineq_bounds.iter().enumerate() {
            let (row0, d) = ineq_rows[r];
            for k in 0..d * d {
                a[(row0 + k, slack_cols[r] + k)] = 1.0;
            }
            b.rows_mut(row0, d * d).copy_from_slice(&bnd.to_coords());
        }
        for (r, bnd) in p.eq_bounds.iter().enumerate() {
            let (row0, d) = eq_rows[r];
            b.rows_mut(row0, d * d).copy_from_slice(&bnd.to_coords());
        }

        let sign = match p.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let mut c = DVector::zeros(n);
        for (v, obj) in p.objective.iter().enumerate() {
            let coords = DVector::from_vec(obj.to_coords());
            match &vars[v] {
                VarRepr::Psd { col } => {
                    let mut seg = c.rows_mut(*col, coords.len());
                    seg += &coords * sign;
                }
                VarRepr::Generated { col, gens, basis } => {
                    let mut seg = c.rows_mut(*col, *gens);
                    seg += basis.transpose() * &coords * sign;
                }
            }
        }

        let (kept, inconsistent) = independent_rows(&a, &b);
        let a_red = a.select_rows(kept.iter());
        let b_red = b.select_rows(kept.iter());
        Self { n_lp, herm_dims, a: a_red, b: b_red, c, kept, inconsistent, vars, fg_ranges, ineq_rows, eq_rows, num_rows }
    }

    pub fn to_solution(&self, p: &ConicProgram, raw: RawSolution) -> ConicSolution {
        let mut y_full = DVector::zeros(self.num_rows);
        for (k, &r) in self.kept.iter().enumerate() {
            y_full[r] = raw.y[k];
        }
        let dims = p.cone.block_dims();
        let primal: Vec<HermitianMatrix> = self
            .vars
            .iter()
            .zip(&dims)
            .map(|(v, &d)| match v {
                VarRepr::Psd { col } => HermitianMatrix::from_coords(d, raw.x.rows(*col, d * d).as_slice()),
                VarRepr::Generated { col, gens, basis } => {
                    let coords = basis * raw.x.rows(*col, *gens);
                    HermitianMatrix::from_coords(d, coords.as_slice())
                }
            })
            .collect();
        let coefficients: Vec<Vec<f64>> = self.fg_ranges.iter().map(|&(s, g)| raw.x.rows(s, g).iter().copied().collect()).collect();
        let block = |(row0, d): (usize, usize)| HermitianMatrix::from_coords(d, (-y_full.rows(row0, d * d)).as_slice());
        let dual: Vec<HermitianMatrix> = self.ineq_rows.iter().map(|&r| block(r)).collect();
        let multipliers: Vec<HermitianMatrix> = self.eq_rows.iter().map(|&r| block(r)).collect();

        let status = match raw.status {
            RawStatus::Optimal => SolveStatus::Optimal,
            RawStatus::PrimalInfeasible => SolveStatus::Infeasible,
            RawStatus::DualInfeasible => SolveStatus::Unbounded,
            RawStatus::Failure => SolveStatus::NumericalFailure,
        };
        let value = p.objective_value(&primal);
        let bound_pair: f64 = p.ineq_bounds.iter().zip(&dual).map(|(b, y)| b.inner_unchecked(y)).sum::<f64>()
            + p.eq_bounds.iter().zip(&multipliers).map(|(b, z)| b.inner_unchecked(z)).sum::<f64>();
        let dual_value = match p.sense {
            Sense::Maximize => bound_pair,
            Sense::Minimize => -bound_pair,
        };
        let residuals = program_residuals(p, &primal, &coefficients, &dual, &multipliers);
        ConicSolution {
            status,
            value,
            dual_value,
            primal,
            coefficients,
            dual,
            multipliers,
            gap: (dual_value - value).abs(),
            residuals,
            iterations: raw.iterations,
            trace: raw.trace,
        }
    }
}

/// Residuals measured on the program itself, independent of the internal form.
pub(crate) fn program_residuals(
    p: &ConicProgram,
    x: &[HermitianMatrix],
    coefficients: &[Vec<f64>],
    y: &[HermitianMatrix],
    z: &[HermitianMatrix],
) -> Residuals {
    let bscale = 1.0 + p.ineq_bounds.iter().chain(&p.eq_bounds).fold(0.0f64, |m, b| m.max(b.max_abs_entry()));
    let mut primal = 0.0f64;
    for (lx, b) in p.apply_ineq(x).iter().zip(&p.ineq_bounds) {
        primal = primal.max((lx - b).max_eigenvalue().max(0.0));
    }
    for (lx, b) in p.apply_eq(x).iter().zip(&p.eq_bounds) {
        primal = primal.max(lx.max_abs_diff(b));
    }

    let ascale = 1.0 + p.objective.iter().fold(0.0f64, |m, a| m.max(a.max_abs_entry()));
    let adj = p.apply_adjoint(y, z);
    let slack: Vec<HermitianMatrix> = adj
        .iter()
        .zip(&p.objective)
        .map(|(s, a)| match p.sense {
            Sense::Maximize => s - a,
            Sense::Minimize => s + a,
        })
        .collect();
    let mut dual = 0.0f64;
    let mut cone = 0.0f64;
    let mut v = 0;
    for f in &p.cone.factors {
        match f {
            ConeFactor::Psd(_) => {
                dual = dual.max(-slack[v].min_eigenvalue());
                cone = cone.max(-x[v].min_eigenvalue());
                v += 1;
            }
            ConeFactor::FinitelyGenerated { block_dims, generators } => {
                for gen in generators {
                    let s: f64 = gen.iter().zip(&slack[v..v + block_dims.len()]).map(|(t, s)| t.inner_unchecked(s)).sum();
                    dual = dual.max(-s);
                }
                v += block_dims.len();
            }
        }
    }
    for c in coefficients.iter().flatten() {
        cone = cone.max(-c);
    }
    for yb in y {
        cone = cone.max(-yb.min_eigenvalue());
    }
    Residuals { primal: primal / bscale, dual: dual.max(0.0) / ascale, cone: cone.max(0.0) }
}

/// Greedy selection of linearly independent rows; flags contradictory dependent rows.
fn independent_rows(a: &DMatrix<f64>, b: &DVector<f64>) -> (Vec<usize>, bool) {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut kept = Vec::new();
    let mut dependent = Vec::new();
    for i in 0..a.nrows() {
        let row = a.row(i).transpose();
        let norm = row.norm();
        let mut r = row.clone();
        for q in &basis {
            let proj = q.dot(&r);
            r.axpy(-proj, q, 1.0);
        }
        // second pass for numerical orthogonality
        for q in &basis {
            let proj = q.dot(&r);
            r.axpy(-proj, q, 1.0);
        }
        let rn = r.norm();
        if rn > 1e-10 * norm.max(1.0) {
            basis.push(r / rn);
            kept.push(i);
        } else {
            dependent.push(i);
        }
    }
    let mut inconsistent = false;
    if !dependent.is_empty() && !kept.is_empty() {
        let k = a.select_rows(kept.iter());
        let bk = b.select_rows(kept.iter());
        let gram = &k * k.transpose();
        if let Some(chol) = gram.cholesky() {
            let bscale = 1.0 + b.amax();
            for &i in &dependent {
                let alpha = chol.solve(&(&k * a.row(i).transpose()));
                if (b[i] - alpha.dot(&bk)).abs() > 1e-8 * bscale {
                    inconsistent = true;
                }
            }
        }
    } else if kept.is_empty() {
        inconsistent = b.amax() > 1e-8;
    }
    (kept, inconsistent)
}
