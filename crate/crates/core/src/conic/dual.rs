use super::{ConeFactor, ConeSpec, ConicProgram, Sense, Term};
use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;
use crate::linmap::HermMap;

/// The Lagrange dual as a program of the same form.
///
/// For a maximization the dual is `min ⟨B,Y⟩ + ⟨B_eq,Z⟩` subject to
/// `Λ†Y + Λ_eq†Z − A ∈ C*`, `Y ⪰ 0`; a minimization dualizes to the matching
/// maximization, so optimal values agree in both directions. Free multipliers
/// `Z` are split as `Z⁺ − Z⁻`. Dual-cone membership becomes a PSD row per PSD
/// factor and one scalar row per generator of a finitely generated factor.
pub fn dualize(program: &ConicProgram) -> Result<ConicProgram> {
    program.validate().map_err(|e| Error::UnsupportedForm(e.to_string()))?;
    let s = match program.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };

    // Dual variables: Y_r per inequality row, then Z⁺_r, Z⁻_r per equality row.
    let n_ineq = program.ineq_bounds.len();
    let n_eq = program.eq_bounds.len();
    let mut factors = Vec::new();
    let mut objective = Vec::new();
    for b in &program.ineq_bounds {
        factors.push(ConeFactor::Psd(b.dim()));
        objective.push(b.scale(s));
    }
    for b in &program.eq_bounds {
        factors.push(ConeFactor::Psd(b.dim()));
        objective.push(b.scale(s));
        factors.push(ConeFactor::Psd(b.dim()));
        objective.push(b.scale(-s));
    }
    let y_var = |r: usize| r;
    let zp_var = |r: usize| n_ineq + 2 * r;
    let zm_var = |r: usize| n_ineq + 2 * r + 1;

    // Adjoint contributions (dual var, primal var block, map Λ_term†) with sign.
    let mut adjoint_terms: Vec<(usize, usize, HermMap)> = Vec::new();
    for t in &program.ineq_terms {
        adjoint_terms.push((y_var(t.row), t.var, t.map.adjoint()));
    }
    for t in &program.eq_terms {
        adjoint_terms.push((zp_var(t.row), t.var, t.map.adjoint()));
        adjoint_terms.push((zm_var(t.row), t.var, t.map.adjoint().scale(-1.0)));
    }

    let mut bounds = Vec::new();
    let mut terms = Vec::new();
    let mut v = 0;
    for factor in &program.cone.factors {
        match factor {
            ConeFactor::Psd(_) => {
                // −(Λ†Y)_v ⪯ −s·A_v
                let row = bounds.len();
                bounds.push(program.objective[v].scale(-s));
                for (dv, pv, map) in &adjoint_terms {
                    if *pv == v {
                        terms.push(Term::new(*dv, row, map.scale(-1.0)));
                    }
                }
                v += 1;
            }
            ConeFactor::FinitelyGenerated { block_dims, generators } => {
                let blocks = v..v + block_dims.len();
                for gen in generators {
                    // −Σ_v ⟨T_v, (Λ†Y)_v⟩ ≤ −s·⟨A, T⟩
                    let row = bounds.len();
                    let a_t: f64 = blocks.clone().map(|k| program.objective[k].inner_unchecked(&gen[k - v])).sum();
                    bounds.push(HermitianMatrix::from_diagonal(&[-s * a_t]));
                    for (dv, pv, map) in &adjoint_terms {
                        if blocks.contains(pv) {
                            let image = map.adjoint().apply(&gen[*pv - v]);
                            terms.push(Term::new(*dv, row, HermMap::functional(&image).scale(-1.0)));
                        }
                    }
                }
                v += block_dims.len();
            }
        }
    }
    let _ = n_eq;
    Ok(ConicProgram {
        sense: match program.sense {
            Sense::Maximize => Sense::Minimize,
            Sense::Minimize => Sense::Maximize,
        },
        cone: ConeSpec { factors },
        objective,
        ineq_bounds: bounds,
        ineq_terms: terms,
        eq_bounds: Vec::new(),
        eq_terms: Vec::new(),
    })
}
