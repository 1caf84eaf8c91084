use super::{ConeFactor, ConicProgram};
use crate::hermitian::HermitianMatrix;

/// Outcome of the strict-feasibility search.
#[derive(Clone, Debug, PartialEq)]
pub struct SlaterDiagnosis {
    pub strictly_feasible: bool,
    /// Interior point `X₀` with `B − Λ[X₀] ≻ 0`, when found.
    pub point: Option<Vec<HermitianMatrix>>,
    /// `min_r λ_min(B_r − Λ[X₀]_r)` at the best scale tried.
    pub margin: f64,
    pub scale: f64,
    /// Why no strictly feasible point was found.
    pub failure: Option<String>,
}

const SCALES: [f64; 13] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6];

/// Searches the ray through the cone's canonical interior point (identity
/// blocks, unit generator coefficients) for a point with `B − Λ[X] ≻ 0`.
/// Equality rows must be satisfied along the ray.
pub fn check_slater(program: &ConicProgram) -> SlaterDiagnosis {
    let fail = |msg: String| SlaterDiagnosis { strictly_feasible: false, point: None, margin: f64::NEG_INFINITY, scale: 0.0, failure: Some(msg) };
    if let Err(e) = program.validate() {
        return fail(e.to_string());
    }
    let mut base = Vec::new();
    for (f, factor) in program.cone.factors.iter().enumerate() {
        match factor {
            ConeFactor::Psd(d) => base.push(HermitianMatrix::identity(*d)),
            ConeFactor::FinitelyGenerated { block_dims, generators } => {
                if generators.is_empty() {
                    return fail(format!("factor {f}: the generated cone is empty"));
                }
                for (k, d) in block_dims.iter().enumerate() {
                    let mut s = HermitianMatrix::zeros(*d);
                    for g in generators {
                        s += &g[k];
                    }
                    base.push(s);
                }
            }
        }
    }

    check_slater_from(program, &base)
}

/// [`check_slater`] along the ray through a caller-supplied point `base`.
pub fn check_slater_from(program: &ConicProgram, base: &[HermitianMatrix]) -> SlaterDiagnosis {
    let fail = |msg: String| SlaterDiagnosis { strictly_feasible: false, point: None, margin: f64::NEG_INFINITY, scale: 0.0, failure: Some(msg) };
    if base.len() != program.objective.len() || base.iter().zip(&program.objective).any(|(b, a)| b.dim() != a.dim()) {
        return fail("base point does not match the variable blocks".into());
    }
    let eq_scale = 1.0 + program.eq_bounds.iter().fold(0.0f64, |m, b| m.max(b.max_abs_entry()));
    let mut best: Option<(f64, f64, Vec<HermitianMatrix>)> = None;
    let mut eq_violation = 0.0f64;
    for &s in &SCALES {
        let x: Vec<HermitianMatrix> = base.iter().map(|b| b.scale(s)).collect();
        let eq = program
            .apply_eq(&x)
            .iter()
            .zip(&program.eq_bounds)
            .fold(0.0f64, |m, (l, b)| m.max(l.max_abs_diff(b)));
        if eq > 1e-9 * eq_scale * (1.0 + s) {
            eq_violation = eq_violation.max(eq);
            continue;
        }
        let margin = program
            .apply_ineq(&x)
            .iter()
            .zip(&program.ineq_bounds)
            .map(|(l, b)| (b - l).min_eigenvalue())
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(m, _, _)| margin > *m) {
            best = Some((margin, s, x));
        }
    }
    match best {
        Some((margin, scale, x)) if margin > 0.0 => {
            SlaterDiagnosis { strictly_feasible: true, point: Some(x), margin, scale, failure: None }
        }
        Some((margin, scale, _)) => SlaterDiagnosis {
            strictly_feasible: false,
            point: None,
            margin,
            scale,
            failure: Some(format!("best margin {margin:e} at scale {scale:e} is not positive")),
        },
        None => fail(format!("equality rows are violated along the interior ray (residual {eq_violation:e})")),
    }
}
