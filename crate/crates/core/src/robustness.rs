//! Generalized robustness `R_F(M) = min t` such that `(M + tN)/(1+t) ∈ F`,
//! solved as `min ⟨A, X⟩ s.t. Õ(X) ⪰ M, X ∈ C_F` whose value is `1 + t`.

use crate::conic::{check_slater_from, solve, IterationRecord, ConeFactor, ConeSpec, ConicProgram, Residuals, Sense, SolveStatus, SolverOptions, Term};
use crate::error::{Error, Result};
use crate::free_sets::{cone_constraints_capped, ConeEncoding, FreeSetKind, FreeSetSpec};
use crate::hermitian::HermitianMatrix;
use crate::linmap::HermMap;
use crate::objects::{
    DeterministicPostprocessing, Instrument, MeasurementAssemblage, ObjectClass, PartitionedEnsemble, QuantumObject, Shape,
    StateAssemblage, DEFAULT_POSTPROCESSING_CAP,
};

/// Below this the noise part is not reconstructed.
pub const NOISE_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RobustnessOptions {
    pub solver: SolverOptions,
    pub cap: u128,
    /// Run the strict-feasibility check before solving.
    pub check_slater: bool,
}

impl Default for RobustnessOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions { tol_feas: 1e-9, tol_gap: 1e-9, ..SolverOptions::default() },
            cap: DEFAULT_POSTPROCESSING_CAP,
            check_slater: true,
        }
    }
}

/// Dual blocks `Y^{a|x}` in flattened `(x, a)` order.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub object_class: ObjectClass,
    pub shape: Shape,
    pub blocks: Vec<HermitianMatrix>,
}

impl Witness {
    pub fn new(object_class: ObjectClass, shape: Shape, blocks: Vec<HermitianMatrix>) -> Result<Self> {
        if blocks.len() != shape.num_blocks() || blocks.iter().any(|b| b.dim() != shape.dim) {
            return Err(Error::ShapeMismatch(format!("{} witness blocks for shape {shape:?}", blocks.len())));
        }
        Ok(Self { object_class, shape, blocks })
    }

    pub fn block(&self, a: usize, x: usize) -> &HermitianMatrix {
        &self.blocks[self.shape.index(a, x)]
    }

    /// `trY = Σ_{a,x} tr Y^{a|x}`.
    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(HermitianMatrix::trace).sum()
    }

    /// `Σ_{a,x} tr[T_{a|x} Y^{a|x}]`.
    pub fn pair(&self, blocks: &[HermitianMatrix]) -> f64 {
        self.blocks.iter().zip(blocks).map(|(y, t)| y.inner_unchecked(t)).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { blocks: self.blocks.iter().map(|b| b.scale(c)).collect(), ..self.clone() }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.iter().map(HermitianMatrix::min_eigenvalue).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub status: SolveStatus,
    pub gap: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    /// Strict-feasibility margin, when the check ran.
    pub slater_margin: Option<f64>,
    /// Iterates, when the solver was asked to record them.
    pub trace: Vec<IterationRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessResult {
    pub t: f64,
    /// `O = Õ/(1+t) ∈ F`.
    pub free_part: Vec<HermitianMatrix>,
    /// `N = (Õ − M)/t`, absent when `t` is below [`NOISE_FLOOR`].
    pub noise_part: Option<Vec<HermitianMatrix>>,
    pub witness: Witness,
    pub primal_value: f64,
    pub dual_value: f64,
    /// Optimal cone variables, e.g. the unnormalized joint observable `G̃_λ`.
    pub cone_point: Vec<HermitianMatrix>,
    /// Generator weights of finitely generated factors.
    pub coefficients: Vec<Vec<f64>>,
    /// Strategy `λ` for each block of `cone_point`, when the encoding has them.
    pub strategies: Option<Vec<DeterministicPostprocessing>>,
    pub diagnostics: Diagnostics,
}

/// Incompatibility robustness: the jointly measurable free set.
pub fn incompatibility_robustness(meas: &MeasurementAssemblage, opts: &RobustnessOptions) -> Result<RobustnessResult> {
    let shape = Shape::new(meas.dim(), meas.num_outcomes(), meas.num_settings());
    generalized_robustness(&QuantumObject::Measurement(meas.clone()), &FreeSetSpec::jointly_measurable(shape), opts)
}

pub fn generalized_measurement_robustness(
    meas: &MeasurementAssemblage,
    spec: &FreeSetSpec,
    opts: &RobustnessOptions,
) -> Result<RobustnessResult> {
    generalized_robustness(&QuantumObject::Measurement(meas.clone()), spec, opts)
}

pub fn assemblage_robustness(asm: &StateAssemblage, spec: &FreeSetSpec, opts: &RobustnessOptions) -> Result<RobustnessResult> {
    generalized_robustness(&QuantumObject::Assemblage(asm.clone()), spec, opts)
}

/// Robustness with arbitrary noise of the object's class.
pub fn generalized_robustness(object: &QuantumObject, spec: &FreeSetSpec, opts: &RobustnessOptions) -> Result<RobustnessResult> {
    spec.check_object(object)?;
    let enc = cone_constraints_capped(spec, opts.cap)?;
    let target = object.blocks();
    let n_vars = enc.cone.num_blocks();
    let program = ConicProgram {
        sense: Sense::Minimize,
        cone: enc.cone.clone(),
        objective: enc.normalization.clone(),
        ineq_bounds: target.iter().map(|m| -m).collect(),
        ineq_terms: enc.object_terms.iter().map(|t| Term::new(t.var, t.row, t.map.scale(-1.0))).collect(),
        eq_bounds: enc.eq_dims.iter().map(|&d| HermitianMatrix::zeros(d)).collect(),
        eq_terms: enc.eq_terms.clone(),
    };
    let slater_margin = if opts.check_slater {
        let diag = check_slater_from(&program, &enc.seed);
        if !diag.strictly_feasible {
            return Err(Error::SlaterFailure(diag.failure.unwrap_or_default()));
        }
        Some(diag.margin)
    } else {
        None
    };
    let sol = solve(&program, &opts.solver)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let cone_point = sol.primal[..n_vars].to_vec();
    let objects = enc.objects(&cone_point);
    let witness = Witness::new(spec.object_class, spec.shape, sol.dual.clone())?;
    let noise = |t: f64| objects.iter().zip(&target).map(|(o, m)| (o - m).scale(1.0 / t)).collect();
    let mut result = package(sol.value, sol.dual_value, &objects, noise, witness, cone_point, &enc, &sol);
    result.diagnostics.slater_margin = slater_margin;
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn package(
    primal_value: f64,
    dual_value: f64,
    objects: &[HermitianMatrix],
    noise: impl FnOnce(f64) -> Vec<HermitianMatrix>,
    witness: Witness,
    cone_point: Vec<HermitianMatrix>,
    enc: &ConeEncoding,
    sol: &crate::conic::ConicSolution,
) -> RobustnessResult {
    let t = (primal_value - 1.0).max(0.0);
    let free_part = objects.iter().map(|o| o.scale(1.0 / primal_value)).collect();
    RobustnessResult {
        t,
        free_part,
        noise_part: (t > NOISE_FLOOR).then(|| noise(t)),
        witness,
        primal_value,
        dual_value,
        cone_point,
        coefficients: sol.coefficients.clone(),
        strategies: enc.strategies.clone(),
        diagnostics: Diagnostics {
            status: sol.status,
            gap: sol.gap,
            residuals: sol.residuals,
            iterations: sol.iterations,
            slater_margin: None,
            trace: sol.trace.clone(),
        },
    }
}

/// Robustness of a single-partition ensemble `{ρ_a}` whose free part and
/// noise are both prepared by `instr` from one input each: free ensembles are
/// `Λ_a(v)` with `v` in the free state cone (incoherent), or the listed
/// generator ensembles; the noise is `Λ_a(w)` for a state `w`.
///
/// The witness blocks are the equality multipliers on `Λ_a(v) − Λ_a(w) = ρ_a`.
pub fn ensemble_robustness(
    ens: &PartitionedEnsemble,
    instr: &Instrument,
    spec: &FreeSetSpec,
    opts: &RobustnessOptions,
) -> Result<RobustnessResult> {
    if ens.num_partitions() != 1 {
        return Err(Error::ShapeMismatch(format!("ensemble robustness needs one partition, got {}", ens.num_partitions())));
    }
    let object = QuantumObject::Ensemble(ens.clone());
    spec.check_object(&object)?;
    if instr.dim_out() != ens.dim() || instr.num_outcomes() != ens.num_outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "instrument with {} outcomes into dimension {} for an ensemble of {} states of dimension {}",
            instr.num_outcomes(),
            instr.dim_out(),
            ens.num_outcomes(),
            ens.dim()
        )));
    }
    let target = ens.blocks();
    let (_, residual) = instr.preimage(&target)?;
    if residual > 1e-8 {
        return Err(Error::NotInImage(residual));
    }
    let (d_in, na) = (instr.dim_in(), ens.num_outcomes());
    let maps: Vec<HermMap> = (0..na).map(|a| instr.subchannel_map(a)).collect();

    // Variables: the free part, then the noise input w ⪰ 0.
    let (mut factors, mut objective, mut eq_terms, strategies, w_var);
    match &spec.kind {
        FreeSetKind::IncoherentDiagonal => {
            let generators = (0..d_in).map(|i| vec![HermitianMatrix::basis_projector(d_in, i)]).collect();
            factors = vec![ConeFactor::FinitelyGenerated { block_dims: vec![d_in], generators }];
            objective = vec![HermitianMatrix::identity(d_in)];
            eq_terms = maps.iter().enumerate().map(|(a, m)| Term::new(0, a, m.clone())).collect::<Vec<_>>();
            w_var = 1;
            strategies = None;
        }
        FreeSetKind::FinitelyGenerated(_) => {
            let enc = cone_constraints_capped(spec, opts.cap)?;
            factors = enc.cone.factors.clone();
            objective = enc.normalization.clone();
            eq_terms = enc.object_terms.clone();
            w_var = enc.cone.num_blocks();
            strategies = enc.strategies.clone();
        }
        _ => return Err(Error::KindMismatch { kind: spec.kind.name().into(), class: "StateEnsemble".into() }),
    }
    factors.push(ConeFactor::Psd(d_in));
    objective.push(HermitianMatrix::zeros(d_in));
    for (a, m) in maps.iter().enumerate() {
        eq_terms.push(Term::new(w_var, a, m.scale(-1.0)));
    }
    let program = ConicProgram {
        sense: Sense::Minimize,
        cone: ConeSpec { factors },
        objective,
        ineq_bounds: vec![],
        ineq_terms: vec![],
        eq_bounds: target.clone(),
        eq_terms,
    };
    let sol = solve(&program, &opts.solver)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    let free_input = &sol.primal[..w_var];
    let mut objects: Vec<HermitianMatrix> = vec![HermitianMatrix::zeros(ens.dim()); na];
    for t in program.eq_terms.iter().filter(|t| t.var < w_var) {
        objects[t.row] += &t.map.apply(&free_input[t.var]);
    }
    let w = sol.primal[w_var].clone();
    let witness = Witness::new(ObjectClass::StateEnsemble, spec.shape, sol.multipliers.iter().map(|z| -z).collect())?;
    let noise = |t: f64| maps.iter().map(|m| m.apply(&w).scale(1.0 / t)).collect();
    let enc = ConeEncoding {
        shape: spec.shape,
        cone: ConeSpec::default(),
        object_terms: vec![],
        normalization: vec![],
        eq_terms: vec![],
        eq_dims: vec![],
        strategies,
        seed: vec![],
    };
    Ok(package(sol.value, sol.dual_value, &objects, noise, witness, sol.primal.clone(), &enc, &sol))
}

/// Robustness of coherence of a state: `min Σ_i c_i − 1` such that
/// `diag(c) ⪰ ρ`. The witness is the single dual block `W ⪰ 0`.
pub fn state_coherence_robustness(rho: &HermitianMatrix, opts: &RobustnessOptions) -> Result<(f64, HermitianMatrix)> {
    let d = rho.dim();
    let program = ConicProgram {
        sense: Sense::Minimize,
        cone: ConeSpec { factors: vec![ConeFactor::Psd(1); d] },
        objective: vec![HermitianMatrix::identity(1); d],
        ineq_bounds: vec![-rho],
        ineq_terms: (0..d).map(|i| Term::new(i, 0, HermMap::trace_times(1, &HermitianMatrix::basis_projector(d, i)).scale(-1.0))).collect(),
        eq_bounds: vec![],
        eq_terms: vec![],
    };
    let sol = solve(&program, &opts.solver)?;
    if sol.status != SolveStatus::Optimal {
        return Err(Error::Solver(sol.status));
    }
    Ok(((sol.value - 1.0).max(0.0), sol.dual[0].clone()))
}
