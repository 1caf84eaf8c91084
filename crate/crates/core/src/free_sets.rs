//! Free sets `F` and their cones `C_F = {s·T : s ≥ 0, T ∈ F}` expressed as
//! cone factors plus a linear identification with object blocks.

use rand::Rng;

use crate::conic::{ConeFactor, ConeSpec, Term};
use crate::error::{Error, Result};
use crate::hermitian::{HermitianMatrix, C64};
use crate::linmap::HermMap;
use crate::objects::{
    enumerate_postprocessings_capped, DeterministicPostprocessing, MeasurementAssemblage, ObjectClass,
    PartitionedEnsemble, QuantumObject, Shape, StateAssemblage, DEFAULT_POSTPROCESSING_CAP,
};

#[derive(Clone, Debug, PartialEq)]
pub enum FreeSetKind {
    JointlyMeasurable,
    /// Joint measurability of every effect-level binarization `{M_{a|x}, 1 − M_{a|x}}`.
    Coexistent,
    /// Convex hull of the listed objects, each given as flattened `(x, a)` blocks.
    FinitelyGenerated(Vec<Vec<HermitianMatrix>>),
    LocalHiddenState,
    /// Blocks diagonal in the computational basis.
    IncoherentDiagonal,
}

impl FreeSetKind {
    pub fn name(&self) -> &'static str {
        match self {
            FreeSetKind::JointlyMeasurable => "jointly_measurable",
            FreeSetKind::Coexistent => "coexistent",
            FreeSetKind::FinitelyGenerated(_) => "finitely_generated",
            FreeSetKind::LocalHiddenState => "local_hidden_state",
            FreeSetKind::IncoherentDiagonal => "incoherent_diagonal",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FreeSetSpec {
    pub kind: FreeSetKind,
    pub shape: Shape,
    pub object_class: ObjectClass,
}

impl FreeSetSpec {
    pub fn new(kind: FreeSetKind, shape: Shape, object_class: ObjectClass) -> Result<Self> {
        let compatible = matches!(
            (&kind, object_class),
            (FreeSetKind::JointlyMeasurable | FreeSetKind::Coexistent, ObjectClass::MeasurementAssemblage)
                | (FreeSetKind::LocalHiddenState, ObjectClass::StateAssemblage)
                | (FreeSetKind::IncoherentDiagonal, ObjectClass::StateEnsemble)
                | (FreeSetKind::FinitelyGenerated(_), _)
        );
        if !compatible {
            return Err(Error::KindMismatch { kind: kind.name().into(), class: format!("{object_class:?}") });
        }
        if shape.dim == 0 || shape.num_outcomes == 0 || shape.num_settings == 0 {
            return Err(Error::InvalidSize(format!("free-set shape {shape:?}")));
        }
        if object_class == ObjectClass::StateEnsemble && matches!(kind, FreeSetKind::IncoherentDiagonal) && shape.num_settings != 1 {
            return Err(Error::InvalidSize("incoherent ensembles have a single partition".into()));
        }
        if let FreeSetKind::FinitelyGenerated(gens) = &kind {
            for (g, blocks) in gens.iter().enumerate() {
                if blocks.len() != shape.num_blocks() || blocks.iter().any(|b| b.dim() != shape.dim) {
                    return Err(Error::ShapeMismatch(format!("generator {g} does not have shape {shape:?}")));
                }
                object_from_blocks(object_class, shape, blocks).map_err(|e| match e {
                    Error::NotPsd { what, min_eigenvalue } => Error::NotPsd { what: format!("generator {g}: {what}"), min_eigenvalue },
                    other => Error::InvalidSize(format!("generator {g}: {other}")),
                })?;
            }
        }
        Ok(Self { kind, shape, object_class })
    }

    pub fn jointly_measurable(shape: Shape) -> Self {
        Self { kind: FreeSetKind::JointlyMeasurable, shape, object_class: ObjectClass::MeasurementAssemblage }
    }

    pub fn coexistent(shape: Shape) -> Self {
        Self { kind: FreeSetKind::Coexistent, shape, object_class: ObjectClass::MeasurementAssemblage }
    }

    pub fn local_hidden_state(shape: Shape) -> Self {
        Self { kind: FreeSetKind::LocalHiddenState, shape, object_class: ObjectClass::StateAssemblage }
    }

    pub fn incoherent(dim: usize, num_outcomes: usize) -> Self {
        Self {
            kind: FreeSetKind::IncoherentDiagonal,
            shape: Shape::new(dim, num_outcomes, 1),
            object_class: ObjectClass::StateEnsemble,
        }
    }

    pub fn generated_measurements(generators: &[MeasurementAssemblage]) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::InvalidSize("no generators".into()))?;
        let shape = Shape::new(first.dim(), first.num_outcomes(), first.num_settings());
        Self::new(
            FreeSetKind::FinitelyGenerated(generators.iter().map(MeasurementAssemblage::blocks).collect()),
            shape,
            ObjectClass::MeasurementAssemblage,
        )
    }

    pub fn generated_assemblages(generators: &[StateAssemblage]) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::InvalidSize("no generators".into()))?;
        let shape = Shape::new(first.dim(), first.num_outcomes(), first.num_settings());
        Self::new(
            FreeSetKind::FinitelyGenerated(generators.iter().map(StateAssemblage::blocks).collect()),
            shape,
            ObjectClass::StateAssemblage,
        )
    }

    pub fn generated_ensembles(generators: &[PartitionedEnsemble]) -> Result<Self> {
        let first = generators.first().ok_or_else(|| Error::InvalidSize("no generators".into()))?;
        let shape = Shape::new(first.dim(), first.num_outcomes(), first.num_partitions());
        Self::new(
            FreeSetKind::FinitelyGenerated(generators.iter().map(PartitionedEnsemble::blocks).collect()),
            shape,
            ObjectClass::StateEnsemble,
        )
    }

    /// Checks that `object` has this spec's class and shape.
    pub fn check_object(&self, object: &QuantumObject) -> Result<()> {
        if object.class() != self.object_class {
            return Err(Error::KindMismatch { kind: self.kind.name().into(), class: format!("{:?}", object.class()) });
        }
        if object.shape() != self.shape {
            return Err(Error::ShapeMismatch(format!("object shape {:?}, free set shape {:?}", object.shape(), self.shape)));
        }
        Ok(())
    }
}

/// Validates `blocks` against the invariants of `class`.
pub(crate) fn object_from_blocks(class: ObjectClass, shape: Shape, blocks: &[HermitianMatrix]) -> Result<QuantumObject> {
    let rows: Vec<Vec<HermitianMatrix>> = blocks.chunks(shape.num_outcomes).map(<[_]>::to_vec).collect();
    match class {
        ObjectClass::MeasurementAssemblage => MeasurementAssemblage::from_effects(rows).map(QuantumObject::Measurement),
        ObjectClass::StateAssemblage => StateAssemblage::new(rows).map(QuantumObject::Assemblage),
        ObjectClass::StateEnsemble => {
            let (ens, total) = PartitionedEnsemble::from_weighted_blocks(blocks, shape.num_outcomes)?;
            if (total - 1.0).abs() > 1e-8 {
                return Err(Error::NotNormalized { what: "ensemble".into(), deviation: total - 1.0 });
            }
            Ok(QuantumObject::Ensemble(ens))
        }
    }
}

/// `C_F` as cone factors plus the linear map from cone variables to object
/// blocks `Õ` (flattened `(x, a)` order).
#[derive(Clone, Debug, PartialEq)]
pub struct ConeEncoding {
    pub shape: Shape,
    pub cone: ConeSpec,
    /// Contributions to object block `row` from cone variable `var`.
    pub object_terms: Vec<Term>,
    /// `⟨normalization, X⟩` is the scale `s` with `Õ ∈ s·F`.
    pub normalization: Vec<HermitianMatrix>,
    /// Homogeneous equalities `Λ_eq[X] = 0` that carve `C_F` out of the cone.
    pub eq_terms: Vec<Term>,
    pub eq_dims: Vec<usize>,
    /// Hidden-variable strategies indexing the variable blocks, when the
    /// encoding is a deterministic decomposition.
    pub strategies: Option<Vec<DeterministicPostprocessing>>,
    /// A point on the interior ray of `C_F` that satisfies the equalities.
    pub seed: Vec<HermitianMatrix>,
}

impl ConeEncoding {
    /// Object blocks `Õ` for cone variables `x`.
    pub fn objects(&self, x: &[HermitianMatrix]) -> Vec<HermitianMatrix> {
        let mut out = vec![HermitianMatrix::zeros(self.shape.dim); self.shape.num_blocks()];
        for t in &self.object_terms {
            out[t.row] += &t.map.apply(&x[t.var]);
        }
        out
    }

    pub fn scale(&self, x: &[HermitianMatrix]) -> f64 {
        self.normalization.iter().zip(x).map(|(n, b)| n.inner_unchecked(b)).sum()
    }

    /// Largest violation of the homogeneous equalities at `x`.
    pub fn equality_residual(&self, x: &[HermitianMatrix]) -> f64 {
        let mut rows: Vec<HermitianMatrix> = self.eq_dims.iter().map(|&d| HermitianMatrix::zeros(d)).collect();
        for t in &self.eq_terms {
            rows[t.row] += &t.map.apply(&x[t.var]);
        }
        rows.iter().fold(0.0, |m, r| m.max(r.max_abs_entry()))
    }
}

/// [`cone_constraints_capped`] with the default strategy cap.
pub fn cone_constraints(spec: &FreeSetSpec) -> Result<ConeEncoding> {
    cone_constraints_capped(spec, DEFAULT_POSTPROCESSING_CAP)
}

pub fn cone_constraints_capped(spec: &FreeSetSpec, cap: u128) -> Result<ConeEncoding> {
    let Shape { dim: d, num_outcomes: na, num_settings: nx } = spec.shape;
    let id = HermitianMatrix::identity(d);
    let mut enc = ConeEncoding {
        shape: spec.shape,
        cone: ConeSpec::default(),
        object_terms: Vec::new(),
        normalization: Vec::new(),
        eq_terms: Vec::new(),
        eq_dims: Vec::new(),
        strategies: None,
        seed: Vec::new(),
    };
    match &spec.kind {
        FreeSetKind::JointlyMeasurable | FreeSetKind::LocalHiddenState => {
            let pp = enumerate_postprocessings_capped(na, nx, cap)?;
            let measurement = matches!(spec.kind, FreeSetKind::JointlyMeasurable);
            for (l, p) in pp.iter().enumerate() {
                enc.cone.factors.push(ConeFactor::Psd(d));
                enc.seed.push(id.clone());
                enc.normalization.push(if measurement { id.scale(1.0 / d as f64) } else { id.clone() });
                for x in 0..nx {
                    enc.object_terms.push(Term::new(l, spec.shape.index(p.outcome(x), x), HermMap::identity(d)));
                }
                if measurement {
                    enc.eq_terms.push(Term::new(l, 0, proportional_to_identity(d)));
                }
            }
            if measurement {
                enc.eq_dims.push(d);
            }
            enc.strategies = Some(pp);
        }
        FreeSetKind::Coexistent => {
            let k = na * nx;
            let lambdas = enumerate_postprocessings_capped(2, k, cap)?;
            enc.eq_dims.push(d);
            enc.eq_dims.extend(std::iter::repeat_n(d, nx));
            for (l, lam) in lambdas.iter().enumerate() {
                enc.cone.factors.push(ConeFactor::Psd(d));
                enc.normalization.push(id.scale(1.0 / d as f64));
                for x in 0..nx {
                    let mut yes = 0usize;
                    for a in 0..na {
                        let b = spec.shape.index(a, x);
                        if lam.outcome(b) == 0 {
                            enc.object_terms.push(Term::new(l, b, HermMap::identity(d)));
                            yes += 1;
                        }
                    }
                    // Σ_a Õ_{a|x} − Σ_λ G̃_λ = 0
                    if yes != 1 {
                        enc.eq_terms.push(Term::new(l, 1 + x, HermMap::scaled_identity(d, yes as f64 - 1.0)));
                    }
                }
                enc.eq_terms.push(Term::new(l, 0, proportional_to_identity(d)));
                // Uniform POVMs: weight only on strategies with one affirmative answer per setting.
                let uniform = (0..nx).all(|x| (0..na).filter(|&a| lam.outcome(spec.shape.index(a, x)) == 0).count() == 1);
                enc.seed.push(if uniform { id.clone() } else { HermitianMatrix::zeros(d) });
            }
        }
        FreeSetKind::FinitelyGenerated(generators) => {
            let per_block = match spec.object_class {
                ObjectClass::MeasurementAssemblage => 1.0 / (d * nx) as f64,
                ObjectClass::StateAssemblage => 1.0 / nx as f64,
                ObjectClass::StateEnsemble => 1.0,
            };
            enc.cone.factors.push(ConeFactor::FinitelyGenerated {
                block_dims: vec![d; spec.shape.num_blocks()],
                generators: generators.clone(),
            });
            enc.seed = generator_sum(generators, d, spec.shape.num_blocks());
            for b in 0..spec.shape.num_blocks() {
                enc.normalization.push(id.scale(per_block));
                enc.object_terms.push(Term::new(b, b, HermMap::identity(d)));
            }
        }
        FreeSetKind::IncoherentDiagonal => {
            let mut generators = Vec::new();
            for b in 0..spec.shape.num_blocks() {
                for i in 0..d {
                    let mut g = vec![HermitianMatrix::zeros(d); spec.shape.num_blocks()];
                    g[b] = HermitianMatrix::basis_projector(d, i);
                    generators.push(g);
                }
            }
            enc.seed = generator_sum(&generators, d, spec.shape.num_blocks());
            enc.cone.factors.push(ConeFactor::FinitelyGenerated { block_dims: vec![d; spec.shape.num_blocks()], generators });
            for b in 0..spec.shape.num_blocks() {
                enc.normalization.push(id.clone());
                enc.object_terms.push(Term::new(b, b, HermMap::identity(d)));
            }
        }
    }
    Ok(enc)
}

fn generator_sum(generators: &[Vec<HermitianMatrix>], d: usize, n: usize) -> Vec<HermitianMatrix> {
    let mut out = vec![HermitianMatrix::zeros(d); n];
    for g in generators {
        for (o, b) in out.iter_mut().zip(g) {
            *o += b;
        }
    }
    out
}

/// `X ↦ d·X − tr[X]·1`.
fn proportional_to_identity(d: usize) -> HermMap {
    HermMap::from_fn(d, d, |x| &x.scale(d as f64) - &HermitianMatrix::identity(d).scale(x.trace()))
}

/// Closes each generator under deterministic outcome relabelings of every
/// setting. Duplicates are removed within the expansion of each generator.
pub fn expand_generators_postprocessing(generators: &[MeasurementAssemblage]) -> Result<Vec<MeasurementAssemblage>> {
    expand_generators_postprocessing_capped(generators, DEFAULT_POSTPROCESSING_CAP)
}

pub fn expand_generators_postprocessing_capped(generators: &[MeasurementAssemblage], cap: u128) -> Result<Vec<MeasurementAssemblage>> {
    let mut out = Vec::new();
    for g in generators {
        let (na, nx) = (g.num_outcomes(), g.num_settings());
        // One relabeling per setting, each a function of |a| outcomes to |a| outcomes.
        let per_setting = enumerate_postprocessings_capped(na, na, cap)?;
        let count = (per_setting.len() as u128).checked_pow(nx as u32).filter(|&c| c <= cap);
        let count = count.ok_or(Error::SizeOverflow { count: (per_setting.len() as u128).saturating_pow(nx as u32), cap })?;
        let choices = enumerate_postprocessings_capped(per_setting.len(), nx, count)?;
        let mut expanded: Vec<MeasurementAssemblage> = Vec::new();
        for choice in choices {
            let effects = (0..nx)
                .map(|x| {
                    let f = &per_setting[choice.outcome(x)];
                    (0..na)
                        .map(|b| {
                            let mut e = HermitianMatrix::zeros(g.dim());
                            for a in 0..na {
                                if f.outcome(a) == b {
                                    e += g.effect(a, x);
                                }
                            }
                            e
                        })
                        .collect()
                })
                .collect();
            let m = MeasurementAssemblage::from_effects_unchecked(effects);
            let duplicate = expanded
                .iter()
                .any(|o| o.blocks().iter().zip(m.blocks().iter()).all(|(p, q)| p.max_abs_diff(q) <= 1e-12));
            if !duplicate {
                expanded.push(m);
            }
        }
        out.extend(expanded);
    }
    Ok(out)
}

fn random_psd(dim: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = nalgebra::DMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    HermitianMatrix::from_matrix_unchecked(&(&g * g.adjoint()))
}

/// `S^{-1/2} G S^{-1/2}` so that the listed operators sum to the identity.
pub(crate) fn normalize_to_povm(ops: &[HermitianMatrix]) -> Vec<HermitianMatrix> {
    let d = ops[0].dim();
    let mut s = HermitianMatrix::zeros(d);
    for o in ops {
        s += o;
    }
    let root = s.map_spectrum(|l| 1.0 / l.max(1e-300).sqrt());
    ops.iter().map(|o| o.conjugate_by(root.matrix())).collect()
}

/// A random element of `F` as flattened `(x, a)` blocks, normalized so that
/// its scale is one. Coexistence samples are jointly measurable.
pub fn sample_free_point(spec: &FreeSetSpec, rng: &mut impl Rng) -> Result<Vec<HermitianMatrix>> {
    let Shape { dim: d, num_outcomes: na, num_settings: nx } = spec.shape;
    let n = spec.shape.num_blocks();
    match &spec.kind {
        FreeSetKind::JointlyMeasurable | FreeSetKind::Coexistent | FreeSetKind::LocalHiddenState => {
            let pp = enumerate_postprocessings_capped(na, nx, DEFAULT_POSTPROCESSING_CAP)?;
            let raw: Vec<HermitianMatrix> = pp.iter().map(|_| random_psd(d, rng)).collect();
            let hidden = if matches!(spec.kind, FreeSetKind::LocalHiddenState) {
                let total: f64 = raw.iter().map(HermitianMatrix::trace).sum();
                raw.iter().map(|g| g.scale(1.0 / total)).collect()
            } else {
                normalize_to_povm(&raw)
            };
            let mut out = vec![HermitianMatrix::zeros(d); n];
            for (g, p) in hidden.iter().zip(&pp) {
                for (x, &a) in p.assignment().iter().enumerate() {
                    out[spec.shape.index(a, x)] += g;
                }
            }
            Ok(out)
        }
        FreeSetKind::FinitelyGenerated(generators) => {
            if generators.is_empty() {
                return Err(Error::InvalidSize("no generators".into()));
            }
            let weights: Vec<f64> = generators.iter().map(|_| rng.random::<f64>()).collect();
            let total: f64 = weights.iter().sum();
            let mut out = vec![HermitianMatrix::zeros(d); n];
            for (w, g) in weights.iter().zip(generators) {
                for (o, b) in out.iter_mut().zip(g) {
                    *o += &b.scale(w / total);
                }
            }
            Ok(out)
        }
        FreeSetKind::IncoherentDiagonal => {
            let diags: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
            let total: f64 = diags.iter().flatten().sum();
            Ok(diags.iter().map(|v| HermitianMatrix::from_diagonal(&v.iter().map(|p| p / total).collect::<Vec<_>>())).collect())
        }
    }
}

/// Outcome of a membership test.
#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub inside: bool,
    pub robustness: f64,
    pub certificate: Certificate,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// Cone variables of a free decomposition of the object itself.
    Decomposition(Vec<HermitianMatrix>),
    Witness(crate::robustness::Witness),
}

/// Default threshold on the robustness below which an object counts as free.
pub const DEFAULT_TOL_MEMBERSHIP: f64 = 1e-6;

pub fn membership(
    spec: &FreeSetSpec,
    object: &QuantumObject,
    tol_membership: f64,
    opts: &crate::robustness::RobustnessOptions,
) -> Result<Membership> {
    let r = crate::robustness::generalized_robustness(object, spec, opts)?;
    let inside = r.t <= tol_membership;
    let certificate = if inside {
        Certificate::Decomposition(r.cone_point.iter().map(|g| g.scale(1.0 / r.primal_value)).collect())
    } else {
        Certificate::Witness(r.witness)
    };
    Ok(Membership { inside, robustness: r.t, certificate })
}
