//! Report assembly for each command.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use qrobust_core::conic::IterationRecord;
use qrobust_core::format::{float, format_f64, game_to_value, read_document, witness_to_value, Document};
use qrobust_core::{
    ensemble_robustness, game_for, generalized_robustness, max_psucc_free, ratio_for, sample_free_point, Error, FreeSetKind,
    FreeSetSpec, Game, ObjectClass, QuantumObject, RobustnessOptions, RobustnessResult, Shape, SolverOptions,
};

use crate::Common;

/// Samples drawn for the witness check.
const WITNESS_SAMPLES: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub enum Selector {
    Jm,
    Coexistence,
    Lhs,
    Incoherent,
    Generated(PathBuf),
}

impl Selector {
    pub fn parse(s: &str) -> Result<Self, Error> {
        match s {
            "jm" => Ok(Selector::Jm),
            "coexistence" => Ok(Selector::Coexistence),
            "lhs" => Ok(Selector::Lhs),
            "incoherent" => Ok(Selector::Incoherent),
            _ => match s.strip_prefix("generated:") {
                Some(path) if !path.is_empty() => Ok(Selector::Generated(PathBuf::from(path))),
                _ => Err(Error::Format {
                    path: "--free-set".into(),
                    message: format!("unknown selector `{s}` (jm, coexistence, lhs, incoherent, generated:<path>)"),
                }),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Selector::Jm => "jm".into(),
            Selector::Coexistence => "coexistence".into(),
            Selector::Lhs => "lhs".into(),
            Selector::Incoherent => "incoherent".into(),
            Selector::Generated(p) => format!("generated:{}", p.display()),
        }
    }

    pub fn spec(&self, class: ObjectClass, shape: Shape) -> Result<FreeSetSpec, Error> {
        let kind = match self {
            Selector::Jm => FreeSetKind::JointlyMeasurable,
            Selector::Coexistence => FreeSetKind::Coexistent,
            Selector::Lhs => FreeSetKind::LocalHiddenState,
            Selector::Incoherent => FreeSetKind::IncoherentDiagonal,
            Selector::Generated(path) => {
                let Document::Generators(gens) = read_document(path)? else {
                    return Err(Error::Format { path: format!("{}:$", path.display()), message: "expected a `generators` list".into() });
                };
                if let Some(k) = gens.iter().position(|g| g.class() != class) {
                    return Err(Error::Format {
                        path: format!("{}:$.generators[{k}]", path.display()),
                        message: format!("generator is a {:?}, the input is a {class:?}", gens[k].class()),
                    });
                }
                FreeSetKind::FinitelyGenerated(gens.iter().map(QuantumObject::blocks).collect())
            }
        };
        FreeSetSpec::new(kind, shape, class)
    }
}

fn options(c: &Common) -> RobustnessOptions {
    RobustnessOptions {
        solver: SolverOptions { tol_feas: c.tol_feas, tol_gap: c.tol_gap, max_iter: c.max_iter, trace: c.trace.is_some(), ..SolverOptions::default() },
        ..RobustnessOptions::default()
    }
}

fn class_name(c: ObjectClass) -> Value {
    serde_json::to_value(c).expect("class names serialize")
}

fn shape_value(s: Shape) -> Value {
    let mut m = Map::new();
    m.insert("dim".into(), s.dim.into());
    m.insert("num_outcomes".into(), s.num_outcomes.into());
    m.insert("num_settings".into(), s.num_settings.into());
    Value::Object(m)
}

fn base(command: &str, c: &Common) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), command.into());
    m.insert("input".into(), c.input.display().to_string().into());
    let mut tol = Map::new();
    tol.insert("feas".into(), float(c.tol_feas));
    tol.insert("gap".into(), float(c.tol_gap));
    tol.insert("membership".into(), float(c.tol_membership));
    m.insert("tolerances".into(), Value::Object(tol));
    m
}

pub fn validate(doc: &Document, c: &Common) -> Value {
    let mut m = base("validate", c);
    m.insert("kind".into(), doc.kind().into());
    if let Document::Object(o) = doc {
        m.insert("shape".into(), shape_value(o.shape()));
    }
    m.insert("valid".into(), true.into());
    Value::Object(m)
}

fn object_of(doc: &Document) -> Result<QuantumObject, Error> {
    match doc {
        Document::Object(o) => Ok(o.clone()),
        Document::Povm(p) => Ok(QuantumObject::Measurement(qrobust_core::MeasurementAssemblage::single(p.clone()))),
        other => Err(Error::Format { path: "$".into(), message: format!("expected an assemblage or ensemble, found a {}", other.kind()) }),
    }
}

fn robustness_fields(m: &mut Map<String, Value>, r: &RobustnessResult, c: &Common) {
    m.insert("t".into(), float(r.t));
    m.insert("primal_value".into(), float(r.primal_value));
    m.insert("dual_value".into(), float(r.dual_value));
    m.insert("gap".into(), float(r.diagnostics.gap));
    m.insert("inside".into(), (r.t <= c.tol_membership).into());
    m.insert("status".into(), serde_json::to_value(r.diagnostics.status).expect("status serializes"));
    m.insert("iterations".into(), r.diagnostics.iterations.into());
    let mut res = Map::new();
    res.insert("primal".into(), float(r.diagnostics.residuals.primal));
    res.insert("dual".into(), float(r.diagnostics.residuals.dual));
    res.insert("cone".into(), float(r.diagnostics.residuals.cone));
    m.insert("residuals".into(), Value::Object(res));
}

pub fn analyze(command: &str, doc: &Document, selector: &Selector, c: &Common) -> Result<(Value, Vec<IterationRecord>), Error> {
    let object = object_of(doc)?;
    let spec = selector.spec(object.class(), object.shape())?;
    let opts = options(c);
    let instrument = match &c.instrument {
        Some(path) => match read_document(path)? {
            Document::Instrument(i) => Some(i),
            other => {
                return Err(Error::Format { path: format!("{}:$", path.display()), message: format!("expected an instrument, found a {}", other.kind()) })
            }
        },
        None => None,
    };
    let r = match (&object, &instrument) {
        (QuantumObject::Ensemble(e), Some(i)) => ensemble_robustness(e, i, &spec, &opts)?,
        (_, Some(_)) => return Err(Error::Format { path: "--instrument".into(), message: "an instrument applies only to ensembles".into() }),
        _ => generalized_robustness(&object, &spec, &opts)?,
    };
    let trace = r.diagnostics.trace.clone();

    let mut m = base(command, c);
    m.insert("free_set".into(), selector.name().into());
    m.insert("object_class".into(), class_name(object.class()));
    m.insert("shape".into(), shape_value(object.shape()));
    robustness_fields(&mut m, &r, c);
    match command {
        "robustness" => {}
        "witness" => {
            m.insert("witness".into(), witness_to_value(&r.witness));
            m.insert("witness_value".into(), float(r.witness.pair(&object.blocks())));
            m.insert("witness_trace".into(), float(r.witness.trace()));
            if instrument.is_none() {
                let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
                let mut worst = f64::NEG_INFINITY;
                for _ in 0..WITNESS_SAMPLES {
                    worst = worst.max(r.witness.pair(&sample_free_point(&spec, &mut rng)?));
                }
                let mut check = Map::new();
                check.insert("samples".into(), WITNESS_SAMPLES.into());
                check.insert("seed".into(), c.seed.into());
                check.insert("max_pairing".into(), float(worst));
                m.insert("witness_check".into(), Value::Object(check));
            }
        }
        "game" => {
            m.insert("game".into(), game_to_value(&game_for(&r.witness, object.class())?));
        }
        "verify" => {
            let game = game_for(&r.witness, object.class())?;
            let one_plus_r = 1.0 + r.t;
            let rep = ratio_for(&object, &spec, &opts, r, game)?;
            m.insert("ratio".into(), float(rep.ratio));
            m.insert("one_plus_r".into(), float(one_plus_r));
            m.insert("discrepancy".into(), float(rep.discrepancy));
            m.insert("p_succ".into(), float(rep.p_succ));
            m.insert("max_free".into(), float(rep.max_free));
            m.insert("passed".into(), (rep.discrepancy <= 1e-5 * one_plus_r).into());
        }
        _ => unreachable!("unknown command {command}"),
    }
    Ok((Value::Object(m), trace))
}

pub fn maxfree(doc: &Document, selector: &Selector, c: &Common) -> Result<(Value, Vec<IterationRecord>), Error> {
    let Document::Game(game) = doc else {
        return Err(Error::Format { path: "$".into(), message: format!("expected a game, found a {}", doc.kind()) });
    };
    let (class, shape) = match game {
        Game::Discrimination(g) => {
            let e = &g.ensemble;
            (ObjectClass::MeasurementAssemblage, Shape::new(e.dim(), e.num_outcomes(), e.num_partitions()))
        }
        Game::Subchannel(g) => (
            ObjectClass::StateAssemblage,
            Shape::new(g.instrument.dim_in(), g.instrument.num_outcomes().saturating_sub(1), g.povm.num_outcomes()),
        ),
    };
    let spec = selector.spec(class, shape)?;
    let value = max_psucc_free(game, &spec, &options(c))?;
    let mut m = base("maxfree", c);
    m.insert("free_set".into(), selector.name().into());
    m.insert("max_free".into(), float(value));
    if let Game::Discrimination(g) = game {
        m.insert("tr_y".into(), float(g.tr_y));
        m.insert("witness_bound".into(), float(1.0 / g.tr_y));
    }
    Ok((Value::Object(m), Vec::new()))
}

/// Flattened scalar fields, `a.b = value`, in key order; matrices are skipped.
pub fn to_text(v: &Value) -> String {
    fn walk(out: &mut String, prefix: &str, v: &Value) {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                for k in keys {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(out, &p, &map[k]);
                }
            }
            Value::Array(_) => {}
            Value::Number(n) if n.is_f64() => out.push_str(&format!("{prefix} = {}\n", format_f64(n.as_f64().unwrap_or(f64::NAN)))),
            Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
            other => out.push_str(&format!("{prefix} = {other}\n")),
        }
    }
    let mut out = String::new();
    walk(&mut out, "", v);
    out
}
