//! Canonical JSON files for objects, witnesses, games and generator lists.
//!
//! Matrices are `{"re": [[…]], "im": [[…]]}`. Output has sorted keys, two-space
//! indentation, scalar arrays on one line and floats with 17 significant
//! digits, so parsing and re-serializing a canonical file is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::games::{DiscriminationGame, Game, SubchannelGame};
use crate::hermitian::{HermitianMatrix, HERMITICITY_TOL};
use crate::objects::{Instrument, MeasurementAssemblage, ObjectClass, PartitionedEnsemble, Povm, QuantumObject, Shape, StateAssemblage};
use crate::robustness::Witness;

/// Anything that can live in an input file.
#[derive(Clone, Debug, PartialEq)]
pub enum Document {
    Povm(Povm),
    Object(QuantumObject),
    Instrument(Instrument),
    Witness(Witness),
    Game(Game),
    Generators(Vec<QuantumObject>),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Povm(_) => "povm",
            Document::Object(QuantumObject::Measurement(_)) => "measurement_assemblage",
            Document::Object(QuantumObject::Assemblage(_)) => "state_assemblage",
            Document::Object(QuantumObject::Ensemble(_)) => "ensemble",
            Document::Instrument(_) => "instrument",
            Document::Witness(_) => "witness",
            Document::Game(_) => "game",
            Document::Generators(_) => "generators",
        }
    }
}

fn format_err(path: &str, message: impl Into<String>) -> Error {
    Error::Format { path: path.to_string(), message: message.into() }
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Format { .. } => e,
        other => format_err(path, other.to_string()),
    }
}

// ---------- writing ----------

/// JSON number for `v`; negative zero is written as zero and non-finite values as `null`.
pub fn float(v: f64) -> Value {
    let v = if v == 0.0 { 0.0 } else { v };
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

pub fn matrix_to_value(m: &HermitianMatrix) -> Value {
    let d = m.dim();
    let part = |f: fn(&crate::hermitian::C64) -> f64| -> Value {
        Value::Array((0..d).map(|i| Value::Array((0..d).map(|j| float(f(&m.get(i, j)))).collect())).collect())
    };
    let mut o = Map::new();
    o.insert("re".into(), part(|c| c.re));
    o.insert("im".into(), part(|c| c.im));
    Value::Object(o)
}

fn matrices(ms: &[HermitianMatrix]) -> Value {
    Value::Array(ms.iter().map(matrix_to_value).collect())
}

fn rows(blocks: &[HermitianMatrix], num_outcomes: usize) -> Value {
    Value::Array(blocks.chunks(num_outcomes).map(matrices).collect())
}

fn obj(entries: Vec<(&str, Value)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

pub fn povm_to_value(p: &Povm) -> Value {
    obj(vec![("dim", p.dim().into()), ("effects", matrices(p.effects()))])
}

pub fn object_to_value(o: &QuantumObject) -> Value {
    match o {
        QuantumObject::Measurement(m) => obj(vec![("settings", Value::Array(m.settings().iter().map(povm_to_value).collect()))]),
        QuantumObject::Assemblage(s) => obj(vec![("blocks", Value::Array(s.rows().iter().map(|r| matrices(r)).collect()))]),
        QuantumObject::Ensemble(e) => ensemble_to_value(e),
    }
}

pub fn ensemble_to_value(e: &PartitionedEnsemble) -> Value {
    obj(vec![
        ("priors", Value::Array(e.priors().iter().map(|&p| float(p)).collect())),
        ("conditionals", Value::Array(e.conditionals().iter().map(|c| Value::Array(c.iter().map(|&p| float(p)).collect())).collect())),
        ("states", Value::Array(e.states().iter().map(|r| matrices(r)).collect())),
    ])
}

pub fn instrument_to_value(i: &Instrument) -> Value {
    obj(vec![("choi", matrices(i.choi())), ("dim_in", i.dim_in().into()), ("dim_out", i.dim_out().into())])
}

fn class_name(c: ObjectClass) -> Value {
    serde_json::to_value(c).expect("class names serialize")
}

pub fn witness_to_value(w: &Witness) -> Value {
    obj(vec![("object_class", class_name(w.object_class)), ("y_blocks", rows(&w.blocks, w.shape.num_outcomes))])
}

pub fn game_to_value(g: &Game) -> Value {
    match g {
        Game::Discrimination(g) => obj(vec![
            ("game", "discrimination".into()),
            ("ensemble", ensemble_to_value(&g.ensemble)),
            ("tr_y", float(g.tr_y)),
        ]),
        Game::Subchannel(g) => obj(vec![
            ("game", "subchannel".into()),
            ("instrument", instrument_to_value(&g.instrument)),
            ("povm", povm_to_value(&g.povm)),
            ("alpha", float(g.alpha)),
        ]),
    }
}

pub fn document_to_value(doc: &Document) -> Value {
    match doc {
        Document::Povm(p) => povm_to_value(p),
        Document::Object(o) => object_to_value(o),
        Document::Instrument(i) => instrument_to_value(i),
        Document::Witness(w) => witness_to_value(w),
        Document::Game(g) => game_to_value(g),
        Document::Generators(gs) => obj(vec![("generators", Value::Array(gs.iter().map(object_to_value).collect()))]),
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip every `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Canonical text of `v`, terminated by a newline.
pub fn to_canonical_string(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) if !n.is_f64() => write!(out, "{u}").unwrap(),
            (_, Some(i)) if !n.is_f64() => write!(out, "{i}").unwrap(),
            _ => out.push_str(&format_f64(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(is_scalar) => {
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_value(out, item, indent);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            for (k, key) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push_str(": ");
                write_value(out, &map[*key], indent + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

pub fn write_canonical(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, to_canonical_string(v)).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })
}

// ---------- reading ----------

fn field<'a>(v: &'a Value, path: &str, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| format_err(path, format!("missing field `{key}`")))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| format_err(path, "expected an array"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| format_err(path, "expected a number"))
}

fn count(v: &Value, path: &str) -> Result<usize> {
    v.as_u64().map(|u| u as usize).ok_or_else(|| format_err(path, "expected a nonnegative integer"))
}

fn numbers(v: &Value, path: &str) -> Result<Vec<f64>> {
    array(v, path)?.iter().enumerate().map(|(k, x)| number(x, &format!("{path}[{k}]"))).collect()
}

fn real_matrix(v: &Value, path: &str) -> Result<Vec<Vec<f64>>> {
    array(v, path)?.iter().enumerate().map(|(i, row)| numbers(row, &format!("{path}[{i}]"))).collect()
}

pub fn matrix_from_value(v: &Value, path: &str) -> Result<HermitianMatrix> {
    let re = real_matrix(field(v, path, "re")?, &format!("{path}.re"))?;
    let im = real_matrix(field(v, path, "im")?, &format!("{path}.im"))?;
    let d = re.len();
    if d == 0 {
        return Err(format_err(&format!("{path}.re"), "empty matrix"));
    }
    for (name, m) in [("re", &re), ("im", &im)] {
        if m.len() != d {
            return Err(format_err(&format!("{path}.{name}"), format!("expected {d} rows, found {}", m.len())));
        }
        if let Some(i) = m.iter().position(|r| r.len() != d) {
            return Err(format_err(&format!("{path}.{name}[{i}]"), format!("expected {d} entries, found {}", m[i].len())));
        }
    }
    HermitianMatrix::from_parts(&re, &im, HERMITICITY_TOL).map_err(|e| at(path, e))
}

fn matrix_list(v: &Value, path: &str) -> Result<Vec<HermitianMatrix>> {
    array(v, path)?.iter().enumerate().map(|(k, m)| matrix_from_value(m, &format!("{path}[{k}]"))).collect()
}

fn matrix_rows(v: &Value, path: &str) -> Result<Vec<Vec<HermitianMatrix>>> {
    array(v, path)?.iter().enumerate().map(|(k, r)| matrix_list(r, &format!("{path}[{k}]"))).collect()
}

pub fn povm_from_value(v: &Value, path: &str) -> Result<Povm> {
    let dim = count(field(v, path, "dim")?, &format!("{path}.dim"))?;
    let effects = matrix_list(field(v, path, "effects")?, &format!("{path}.effects"))?;
    if let Some(k) = effects.iter().position(|e| e.dim() != dim) {
        return Err(format_err(&format!("{path}.effects[{k}]"), format!("dimension {} differs from dim {dim}", effects[k].dim())));
    }
    Povm::new(effects).map_err(|e| at(&format!("{path}.effects"), e))
}

pub fn measurement_from_value(v: &Value, path: &str) -> Result<MeasurementAssemblage> {
    let p = format!("{path}.settings");
    let settings = array(field(v, path, "settings")?, &p)?
        .iter()
        .enumerate()
        .map(|(x, s)| povm_from_value(s, &format!("{p}[{x}]")))
        .collect::<Result<Vec<_>>>()?;
    MeasurementAssemblage::new(settings).map_err(|e| at(&p, e))
}

pub fn assemblage_from_value(v: &Value, path: &str) -> Result<StateAssemblage> {
    let p = format!("{path}.blocks");
    StateAssemblage::new(matrix_rows(field(v, path, "blocks")?, &p)?).map_err(|e| at(&p, e))
}

pub fn ensemble_from_value(v: &Value, path: &str) -> Result<PartitionedEnsemble> {
    let priors = numbers(field(v, path, "priors")?, &format!("{path}.priors"))?;
    let cp = format!("{path}.conditionals");
    let conditionals = array(field(v, path, "conditionals")?, &cp)?
        .iter()
        .enumerate()
        .map(|(x, c)| numbers(c, &format!("{cp}[{x}]")))
        .collect::<Result<Vec<_>>>()?;
    let states = matrix_rows(field(v, path, "states")?, &format!("{path}.states"))?;
    PartitionedEnsemble::new(priors, conditionals, states).map_err(|e| at(path, e))
}

pub fn instrument_from_value(v: &Value, path: &str) -> Result<Instrument> {
    let dim_in = count(field(v, path, "dim_in")?, &format!("{path}.dim_in"))?;
    let dim_out = count(field(v, path, "dim_out")?, &format!("{path}.dim_out"))?;
    let choi = matrix_list(field(v, path, "choi")?, &format!("{path}.choi"))?;
    Instrument::new(dim_in, dim_out, choi).map_err(|e| at(&format!("{path}.choi"), e))
}

pub fn witness_from_value(v: &Value, path: &str) -> Result<Witness> {
    let cp = format!("{path}.object_class");
    let class: ObjectClass = serde_json::from_value(field(v, path, "object_class")?.clone()).map_err(|e| format_err(&cp, e.to_string()))?;
    let bp = format!("{path}.y_blocks");
    let rows = matrix_rows(field(v, path, "y_blocks")?, &bp)?;
    let nx = rows.len();
    let na = rows.first().map_or(0, Vec::len);
    let dim = rows.first().and_then(|r| r.first()).map_or(0, HermitianMatrix::dim);
    if nx == 0 || na == 0 {
        return Err(format_err(&bp, "witness has no blocks"));
    }
    if let Some(x) = rows.iter().position(|r| r.len() != na) {
        return Err(format_err(&format!("{bp}[{x}]"), format!("expected {na} blocks")));
    }
    Witness::new(class, Shape::new(dim, na, nx), rows.into_iter().flatten().collect()).map_err(|e| at(&bp, e))
}

pub fn game_from_value(v: &Value, path: &str) -> Result<Game> {
    let kind = field(v, path, "game")?.as_str().ok_or_else(|| format_err(&format!("{path}.game"), "expected a string"))?;
    match kind {
        "discrimination" => Ok(Game::Discrimination(DiscriminationGame {
            ensemble: ensemble_from_value(field(v, path, "ensemble")?, &format!("{path}.ensemble"))?,
            tr_y: number(field(v, path, "tr_y")?, &format!("{path}.tr_y"))?,
        })),
        "subchannel" => Ok(Game::Subchannel(SubchannelGame {
            instrument: instrument_from_value(field(v, path, "instrument")?, &format!("{path}.instrument"))?,
            povm: povm_from_value(field(v, path, "povm")?, &format!("{path}.povm"))?,
            alpha: number(field(v, path, "alpha")?, &format!("{path}.alpha"))?,
        })),
        other => Err(format_err(&format!("{path}.game"), format!("unknown game `{other}`"))),
    }
}

pub fn object_from_value(v: &Value, path: &str) -> Result<QuantumObject> {
    if v.get("settings").is_some() {
        measurement_from_value(v, path).map(QuantumObject::Measurement)
    } else if v.get("blocks").is_some() {
        assemblage_from_value(v, path).map(QuantumObject::Assemblage)
    } else if v.get("priors").is_some() {
        ensemble_from_value(v, path).map(QuantumObject::Ensemble)
    } else if v.get("effects").is_some() {
        povm_from_value(v, path).map(|p| QuantumObject::Measurement(MeasurementAssemblage::single(p)))
    } else {
        Err(format_err(path, "expected an object with `settings`, `blocks`, `priors` or `effects`"))
    }
}

pub fn document_from_value(v: &Value) -> Result<Document> {
    let path = "$";
    if !v.is_object() {
        return Err(format_err(path, "expected a JSON object"));
    }
    if v.get("generators").is_some() {
        let gp = "$.generators";
        let gens = array(&v["generators"], gp)?
            .iter()
            .enumerate()
            .map(|(k, g)| object_from_value(g, &format!("{gp}[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Document::Generators(gens));
    }
    if let Some(g) = v.get("game") {
        // A game report embeds the game under the same key.
        if g.is_object() {
            return game_from_value(g, "$.game").map(Document::Game);
        }
        return game_from_value(v, path).map(Document::Game);
    }
    if v.get("y_blocks").is_some() {
        return witness_from_value(v, path).map(Document::Witness);
    }
    if v.get("choi").is_some() {
        return instrument_from_value(v, path).map(Document::Instrument);
    }
    if v.get("effects").is_some() {
        return povm_from_value(v, path).map(Document::Povm);
    }
    object_from_value(v, path).map(Document::Object)
}

pub fn parse_document(text: &str) -> Result<Document> {
    let v: Value = serde_json::from_str(text).map_err(|e| format_err("$", format!("invalid JSON: {e}")))?;
    document_from_value(&v)
}

pub fn read_document(path: &Path) -> Result<Document> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_document(&text).map_err(|e| match e {
        Error::Format { path: field, message } => Error::Format { path: format!("{}:{field}", path.display()), message },
        other => other,
    })
}

/// Canonical text of a document.
pub fn document_to_string(doc: &Document) -> String {
    to_canonical_string(&document_to_value(doc))
}
