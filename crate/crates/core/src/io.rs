//! JSON interchange for models, instances and reports.
//!
//! Problem files share one envelope:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "kind": "constraint",
//!   "metadata": {"name": "knapsack"},
//!   "model": { ... }
//! }
//! ```
//!
//! `kind` is `"constraint"` (payload under `"model"`) or `"linsat"` (payload
//! under `"instance"`). Output is canonical: keys sorted, two-space indent,
//! rationals as `"n"` or `"n/d"` strings, trailing newline. Loading a
//! canonical file and saving it again reproduces it byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::FieldOrder;
use crate::linsat::{LinsatExpr, LinsatInstance, MergeMode, Provenance};
use crate::model::{ConstraintModel, IntConstraint, IntExpr, IntMonomial, Rational, Relation};

pub const FORMAT_VERSION: u32 = 1;

/// Serde adapter writing a [`Rational`] as `"n/d"`. Integers and integer
/// strings are accepted on input.
pub mod rational {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use crate::model::Rational;

    pub fn to_string(r: &Rational) -> String {
        if r.is_integer() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        }
    }

    pub fn parse(s: &str) -> Result<Rational, String> {
        let s = s.trim();
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let n: i128 = n.trim().parse().map_err(|_| format!("invalid rational {s:?}"))?;
        let d: i128 = d.trim().parse().map_err(|_| format!("invalid rational {s:?}"))?;
        if d == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rational::new(n, d))
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_string(r))
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        match Raw::deserialize(d).map_err(|_| D::Error::custom("expected an integer or a \"n/d\" string"))? {
            Raw::Int(i) => Ok(Rational::from_integer(i as i128)),
            Raw::Str(s) => parse(&s).map_err(D::Error::custom),
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {message} (line {line}, column {column})")]
    Syntax { path: String, line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Schema { field: String, message: String },
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("{path}: {message}")]
    File { path: String, message: String },
}

impl IoError {
    fn schema(field: impl Into<String>, message: impl fmt::Display) -> Self {
        IoError::Schema { field: field.into(), message: message.to_string() }
    }
}

/// Deserializes with a field path in every error.
fn from_str_with_path<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, IoError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        IoError::Syntax {
            path: if path == "." { "(root)".into() } else { path },
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| IoError::Syntax {
        path: "(root)".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}

/// Canonical text: sorted keys, two-space indent, arrays of scalars on one
/// line, newline-terminated.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report types serialize to JSON");
    let mut s = String::new();
    write_canonical(&v, 0, &mut s);
    s.push('\n');
    s
}

fn write_canonical(v: &serde_json::Value, depth: usize, out: &mut String) {
    use serde_json::Value;
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Object(map) if !map.is_empty() => {
            let sorted: BTreeMap<&String, &Value> = map.iter().collect();
            out.push_str("{\n");
            for (i, (k, v)) in sorted.into_iter().enumerate() {
                if i > 0 {
                    out.push_str(",\n");
                }
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).expect("strings serialize"));
                out.push_str(": ");
                write_canonical(v, depth + 1, out);
            }
            out.push('\n');
            out.push_str(&pad(depth));
            out.push('}');
        }
        Value::Array(a) if a.iter().any(|x| x.is_array() || x.is_object()) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(",\n");
                }
                out.push_str(&pad(depth + 1));
                write_canonical(x, depth + 1, out);
            }
            out.push('\n');
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Array(a) => {
            let items: Vec<String> = a.iter().map(|x| serde_json::to_string(x).expect("scalars serialize")).collect();
            out.push('[');
            out.push_str(&items.join(", "));
            out.push(']');
        }
        scalar => out.push_str(&serde_json::to_string(scalar).expect("scalars serialize")),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

impl Metadata {
    pub fn named(name: impl Into<String>) -> Self {
        Self { name: Some(name.into()), provenance: None }
    }

    fn is_empty(&self) -> bool {
        self.name.is_none() && self.provenance.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Problem {
    Constraint(ConstraintModel),
    Linsat(LinsatInstance),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemFile {
    pub metadata: Metadata,
    pub problem: Problem,
}

impl ProblemFile {
    pub fn constraint(model: ConstraintModel, metadata: Metadata) -> Self {
        Self { metadata, problem: Problem::Constraint(model) }
    }

    pub fn linsat(instance: LinsatInstance, metadata: Metadata) -> Self {
        Self { metadata, problem: Problem::Linsat(instance) }
    }

    pub fn kind(&self) -> ProblemKind {
        match self.problem {
            Problem::Constraint(_) => ProblemKind::Constraint,
            Problem::Linsat(_) => ProblemKind::Linsat,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let dto: FileDto = from_str_with_path(text)?;
        if dto.format_version != FORMAT_VERSION {
            return Err(IoError::Version(dto.format_version));
        }
        let problem = match (dto.kind, dto.model, dto.instance) {
            (ProblemKind::Constraint, Some(m), None) => Problem::Constraint(m.into_model()?),
            (ProblemKind::Linsat, None, Some(i)) => Problem::Linsat(i.into_instance()?),
            (ProblemKind::Constraint, _, _) => {
                return Err(IoError::schema("model", "kind \"constraint\" needs a \"model\" and no \"instance\""))
            }
            (ProblemKind::Linsat, _, _) => {
                return Err(IoError::schema("instance", "kind \"linsat\" needs an \"instance\" and no \"model\""))
            }
        };
        Ok(Self { metadata: dto.metadata, problem })
    }

    pub fn to_json(&self) -> String {
        let (model, instance) = match &self.problem {
            Problem::Constraint(m) => (Some(ModelDto::from_model(m)), None),
            Problem::Linsat(i) => (None, Some(InstanceDto::from_instance(i))),
        };
        to_canonical_string(&FileDto {
            format_version: FORMAT_VERSION,
            kind: self.kind(),
            metadata: self.metadata.clone(),
            model,
            instance,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IoError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| IoError::File { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json())
            .map_err(|e| IoError::File { path: path.display().to_string(), message: e.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Constraint,
    Linsat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileDto {
    format_version: u32,
    kind: ProblemKind,
    #[serde(default, skip_serializing_if = "Metadata::is_empty")]
    metadata: Metadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<ModelDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    instance: Option<InstanceDto>,
}

fn one() -> Rational {
    Rational::from_integer(1)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VarDto {
    name: String,
    lower: i64,
    upper: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDto {
    #[serde(with = "rational")]
    coefficient: Rational,
    /// Variable name to exponent.
    powers: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExprDto {
    #[serde(with = "rational", default)]
    constant: Rational,
    #[serde(default)]
    terms: Vec<TermDto>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDto {
    /// The constraint reads `expr RELATION 0`.
    expr: ExprDto,
    relation: Relation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    modulus: Option<u64>,
    #[serde(with = "rational", default = "one")]
    weight: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Sense {
    Maximize,
    Minimize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectiveDto {
    expr: ExprDto,
    sense: Sense,
    #[serde(with = "rational", default = "one")]
    weight: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDto {
    variables: Vec<VarDto>,
    #[serde(default)]
    constraints: Vec<ConstraintDto>,
    #[serde(default)]
    objectives: Vec<ObjectiveDto>,
}

impl ExprDto {
    fn from_expr(e: &IntExpr, names: &[String]) -> Self {
        let terms = e
            .terms()
            .iter()
            .map(|(m, &c)| TermDto {
                coefficient: c,
                powers: m.vars().iter().map(|&(v, k)| (names[v].clone(), k)).collect(),
            })
            .collect();
        Self { constant: e.constant_term(), terms }
    }

    fn into_expr(self, field: &str, ids: &BTreeMap<&str, usize>, binary: &BTreeSet<usize>) -> Result<IntExpr, IoError> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (j, t) in self.terms.into_iter().enumerate() {
            let mut pairs = Vec::with_capacity(t.powers.len());
            for (name, k) in t.powers {
                let &v = ids.get(name.as_str()).ok_or_else(|| {
                    IoError::schema(format!("{field}.terms[{j}].powers"), format!("unknown variable {name:?}"))
                })?;
                pairs.push((v, k));
            }
            terms.push((IntMonomial::new(pairs, binary), t.coefficient));
        }
        Ok(IntExpr::from_terms(terms, self.constant, binary.clone()))
    }
}

impl ModelDto {
    fn from_model(m: &ConstraintModel) -> Self {
        let names: Vec<String> = m.variables.iter().map(|v| v.name.clone()).collect();
        Self {
            variables: m
                .variables
                .iter()
                .map(|v| VarDto { name: v.name.clone(), lower: v.lower, upper: v.upper })
                .collect(),
            constraints: m
                .constraints
                .iter()
                .map(|c| ConstraintDto {
                    expr: ExprDto::from_expr(&c.expr, &names),
                    relation: c.relation,
                    modulus: c.modulus,
                    weight: c.weight,
                })
                .collect(),
            objectives: m
                .objectives
                .iter()
                .map(|o| ObjectiveDto {
                    expr: ExprDto::from_expr(&o.user_expr(), &names),
                    sense: if o.minimize { Sense::Minimize } else { Sense::Maximize },
                    weight: o.weight,
                })
                .collect(),
        }
    }

    fn into_model(self) -> Result<ConstraintModel, IoError> {
        let mut model = ConstraintModel::new();
        for (i, v) in self.variables.iter().enumerate() {
            let field = format!("model.variables[{i}]");
            if model.variables.iter().any(|w| w.name == v.name) {
                return Err(IoError::schema(field, format!("duplicate variable name {:?}", v.name)));
            }
            model.new_var(v.name.clone(), v.lower, v.upper).map_err(|e| IoError::schema(field, e))?;
        }
        let ids: BTreeMap<&str, usize> = self.variables.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
        let binary = model.binary_vars();
        for (i, c) in self.constraints.into_iter().enumerate() {
            let field = format!("model.constraints[{i}]");
            let expr = c.expr.into_expr(&format!("{field}.expr"), &ids, &binary)?;
            model
                .add_constraint(IntConstraint::new(expr, c.relation, c.modulus).with_weight(c.weight))
                .map_err(|e| IoError::schema(field, e))?;
        }
        for (i, o) in self.objectives.into_iter().enumerate() {
            let field = format!("model.objectives[{i}]");
            let expr = o.expr.into_expr(&format!("{field}.expr"), &ids, &binary)?;
            model
                .add_weighted_objective(expr, o.sense == Sense::Minimize, o.weight)
                .map_err(|e| IoError::schema(field, e))?;
        }
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinsatConstraintDto {
    /// `[variable, coefficient]` pairs.
    terms: Vec<(usize, u64)>,
    /// `[value, weight]` pairs.
    members: Vec<(u64, u64)>,
    #[serde(default, skip_serializing_if = "is_default")]
    provenance: Provenance,
}

fn is_default<T: Default + PartialEq>(t: &T) -> bool {
    *t == T::default()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDto {
    field_order: FieldOrder,
    #[serde(default)]
    merge_mode: MergeMode,
    variables: Vec<String>,
    #[serde(default)]
    constraints: Vec<LinsatConstraintDto>,
}

impl InstanceDto {
    fn from_instance(inst: &LinsatInstance) -> Self {
        Self {
            field_order: inst.order(),
            merge_mode: inst.merge_mode(),
            variables: inst.variables().iter().map(|v| v.name.clone()).collect(),
            constraints: inst
                .constraints()
                .iter()
                .map(|c| LinsatConstraintDto {
                    terms: c.expr.terms().to_vec(),
                    members: c.rhs.weights().iter().map(|(&v, &w)| (v, w)).collect(),
                    provenance: c.provenance,
                })
                .collect(),
        }
    }

    fn into_instance(self) -> Result<LinsatInstance, IoError> {
        let p = self.field_order;
        let mut inst = LinsatInstance::with_merge_mode(p, self.merge_mode);
        for name in self.variables {
            inst.new_var(name);
        }
        for (i, c) in self.constraints.into_iter().enumerate() {
            let field = format!("instance.constraints[{i}]");
            if let Some(&(_, b)) = c.terms.iter().find(|&&(_, b)| b >= p.get()) {
                return Err(IoError::schema(format!("{field}.terms"), format!("coefficient {b} is not below {p}")));
            }
            if let Some(&(v, _)) = c.members.iter().find(|&&(v, _)| v >= p.get()) {
                return Err(IoError::schema(format!("{field}.members"), format!("value {v} is not below {p}")));
            }
            let expr = LinsatExpr::new(p, c.terms.iter().map(|&(v, b)| (v, b as i128)));
            inst.add_constraint_with(expr, &c.members, c.provenance).map_err(|e| IoError::schema(field, e))?;
        }
        Ok(inst)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Transform,
    Analysis,
    Solve,
    Estimate,
    Gadget,
}

/// Envelope shared by every report the command line emits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report<T> {
    pub format_version: u32,
    pub kind: ReportKind,
    #[serde(default, skip_serializing_if = "Metadata::is_empty")]
    pub metadata: Metadata,
    pub report: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(kind: ReportKind, metadata: Metadata, report: T) -> Self {
        Self { format_version: FORMAT_VERSION, kind, metadata, report }
    }

    pub fn to_json(&self) -> String {
        to_canonical_string(self)
    }
}

/// Fields every report of a kind must carry.
fn required_fields(kind: ReportKind) -> &'static [&'static str] {
    match kind {
        ReportKind::Transform => &["certificate", "diagnostics", "weighted", "unweighted"],
        ReportKind::Analysis => &["field_order", "length", "rank", "min_distance", "dependencies"],
        ReportKind::Solve => &["assignment", "weight", "solver"],
        ReportKind::Estimate => &["l", "expected", "feasibility", "regime"],
        ReportKind::Gadget => &["gadget", "verified"],
    }
}

/// Parses any report, checking the envelope and the per-kind required
/// fields.
pub fn parse_report(text: &str) -> Result<Report<serde_json::Value>, IoError> {
    let r: Report<serde_json::Value> = from_str_with_path(text)?;
    if r.format_version != FORMAT_VERSION {
        return Err(IoError::Version(r.format_version));
    }
    let obj = r.report.as_object().ok_or_else(|| IoError::schema("report", "expected an object"))?;
    for f in required_fields(r.kind) {
        if !obj.contains_key(*f) {
            return Err(IoError::schema(format!("report.{f}"), "missing field"));
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsat::Origin;
    use proptest::prelude::*;

    fn sample_model() -> ConstraintModel {
        let mut m = ConstraintModel::new();
        let a = m.new_var("a", 0, 2).unwrap();
        let b = m.new_binary_var("b");
        let e = a.expr() * Rational::new(3, 2) - b.expr() + IntExpr::constant(1);
        m.add_constraint(e.ge(0).with_weight(Rational::new(1, 3))).unwrap();
        m.add_constraint((a.expr() + b.expr()).eq_mod(1, 3)).unwrap();
        m.add_objective(a.expr() * a.expr() * b.expr(), true).unwrap();
        m
    }

    #[test]
    fn rational_strings() {
        assert_eq!(rational::to_string(&Rational::new(-6, 4)), "-3/2");
        assert_eq!(rational::to_string(&Rational::from_integer(5)), "5");
        assert_eq!(rational::parse(" 4/6 ").unwrap(), Rational::new(2, 3));
        assert!(rational::parse("1/0").is_err());
        assert!(rational::parse("x").is_err());
    }

    #[test]
    fn model_round_trip_is_byte_stable() {
        let f = ProblemFile::constraint(sample_model(), Metadata::named("sample"));
        let text = f.to_json();
        let back = ProblemFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json(), text);
        assert!(text.contains("\"weight\": \"1/3\""));
        assert!(text.contains("\"sense\": \"minimize\""));
    }

    #[test]
    fn instance_round_trip() {
        let p = FieldOrder::new(5).unwrap();
        let mut inst = LinsatInstance::with_merge_mode(p, MergeMode::Off);
        inst.new_var("x");
        inst.new_var("y");
        inst.add_constraint_with(
            LinsatExpr::new(p, [(0, 2), (1, 1)]),
            &[(1, 2), (3, 1)],
            Provenance::new(Origin::Gadget, Some(4)),
        )
        .unwrap();
        inst.add_constraint(LinsatExpr::new(p, [(0, 2), (1, 1)]), &[(0, 1)]).unwrap();
        let f = ProblemFile::linsat(inst, Metadata::default());
        let text = f.to_json();
        let back = ProblemFile::from_json(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn keys_are_sorted() {
        let text = ProblemFile::constraint(sample_model(), Metadata::default()).to_json();
        let fv = text.find("\"format_version\"").unwrap();
        let kind = text.find("\"kind\"").unwrap();
        let model = text.find("\"model\"").unwrap();
        assert!(fv < kind && kind < model);
    }

    #[test]
    fn malformed_relation_names_the_field() {
        let text = r#"{"format_version": 1, "kind": "constraint", "model": {
            "variables": [{"name": "x", "lower": 0, "upper": 1}],
            "constraints": [{"expr": {"terms": [{"coefficient": 1, "powers": {"x": 1}}]}, "relation": "ABOUT"}]}}"#;
        match ProblemFile::from_json(text).unwrap_err() {
            IoError::Syntax { path, line, .. } => {
                assert_eq!(path, "model.constraints[0].relation");
                assert_eq!(line, 3);
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let unknown = r#"{"format_version": 1, "kind": "constraint", "model": {
            "variables": [{"name": "x", "lower": 0, "upper": 1}],
            "objectives": [{"expr": {"terms": [{"coefficient": 1, "powers": {"z": 1}}]}, "sense": "maximize"}]}}"#;
        assert!(
            matches!(ProblemFile::from_json(unknown), Err(IoError::Schema { field, .. }) if field == "model.objectives[0].expr.terms[0].powers")
        );
        let bounds = r#"{"format_version": 1, "kind": "constraint", "model": {"variables": [{"name": "x", "lower": 2, "upper": 1}]}}"#;
        assert!(
            matches!(ProblemFile::from_json(bounds), Err(IoError::Schema { field, .. }) if field == "model.variables[0]")
        );
        let mismatch = r#"{"format_version": 1, "kind": "linsat", "model": {"variables": []}}"#;
        assert!(matches!(ProblemFile::from_json(mismatch), Err(IoError::Schema { .. })));
        let version = r#"{"format_version": 7, "kind": "linsat", "instance": {"field_order": 2, "variables": []}}"#;
        assert!(matches!(ProblemFile::from_json(version), Err(IoError::Version(7))));
        let prime = r#"{"format_version": 1, "kind": "linsat", "instance": {"field_order": 4, "variables": []}}"#;
        assert!(
            matches!(ProblemFile::from_json(prime), Err(IoError::Syntax { path, .. }) if path == "instance.field_order")
        );
        let extra =
            r#"{"format_version": 1, "kind": "linsat", "bogus": 1, "instance": {"field_order": 2, "variables": []}}"#;
        assert!(ProblemFile::from_json(extra).is_err());
    }

    #[test]
    fn reports_parse_back() {
        let r = Report::new(
            ReportKind::Solve,
            Metadata::default(),
            serde_json::json!({"assignment": [1], "weight": 3, "solver": "x"}),
        );
        let parsed = parse_report(&r.to_json()).unwrap();
        assert_eq!(parsed.kind, ReportKind::Solve);
        let missing = Report::new(ReportKind::Solve, Metadata::default(), serde_json::json!({"weight": 3}));
        assert!(parse_report(&missing.to_json()).is_err());
    }

    proptest! {
        #[test]
        fn random_models_round_trip(
            bounds in prop::collection::vec((-3i64..3, 0i64..3), 1..4),
            terms in prop::collection::vec((prop::collection::vec((0usize..4, 1u32..3), 1..3), -5i128..6, 1i128..4), 0..5),
            rel in 0usize..6,
        ) {
            let mut m = ConstraintModel::new();
            let vars: Vec<_> = bounds.iter().enumerate().map(|(i, &(l, w))| m.new_var(format!("v{i}"), l, l + w).unwrap()).collect();
            let n = vars.len();
            let binary = m.binary_vars();
            let expr = IntExpr::from_terms(
                terms.iter().map(|(pw, c, d)| (IntMonomial::new(pw.iter().map(|&(v, k)| (v % n, k)), &binary), Rational::new(*c, *d))),
                Rational::new(1, 2),
                binary.clone(),
            );
            let relations = [Relation::Equals, Relation::DoesNotEqual, Relation::LessThan, Relation::LessEqual, Relation::GreaterThan, Relation::GreaterEqual];
            m.add_constraint(IntConstraint::new(expr.clone(), relations[rel], None)).unwrap();
            m.add_objective(expr, rel % 2 == 0).unwrap();
            let f = ProblemFile::constraint(m, Metadata::default());
            let text = f.to_json();
            let back = ProblemFile::from_json(&text).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(back.to_json(), text);
        }
    }
}
