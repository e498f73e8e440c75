//! Linear integer constraints to set-membership constraints over GF(p).

use std::collections::BTreeMap;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::poly::{AuxVar, LinearModel};
use super::TransformError;
use crate::gf::{is_prime, FieldOrder};
use crate::io::rational;
use crate::linsat::{LinsatExpr, LinsatInstance, MergeMode, Origin, Provenance};
use crate::model::{IntConstraint, IntExpr, Rational, Relation, VarId};

/// Largest prime the planner will return.
pub const MAX_PRIME: u64 = 1 << 31;

/// Weighted value sets reproducing a linear objective term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearObjectiveEncoding {
    /// `(values of x, weight)`, highest bit first.
    pub sets: Vec<(Vec<i64>, Rational)>,
    /// `a x = sum of satisfied weights + offset` on `[lower, upper]`.
    pub offset: Rational,
}

/// Encodes `a x` for `x` in `[lower, upper]` by the binary digits of
/// `x - lower` (or of `upper - x` when `a < 0`), so every weight is positive.
pub fn lower_linear_objective(a: Rational, lower: i64, upper: i64) -> LinearObjectiveEncoding {
    let span = (upper - lower) as u64;
    if a.is_zero() || span == 0 {
        return LinearObjectiveEncoding { sets: Vec::new(), offset: a * Rational::from_integer(lower as i128) };
    }
    let bits = u64::BITS - span.leading_zeros();
    let negative = a.is_negative();
    let sets = (0..bits)
        .rev()
        .map(|k| {
            let values = (lower..=upper)
                .filter(|&x| {
                    let digit = if negative { upper - x } else { x - lower };
                    (digit as u64) >> k & 1 == 1
                })
                .collect();
            (values, a.abs() * Rational::from_integer(1i128 << k))
        })
        .collect();
    let base = if negative { upper } else { lower };
    LinearObjectiveEncoding { sets, offset: a * Rational::from_integer(base as i128) }
}

/// Condition a constraint places on the prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimeBound {
    /// `p > bound`.
    Above { bound: i128 },
    /// `p = modulus` or `p > bound`.
    ModulusOrAbove { modulus: u64, bound: i128 },
}

impl PrimeBound {
    pub fn admits(self, p: u64) -> bool {
        match self {
            PrimeBound::Above { bound } => (p as i128) > bound,
            PrimeBound::ModulusOrAbove { modulus, bound } => p == modulus || (p as i128) > bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintPlan {
    /// Interval of the integerized expression over the variable box.
    pub lower: i128,
    pub upper: i128,
    /// Factor the expression was multiplied by to clear denominators.
    pub scale: i128,
    pub requirement: PrimeBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PrimePlan {
    pub p: FieldOrder,
    pub constraints: Vec<ConstraintPlan>,
    pub ranges: Vec<(i64, i64)>,
}

fn integerized(c: &IntConstraint) -> Result<(IntExpr, i128), TransformError> {
    if c.modulus.is_some() {
        Ok((c.expr.clone(), 1))
    } else {
        let (e, k) = c.expr.integerize();
        Ok((e, k))
    }
}

fn as_int(r: Rational) -> Result<i128, TransformError> {
    if r.is_integer() {
        Ok(r.to_integer())
    } else {
        Err(TransformError::NotLinear("non-integer coefficient after integerization".into()))
    }
}

/// Integer coefficients and constant of a linear expression.
fn linear_parts(e: &IntExpr, what: &str) -> Result<(BTreeMap<VarId, i128>, i128), TransformError> {
    let coeffs = e.linear_coefficients().ok_or_else(|| TransformError::NotLinear(what.to_string()))?;
    let coeffs = coeffs.into_iter().map(|(v, c)| Ok((v, as_int(c)?))).collect::<Result<_, TransformError>>()?;
    Ok((coeffs, as_int(e.constant_term())?))
}

fn interval(coeffs: &BTreeMap<VarId, i128>, constant: i128, ranges: &[(i64, i64)]) -> (i128, i128) {
    coeffs.iter().fold((constant, constant), |(lo, hi), (&v, &b)| {
        let (l, u) = (ranges[v].0 as i128 * b, ranges[v].1 as i128 * b);
        (lo + l.min(u), hi + l.max(u))
    })
}

fn requirement(c: &IntConstraint, lower: i128, upper: i128) -> PrimeBound {
    match c.modulus {
        Some(m) if is_prime(m) => PrimeBound::ModulusOrAbove { modulus: m, bound: upper - lower },
        Some(_) => PrimeBound::Above { bound: upper - lower },
        None if c.relation.is_ordering() => PrimeBound::Above { bound: upper - lower },
        None => PrimeBound::Above { bound: lower.abs().max(upper.abs()) },
    }
}

/// Smallest prime admitting every constraint and every variable range.
pub fn plan_prime(model: &crate::model::ConstraintModel) -> Result<PrimePlan, TransformError> {
    let ranges: Vec<(i64, i64)> = model.variables.iter().map(|v| (v.lower, v.upper)).collect();
    let mut constraints = Vec::with_capacity(model.constraints.len());
    for (i, c) in model.constraints.iter().enumerate() {
        let (e, scale) = integerized(c)?;
        let (coeffs, constant) = linear_parts(&e, &format!("constraint {i}"))?;
        let (lower, upper) = interval(&coeffs, constant, &ranges);
        constraints.push(ConstraintPlan { lower, upper, scale, requirement: requirement(c, lower, upper) });
    }
    let mut bounds: Vec<PrimeBound> = constraints.iter().map(|c| c.requirement).collect();
    bounds.extend(ranges.iter().map(|&(l, u)| PrimeBound::Above { bound: (u - l) as i128 }));
    let floor = bounds
        .iter()
        .filter_map(|b| match b {
            PrimeBound::Above { bound } => Some(*bound),
            PrimeBound::ModulusOrAbove { .. } => None,
        })
        .max()
        .unwrap_or(1)
        .max(1);
    if floor >= MAX_PRIME as i128 {
        return Err(TransformError::PrimeTooLarge(floor));
    }
    let mut p = crate::gf::next_prime_above(floor as u64);
    while !bounds.iter().all(|b| b.admits(p)) {
        p = crate::gf::next_prime_above(p);
        if p >= MAX_PRIME {
            return Err(TransformError::PrimeTooLarge(p as i128));
        }
    }
    Ok(PrimePlan { p: FieldOrder::new(p).expect("planner yields primes"), constraints, ranges })
}

/// Source variable (or aux) to field variable, storing `x - shift`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VarMapping {
    pub source: VarId,
    pub name: String,
    pub target: usize,
    pub shift: i64,
    pub lower: i64,
    pub upper: i64,
}

/// Affine relation between a source model and its weighted image.
///
/// For every in-bounds source assignment `x`, extended with consistent aux
/// values and encoded by the variable map, the weighted instance satisfies
/// `scale * value(x) + offset` in weight. The optimum of the instance is
/// attained on such encodings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransformCertificate {
    pub field_order: u64,
    #[serde(with = "rational")]
    pub scale: Rational,
    #[serde(with = "rational")]
    pub offset: Rational,
    /// `value(x) = sum of satisfied rational weights + lowering_offset`.
    #[serde(with = "rational")]
    pub lowering_offset: Rational,
    pub variables: Vec<VarMapping>,
    pub source_vars: usize,
    pub aux: Vec<AuxVar>,
    /// Penalty factor on inconsistent aux products.
    #[serde(with = "rational")]
    pub aux_penalty: Rational,
    /// Weight of each range constraint.
    pub penalty_weight: u64,
    pub range_constraints: usize,
}

impl TransformCertificate {
    /// Identity certificate for an empty model.
    pub fn empty(p: FieldOrder) -> Self {
        Self {
            field_order: p.get(),
            scale: Rational::one(),
            offset: Rational::zero(),
            lowering_offset: Rational::zero(),
            variables: Vec::new(),
            source_vars: 0,
            aux: Vec::new(),
            aux_penalty: Rational::zero(),
            penalty_weight: 0,
            range_constraints: 0,
        }
    }

    pub fn target_value(&self, source_value: Rational) -> Rational {
        self.scale * source_value + self.offset
    }

    pub fn source_value(&self, target_value: Rational) -> Rational {
        (target_value - self.offset) / self.scale
    }

    /// Field assignment of a source assignment with consistent aux values.
    pub fn encode(&self, x: &[i64]) -> Vec<u64> {
        let mut full = x.to_vec();
        full.resize(self.variables.len(), 0);
        for a in &self.aux {
            full[a.var] = full[a.left] * full[a.right];
        }
        let p = self.field_order as i128;
        self.variables.iter().map(|m| (full[m.source] - m.shift) as i128).map(|v| v.rem_euclid(p) as u64).collect()
    }

    /// Source assignment of a field assignment, if every source variable is
    /// in range.
    pub fn decode(&self, y: &[u64]) -> Option<Vec<i64>> {
        self.variables[..self.source_vars]
            .iter()
            .map(|m| {
                let v = m.shift.checked_add(i64::try_from(y[m.target]).ok()?)?;
                (v <= m.upper).then_some(v)
            })
            .collect()
    }
}

/// Why a constraint produced no field constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// Holds for every in-range assignment; weight moved to the offset.
    AlwaysTrue,
    /// Fails for every in-range assignment.
    Unsatisfiable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DroppedConstraint {
    pub constraint: usize,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularLowering {
    pub instance: LinsatInstance,
    pub certificate: TransformCertificate,
    pub dropped: Vec<DroppedConstraint>,
    /// Field constraints inserted for objective bits.
    pub objective_constraints: usize,
    /// Modular constraints re-encoded over a different prime.
    pub reencoded: usize,
}

struct Item {
    expr: LinsatExpr,
    members: Vec<u64>,
    weight: Rational,
    provenance: Provenance,
}

enum Encoded {
    Set(LinsatExpr, Vec<u64>),
    Constant(bool),
}

fn encode_constraint(
    p: FieldOrder,
    c: &IntConstraint,
    coeffs: &BTreeMap<VarId, i128>,
    constant: i128,
    ranges: &[(i64, i64)],
) -> Encoded {
    let (lower, upper) = interval(coeffs, constant, ranges);
    // Value of the expression at the shifted origin y = 0.
    let c0 = coeffs.iter().fold(constant, |acc, (&v, &b)| acc + b * ranges[v].0 as i128);
    let expr = LinsatExpr::new(p, coeffs.iter().map(|(&v, &b)| (v, b)));
    let residue = |t: i128| p.reduce(t - c0);
    let q = p.get();

    let direct = c.modulus == Some(q);
    let allowed: Vec<i128> = if direct {
        Vec::new()
    } else {
        let window = lower..=upper;
        match (c.modulus, c.relation) {
            (Some(m), Relation::Equals) => window.filter(|t| t.rem_euclid(m as i128) == 0).collect(),
            (Some(m), _) => window.filter(|t| t.rem_euclid(m as i128) != 0).collect(),
            (None, Relation::Equals) => window.filter(|&t| t == 0).collect(),
            (None, Relation::DoesNotEqual) => window.filter(|&t| t != 0).collect(),
            (None, Relation::GreaterEqual) => (lower.max(0)..=upper).collect(),
            (None, Relation::GreaterThan) => (lower.max(1)..=upper).collect(),
            (None, Relation::LessEqual) => (lower..=upper.min(0)).collect(),
            (None, Relation::LessThan) => (lower..=upper.min(-1)).collect(),
        }
    };
    if !direct {
        if allowed.is_empty() {
            return Encoded::Constant(false);
        }
        if allowed.len() as i128 == upper - lower + 1 {
            return Encoded::Constant(true);
        }
    }
    let members: Vec<u64> = match (direct, c.relation) {
        (true, Relation::Equals) | (false, Relation::Equals) if c.modulus.is_none() || direct => vec![residue(0)],
        (_, Relation::DoesNotEqual) if c.modulus.is_none() || direct => (0..q).filter(|&v| v != residue(0)).collect(),
        _ => allowed.iter().map(|&t| residue(t)).collect(),
    };
    if expr.is_zero() {
        return Encoded::Constant(members.contains(&0));
    }
    Encoded::Set(expr, members)
}

/// Encodes a linear model over `plan.p`.
pub fn lower_to_modular(lm: &LinearModel, plan: &PrimePlan) -> Result<ModularLowering, TransformError> {
    let p = plan.p;
    let model = &lm.model;
    let ranges: Vec<(i64, i64)> = model.variables.iter().map(|v| (v.lower, v.upper)).collect();
    let mut lowering_offset = lm.offset;
    let mut items = Vec::new();
    let mut dropped = Vec::new();
    let mut reencoded = 0;

    for (v, &(l, u)) in ranges.iter().enumerate() {
        if (u - l) as i128 >= p.get() as i128 {
            return Err(TransformError::PrimeTooSmall { p: p.get(), what: format!("range of variable {v}") });
        }
    }
    for (i, c) in model.constraints.iter().enumerate() {
        let (e, _) = integerized(c)?;
        let (coeffs, constant) = linear_parts(&e, &format!("constraint {i}"))?;
        let (lower, upper) = interval(&coeffs, constant, &ranges);
        if !requirement(c, lower, upper).admits(p.get()) {
            return Err(TransformError::PrimeTooSmall { p: p.get(), what: format!("constraint {i}") });
        }
        if c.modulus.is_some_and(|m| m != p.get()) {
            reencoded += 1;
        }
        match encode_constraint(p, c, &coeffs, constant, &ranges) {
            Encoded::Set(expr, members) => {
                items.push(Item { expr, members, weight: c.weight, provenance: lm.provenance[i] });
            }
            Encoded::Constant(true) => {
                lowering_offset += c.weight;
                dropped.push(DroppedConstraint { constraint: i, reason: DropReason::AlwaysTrue });
            }
            Encoded::Constant(false) => {
                dropped.push(DroppedConstraint { constraint: i, reason: DropReason::Unsatisfiable });
            }
        }
    }

    let mut objective_constraints = 0;
    for (g, o) in model.objectives.iter().enumerate() {
        let e = o.weighted_expr();
        let coeffs = e.linear_coefficients().ok_or_else(|| TransformError::NotLinear(format!("objective {g}")))?;
        lowering_offset += e.constant_term();
        for (v, a) in coeffs {
            let (l, u) = ranges[v];
            let enc = lower_linear_objective(a, l, u);
            lowering_offset += enc.offset;
            for (values, w) in enc.sets {
                let members = values.iter().map(|&x| p.reduce((x - l) as i128)).collect();
                items.push(Item {
                    expr: LinsatExpr::var(v),
                    members,
                    weight: w,
                    provenance: Provenance::new(Origin::LinearObjective, Some(g)),
                });
                objective_constraints += 1;
            }
        }
    }

    let scale = items.iter().fold(1i128, |acc, it| acc.lcm(it.weight.denom()));
    let int_weight = |w: Rational| -> Result<u64, TransformError> {
        (w * Rational::from_integer(scale)).to_integer().to_u64().ok_or(TransformError::WeightOverflow)
    };
    let mut weights = Vec::with_capacity(items.len());
    let mut total: u64 = 0;
    for it in &items {
        let w = int_weight(it.weight)?;
        total = total.checked_add(w).ok_or(TransformError::WeightOverflow)?;
        weights.push(w);
    }
    let penalty_weight = total.checked_add(1).ok_or(TransformError::WeightOverflow)?;

    let mut inst = LinsatInstance::with_merge_mode(p, MergeMode::Scaled);
    for v in &model.variables {
        inst.new_var(v.name.clone());
    }
    for (it, &w) in items.iter().zip(&weights) {
        let members: Vec<(u64, u64)> = it.members.iter().map(|&m| (m, w)).collect();
        inst.add_constraint_with(it.expr.clone(), &members, it.provenance)?;
    }
    let mut range_constraints = 0;
    for (v, &(l, u)) in ranges.iter().enumerate() {
        let span = (u - l) as u64;
        if span + 1 < p.get() {
            let members: Vec<(u64, u64)> = (0..=span).map(|t| (t, penalty_weight)).collect();
            inst.add_constraint_with(LinsatExpr::var(v), &members, Provenance::new(Origin::Range, Some(v)))?;
            range_constraints += 1;
        }
    }

    let scale_r = Rational::from_integer(scale);
    let offset = Rational::from_integer(penalty_weight as i128 * range_constraints as i128) - scale_r * lowering_offset;
    let variables = model
        .variables
        .iter()
        .map(|v| VarMapping {
            source: v.id,
            name: v.name.clone(),
            target: v.id,
            shift: v.lower,
            lower: v.lower,
            upper: v.upper,
        })
        .collect();
    let certificate = TransformCertificate {
        field_order: p.get(),
        scale: scale_r,
        offset,
        lowering_offset,
        variables,
        source_vars: lm.source_vars,
        aux: lm.aux.clone(),
        aux_penalty: lm.penalty,
        penalty_weight,
        range_constraints,
    };
    Ok(ModularLowering { instance: inst, certificate, dropped, objective_constraints, reencoded })
}
