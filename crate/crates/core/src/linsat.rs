//! Low-level Set-Max-LINSAT instances over a prime field.
//!
//! Each constraint is `b . x in F` where the right-hand side maps every member
//! value of `F` to a positive integer weight. Constraints are kept in a
//! canonical form whose lowest-index coefficient is 1, and constraints that
//! agree after scaling are merged on insertion by adding their weights.

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{Exec, DEFAULT_CHUNK};
use crate::gf::{FieldMatrix, FieldOrder};
use crate::guard::{self, GuardExceeded};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinsatError {
    #[error("constraint has an all-zero left-hand side")]
    ZeroExpression,
    #[error("right-hand side is empty")]
    EmptyRhs,
    #[error("weights must be positive integers")]
    NonPositiveWeight,
    #[error("constraint covers every field element with the same weight and is constant")]
    TrivialConstraint,
    #[error("variable {0} does not exist")]
    UnknownVariable(usize),
    #[error("constraint index {0} out of range")]
    InvalidIndex(usize),
    #[error("assignment has {found} values, instance has {expected} variables")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Guard(#[from] GuardExceeded),
}

/// Default cap on `q^n` for exhaustive assignment enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinsatVar {
    pub id: usize,
    pub name: String,
}

/// Sparse linear form: sorted `(variable, nonzero coefficient)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LinsatExpr {
    terms: Vec<(usize, u64)>,
}

impl LinsatExpr {
    /// Reduces coefficients mod p, merges repeated variables, drops zeros.
    pub fn new(order: FieldOrder, pairs: impl IntoIterator<Item = (usize, i128)>) -> Self {
        let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
        for (v, c) in pairs {
            let e = acc.entry(v).or_default();
            *e = order.add(*e, order.reduce(c));
        }
        Self { terms: acc.into_iter().filter(|&(_, c)| c != 0).collect() }
    }

    pub fn var(v: usize) -> Self {
        Self { terms: vec![(v, 1)] }
    }

    pub fn terms(&self) -> &[(usize, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, v: usize) -> u64 {
        self.terms.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, c)| c)
    }

    pub fn leading(&self) -> Option<u64> {
        self.terms.first().map(|&(_, c)| c)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.last().map(|&(v, _)| v)
    }

    pub fn scale(&self, order: FieldOrder, k: u64) -> Self {
        Self { terms: self.terms.iter().map(|&(v, c)| (v, order.mul(c, k))).filter(|&(_, c)| c != 0).collect() }
    }

    pub fn add(&self, order: FieldOrder, other: &Self) -> Self {
        Self::new(order, self.terms.iter().chain(&other.terms).map(|&(v, c)| (v, c as i128)))
    }

    #[inline]
    pub fn dot(&self, order: FieldOrder, x: &[u64]) -> u64 {
        self.terms.iter().fold(0, |acc, &(v, c)| order.add(acc, order.mul(c, x[v])))
    }

    /// Dense coefficient row of length `n`.
    pub fn dense(&self, n: usize) -> Vec<u64> {
        let mut row = vec![0; n];
        for &(v, c) in &self.terms {
            row[v] = c;
        }
        row
    }
}

/// Member values of a constraint with their integer weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct LinsatRhs {
    weights: BTreeMap<u64, u64>,
}

impl LinsatRhs {
    pub fn new(members: impl IntoIterator<Item = (u64, u64)>) -> Self {
        let mut weights = BTreeMap::new();
        for (v, w) in members {
            *weights.entry(v).or_default() += w;
        }
        Self { weights }
    }

    pub fn weights(&self) -> &BTreeMap<u64, u64> {
        &self.weights
    }

    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.weights.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight_of(&self, v: u64) -> u64 {
        self.weights.get(&v).copied().unwrap_or(0)
    }

    pub fn max_weight(&self) -> u64 {
        self.weights.values().copied().max().unwrap_or(0)
    }

    pub fn is_uniform(&self) -> bool {
        let mut it = self.weights.values();
        match it.next() {
            Some(first) => it.all(|w| w == first),
            None => true,
        }
    }

    fn covers_field_uniformly(&self, order: FieldOrder) -> bool {
        self.weights.len() as u64 == order.get() && self.is_uniform()
    }

    fn scaled(&self, order: FieldOrder, k: u64) -> Self {
        Self::new(self.weights.iter().map(|(&v, &w)| (order.mul(v, k), w)))
    }

    fn merge(&mut self, other: &Self) {
        for (&v, &w) in &other.weights {
            *self.weights.entry(v).or_default() += w;
        }
    }
}

/// Where a constraint came from; threaded through the transforms so the
/// dependency classifier can recognise gadget-internal dependencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    #[default]
    User,
    /// Weighted parity constraint produced from an objective.
    Objective,
    /// Unary set constraint produced from a linear objective term.
    LinearObjective,
    /// Parity constraint enforcing an auxiliary product variable.
    AuxDefinition,
    /// Variable range restriction.
    Range,
    /// Constraint emitted by a gadget instantiation.
    Gadget,
    /// `y = 0` pin added by the distance gadget.
    DistancePin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub origin: Origin,
    /// Identifier shared by all constraints emitted by one gadget, objective
    /// or auxiliary definition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<usize>,
}

impl Provenance {
    pub fn new(origin: Origin, group: Option<usize>) -> Self {
        Self { origin, group }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinsatConstraint {
    pub expr: LinsatExpr,
    pub rhs: LinsatRhs,
    pub provenance: Provenance,
}

impl LinsatConstraint {
    #[inline]
    pub fn weight_at(&self, order: FieldOrder, x: &[u64]) -> u64 {
        self.rhs.weight_of(self.expr.dot(order, x))
    }
}

/// How constraints with equal left-hand sides are combined on insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    /// Merge constraints whose left-hand sides agree up to a nonzero factor.
    #[default]
    Scaled,
    /// Merge only literally identical left-hand sides.
    Literal,
    /// Keep every inserted constraint (duplicated rows allowed).
    Off,
}

/// Weighted Set-Max-LINSAT instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinsatInstance {
    order: FieldOrder,
    variables: Vec<LinsatVar>,
    constraints: Vec<LinsatConstraint>,
    merge: MergeMode,
    index: HashMap<LinsatExpr, usize>,
}

/// Record of how [`LinsatInstance::to_unweighted`] duplicated constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DuplicationMap {
    /// Common factor divided out of every weight.
    pub weight_gcd: u64,
    /// Index of the weighted constraint behind each unweighted row.
    pub source: Vec<usize>,
}

impl LinsatInstance {
    pub fn new(order: FieldOrder) -> Self {
        Self::with_merge_mode(order, MergeMode::Scaled)
    }

    pub fn with_merge_mode(order: FieldOrder, merge: MergeMode) -> Self {
        Self { order, variables: Vec::new(), constraints: Vec::new(), merge, index: HashMap::new() }
    }

    pub fn order(&self) -> FieldOrder {
        self.order
    }

    pub fn merge_mode(&self) -> MergeMode {
        self.merge
    }

    pub fn variables(&self) -> &[LinsatVar] {
        &self.variables
    }

    pub fn constraints(&self) -> &[LinsatConstraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn new_var(&mut self, name: impl Into<String>) -> usize {
        let id = self.variables.len();
        self.variables.push(LinsatVar { id, name: name.into() });
        id
    }

    /// Canonical form: leading coefficient scaled to 1 and member values
    /// scaled by the same factor.
    pub fn canonicalize(order: FieldOrder, expr: &LinsatExpr, rhs: &LinsatRhs) -> (LinsatExpr, LinsatRhs) {
        match expr.leading() {
            Some(c) if c != 1 => {
                let inv = order.inv(c).expect("leading coefficient is nonzero");
                (expr.scale(order, inv), rhs.scaled(order, inv))
            }
            _ => (expr.clone(), rhs.clone()),
        }
    }

    pub fn add_constraint(&mut self, expr: LinsatExpr, members: &[(u64, u64)]) -> Result<usize, LinsatError> {
        self.add_constraint_with(expr, members, Provenance::default())
    }

    /// Inserts `expr in members`, merging with an existing constraint when
    /// the merge mode allows it. Returns the index of the (merged) constraint.
    pub fn add_constraint_with(
        &mut self,
        expr: LinsatExpr,
        members: &[(u64, u64)],
        provenance: Provenance,
    ) -> Result<usize, LinsatError> {
        let p = self.order;
        if let Some(v) = expr.max_var().filter(|&v| v >= self.variables.len()) {
            return Err(LinsatError::UnknownVariable(v));
        }
        let expr = LinsatExpr::new(p, expr.terms.iter().map(|&(v, c)| (v, c as i128)));
        if expr.is_zero() {
            return Err(LinsatError::ZeroExpression);
        }
        if members.is_empty() {
            return Err(LinsatError::EmptyRhs);
        }
        if members.iter().any(|&(_, w)| w == 0) {
            return Err(LinsatError::NonPositiveWeight);
        }
        let rhs = LinsatRhs::new(members.iter().map(|&(v, w)| (v % p.get(), w)));
        let (expr, rhs) = match self.merge {
            MergeMode::Literal => (expr, rhs),
            _ => Self::canonicalize(p, &expr, &rhs),
        };
        if self.merge != MergeMode::Off {
            if let Some(&i) = self.index.get(&expr) {
                self.constraints[i].rhs.merge(&rhs);
                return Ok(i);
            }
        }
        // A constant constraint is only refused when it would stand alone.
        if rhs.covers_field_uniformly(p) {
            return Err(LinsatError::TrivialConstraint);
        }
        if self.merge != MergeMode::Off {
            self.index.insert(expr.clone(), self.constraints.len());
        }
        self.constraints.push(LinsatConstraint { expr, rhs, provenance });
        Ok(self.constraints.len() - 1)
    }

    /// Replaces the left-hand side of constraint `i`, keeping its rhs.
    /// The new expression is used as given (callers keep it canonical).
    pub(crate) fn replace_expr(&mut self, i: usize, expr: LinsatExpr) {
        let old = std::mem::replace(&mut self.constraints[i].expr, expr.clone());
        if self.index.get(&old) == Some(&i) {
            self.index.remove(&old);
            self.index.insert(expr, i);
        }
    }

    pub fn evaluate(&self, x: &[u64]) -> Result<u64, LinsatError> {
        if x.len() != self.variables.len() {
            return Err(LinsatError::DimensionMismatch { expected: self.variables.len(), found: x.len() });
        }
        Ok(self.evaluate_unchecked(x))
    }

    #[inline]
    pub fn evaluate_unchecked(&self, x: &[u64]) -> u64 {
        self.constraints.iter().map(|c| c.weight_at(self.order, x)).sum()
    }

    /// Sum over constraints of the largest member weight; an upper bound on
    /// the objective.
    pub fn total_weight(&self) -> u64 {
        self.constraints.iter().map(|c| c.rhs.max_weight()).sum()
    }

    pub fn is_unweighted(&self) -> bool {
        self.constraints.iter().all(|c| c.rhs.weights.values().all(|&w| w == 1))
    }

    /// True when every right-hand side has the same number of members.
    pub fn has_uniform_set_sizes(&self) -> bool {
        let mut sizes = self.constraints.iter().map(|c| c.rhs.len());
        match sizes.next() {
            Some(s) => sizes.all(|t| t == s),
            None => true,
        }
    }

    /// GCD of all weights (0 for an empty instance).
    pub fn weight_gcd(&self) -> u64 {
        self.constraints.iter().flat_map(|c| c.rhs.weights.values()).fold(0, |g, &w| num_integer::gcd(g, w))
    }

    /// Constraint matrix `B` (`m x n`).
    pub fn matrix(&self) -> FieldMatrix {
        let n = self.variables.len();
        let data = self.constraints.iter().flat_map(|c| c.expr.dense(n)).collect();
        FieldMatrix::from_residues(self.order, self.constraints.len(), n, data).expect("dimensions agree")
    }

    /// Unweighted view by duplication. Weights are first divided by their
    /// common GCD; members of one constraint sharing a residual weight `w`
    /// become `w` copies of one set constraint.
    pub fn to_unweighted(&self) -> (LinsatInstance, DuplicationMap) {
        let g = self.weight_gcd().max(1);
        let mut out = LinsatInstance::with_merge_mode(self.order, MergeMode::Off);
        out.variables = self.variables.clone();
        let mut source = Vec::new();
        for (i, c) in self.constraints.iter().enumerate() {
            let mut by_weight: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
            for (&v, &w) in &c.rhs.weights {
                by_weight.entry(w / g).or_default().push(v);
            }
            for (w, members) in by_weight {
                let set: Vec<(u64, u64)> = members.iter().map(|&v| (v, 1)).collect();
                for _ in 0..w {
                    out.constraints.push(LinsatConstraint {
                        expr: c.expr.clone(),
                        rhs: LinsatRhs::new(set.iter().copied()),
                        provenance: c.provenance,
                    });
                    source.push(i);
                }
            }
        }
        (out, DuplicationMap { weight_gcd: g, source })
    }

    /// Number of assignments `q^n`, checked against `limit`.
    pub fn assignment_count(&self, limit: u128) -> Result<usize, GuardExceeded> {
        guard::check("assignment enumeration", guard::checked_pow(self.order.get(), self.num_vars()), limit)
            .map(|s| s as usize)
    }

    /// Decodes an assignment index; variable 0 is the most significant digit
    /// so index order is lexicographic order.
    pub fn assignment_at(&self, mut index: usize) -> Vec<u64> {
        let q = self.order.get() as usize;
        let mut x = vec![0; self.num_vars()];
        for slot in x.iter_mut().rev() {
            *slot = (index % q) as u64;
            index /= q;
        }
        x
    }

    /// Objective value of every assignment, in lexicographic order.
    pub fn objective_table(&self, exec: Exec, limit: u128) -> Result<Vec<u64>, LinsatError> {
        let total = self.assignment_count(limit)?;
        let evaluator = Evaluator::new(self);
        let parts = exec.map_chunks(total, DEFAULT_CHUNK, |r| evaluator.range(self, r));
        Ok(parts.concat())
    }
}

/// Dense lookup tables for fast repeated evaluation.
struct Evaluator {
    tables: Vec<Vec<u64>>,
}

impl Evaluator {
    fn new(inst: &LinsatInstance) -> Self {
        let q = inst.order.size();
        let tables = inst
            .constraints
            .iter()
            .map(|c| {
                let mut t = vec![0; q];
                for (&v, &w) in &c.rhs.weights {
                    t[v as usize] = w;
                }
                t
            })
            .collect();
        Self { tables }
    }

    fn range(&self, inst: &LinsatInstance, r: Range<usize>) -> Vec<u64> {
        let p = inst.order;
        let q = p.get();
        let mut x = inst.assignment_at(r.start);
        let mut out = Vec::with_capacity(r.len());
        for _ in r {
            let f = inst.constraints.iter().zip(&self.tables).map(|(c, t)| t[c.expr.dot(p, &x) as usize]).sum();
            out.push(f);
            for slot in x.iter_mut().rev() {
                *slot += 1;
                if *slot < q {
                    break;
                }
                *slot = 0;
            }
        }
        out
    }
}
