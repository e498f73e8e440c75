//! High-level constraint models: bounded integer variables, polynomial
//! expressions with rational coefficients, relational and modular
//! constraints, and weighted objectives.
//!
//! Boolean operators on binary variables are desugared into polynomials as
//! soon as they are applied (`a | b` becomes `a + b - ab`). A Boolean
//! expression added with [`ConstraintModel::add_boolean_constraint`] is kept
//! as a weighted objective term, since it has no relation attached.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, BitAnd, BitOr, BitXor, Mul, Neg, Not, Sub};

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used throughout the model and transform layers.
pub type Rational = Ratio<i128>;

pub type VarId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("variable `{name}` has empty range [{lower}, {upper}]")]
    InvalidBounds { name: String, lower: i64, upper: i64 },
    #[error("Boolean operator applied to non-binary variable {0}")]
    NonBinary(VarId),
    #[error("unknown variable id {0}")]
    UnknownVariable(VarId),
    #[error("variable ids must be dense and ordered: expected {expected}, found {found}")]
    VariableOrder { expected: VarId, found: VarId },
    #[error("value {value} of variable {var} is outside [{lower}, {upper}]")]
    OutOfBounds { var: VarId, value: i64, lower: i64, upper: i64 },
    #[error("assignment has {found} values, model has {expected} variables")]
    AssignmentLength { expected: usize, found: usize },
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),
    #[error("modular constraints support only EQUALS and DOES_NOT_EQUAL, got {0:?}")]
    ModularOrdering(Relation),
    #[error("modular constraint has a non-integer coefficient")]
    NonIntegerModular,
    #[error("weights must be positive, got {0}")]
    NonPositiveWeight(Rational),
    #[error("Boolean operator {0:?} needs at least one argument")]
    NoArguments(BoolOp),
}

/// Bounded integer decision variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntVar {
    pub id: VarId,
    pub name: String,
    pub lower: i64,
    pub upper: i64,
}

impl IntVar {
    pub fn is_binary(&self) -> bool {
        self.lower == 0 && self.upper == 1
    }

    /// Number of admissible values, `upper - lower + 1`.
    pub fn range_len(&self) -> u64 {
        (self.upper - self.lower) as u64 + 1
    }

    pub fn expr(&self) -> IntExpr {
        IntExpr::var(self)
    }
}

/// Product of variables with positive exponents, sorted by variable id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IntMonomial {
    vars: Vec<(VarId, u32)>,
}

impl IntMonomial {
    /// Builds a monomial from arbitrary `(var, exponent)` pairs; zero
    /// exponents are dropped, repeated ids merged, and binary variables
    /// clamped to exponent 1.
    pub fn new(pairs: impl IntoIterator<Item = (VarId, u32)>, binary: &BTreeSet<VarId>) -> Self {
        let mut map: BTreeMap<VarId, u32> = BTreeMap::new();
        for (v, e) in pairs {
            if e > 0 {
                *map.entry(v).or_default() += e;
            }
        }
        let vars = map.into_iter().map(|(v, e)| (v, if binary.contains(&v) { 1 } else { e })).collect();
        Self { vars }
    }

    pub fn single(v: VarId) -> Self {
        Self { vars: vec![(v, 1)] }
    }

    pub fn one() -> Self {
        Self::default()
    }

    pub fn vars(&self) -> &[(VarId, u32)] {
        &self.vars
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().map(|&(v, _)| v)
    }

    /// Total degree.
    pub fn degree(&self) -> u32 {
        self.vars.iter().map(|&(_, e)| e).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.vars.is_empty()
    }

    fn product(&self, other: &Self, binary: &BTreeSet<VarId>) -> Self {
        Self::new(self.vars.iter().chain(&other.vars).copied(), binary)
    }

    pub fn evaluate(&self, x: &[i64]) -> i128 {
        self.vars.iter().map(|&(v, e)| (x[v] as i128).pow(e)).product()
    }
}

impl fmt::Display for IntMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.vars.iter().map(|&(v, e)| if e == 1 { format!("x{v}") } else { format!("x{v}^{e}") }).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Polynomial over integer variables with rational coefficients.
///
/// `binary` records which variables are known to be 0/1 so that products can
/// be kept multilinear in them. It is metadata and does not take part in
/// equality.
#[derive(Debug, Clone, Default)]
pub struct IntExpr {
    terms: BTreeMap<IntMonomial, Rational>,
    constant: Rational,
    binary: BTreeSet<VarId>,
}

impl PartialEq for IntExpr {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.constant == other.constant
    }
}

impl Eq for IntExpr {}

impl IntExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<Rational>) -> Self {
        Self { constant: c.into(), ..Self::default() }
    }

    pub fn var(v: &IntVar) -> Self {
        let mut e = Self::default();
        if v.is_binary() {
            e.binary.insert(v.id);
        }
        e.terms.insert(IntMonomial::single(v.id), Rational::one());
        e
    }

    /// Builds an expression from raw terms. Monomials are re-normalized
    /// against `binary` and like terms merged.
    pub fn from_terms(
        terms: impl IntoIterator<Item = (IntMonomial, Rational)>,
        constant: Rational,
        binary: BTreeSet<VarId>,
    ) -> Self {
        let mut e = Self { terms: BTreeMap::new(), constant, binary };
        for (m, c) in terms {
            let m = IntMonomial::new(m.vars, &e.binary);
            e.add_term(m, c);
        }
        e
    }

    fn add_term(&mut self, m: IntMonomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        if m.is_constant() {
            self.constant += c;
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> &BTreeMap<IntMonomial, Rational> {
        &self.terms
    }

    pub fn constant_term(&self) -> Rational {
        self.constant
    }

    pub fn binary_vars(&self) -> &BTreeSet<VarId> {
        &self.binary
    }

    /// Marks additional variables as binary and re-normalizes.
    pub fn with_binary(self, binary: &BTreeSet<VarId>) -> Self {
        let mut all = self.binary.clone();
        all.extend(binary.iter().copied());
        Self::from_terms(self.terms, self.constant, all)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(IntMonomial::degree).max().unwrap_or(0)
    }

    pub fn is_linear(&self) -> bool {
        self.degree() <= 1
    }

    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms.keys().flat_map(|m| m.var_ids()).collect()
    }

    /// Linear coefficients, or `None` if some term has degree above one.
    pub fn linear_coefficients(&self) -> Option<BTreeMap<VarId, Rational>> {
        self.terms
            .iter()
            .map(|(m, &c)| match m.vars() {
                [(v, 1)] => Some((*v, c)),
                _ => None,
            })
            .collect()
    }

    pub fn scale(&self, k: Rational) -> Self {
        if k.is_zero() {
            return Self { binary: self.binary.clone(), ..Self::default() };
        }
        Self {
            terms: self.terms.iter().map(|(m, &c)| (m.clone(), c * k)).collect(),
            constant: self.constant * k,
            binary: self.binary.clone(),
        }
    }

    pub fn evaluate(&self, x: &[i64]) -> Rational {
        self.terms.iter().fold(self.constant, |acc, (m, &c)| acc + c * Rational::from_integer(m.evaluate(x)))
    }

    fn merged_binary(&self, other: &Self) -> BTreeSet<VarId> {
        self.binary.union(&other.binary).copied().collect()
    }

    fn combine(&self, other: &Self, sign: Rational) -> Self {
        let binary = self.merged_binary(other);
        let mut out = Self { terms: self.terms.clone(), constant: self.constant, binary };
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c * sign);
        }
        out.constant += other.constant * sign;
        out
    }

    fn product(&self, other: &Self) -> Self {
        let binary = self.merged_binary(other);
        let mut out = Self { binary, ..Self::default() };
        out.constant = self.constant * other.constant;
        for (m, &c) in &self.terms {
            out.add_term(m.clone(), c * other.constant);
        }
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c * self.constant);
        }
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                let m = ma.product(mb, &out.binary);
                out.add_term(m, ca * cb);
            }
        }
        out
    }

    /// Multiplies all coefficients by the least common multiple of their
    /// denominators, returning the scaled expression and the factor.
    pub fn integerize(&self) -> (Self, i128) {
        let lcm = self
            .terms
            .values()
            .chain(std::iter::once(&self.constant))
            .fold(1i128, |acc, c| num_integer::lcm(acc, *c.denom()));
        (self.scale(Rational::from_integer(lcm)), lcm)
    }

    fn check_binary(&self) -> Result<(), ModelError> {
        match self.variables().into_iter().find(|v| !self.binary.contains(v)) {
            Some(v) => Err(ModelError::NonBinary(v)),
            None => Ok(()),
        }
    }

    fn relation(self, rhs: impl Into<IntExpr>, relation: Relation, modulus: Option<u64>) -> IntConstraint {
        IntConstraint { expr: self - rhs.into(), relation, modulus, weight: Rational::one() }
    }

    pub fn eq(self, rhs: impl Into<IntExpr>) -> IntConstraint {
        self.relation(rhs, Relation::Equals, None)
    }

    pub fn ne(self, rhs: impl Into<IntExpr>) -> IntConstraint {
        self.relation(rhs, Relation::DoesNotEqual, None)
    }

    pub fn lt(self, rhs: impl Into<IntExpr>) -> IntConstraint {
        self.relation(rhs, Relation::LessThan, None)
    }

    pub fn le(self, rhs: impl Into<IntExpr>) -> IntConstraint {
        self.relation(rhs, Relation::LessEqual, None)
    }

    pub fn gt(self, rhs: impl Into<IntExpr>) -> IntConstraint {
        self.relation(rhs, Relation::GreaterThan, None)
    }

    pub fn ge(self, rhs: impl Into<IntExpr>) -> IntConstraint {
        self.relation(rhs, Relation::GreaterEqual, None)
    }

    pub fn eq_mod(self, rhs: impl Into<IntExpr>, modulus: u64) -> IntConstraint {
        self.relation(rhs, Relation::Equals, Some(modulus))
    }

    pub fn ne_mod(self, rhs: impl Into<IntExpr>, modulus: u64) -> IntConstraint {
        self.relation(rhs, Relation::DoesNotEqual, Some(modulus))
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("{c}*{m}")).collect();
        if !self.constant.is_zero() || parts.is_empty() {
            parts.push(self.constant.to_string());
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl From<i64> for IntExpr {
    fn from(c: i64) -> Self {
        Self::constant(Rational::from_integer(c as i128))
    }
}

impl From<i32> for IntExpr {
    fn from(c: i32) -> Self {
        Self::from(c as i64)
    }
}

impl From<Rational> for IntExpr {
    fn from(c: Rational) -> Self {
        Self::constant(c)
    }
}

impl From<&IntVar> for IntExpr {
    fn from(v: &IntVar) -> Self {
        Self::var(v)
    }
}

impl From<IntVar> for IntExpr {
    fn from(v: IntVar) -> Self {
        Self::var(&v)
    }
}

impl From<&IntExpr> for IntExpr {
    fn from(e: &IntExpr) -> Self {
        e.clone()
    }
}

impl<T: Into<IntExpr>> Add<T> for IntExpr {
    type Output = IntExpr;
    fn add(self, rhs: T) -> IntExpr {
        expr_arith(&self, &rhs.into(), ArithOp::Add)
    }
}

impl<T: Into<IntExpr>> Sub<T> for IntExpr {
    type Output = IntExpr;
    fn sub(self, rhs: T) -> IntExpr {
        expr_arith(&self, &rhs.into(), ArithOp::Sub)
    }
}

impl<T: Into<IntExpr>> Mul<T> for IntExpr {
    type Output = IntExpr;
    fn mul(self, rhs: T) -> IntExpr {
        expr_arith(&self, &rhs.into(), ArithOp::Mul)
    }
}

impl<T: Into<IntExpr>> Add<T> for &IntVar {
    type Output = IntExpr;
    fn add(self, rhs: T) -> IntExpr {
        self.expr() + rhs
    }
}

impl<T: Into<IntExpr>> Sub<T> for &IntVar {
    type Output = IntExpr;
    fn sub(self, rhs: T) -> IntExpr {
        self.expr() - rhs
    }
}

impl<T: Into<IntExpr>> Mul<T> for &IntVar {
    type Output = IntExpr;
    fn mul(self, rhs: T) -> IntExpr {
        self.expr() * rhs
    }
}

impl Neg for IntExpr {
    type Output = IntExpr;
    fn neg(self) -> IntExpr {
        self.scale(-Rational::one())
    }
}

impl Add<IntExpr> for i64 {
    type Output = IntExpr;
    fn add(self, rhs: IntExpr) -> IntExpr {
        IntExpr::from(self) + rhs
    }
}

impl Sub<IntExpr> for i64 {
    type Output = IntExpr;
    fn sub(self, rhs: IntExpr) -> IntExpr {
        IntExpr::from(self) - rhs
    }
}

impl Mul<IntExpr> for i64 {
    type Output = IntExpr;
    fn mul(self, rhs: IntExpr) -> IntExpr {
        rhs.scale(Rational::from_integer(self as i128))
    }
}

impl Mul<&IntVar> for i64 {
    type Output = IntExpr;
    fn mul(self, rhs: &IntVar) -> IntExpr {
        self * rhs.expr()
    }
}

impl Sum for IntExpr {
    fn sum<I: Iterator<Item = IntExpr>>(iter: I) -> Self {
        iter.fold(IntExpr::zero(), |a, b| a + b)
    }
}

// Boolean operators panic on non-binary operands; use `bool_desugar` for a
// fallible variant.
impl<T: Into<IntExpr>> BitAnd<T> for IntExpr {
    type Output = IntExpr;
    fn bitand(self, rhs: T) -> IntExpr {
        bool_desugar(BoolOp::And, &[self, rhs.into()]).expect("`&` needs binary operands")
    }
}

impl<T: Into<IntExpr>> BitOr<T> for IntExpr {
    type Output = IntExpr;
    fn bitor(self, rhs: T) -> IntExpr {
        bool_desugar(BoolOp::Or, &[self, rhs.into()]).expect("`|` needs binary operands")
    }
}

impl<T: Into<IntExpr>> BitXor<T> for IntExpr {
    type Output = IntExpr;
    fn bitxor(self, rhs: T) -> IntExpr {
        bool_desugar(BoolOp::Xor, &[self, rhs.into()]).expect("`^` needs binary operands")
    }
}

impl Not for IntExpr {
    type Output = IntExpr;
    fn not(self) -> IntExpr {
        bool_desugar(BoolOp::Not, &[self]).expect("`!` needs a binary operand")
    }
}

impl<T: Into<IntExpr>> BitAnd<T> for &IntVar {
    type Output = IntExpr;
    fn bitand(self, rhs: T) -> IntExpr {
        self.expr() & rhs
    }
}

impl<T: Into<IntExpr>> BitOr<T> for &IntVar {
    type Output = IntExpr;
    fn bitor(self, rhs: T) -> IntExpr {
        self.expr() | rhs
    }
}

impl<T: Into<IntExpr>> BitXor<T> for &IntVar {
    type Output = IntExpr;
    fn bitxor(self, rhs: T) -> IntExpr {
        self.expr() ^ rhs
    }
}

impl Not for &IntVar {
    type Output = IntExpr;
    fn not(self) -> IntExpr {
        !self.expr()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Canonical sum, difference or product of two expressions.
pub fn expr_arith(a: &IntExpr, b: &IntExpr, op: ArithOp) -> IntExpr {
    match op {
        ArithOp::Add => a.combine(b, Rational::one()),
        ArithOp::Sub => a.combine(b, -Rational::one()),
        ArithOp::Mul => a.product(b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    Not,
    And,
    Or,
    Xor,
}

/// Rewrites a Boolean operator over binary expressions as a polynomial.
///
/// `Not` uses only the first argument; the other operators fold over all
/// arguments.
pub fn bool_desugar(op: BoolOp, args: &[IntExpr]) -> Result<IntExpr, ModelError> {
    if args.is_empty() {
        return Err(ModelError::NoArguments(op));
    }
    for a in args {
        a.check_binary()?;
    }
    let one = IntExpr::from(1);
    let out = match op {
        BoolOp::Not => one - args[0].clone(),
        BoolOp::And => args[1..].iter().fold(args[0].clone(), |acc, a| acc * a),
        BoolOp::Or => {
            let none = args.iter().fold(one.clone(), |acc, a| acc * (IntExpr::from(1) - a.clone()));
            one - none
        }
        BoolOp::Xor => args[1..].iter().fold(args[0].clone(), |acc, a| {
            let prod = acc.clone() * a;
            acc + a.clone() - prod.scale(Rational::from_integer(2))
        }),
    };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    Equals,
    DoesNotEqual,
    LessThan,
    LessEqual,
    GreaterThan,
    GreaterEqual,
}

impl Relation {
    pub fn is_ordering(self) -> bool {
        !matches!(self, Relation::Equals | Relation::DoesNotEqual)
    }

    /// Whether `value REL 0` holds.
    pub fn holds(self, value: Rational) -> bool {
        match self {
            Relation::Equals => value.is_zero(),
            Relation::DoesNotEqual => !value.is_zero(),
            Relation::LessThan => value.is_negative(),
            Relation::LessEqual => !value.is_positive(),
            Relation::GreaterThan => value.is_positive(),
            Relation::GreaterEqual => !value.is_negative(),
        }
    }
}

/// `expr REL 0`, optionally modulo `modulus`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntConstraint {
    pub expr: IntExpr,
    pub relation: Relation,
    pub modulus: Option<u64>,
    pub weight: Rational,
}

impl IntConstraint {
    pub fn new(expr: IntExpr, relation: Relation, modulus: Option<u64>) -> Self {
        Self { expr, relation, modulus, weight: Rational::one() }
    }

    pub fn with_weight(mut self, weight: impl Into<Rational>) -> Self {
        self.weight = weight.into();
        self
    }

    pub fn is_satisfied(&self, x: &[i64]) -> bool {
        let value = self.expr.evaluate(x);
        match self.modulus {
            None => self.relation.holds(value),
            Some(m) => {
                let divisible = value.is_integer() && (value.to_integer().rem_euclid(m as i128) == 0);
                match self.relation {
                    Relation::Equals => divisible,
                    _ => !divisible,
                }
            }
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if !self.weight.is_positive() {
            return Err(ModelError::NonPositiveWeight(self.weight));
        }
        if let Some(m) = self.modulus {
            if m < 2 {
                return Err(ModelError::InvalidModulus(m));
            }
            if self.relation.is_ordering() {
                return Err(ModelError::ModularOrdering(self.relation));
            }
            let integral = self.expr.terms.values().all(Rational::is_integer) && self.expr.constant.is_integer();
            if !integral {
                return Err(ModelError::NonIntegerModular);
            }
        }
        Ok(())
    }
}

/// Weighted objective term, always stored in maximization form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Objective {
    /// Expression to maximize (already negated for minimization).
    pub expr: IntExpr,
    /// Whether the user asked for minimization of `-expr`.
    pub minimize: bool,
    pub weight: Rational,
}

impl Objective {
    pub fn value(&self, x: &[i64]) -> Rational {
        self.expr.evaluate(x) * self.weight
    }

    /// The expression as the user wrote it.
    pub fn user_expr(&self) -> IntExpr {
        if self.minimize {
            -self.expr.clone()
        } else {
            self.expr.clone()
        }
    }

    /// The weighted expression that is maximized.
    pub fn weighted_expr(&self) -> IntExpr {
        self.expr.scale(self.weight)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub objective: Rational,
    pub satisfied_weight: Rational,
    pub violated: Vec<usize>,
}

impl Evaluation {
    /// Objective value plus satisfied constraint weight; the quantity the
    /// Max-LINSAT encoding reproduces.
    pub fn total(&self) -> Rational {
        self.objective + self.satisfied_weight
    }
}

/// Variables, objectives and soft constraints of a model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstraintModel {
    pub variables: Vec<IntVar>,
    pub objectives: Vec<Objective>,
    pub constraints: Vec<IntConstraint>,
}

impl ConstraintModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self, name: impl Into<String>, lower: i64, upper: i64) -> Result<IntVar, ModelError> {
        let name = name.into();
        if lower > upper {
            return Err(ModelError::InvalidBounds { name, lower, upper });
        }
        let v = IntVar { id: self.variables.len(), name, lower, upper };
        self.variables.push(v.clone());
        Ok(v)
    }

    pub fn new_binary_var(&mut self, name: impl Into<String>) -> IntVar {
        self.new_var(name, 0, 1).expect("binary bounds are valid")
    }

    pub fn binary_vars(&self) -> BTreeSet<VarId> {
        self.variables.iter().filter(|v| v.is_binary()).map(|v| v.id).collect()
    }

    fn check_vars(&self, e: &IntExpr) -> Result<(), ModelError> {
        match e.variables().into_iter().find(|&v| v >= self.variables.len()) {
            Some(v) => Err(ModelError::UnknownVariable(v)),
            None => Ok(()),
        }
    }

    /// Adds a soft constraint. Binary-ness of the model's variables is
    /// re-applied to the expression.
    pub fn add_constraint(&mut self, mut c: IntConstraint) -> Result<usize, ModelError> {
        self.check_vars(&c.expr)?;
        c.expr = c.expr.with_binary(&self.binary_vars());
        c.validate()?;
        self.constraints.push(c);
        Ok(self.constraints.len() - 1)
    }

    pub fn add_objective(&mut self, expr: IntExpr, minimize: bool) -> Result<usize, ModelError> {
        self.add_weighted_objective(expr, minimize, Rational::one())
    }

    pub fn add_weighted_objective(
        &mut self,
        expr: IntExpr,
        minimize: bool,
        weight: Rational,
    ) -> Result<usize, ModelError> {
        self.check_vars(&expr)?;
        if !weight.is_positive() {
            return Err(ModelError::NonPositiveWeight(weight));
        }
        let expr = expr.with_binary(&self.binary_vars());
        let expr = if minimize { -expr } else { expr };
        self.objectives.push(Objective { expr, minimize, weight });
        Ok(self.objectives.len() - 1)
    }

    /// A Boolean expression with no relation becomes a maximized objective
    /// term scaled by `weight`.
    pub fn add_boolean_constraint(&mut self, expr: IntExpr, weight: impl Into<Rational>) -> Result<usize, ModelError> {
        expr.check_binary()?;
        self.add_weighted_objective(expr, false, weight.into())
    }

    /// Re-checks every invariant; used after deserialization.
    pub fn validate(&self) -> Result<(), ModelError> {
        for (i, v) in self.variables.iter().enumerate() {
            if v.id != i {
                return Err(ModelError::VariableOrder { expected: i, found: v.id });
            }
            if v.lower > v.upper {
                return Err(ModelError::InvalidBounds { name: v.name.clone(), lower: v.lower, upper: v.upper });
            }
        }
        for o in &self.objectives {
            self.check_vars(&o.expr)?;
            if !o.weight.is_positive() {
                return Err(ModelError::NonPositiveWeight(o.weight));
            }
        }
        for c in &self.constraints {
            self.check_vars(&c.expr)?;
            c.validate()?;
        }
        Ok(())
    }

    pub fn check_assignment(&self, x: &[i64]) -> Result<(), ModelError> {
        if x.len() != self.variables.len() {
            return Err(ModelError::AssignmentLength { expected: self.variables.len(), found: x.len() });
        }
        for (v, &value) in self.variables.iter().zip(x) {
            if value < v.lower || value > v.upper {
                return Err(ModelError::OutOfBounds { var: v.id, value, lower: v.lower, upper: v.upper });
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[i64]) -> Result<Evaluation, ModelError> {
        self.check_assignment(x)?;
        let objective = self.objectives.iter().map(|o| o.value(x)).fold(Rational::zero(), |a, b| a + b);
        let mut satisfied_weight = Rational::zero();
        let mut violated = Vec::new();
        for (i, c) in self.constraints.iter().enumerate() {
            if c.is_satisfied(x) {
                satisfied_weight += c.weight;
            } else {
                violated.push(i);
            }
        }
        Ok(Evaluation { objective, satisfied_weight, violated })
    }

    /// Number of assignments in the variable box, if it fits in `u128`.
    pub fn assignment_count(&self) -> Option<u128> {
        self.variables.iter().try_fold(1u128, |acc, v| acc.checked_mul(v.range_len() as u128))
    }

    /// Decodes a mixed-radix index into an in-bounds assignment.
    pub fn assignment_at(&self, mut index: u128) -> Vec<i64> {
        let mut x = vec![0; self.variables.len()];
        for (slot, v) in x.iter_mut().zip(&self.variables).rev() {
            let r = v.range_len() as u128;
            *slot = v.lower + (index % r) as i64;
            index /= r;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn binary_assignments(n: usize) -> impl Iterator<Item = Vec<i64>> {
        (0..1usize << n).map(move |m| (0..n).map(|i| ((m >> i) & 1) as i64).collect())
    }

    #[test]
    fn binary_idempotence() {
        let mut m = ConstraintModel::new();
        let x = m.new_binary_var("x");
        let e = (&x + 1) * &x;
        assert_eq!(e, 2 * &x);
    }

    #[test]
    fn non_binary_keeps_exponent() {
        let mut m = ConstraintModel::new();
        let y = m.new_var("y", 0, 3).unwrap();
        let e = &y * &y;
        assert_eq!(e.degree(), 2);
        assert_eq!(e.evaluate(&[3]), r(9, 1));
    }

    #[test]
    fn pseudo_boolean_three_monomials() {
        let mut m = ConstraintModel::new();
        let a = m.new_binary_var("a");
        let b = m.new_binary_var("b");
        let c = m.new_binary_var("c");
        let e = &a * (&b + &c - &b * &c);
        assert_eq!(e.terms().len(), 3);
        assert_eq!(e.degree(), 3);
    }

    #[test]
    fn cancellation_to_zero() {
        let mut m = ConstraintModel::new();
        let x = m.new_binary_var("x");
        let y = m.new_var("y", 0, 4).unwrap();
        let e = 3 * &x + 2 * &y;
        assert!((e.clone() - e).is_zero());
    }

    #[test]
    fn bool_desugar_truth_tables() {
        let mut m = ConstraintModel::new();
        let a = m.new_binary_var("a");
        let b = m.new_binary_var("b");
        let or = bool_desugar(BoolOp::Or, &[a.expr(), b.expr()]).unwrap();
        assert_eq!(or, &a + &b - &a * &b);
        let not = bool_desugar(BoolOp::Not, &[a.expr()]).unwrap();
        assert_eq!(not, 1 - a.expr());
        let xor = bool_desugar(BoolOp::Xor, &[a.expr(), b.expr()]).unwrap();
        assert_eq!(xor, &a + &b - 2 * (&a * &b));
        let and = &a & &b;
        for x in binary_assignments(2) {
            let (va, vb) = (x[0] == 1, x[1] == 1);
            let as_q = |v: bool| Rational::from_integer(v as i128);
            assert_eq!(or.evaluate(&x), as_q(va || vb));
            assert_eq!(xor.evaluate(&x), as_q(va ^ vb));
            assert_eq!(and.evaluate(&x), as_q(va && vb));
            assert_eq!(not.evaluate(&x), as_q(!va));
        }
    }

    #[test]
    fn bool_desugar_rejects_integers() {
        let mut m = ConstraintModel::new();
        let a = m.new_binary_var("a");
        let y = m.new_var("y", 0, 2).unwrap();
        assert_eq!(bool_desugar(BoolOp::Or, &[a.expr(), y.expr()]), Err(ModelError::NonBinary(y.id)));
    }

    #[test]
    fn minimize_stored_negated() {
        let mut m = ConstraintModel::new();
        let x = m.new_var("x", -2, 2).unwrap();
        let e = 3 * &x + 1;
        m.add_objective(e.clone(), true).unwrap();
        for v in -2..=2 {
            assert_eq!(m.objectives[0].expr.evaluate(&[v]), -e.evaluate(&[v]));
        }
        assert_eq!(m.objectives[0].user_expr(), e);
    }

    #[test]
    fn evaluate_and_gate_and_modular() {
        let mut m = ConstraintModel::new();
        let a = m.new_binary_var("a");
        let b = m.new_binary_var("b");
        m.add_constraint((&a & &b).eq(1)).unwrap();
        m.add_constraint((&a - &b).eq_mod(1, 2).with_weight(r(3, 2))).unwrap();
        let ev = m.evaluate(&[1, 1]).unwrap();
        assert_eq!(ev.satisfied_weight, r(1, 1));
        assert_eq!(ev.violated, vec![1]);
        let ev = m.evaluate(&[1, 0]).unwrap();
        assert_eq!(ev.satisfied_weight, r(3, 2));
        assert!(matches!(m.evaluate(&[2, 0]), Err(ModelError::OutOfBounds { .. })));
        assert!(matches!(m.evaluate(&[0]), Err(ModelError::AssignmentLength { .. })));
    }

    #[test]
    fn invalid_constraints_rejected() {
        let mut m = ConstraintModel::new();
        let x = m.new_var("x", 0, 5).unwrap();
        assert_eq!(
            m.add_constraint(x.expr().le(3).with_weight(0)),
            Err(ModelError::NonPositiveWeight(Rational::zero()))
        );
        let mut c = x.expr().eq_mod(1, 3);
        c.relation = Relation::LessEqual;
        assert!(matches!(m.add_constraint(c), Err(ModelError::ModularOrdering(_))));
        assert!(matches!(m.add_constraint(x.expr().eq_mod(1, 1)), Err(ModelError::InvalidModulus(1))));
        let half = x.expr().scale(r(1, 2));
        assert_eq!(m.add_constraint(half.eq_mod(1, 3)), Err(ModelError::NonIntegerModular));
        assert!(m.new_var("bad", 3, 2).is_err());
    }

    #[test]
    fn integerize_scales_by_lcm() {
        let mut m = ConstraintModel::new();
        let x = m.new_var("x", 0, 5).unwrap();
        let e = x.expr().scale(r(1, 2)) + IntExpr::constant(r(1, 3));
        let (s, k) = e.integerize();
        assert_eq!(k, 6);
        assert_eq!(s, 3 * &x + 2);
    }

    #[test]
    fn assignment_indexing_covers_box() {
        let mut m = ConstraintModel::new();
        m.new_var("x", -1, 1).unwrap();
        m.new_binary_var("b");
        assert_eq!(m.assignment_count(), Some(6));
        let all: Vec<_> = (0..6).map(|i| m.assignment_at(i)).collect();
        assert_eq!(all[0], vec![-1, 0]);
        assert_eq!(all[5], vec![1, 1]);
    }

    proptest::proptest! {
        #[test]
        fn multilinear_normalization_preserves_values(
            coeffs in proptest::collection::vec(-5i64..=5, 8),
            exps in proptest::collection::vec(0u32..=3, 9),
        ) {
            // raw polynomial: sum of c_i * x0^e0 x1^e1 x2^e2, evaluated directly
            let mut m = ConstraintModel::new();
            let xs: Vec<IntVar> = (0..3).map(|i| m.new_binary_var(format!("x{i}"))).collect();
            let mut e = IntExpr::zero();
            let mut raw: Vec<(i64, [u32; 3])> = Vec::new();
            for (i, &c) in coeffs.iter().enumerate() {
                let ex = [exps[i % 9], exps[(i + 3) % 9], exps[(i + 6) % 9]];
                let mut term = IntExpr::from(c);
                for (v, &k) in xs.iter().zip(&ex) {
                    for _ in 0..k {
                        term = term * v;
                    }
                }
                e = e + term;
                raw.push((c, ex));
            }
            for x in binary_assignments(3) {
                let direct: i64 = raw
                    .iter()
                    .map(|(c, ex)| c * (0..3).map(|j| x[j].pow(ex[j])).product::<i64>())
                    .sum();
                proptest::prop_assert_eq!(e.evaluate(&x), Rational::from_integer(direct as i128));
            }
            proptest::prop_assert!(e.terms().keys().all(|m| m.vars().iter().all(|&(_, k)| k == 1)));
        }
    }
}
