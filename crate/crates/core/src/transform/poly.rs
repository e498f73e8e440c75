//! Polynomial to linear lowering.
//!
//! Binary-only parts of objectives are expanded into parity (XOR)
//! constraints through their Fourier coefficients. High-degree monomials are
//! first split into products of auxiliary variables, each guarded by the
//! penalty `-lambda (u v - a)^2`. Nonlinear constraint terms are always
//! replaced by auxiliary products.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::TransformError;
use crate::linsat::{Origin, Provenance};
use crate::model::{ConstraintModel, IntConstraint, IntExpr, IntMonomial, Rational, Relation, VarId};

/// Default degree at which objective monomials are split.
pub const DEFAULT_DEGREE_THRESHOLD: u32 = 4;

/// Fourier coefficient `c_S` of a pseudo-Boolean polynomial on the
/// character `(-1)^(sum of x_S)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityTerm {
    pub support: Vec<VarId>,
    pub coefficient: Rational,
}

/// Multilinear polynomial over binary variables: sorted support -> coefficient.
pub type PseudoBoolean = BTreeMap<Vec<VarId>, Rational>;

/// Fourier coefficients from `x = (1 - z) / 2`:
/// `c_S = sum over T containing S of c_T (-1)^|S| 2^-|T|`.
/// The empty support carries the constant part.
pub fn fourier_coefficients(poly: &PseudoBoolean) -> Vec<ParityTerm> {
    let mut acc: BTreeMap<Vec<VarId>, Rational> = BTreeMap::new();
    for (t, &c) in poly {
        let scale = c / Rational::from_integer(1i128 << t.len());
        for mask in 0..1usize << t.len() {
            let s: Vec<VarId> = t.iter().enumerate().filter(|&(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v).collect();
            let sign = if s.len().is_multiple_of(2) { scale } else { -scale };
            *acc.entry(s).or_default() += sign;
        }
    }
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(support, coefficient)| ParityTerm { support, coefficient })
        .collect()
}

/// Weighted parity constraint `sum x_S = target (mod 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityConstraint {
    pub support: Vec<VarId>,
    pub target: u8,
    pub weight: Rational,
}

impl ParityConstraint {
    pub fn to_constraint(&self) -> IntConstraint {
        let terms = self.support.iter().map(|&v| (IntMonomial::single(v), Rational::from_integer(1)));
        let expr = IntExpr::from_terms(terms, Rational::from_integer(-(self.target as i128)), BTreeSet::new());
        IntConstraint::new(expr, Relation::Equals, Some(2)).with_weight(self.weight)
    }
}

/// `poly(x) = sum w_S [parity_S(x) = t_S] + offset` on every 0/1 point.
pub fn fourier_lower(poly: &PseudoBoolean) -> (Vec<ParityConstraint>, Rational) {
    let mut offset = Rational::zero();
    let mut out = Vec::new();
    for term in fourier_coefficients(poly) {
        if term.support.is_empty() {
            offset += term.coefficient;
            continue;
        }
        offset -= term.coefficient.abs();
        out.push(ParityConstraint {
            target: u8::from(term.coefficient.is_negative()),
            weight: term.coefficient.abs() * Rational::from_integer(2),
            support: term.support,
        });
    }
    (out, offset)
}

/// Auxiliary binary variable `var = left * right`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuxVar {
    pub var: VarId,
    pub left: VarId,
    pub right: VarId,
}

/// A model with only linear terms; constraints carry provenance tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearModel {
    pub model: ConstraintModel,
    pub provenance: Vec<Provenance>,
    /// `source value = max over aux of linear value + offset`.
    pub offset: Rational,
    pub aux: Vec<AuxVar>,
    /// Penalty factor `lambda` on inconsistent aux values.
    pub penalty: Rational,
    /// Variables `0..source_vars` are the source model's.
    pub source_vars: usize,
}

impl LinearModel {
    /// Wraps an already linear model.
    pub fn from_linear(model: &ConstraintModel) -> Result<Self, TransformError> {
        model.validate()?;
        if let Some(i) = model.constraints.iter().position(|c| !c.expr.is_linear()) {
            return Err(TransformError::NotLinear(format!("constraint {i}")));
        }
        if let Some(i) = model.objectives.iter().position(|o| !o.expr.is_linear()) {
            return Err(TransformError::NotLinear(format!("objective {i}")));
        }
        Ok(Self {
            provenance: vec![Provenance::default(); model.constraints.len()],
            model: model.clone(),
            offset: Rational::zero(),
            aux: Vec::new(),
            penalty: Rational::zero(),
            source_vars: model.variables.len(),
        })
    }

    /// Extends a source assignment with consistent aux values.
    pub fn extend_assignment(&self, x: &[i64]) -> Vec<i64> {
        let mut y = x.to_vec();
        y.resize(self.model.variables.len(), 0);
        for a in &self.aux {
            y[a.var] = y[a.left] * y[a.right];
        }
        y
    }

    /// Objective plus satisfied weight of the linear model.
    pub fn value(&self, y: &[i64]) -> Rational {
        self.model.evaluate(y).expect("assignment in bounds").total()
    }
}

struct Lowering {
    binary: BTreeSet<VarId>,
    out: LinearModel,
    products: BTreeMap<Vec<VarId>, VarId>,
}

impl Lowering {
    /// Variable equal to the product of `vars` (binary, sorted).
    fn product_var(&mut self, vars: &[VarId]) -> VarId {
        if let [v] = vars {
            return *v;
        }
        if let Some(&a) = self.products.get(vars) {
            return a;
        }
        let (l, r) = vars.split_at(vars.len() / 2);
        let left = self.product_var(l);
        let right = self.product_var(r);
        let names: Vec<&str> = vars.iter().map(|&v| self.var_name(v)).collect();
        let name = format!("aux[{}]", names.join("*"));
        let a = self.out.model.new_binary_var(name).id;
        self.binary.insert(a);
        self.products.insert(vars.to_vec(), a);
        self.out.aux.push(AuxVar { var: a, left, right });
        a
    }

    fn var_name(&self, v: VarId) -> &str {
        &self.out.model.variables[v].name
    }

    fn push_parity(&mut self, cs: Vec<ParityConstraint>, prov: Provenance) {
        for c in cs {
            let mut k = c.to_constraint();
            k.expr = k.expr.with_binary(&self.binary);
            self.out.model.constraints.push(k);
            self.out.provenance.push(prov);
        }
    }

    fn monomial_vars(&self, m: &IntMonomial, what: &str) -> Result<Vec<VarId>, TransformError> {
        let vars: Vec<VarId> = m.var_ids().collect();
        if let Some(&v) = vars.iter().find(|v| !self.binary.contains(v)) {
            return Err(TransformError::NonBinaryNonlinear { var: v, context: what.to_string() });
        }
        Ok(vars)
    }
}

/// Lowers every polynomial term of `model` to linear form.
pub fn lower_polynomials(model: &ConstraintModel, threshold: u32) -> Result<LinearModel, TransformError> {
    model.validate()?;
    let threshold = threshold.max(2);
    let mut penalty = Rational::from_integer(1);
    for o in &model.objectives {
        for c in o.weighted_expr().terms().values() {
            penalty += c.abs();
        }
    }
    for c in &model.constraints {
        penalty += c.weight;
    }
    let mut base = model.clone();
    base.objectives.clear();
    base.constraints.clear();
    let mut lw = Lowering {
        binary: model.binary_vars(),
        out: LinearModel {
            model: base,
            provenance: Vec::new(),
            offset: Rational::zero(),
            aux: Vec::new(),
            penalty,
            source_vars: model.variables.len(),
        },
        products: BTreeMap::new(),
    };

    for (g, o) in model.objectives.iter().enumerate() {
        let e = o.weighted_expr();
        lw.out.offset += e.constant_term();
        let mut boolean = PseudoBoolean::new();
        let mut linear: Vec<(IntMonomial, Rational)> = Vec::new();
        for (m, &c) in e.terms() {
            if m.degree() == 1 && !lw.binary.contains(&m.vars()[0].0) {
                linear.push((m.clone(), c));
                continue;
            }
            let mut vars = lw.monomial_vars(m, &format!("objective {g}"))?;
            if vars.len() as u32 >= threshold {
                let (l, r) = vars.split_at(vars.len() / 2);
                let (l, r) = (l.to_vec(), r.to_vec());
                let a = lw.product_var(&l);
                let b = lw.product_var(&r);
                vars = if a < b { vec![a, b] } else { vec![b, a] };
            }
            *boolean.entry(vars).or_default() += c;
        }
        let (parities, off) = fourier_lower(&boolean);
        lw.out.offset += off;
        lw.push_parity(parities, Provenance::new(Origin::Objective, Some(g)));
        if !linear.is_empty() {
            let expr = IntExpr::from_terms(linear, Rational::zero(), lw.binary.clone());
            lw.out.model.add_objective(expr, false)?;
        }
    }

    for (i, c) in model.constraints.iter().enumerate() {
        let mut terms = Vec::new();
        for (m, &k) in c.expr.terms() {
            if m.degree() == 1 {
                terms.push((m.clone(), k));
            } else {
                let vars = lw.monomial_vars(m, &format!("constraint {i}"))?;
                terms.push((IntMonomial::single(lw.product_var(&vars)), k));
            }
        }
        let expr = IntExpr::from_terms(terms, c.expr.constant_term(), lw.binary.clone());
        lw.out.model.constraints.push(IntConstraint { expr, ..c.clone() });
        lw.out.provenance.push(Provenance::default());
    }

    // -lambda (u v - a)^2 = -lambda (u v - 2 u v a + a) on binaries.
    let lambda = lw.out.penalty;
    for (k, aux) in lw.out.aux.clone().into_iter().enumerate() {
        let mut uv = vec![aux.left, aux.right];
        uv.sort_unstable();
        let mut uva = vec![aux.left, aux.right, aux.var];
        uva.sort_unstable();
        let poly =
            PseudoBoolean::from([(uv, -lambda), (uva, lambda * Rational::from_integer(2)), (vec![aux.var], -lambda)]);
        let (parities, off) = fourier_lower(&poly);
        lw.out.offset += off;
        lw.push_parity(parities, Provenance::new(Origin::AuxDefinition, Some(k)));
    }
    Ok(lw.out)
}
