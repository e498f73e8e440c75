//! Gadgets: miniature Max-LINSAT templates over designated input slots.
//!
//! Inputs are Boolean; a gadget's quality is judged on every input row by
//! the best number of satisfied template constraints over all values of its
//! auxiliary variables.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::gf::FieldOrder;
use crate::guard::{self, GuardExceeded};
use crate::linsat::{LinsatError, LinsatExpr, LinsatInstance, Origin, Provenance};

/// Default cap on the number of candidate combinations examined by synthesis.
pub const DEFAULT_SEARCH_CAP: u128 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GadgetError {
    #[error("gadget expects {expected} inputs, got {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("gadget is over GF({gadget}) but instance is over GF({instance})")]
    OrderMismatch { gadget: u64, instance: u64 },
    #[error("invalid truth table: {0}")]
    InvalidTable(String),
    #[error("template does not satisfy the {0:?} invariant")]
    InvalidTemplate(GadgetKind),
    #[error("constraint index {0} out of range")]
    InvalidIndex(usize),
    #[error("weight scale must be positive")]
    ZeroScale,
    #[error(transparent)]
    Linsat(#[from] LinsatError),
    #[error(transparent)]
    Guard(#[from] GuardExceeded),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetKind {
    /// Every false row satisfies exactly `s_no` constraints.
    Exact,
    /// False rows satisfy fewer than `s_yes` constraints.
    Approximate,
}

/// Boolean function given by its rows; row `r` assigns input `j` the bit
/// `(r >> (n - 1 - j)) & 1`, so rows are in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    arity: usize,
    rows: Vec<bool>,
}

impl TruthTable {
    pub fn new(arity: usize, rows: Vec<bool>) -> Result<Self, GadgetError> {
        if arity >= usize::BITS as usize || rows.len() != 1 << arity {
            return Err(GadgetError::InvalidTable(format!("{} rows for {arity} inputs", rows.len())));
        }
        Ok(Self { arity, rows })
    }

    pub fn from_fn(arity: usize, f: impl Fn(&[bool]) -> bool) -> Self {
        let rows = (0..1usize << arity).map(|r| f(&row_bits(arity, r))).collect();
        Self { arity, rows }
    }

    /// Parses a string of `0`/`1` characters, one per row.
    pub fn parse(s: &str) -> Result<Self, GadgetError> {
        let rows = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(GadgetError::InvalidTable(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if rows.is_empty() || !rows.len().is_power_of_two() {
            return Err(GadgetError::InvalidTable(format!("{} rows is not a power of two", rows.len())));
        }
        let arity = rows.len().trailing_zeros() as usize;
        Self::new(arity, rows)
    }

    pub fn and(n: usize) -> Self {
        Self::from_fn(n, |x| x.iter().all(|&b| b))
    }

    pub fn or(n: usize) -> Self {
        Self::from_fn(n, |x| x.iter().any(|&b| b))
    }

    pub fn xor(n: usize) -> Self {
        Self::from_fn(n, |x| x.iter().filter(|&&b| b).count() % 2 == 1)
    }

    pub fn majority(n: usize) -> Self {
        Self::from_fn(n, |x| 2 * x.iter().filter(|&&b| b).count() > n)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn rows(&self) -> &[bool] {
        &self.rows
    }
}

impl std::fmt::Display for TruthTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.rows.iter().try_for_each(|&b| write!(f, "{}", u8::from(b)))
    }
}

fn row_bits(n: usize, r: usize) -> Vec<bool> {
    (0..n).map(|j| (r >> (n - 1 - j)) & 1 == 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadgetConstraint {
    /// Coefficients over the inputs followed by the aux variables.
    pub coeffs: Vec<u64>,
    pub members: Vec<u64>,
    pub weight: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gadget {
    pub name: String,
    pub order: FieldOrder,
    pub arity: usize,
    pub aux: usize,
    pub constraints: Vec<GadgetConstraint>,
    pub s_yes: u64,
    pub s_no: u64,
    pub kind: GadgetKind,
}

impl Gadget {
    /// Builds a gadget from a template, verifying it against `table`.
    pub fn from_template(
        name: impl Into<String>,
        order: FieldOrder,
        table: &TruthTable,
        aux: usize,
        constraints: Vec<GadgetConstraint>,
        kind: GadgetKind,
    ) -> Result<Self, GadgetError> {
        let n = table.arity();
        for c in &constraints {
            if c.coeffs.len() != n + aux {
                return Err(GadgetError::ArityMismatch { expected: n + aux, found: c.coeffs.len() });
            }
        }
        let rows = row_values(order, n, aux, &constraints)?;
        let (s_yes, s_no) = classify(table, &rows, kind).ok_or(GadgetError::InvalidTemplate(kind))?;
        Ok(Self { name: name.into(), order, arity: n, aux, constraints, s_yes, s_no, kind })
    }

    /// Best satisfied weight for every Boolean input row.
    pub fn row_values(&self) -> Result<Vec<u64>, GadgetError> {
        row_values(self.order, self.arity, self.aux, &self.constraints)
    }

    /// Re-checks the kind invariant against `table`.
    pub fn verify(&self, table: &TruthTable) -> Result<bool, GadgetError> {
        if table.arity() != self.arity {
            return Ok(false);
        }
        let rows = self.row_values()?;
        Ok(classify(table, &rows, self.kind) == Some((self.s_yes, self.s_no)))
    }

    /// Adds the template to `inst` on the given inputs. Fresh aux variables
    /// are created and weights are multiplied by `scale`. Returns the indices
    /// of the affected constraints.
    pub fn instantiate(
        &self,
        inst: &mut LinsatInstance,
        inputs: &[usize],
        scale: u64,
    ) -> Result<Vec<usize>, GadgetError> {
        if inputs.len() != self.arity {
            return Err(GadgetError::ArityMismatch { expected: self.arity, found: inputs.len() });
        }
        if inst.order() != self.order {
            return Err(GadgetError::OrderMismatch { gadget: self.order.get(), instance: inst.order().get() });
        }
        if scale == 0 {
            return Err(GadgetError::ZeroScale);
        }
        if let Some(&v) = inputs.iter().find(|&&v| v >= inst.num_vars()) {
            return Err(LinsatError::UnknownVariable(v).into());
        }
        let group = next_gadget_group(inst);
        let first_aux = inst.num_vars();
        for j in 0..self.aux {
            inst.new_var(format!("{}_aux{}_{}", self.name, group, j));
        }
        let slots: Vec<usize> = inputs.iter().copied().chain(first_aux..first_aux + self.aux).collect();
        let mut out = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let expr = LinsatExpr::new(self.order, slots.iter().zip(&c.coeffs).map(|(&v, &k)| (v, k as i128)));
            let members: Vec<(u64, u64)> = c.members.iter().map(|&v| (v, c.weight * scale)).collect();
            out.push(inst.add_constraint_with(expr, &members, Provenance::new(Origin::Gadget, Some(group)))?);
        }
        Ok(out)
    }
}

fn next_gadget_group(inst: &LinsatInstance) -> usize {
    inst.constraints()
        .iter()
        .filter(|c| c.provenance.origin == Origin::Gadget)
        .filter_map(|c| c.provenance.group)
        .max()
        .map_or(0, |g| g + 1)
}

fn row_values(order: FieldOrder, n: usize, aux: usize, cs: &[GadgetConstraint]) -> Result<Vec<u64>, GadgetError> {
    let aux_count = guard::check("gadget aux enumeration", guard::checked_pow(order.get(), aux), 1 << 24)? as usize;
    let q = order.get();
    let mut rows = Vec::with_capacity(1 << n);
    let mut x = vec![0u64; n + aux];
    for r in 0..1usize << n {
        for (j, b) in row_bits(n, r).into_iter().enumerate() {
            x[j] = u64::from(b);
        }
        let mut best = 0;
        for a in 0..aux_count {
            let mut rest = a as u64;
            for slot in x[n..].iter_mut().rev() {
                *slot = rest % q;
                rest /= q;
            }
            let total: u64 = cs
                .iter()
                .map(|c| {
                    let v = c.coeffs.iter().zip(&x).fold(0, |acc, (&k, &xi)| order.add(acc, order.mul(k, xi)));
                    if c.members.contains(&v) {
                        c.weight
                    } else {
                        0
                    }
                })
                .sum();
            best = best.max(total);
        }
        rows.push(best);
    }
    Ok(rows)
}

/// Returns `(s_yes, s_no)` if `rows` meets the invariant of `kind`.
fn classify(table: &TruthTable, rows: &[u64], kind: GadgetKind) -> Option<(u64, u64)> {
    let yes: Vec<u64> = rows.iter().zip(table.rows()).filter(|(_, &t)| t).map(|(&v, _)| v).collect();
    let no: Vec<u64> = rows.iter().zip(table.rows()).filter(|(_, &t)| !t).map(|(&v, _)| v).collect();
    let s_yes = *yes.first()?;
    if yes.iter().any(|&v| v != s_yes) {
        return None;
    }
    let s_no = *no.iter().max()?;
    if s_no >= s_yes {
        return None;
    }
    if kind == GadgetKind::Exact && no.iter().any(|&v| v != s_no) {
        return None;
    }
    Some((s_yes, s_no))
}

/// NOT on one input: `x = 0`.
pub fn not_gadget() -> Gadget {
    let c = GadgetConstraint { coeffs: vec![1], members: vec![0], weight: 1 };
    Gadget::from_template("not", gf2(), &TruthTable::from_fn(1, |x| !x[0]), 0, vec![c], GadgetKind::Exact)
        .expect("library gadget")
}

/// n-input AND over GF(2): `b . x = |b| mod 2` for every nonzero `b`.
/// For two inputs these are `x1 = 1`, `x2 = 1` and `x1 + x2 = 0`.
pub fn and_gadget(n: usize) -> Gadget {
    let cs = nonzero_vectors(n)
        .map(|b| {
            let parity = b.iter().sum::<u64>() % 2;
            GadgetConstraint { coeffs: b, members: vec![parity], weight: 1 }
        })
        .collect();
    Gadget::from_template(format!("and{n}"), gf2(), &TruthTable::and(n), 0, cs, GadgetKind::Exact)
        .expect("library gadget")
}

/// n-input OR over GF(2): `b . x = 1` for every nonzero `b`.
pub fn or_gadget(n: usize) -> Gadget {
    let cs = nonzero_vectors(n).map(|b| GadgetConstraint { coeffs: b, members: vec![1], weight: 1 }).collect();
    Gadget::from_template(format!("or{n}"), gf2(), &TruthTable::or(n), 0, cs, GadgetKind::Exact)
        .expect("library gadget")
}

/// n-input XOR over GF(2): a single parity constraint.
pub fn xor_gadget(n: usize) -> Gadget {
    let c = GadgetConstraint { coeffs: vec![1; n], members: vec![1], weight: 1 };
    Gadget::from_template(format!("xor{n}"), gf2(), &TruthTable::xor(n), 0, vec![c], GadgetKind::Exact)
        .expect("library gadget")
}

/// Three-input majority, found by synthesis on first use.
pub fn majority3_gadget() -> &'static Gadget {
    static CELL: OnceLock<Gadget> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut g = synthesize_gadget(
            &TruthTable::majority(3),
            gf2(),
            &SynthesisOptions { max_constraints: 4, kind: GadgetKind::Approximate, ..SynthesisOptions::default() },
        )
        .expect("search is small")
        .expect("a majority gadget exists within four constraints");
        g.name = "majority3".into();
        g
    })
}

fn gf2() -> FieldOrder {
    FieldOrder::new(2).expect("2 is prime")
}

fn nonzero_vectors(n: usize) -> impl Iterator<Item = Vec<u64>> {
    (1..1usize << n).map(move |r| row_bits(n, r).into_iter().map(u64::from).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthesisOptions {
    pub max_constraints: usize,
    pub kind: GadgetKind,
    /// Number of auxiliary variables available to the template.
    pub aux: usize,
    /// Cap on the number of combinations examined.
    pub cap: u128,
    pub exec: Exec,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self { max_constraints: 3, kind: GadgetKind::Exact, aux: 0, cap: DEFAULT_SEARCH_CAP, exec: Exec::default() }
    }
}

struct Candidate {
    coeffs: Vec<u64>,
    members: Vec<u64>,
    lhs: usize,
    /// Satisfaction indicator on every (row, aux value) cell.
    hits: Vec<u8>,
}

/// Exhaustive search for the smallest unit-weight template realising
/// `table`. Combinations are tried by increasing size, then in lexicographic
/// order of canonical constraints; the first valid one is returned.
pub fn synthesize_gadget(
    table: &TruthTable,
    order: FieldOrder,
    opts: &SynthesisOptions,
) -> Result<Option<Gadget>, GadgetError> {
    let n = table.arity();
    let width = n + opts.aux;
    let q = order.get();
    let vectors = guard::check("gadget coefficient vectors", guard::checked_pow(q, width), 1 << 20)? as usize;
    let set_count = guard::check("gadget member sets", guard::checked_pow(2, q as usize), 1 << 20)? as usize;
    let cells_per_row = guard::checked_pow(q, opts.aux).unwrap_or(u128::MAX) as usize;

    let mut sets: Vec<Vec<u64>> =
        (1..set_count - 1).map(|mask| (0..q).filter(|v| mask >> v & 1 == 1).collect()).collect();
    sets.sort();

    let mut candidates = Vec::new();
    let mut lhs = 0;
    for idx in 1..vectors {
        let coeffs = digits(idx, q, width);
        if coeffs.iter().find(|&&c| c != 0) != Some(&1) {
            continue;
        }
        let values = cell_values(order, n, opts.aux, &coeffs, cells_per_row);
        for s in &sets {
            let hits = values.iter().map(|v| u8::from(s.contains(v))).collect();
            candidates.push(Candidate { coeffs: coeffs.clone(), members: s.clone(), lhs, hits });
        }
        lhs += 1;
    }

    let total: Option<u128> =
        (1..=opts.max_constraints).try_fold(0u128, |acc, s| acc.checked_add(guard::binomial(candidates.len(), s)?));
    guard::check("gadget synthesis search", total, opts.cap)?;

    // Index of the first candidate with a larger left-hand side.
    let mut next_lhs = vec![candidates.len(); candidates.len()];
    for i in (0..candidates.len()).rev() {
        if i + 1 < candidates.len() {
            next_lhs[i] = if candidates[i + 1].lhs != candidates[i].lhs { i + 1 } else { next_lhs[i + 1] };
        }
    }

    let search = Search { table, candidates: &candidates, next_lhs: &next_lhs, cells_per_row, kind: opts.kind };
    for size in 1..=opts.max_constraints {
        let found = opts.exec.map(candidates.len(), |first| search.first_from(first, size));
        if let Some(chosen) = found.into_iter().flatten().next() {
            let cs = chosen
                .iter()
                .map(|&i| GadgetConstraint {
                    coeffs: candidates[i].coeffs.clone(),
                    members: candidates[i].members.clone(),
                    weight: 1,
                })
                .collect();
            let g = Gadget::from_template(format!("synth_{table}"), order, table, opts.aux, cs, opts.kind)?;
            return Ok(Some(g));
        }
    }
    Ok(None)
}

struct Search<'a> {
    table: &'a TruthTable,
    candidates: &'a [Candidate],
    next_lhs: &'a [usize],
    cells_per_row: usize,
    kind: GadgetKind,
}

impl Search<'_> {
    /// First valid combination of `size` candidates whose smallest index is `first`.
    fn first_from(&self, first: usize, size: usize) -> Option<Vec<usize>> {
        let mut acc = self.candidates[first].hits.iter().map(|&h| u32::from(h)).collect::<Vec<_>>();
        let mut chosen = vec![first];
        self.dfs(self.next_lhs[first], size - 1, &mut acc, &mut chosen).then_some(chosen)
    }

    fn dfs(&self, start: usize, left: usize, acc: &mut [u32], chosen: &mut Vec<usize>) -> bool {
        if left == 0 {
            return self.accepts(acc);
        }
        let mut i = start;
        while i < self.candidates.len() {
            for (a, &h) in acc.iter_mut().zip(&self.candidates[i].hits) {
                *a += u32::from(h);
            }
            chosen.push(i);
            if self.dfs(self.next_lhs[i], left - 1, acc, chosen) {
                return true;
            }
            chosen.pop();
            for (a, &h) in acc.iter_mut().zip(&self.candidates[i].hits) {
                *a -= u32::from(h);
            }
            i += 1;
        }
        false
    }

    fn accepts(&self, acc: &[u32]) -> bool {
        let rows: Vec<u64> =
            acc.chunks(self.cells_per_row).map(|c| u64::from(c.iter().copied().max().unwrap_or(0))).collect();
        classify(self.table, &rows, self.kind).is_some()
    }
}

fn digits(mut idx: usize, q: u64, width: usize) -> Vec<u64> {
    let mut out = vec![0; width];
    for slot in out.iter_mut().rev() {
        *slot = idx as u64 % q;
        idx /= q as usize;
    }
    out
}

fn cell_values(order: FieldOrder, n: usize, aux: usize, coeffs: &[u64], cells_per_row: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity((1 << n) * cells_per_row);
    for r in 0..1usize << n {
        let base = row_bits(n, r).iter().zip(coeffs).fold(0, |acc, (&b, &c)| if b { order.add(acc, c) } else { acc });
        for a in 0..cells_per_row {
            let y = digits(a, order.get(), aux);
            let v = y.iter().zip(&coeffs[n..]).fold(base, |acc, (&yi, &c)| order.add(acc, order.mul(c, yi)));
            out.push(v);
        }
    }
    out
}

/// Distance gadget: adds `k` fresh variables `y`, rewrites
/// constraint `i` as `b_i . x + sum(y)` and pins every `y_j` to 0 with the
/// hosting constraint's largest member weight `w`. For every `x`,
/// `max_y f'(x, y) = f(x) + k w`.
pub fn distance_gadget(inst: &LinsatInstance, i: usize, k: usize) -> Result<LinsatInstance, GadgetError> {
    let mut out = inst.clone();
    apply_distance_gadget(&mut out, i, k)?;
    Ok(out)
}

fn apply_distance_gadget(inst: &mut LinsatInstance, i: usize, k: usize) -> Result<(), GadgetError> {
    let c = inst.constraints().get(i).ok_or(GadgetError::InvalidIndex(i))?;
    if k == 0 {
        return Ok(());
    }
    let weight = c.rhs.max_weight();
    let p = inst.order();
    let base = c.expr.clone();
    let ys: Vec<usize> = (0..k).map(|j| inst.new_var(format!("pin{i}_{j}"))).collect();
    let expr = base.add(p, &LinsatExpr::new(p, ys.iter().map(|&y| (y, 1))));
    inst.replace_expr(i, expr);
    for &y in &ys {
        inst.add_constraint_with(LinsatExpr::var(y), &[(0, weight)], Provenance::new(Origin::DistancePin, Some(i)))?;
    }
    Ok(())
}

/// Result of [`repair_duplicates`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub instance: LinsatInstance,
    /// Number of pin constraints added (one per repaired copy).
    pub pins: usize,
    /// Total pin weight; the optimum grows by exactly this amount.
    pub pin_weight: u64,
}

/// Breaks groups of constraints that share a left-hand side by applying the
/// distance gadget with `k = 1` to all but the first member of each group.
pub fn repair_duplicates(inst: &LinsatInstance) -> Repair {
    let p = inst.order();
    let mut groups: BTreeMap<LinsatExpr, Vec<usize>> = BTreeMap::new();
    for (i, c) in inst.constraints().iter().enumerate() {
        let (key, _) = LinsatInstance::canonicalize(p, &c.expr, &c.rhs);
        groups.entry(key).or_default().push(i);
    }
    let mut out = inst.clone();
    let mut pins = 0;
    let mut pin_weight = 0;
    for idx in groups.values() {
        for &i in &idx[1..] {
            pin_weight += inst.constraints()[i].rhs.max_weight();
            apply_distance_gadget(&mut out, i, 1).expect("index comes from the instance");
            pins += 1;
        }
    }
    Repair { instance: out, pins, pin_weight }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linsat::MergeMode;
    use proptest::prelude::*;

    fn gf(p: u64) -> FieldOrder {
        FieldOrder::new(p).unwrap()
    }

    /// Max over `extra` trailing variables of the objective, for each
    /// assignment of the leading `n` variables.
    pub(crate) fn max_over_tail(inst: &LinsatInstance, n: usize) -> Vec<u64> {
        let q = inst.order().get() as usize;
        let tail = inst.num_vars() - n;
        let table = inst.objective_table(Exec::Sequential, 1 << 22).unwrap();
        let block = q.pow(tail as u32);
        table.chunks(block).map(|c| *c.iter().max().unwrap()).collect()
    }

    #[test]
    fn library_and_matches_eq4() {
        let g = and_gadget(2);
        let got: Vec<_> = g.constraints.iter().map(|c| (c.coeffs.clone(), c.members.clone())).collect();
        assert_eq!(got, vec![(vec![0, 1], vec![1]), (vec![1, 0], vec![1]), (vec![1, 1], vec![0])]);
        assert_eq!((g.s_yes, g.s_no), (3, 1));
    }

    #[test]
    fn library_gadgets_verify() {
        assert!(not_gadget().verify(&TruthTable::from_fn(1, |x| !x[0])).unwrap());
        for n in 1..=4 {
            assert!(and_gadget(n).verify(&TruthTable::and(n)).unwrap());
            assert!(or_gadget(n).verify(&TruthTable::or(n)).unwrap());
            assert!(xor_gadget(n).verify(&TruthTable::xor(n)).unwrap());
        }
        let or2 = or_gadget(2);
        assert_eq!(or2.constraints.len(), 3);
        assert!(or2.constraints.iter().all(|c| c.members == vec![1]));
        let maj = majority3_gadget();
        assert!(maj.constraints.len() <= 4);
        assert!(maj.verify(&TruthTable::majority(3)).unwrap());
    }

    #[test]
    fn instantiate_and_on_instance() {
        let mut inst = LinsatInstance::new(gf(2));
        inst.new_var("x1");
        inst.new_var("x2");
        let idx = and_gadget(2).instantiate(&mut inst, &[0, 1], 1).unwrap();
        assert_eq!(idx.len(), 3);
        let table = inst.objective_table(Exec::Sequential, 1 << 10).unwrap();
        assert_eq!(table, vec![1, 1, 1, 3]);
        assert!(matches!(and_gadget(2).instantiate(&mut inst, &[0], 1), Err(GadgetError::ArityMismatch { .. })));
        let mut g3 = LinsatInstance::new(gf(3));
        g3.new_var("a");
        g3.new_var("b");
        assert!(matches!(and_gadget(2).instantiate(&mut g3, &[0, 1], 1), Err(GadgetError::OrderMismatch { .. })));
    }

    #[test]
    fn synthesis_exact_and() {
        let g = synthesize_gadget(&TruthTable::and(2), gf(2), &SynthesisOptions::default()).unwrap().unwrap();
        assert_eq!((g.s_yes, g.s_no), (3, 1));
        assert_eq!(g.constraints.len(), 3);
        let mut inst = LinsatInstance::new(gf(2));
        inst.new_var("a");
        inst.new_var("b");
        g.instantiate(&mut inst, &[0, 1], 1).unwrap();
        assert_eq!(inst.objective_table(Exec::Sequential, 16).unwrap(), vec![1, 1, 1, 3]);
    }

    #[test]
    fn synthesis_approximate_and() {
        let opts = SynthesisOptions { max_constraints: 2, kind: GadgetKind::Approximate, ..Default::default() };
        let g = synthesize_gadget(&TruthTable::and(2), gf(2), &opts).unwrap().unwrap();
        let mut got: Vec<_> = g.constraints.iter().map(|c| (c.coeffs.clone(), c.members.clone())).collect();
        got.sort();
        assert_eq!(got, vec![(vec![0, 1], vec![1]), (vec![1, 0], vec![1])]);
        assert_eq!(g.s_yes, 2);
    }

    #[test]
    fn synthesis_edge_cases() {
        let none = TruthTable::from_fn(2, |_| false);
        assert_eq!(synthesize_gadget(&none, gf(2), &SynthesisOptions::default()).unwrap(), None);
        let all = TruthTable::from_fn(2, |_| true);
        assert_eq!(synthesize_gadget(&all, gf(2), &SynthesisOptions::default()).unwrap(), None);
        let tiny = SynthesisOptions { cap: 10, ..Default::default() };
        assert!(matches!(synthesize_gadget(&TruthTable::and(2), gf(2), &tiny), Err(GadgetError::Guard(_))));
    }

    #[test]
    fn synthesis_is_deterministic_across_strategies() {
        let table = TruthTable::majority(3);
        let mk =
            |exec| SynthesisOptions { max_constraints: 4, kind: GadgetKind::Approximate, exec, ..Default::default() };
        let a = synthesize_gadget(&table, gf(2), &mk(Exec::Sequential)).unwrap();
        let b = synthesize_gadget(&table, gf(2), &mk(Exec::Parallel)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn synthesis_with_aux_over_gf3() {
        let opts = SynthesisOptions { max_constraints: 2, kind: GadgetKind::Approximate, aux: 1, ..Default::default() };
        let g = synthesize_gadget(&TruthTable::and(2), gf(3), &opts).unwrap().unwrap();
        assert!(g.verify(&TruthTable::and(2)).unwrap());
    }

    #[test]
    fn table_parsing() {
        assert_eq!(TruthTable::parse("0001").unwrap(), TruthTable::and(2));
        assert!(TruthTable::parse("001").is_err());
        assert!(TruthTable::parse("00x1").is_err());
        assert_eq!(TruthTable::and(2).to_string(), "0001");
    }

    #[test]
    fn distance_gadget_single_constraint() {
        let mut inst = LinsatInstance::new(gf(2));
        inst.new_var("x1");
        inst.add_constraint(LinsatExpr::var(0), &[(1, 1)]).unwrap();
        assert_eq!(distance_gadget(&inst, 0, 0).unwrap(), inst);
        let g = distance_gadget(&inst, 0, 2).unwrap();
        assert_eq!(g.num_vars(), 3);
        assert_eq!(max_over_tail(&g, 1), vec![2, 3]);
        assert!(matches!(distance_gadget(&inst, 5, 1), Err(GadgetError::InvalidIndex(5))));
    }

    #[test]
    fn repair_removes_duplicates() {
        let mut inst = LinsatInstance::with_merge_mode(gf(2), MergeMode::Off);
        inst.new_var("a");
        inst.new_var("b");
        for _ in 0..3 {
            inst.add_constraint(LinsatExpr::new(gf(2), [(0, 1), (1, 1)]), &[(1, 1)]).unwrap();
        }
        let r = repair_duplicates(&inst);
        assert_eq!(r.pins, 2);
        let exprs: std::collections::BTreeSet<_> = r.instance.constraints().iter().map(|c| c.expr.clone()).collect();
        assert_eq!(exprs.len(), r.instance.num_constraints());
        let before = inst.objective_table(Exec::Sequential, 1 << 10).unwrap();
        let after = max_over_tail(&r.instance, 2);
        for (b, a) in before.iter().zip(&after) {
            assert_eq!(b + r.pin_weight, *a);
        }
        let clean = crate::linsat::tests::and_instance();
        assert_eq!(repair_duplicates(&clean).instance, clean);
    }

    fn arb_instance() -> impl Strategy<Value = LinsatInstance> {
        (prop::sample::select(vec![2u64, 3]), 1usize..=4).prop_flat_map(|(p, n)| {
            let row = (prop::collection::vec(0..p as i128, n), prop::collection::btree_set(0..p, 1..p as usize));
            prop::collection::vec(row, 1..6).prop_map(move |rows| {
                let mut inst = LinsatInstance::with_merge_mode(gf(p), MergeMode::Off);
                for j in 0..n {
                    inst.new_var(format!("x{j}"));
                }
                for (coeffs, set) in rows {
                    let e = LinsatExpr::new(gf(p), coeffs.into_iter().enumerate());
                    let members: Vec<_> = set.into_iter().map(|v| (v, 1)).collect();
                    let _ = inst.add_constraint(e, &members);
                }
                inst
            })
        })
    }

    proptest! {
        #[test]
        fn distance_gadget_adds_k_weight(inst in arb_instance(), pick in 0usize..8, k in 1usize..=3) {
            prop_assume!(inst.num_constraints() > 0);
            let i = pick % inst.num_constraints();
            let g = distance_gadget(&inst, i, k).unwrap();
            let before = inst.objective_table(Exec::Sequential, 1 << 16).unwrap();
            let after = max_over_tail(&g, inst.num_vars());
            for (b, a) in before.iter().zip(&after) {
                prop_assert_eq!(b + k as u64, *a);
            }
        }

        #[test]
        fn repair_shifts_optimum(inst in arb_instance()) {
            let r = repair_duplicates(&inst);
            let before = inst.objective_table(Exec::Sequential, 1 << 16).unwrap();
            let after = max_over_tail(&r.instance, inst.num_vars());
            prop_assert_eq!(before.iter().max().unwrap() + r.pin_weight, *after.iter().max().unwrap());
        }
    }
}
