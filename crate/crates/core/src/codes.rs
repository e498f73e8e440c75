//! Dual-code analysis of an instance: the code `C = ker B^T` with parity
//! check `H = B^T`, its minimum distance, dependent row sets of `B` and the
//! weight enumerator.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::exec::{Exec, DEFAULT_CHUNK};
use crate::gf::{FieldMatrix, FieldOrder};
use crate::guard::{self, GuardExceeded};
use crate::linsat::{LinsatInstance, Origin, Provenance};

/// Default largest subset size examined by subset search.
pub const DEFAULT_DISTANCE_CAP: usize = 6;
/// Default cap on `q^k` for codeword enumeration.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1 << 22;
/// Default cap on the number of column subsets examined per size.
pub const DEFAULT_SUBSET_LIMIT: u128 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeView {
    h: FieldMatrix,
    rank: usize,
}

impl CodeView {
    /// Dual code of an instance: `H = B^T`, one column per constraint.
    pub fn from_instance(inst: &LinsatInstance) -> Self {
        Self::from_parity_check(inst.matrix().transpose())
    }

    pub fn from_parity_check(h: FieldMatrix) -> Self {
        let rank = h.rank();
        Self { h, rank }
    }

    pub fn parity_check(&self) -> &FieldMatrix {
        &self.h
    }

    pub fn order(&self) -> FieldOrder {
        self.h.order()
    }

    /// Code length `m`.
    pub fn length(&self) -> usize {
        self.h.cols()
    }

    /// Number of parity checks `n`.
    pub fn checks(&self) -> usize {
        self.h.rows()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Code dimension `k = m - rank(H)`.
    pub fn dimension(&self) -> usize {
        self.length() - self.rank
    }

    pub fn syndrome(&self, e: &[u64]) -> Vec<u64> {
        self.h.mul_vec(e).expect("error vector has code length")
    }

    /// Generator matrix: `m x k`, columns span the code.
    pub fn generator(&self) -> FieldMatrix {
        self.h.kernel_basis()
    }

    /// Codeword for message index `i` (base-`q` digits, first digit most
    /// significant).
    pub fn codeword(&self, g: &FieldMatrix, mut i: usize) -> Vec<u64> {
        let p = self.order();
        let q = p.get() as usize;
        let k = g.cols();
        let mut msg = vec![0; k];
        for slot in msg.iter_mut().rev() {
            *slot = (i % q) as u64;
            i /= q;
        }
        g.mul_vec(&msg).expect("message has dimension length")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum MinDistance {
    Exact(usize),
    /// No dependent set up to this size was found (search capped).
    GreaterThan(usize),
    /// The code is `{0}`; there is no nonzero codeword.
    Trivial,
}

impl MinDistance {
    pub fn exact(self) -> Option<usize> {
        match self {
            MinDistance::Exact(d) => Some(d),
            _ => None,
        }
    }
}

/// Hamming weight of a vector.
pub fn weight(v: &[u64]) -> usize {
    v.iter().filter(|&&x| x != 0).count()
}

/// Smallest number of linearly dependent columns of `H`, up to `cap`.
pub fn min_distance(view: &CodeView, cap: usize) -> MinDistance {
    min_distance_with(view, cap, DEFAULT_SUBSET_LIMIT, Exec::default())
}

pub fn min_distance_with(view: &CodeView, cap: usize, subset_limit: u128, exec: Exec) -> MinDistance {
    if view.dimension() == 0 {
        return MinDistance::Trivial;
    }
    let search = SubsetSearch::new(view.parity_check(), None);
    for d in 1..=cap.min(view.length()) {
        if guard::binomial(view.length(), d).is_none_or(|c| c > subset_limit) {
            return MinDistance::GreaterThan(d - 1);
        }
        if search.run(d, exec, true).into_iter().any(|v| !v.is_empty()) {
            return MinDistance::Exact(d);
        }
    }
    MinDistance::GreaterThan(cap.min(view.length()))
}

/// Minimum distance from the weight enumerator.
pub fn min_distance_by_enumeration(view: &CodeView, limit: u128) -> Result<MinDistance, GuardExceeded> {
    let hist = weight_enumerator_with(view, limit, Exec::default())?;
    Ok(hist.keys().find(|&&w| w > 0).map_or(MinDistance::Trivial, |&w| MinDistance::Exact(w)))
}

/// Exact by enumeration when `q^k` is small, otherwise by subset search.
pub fn min_distance_auto(view: &CodeView, cap: usize) -> MinDistance {
    match min_distance_by_enumeration(view, DEFAULT_ENUMERATION_LIMIT) {
        Ok(d) => d,
        Err(_) => min_distance(view, cap),
    }
}

/// Histogram weight -> number of codewords.
pub fn weight_enumerator(view: &CodeView) -> Result<BTreeMap<usize, u128>, GuardExceeded> {
    weight_enumerator_with(view, DEFAULT_ENUMERATION_LIMIT, Exec::default())
}

pub fn weight_enumerator_with(
    view: &CodeView,
    limit: u128,
    exec: Exec,
) -> Result<BTreeMap<usize, u128>, GuardExceeded> {
    let total =
        guard::check("codeword enumeration", guard::checked_pow(view.order().get(), view.dimension()), limit)? as usize;
    let g = view.generator();
    let m = view.length();
    let parts = exec.map_chunks(total, DEFAULT_CHUNK, |r| {
        let mut counts = vec![0u128; m + 1];
        for i in r {
            counts[weight(&view.codeword(&g, i))] += 1;
        }
        counts
    });
    let mut hist = BTreeMap::new();
    for part in parts {
        for (w, c) in part.into_iter().enumerate().filter(|&(_, c)| c > 0) {
            *hist.entry(w).or_default() += c;
        }
    }
    Ok(hist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DependencyTag {
    Duplicate,
    AndOrGadget,
    Cycle,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependentSet {
    /// Row indices of `B`, increasing.
    pub rows: Vec<usize>,
    /// Nonzero coefficients `c` with `sum c_j B_{rows[j]} = 0`, first one 1.
    pub combination: Vec<u64>,
    pub tag: DependencyTag,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependencyReport {
    pub size_cap: usize,
    pub sets: Vec<DependentSet>,
    /// Largest size fully searched when the subset limit cut the search short.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated_after: Option<usize>,
}

impl DependencyReport {
    pub fn count(&self, tag: DependencyTag) -> usize {
        self.sets.iter().filter(|s| s.tag == tag).count()
    }

    pub fn smallest(&self) -> Option<usize> {
        self.sets.iter().map(|s| s.rows.len()).min()
    }
}

/// All minimal dependent row sets of `b` up to `cap` rows, classified.
/// `provenance`, when given, holds one entry per row.
pub fn find_dependent_row_sets(b: &FieldMatrix, provenance: Option<&[Provenance]>, cap: usize) -> DependencyReport {
    find_dependent_row_sets_with(b, provenance, cap, DEFAULT_SUBSET_LIMIT, Exec::default())
}

pub fn find_dependent_row_sets_with(
    b: &FieldMatrix,
    provenance: Option<&[Provenance]>,
    cap: usize,
    subset_limit: u128,
    exec: Exec,
) -> DependencyReport {
    let h = b.transpose();
    let search = SubsetSearch::new(&h, provenance);
    let mut sets = Vec::new();
    let mut truncated_after = None;
    for d in 1..=cap.min(b.rows()) {
        if guard::binomial(b.rows(), d).is_none_or(|c| c > subset_limit) {
            truncated_after = Some(d - 1);
            break;
        }
        sets.extend(search.run(d, exec, false).into_iter().flatten());
    }
    DependencyReport { size_cap: cap, sets, truncated_after }
}

/// Dependency report of an instance's constraint rows.
pub fn instance_dependencies(inst: &LinsatInstance, cap: usize) -> DependencyReport {
    let prov: Vec<Provenance> = inst.constraints().iter().map(|c| c.provenance).collect();
    find_dependent_row_sets(&inst.matrix(), Some(&prov), cap)
}

/// Depth-first search over column subsets with independent prefixes.
struct SubsetSearch<'a> {
    order: FieldOrder,
    columns: Vec<Vec<u64>>,
    provenance: Option<&'a [Provenance]>,
}

struct Basis {
    /// Reduced vectors, pivot entry 1.
    vecs: Vec<(Vec<u64>, usize)>,
}

impl<'a> SubsetSearch<'a> {
    fn new(h: &FieldMatrix, provenance: Option<&'a [Provenance]>) -> Self {
        let columns = (0..h.cols()).map(|c| h.column(c)).collect();
        Self { order: h.order(), columns, provenance }
    }

    /// Minimal dependent sets of exactly `d` columns, grouped by first column.
    fn run(&self, d: usize, exec: Exec, first_only: bool) -> Vec<Vec<DependentSet>> {
        exec.map(self.columns.len(), |first| {
            let mut out = Vec::new();
            let mut basis = Basis { vecs: Vec::new() };
            let mut chosen = Vec::new();
            self.dfs(first, first + 1, d, &mut basis, &mut chosen, &mut out, first_only);
            out
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        col: usize,
        next: usize,
        d: usize,
        basis: &mut Basis,
        chosen: &mut Vec<usize>,
        out: &mut Vec<DependentSet>,
        first_only: bool,
    ) -> bool {
        let r = self.reduce(basis, &self.columns[col]);
        chosen.push(col);
        let mut stop = false;
        match r {
            None => {
                if chosen.len() == d {
                    if let Some(set) = self.minimal_set(chosen) {
                        out.push(set);
                        stop = first_only;
                    }
                }
            }
            Some(v) if chosen.len() < d => {
                basis.vecs.push(v);
                for c in next..self.columns.len() {
                    if self.dfs(c, c + 1, d, basis, chosen, out, first_only) {
                        stop = true;
                        break;
                    }
                }
                basis.vecs.pop();
            }
            Some(_) => {}
        }
        chosen.pop();
        stop
    }

    /// Reduces `v` against the basis; `None` if it lies in the span.
    fn reduce(&self, basis: &Basis, v: &[u64]) -> Option<(Vec<u64>, usize)> {
        let p = self.order;
        let mut r = v.to_vec();
        for (b, piv) in &basis.vecs {
            let f = r[*piv];
            if f != 0 {
                for (x, &y) in r.iter_mut().zip(b) {
                    *x = p.sub(*x, p.mul(f, y));
                }
            }
        }
        let piv = r.iter().position(|&x| x != 0)?;
        let inv = p.inv(r[piv]).expect("nonzero");
        r.iter_mut().for_each(|x| *x = p.mul(*x, inv));
        Some((r, piv))
    }

    fn minimal_set(&self, rows: &[usize]) -> Option<DependentSet> {
        let sub = FieldMatrix::from_residues(
            self.order,
            self.columns[0].len(),
            rows.len(),
            (0..self.columns[0].len())
                .flat_map(|i| rows.iter().map(move |&r| (r, i)))
                .map(|(r, i)| self.columns[r][i])
                .collect(),
        )
        .expect("dimensions agree");
        let ker = sub.kernel_basis();
        if ker.cols() != 1 {
            return None;
        }
        let mut comb = ker.column(0);
        if comb.contains(&0) {
            return None;
        }
        let inv = self.order.inv(comb[0]).expect("nonzero");
        comb.iter_mut().for_each(|c| *c = self.order.mul(*c, inv));
        Some(DependentSet { rows: rows.to_vec(), combination: comb, tag: self.classify(rows) })
    }

    fn classify(&self, rows: &[usize]) -> DependencyTag {
        if rows.len() == 2 {
            return DependencyTag::Duplicate;
        }
        if rows.len() == 3 {
            if let Some(prov) = self.provenance {
                let first = prov[rows[0]];
                let grouped = matches!(first.origin, Origin::Gadget | Origin::Objective | Origin::AuxDefinition)
                    && first.group.is_some()
                    && rows.iter().all(|&r| prov[r] == first);
                if grouped {
                    return DependencyTag::AndOrGadget;
                }
            }
        }
        if rows.len() >= 3 && rows.iter().all(|&r| weight(&self.columns[r]) == 2) {
            return DependencyTag::Cycle;
        }
        DependencyTag::Other
    }
}
