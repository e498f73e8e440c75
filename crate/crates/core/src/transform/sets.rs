//! Set-size equalization and weight rounding.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::gadgets::repair_duplicates;
use crate::linsat::{LinsatError, LinsatInstance, MergeMode, Origin};

/// Largest field for which unattainable residues are computed.
const PADDING_FIELD_LIMIT: u64 = 1 << 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equalized {
    pub instance: LinsatInstance,
    /// Common set size after equalization (0 for an empty instance).
    pub set_size: usize,
    /// Member values added by padding.
    pub padded: usize,
    /// Sets that were split.
    pub split: usize,
    pub pins: usize,
    pub pin_weight: u64,
}

/// Residues `b . y` can take when each `y_v` ranges over `0..=spans[v]`.
/// Variables past the end of `spans` range over the whole field.
pub fn attainable_residues(inst: &LinsatInstance, row: usize, spans: &[u64]) -> BTreeSet<u64> {
    let p = inst.order();
    let q = p.get();
    let mut reach = vec![false; q as usize];
    reach[0] = true;
    for &(v, b) in inst.constraints()[row].expr.terms() {
        let span = spans.get(v).copied().unwrap_or(q - 1).min(q - 1);
        let mut next = vec![false; q as usize];
        for r in (0..q).filter(|&r| reach[r as usize]) {
            for t in 0..=span {
                next[p.add(r, p.mul(b, t)) as usize] = true;
            }
        }
        reach = next;
        if reach.iter().all(|&f| f) {
            break;
        }
    }
    (0..q).filter(|&r| reach[r as usize]).collect()
}

/// Splits every member set into chunks of the GCD of all set sizes and
/// repairs the duplicate left-hand sides this creates. With `spans`
/// (per-variable ranges `u - l` of the shifted variables), sets are first
/// padded up to a multiple of the smallest set size using residues the row
/// cannot attain in range; range constraints are never padded.
pub fn equalize_set_sizes(inst: &LinsatInstance, spans: Option<&[u64]>) -> Equalized {
    let p = inst.order();
    let mut sets: Vec<Vec<u64>> = inst.constraints().iter().map(|c| c.rhs.members().collect()).collect();
    let mut padded = 0;
    if let (Some(spans), Some(d0)) = (spans, sets.iter().map(Vec::len).min()) {
        if p.get() <= PADDING_FIELD_LIMIT && d0 > 1 {
            for (i, set) in sets.iter_mut().enumerate() {
                let rem = set.len() % d0;
                if rem == 0 || inst.constraints()[i].provenance.origin == Origin::Range {
                    continue;
                }
                let need = d0 - rem;
                let attainable = attainable_residues(inst, i, spans);
                let extra: Vec<u64> =
                    (0..p.get()).filter(|r| !attainable.contains(r) && !set.contains(r)).take(need).collect();
                if extra.len() == need {
                    padded += need;
                    set.extend(extra);
                    set.sort_unstable();
                }
            }
        }
    }
    let d = sets.iter().fold(0, |g, s| num_integer::gcd(g, s.len()));
    let mut out = LinsatInstance::with_merge_mode(p, MergeMode::Off);
    for v in inst.variables() {
        out.new_var(v.name.clone());
    }
    let mut split = 0;
    for (c, set) in inst.constraints().iter().zip(&sets) {
        if set.len() > d {
            split += 1;
        }
        // Padded values carry the weight of the set they join.
        let w = c.rhs.max_weight();
        for chunk in set.chunks(d.max(1)) {
            let members: Vec<(u64, u64)> = chunk.iter().map(|&m| (m, w)).collect();
            out.add_constraint_with(c.expr.clone(), &members, c.provenance)
                .expect("chunks of a valid constraint are valid");
        }
    }
    if split == 0 {
        return Equalized { instance: out, set_size: d, padded, split, pins: 0, pin_weight: 0 };
    }
    let repair = repair_duplicates(&out);
    Equalized {
        instance: repair.instance,
        set_size: d,
        padded,
        split,
        pins: repair.pins,
        pin_weight: repair.pin_weight,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rounded {
    #[serde(skip)]
    pub instance: LinsatInstance,
    /// Largest `|w' - w| / w` over all weights.
    pub max_relative_error: f64,
    /// Rows that became constant after rounding, with the weight they add to
    /// every assignment.
    pub constant_rows: Vec<(usize, u64)>,
}

/// Rounds every weight to the nearest positive multiple of `d`, ties up.
pub fn round_weights(inst: &LinsatInstance, d: u64) -> Result<Rounded, LinsatError> {
    let d = d.max(1);
    let round = |w: u64| ((w + d / 2) / d * d).max(d);
    let mut out = LinsatInstance::with_merge_mode(inst.order(), inst.merge_mode());
    for v in inst.variables() {
        out.new_var(v.name.clone());
    }
    let mut err: f64 = 0.0;
    let mut constant_rows = Vec::new();
    for (i, c) in inst.constraints().iter().enumerate() {
        let members: Vec<(u64, u64)> = c
            .rhs
            .weights()
            .iter()
            .map(|(&m, &w)| {
                let r = round(w);
                err = err.max((r as f64 - w as f64).abs() / w as f64);
                (m, r)
            })
            .collect();
        match out.add_constraint_with(c.expr.clone(), &members, c.provenance) {
            Ok(_) => {}
            Err(LinsatError::TrivialConstraint) => constant_rows.push((i, members[0].1)),
            Err(e) => return Err(e),
        }
    }
    Ok(Rounded { instance: out, max_relative_error: err, constant_rows })
}
