//! Syndrome decoders for the dual code `C = ker H`.
//!
//! A decoder maps a syndrome `s` (length `n`) to an error vector `e` (length
//! `m`) with `H e = s`. Every decoder here re-checks that equation before
//! returning.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{weight, CodeView};
use crate::exec::{stream_rng, Exec, DEFAULT_CHUNK};
use crate::guard::{self, GuardExceeded};

/// Default cap on `q^n` for lookup tables.
pub const DEFAULT_TABLE_LIMIT: u128 = 1 << 20;
/// Default cap on `q^k` for nearest-codeword enumeration.
pub const DEFAULT_CODEWORD_LIMIT: u128 = 1 << 20;
/// Default number of information sets tried by [`IsdDecoder`].
pub const DEFAULT_ISD_ITERATIONS: usize = 200;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecoderError {
    #[error(transparent)]
    Guard(#[from] GuardExceeded),
    #[error("syndrome has length {found}, code has {expected} checks")]
    SyndromeLength { expected: usize, found: usize },
    #[error("word has length {found}, code has length {expected}")]
    WordLength { expected: usize, found: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Capability {
    /// Returns a minimum-weight solution for every syndrome in the column
    /// space of `H`.
    Complete,
    /// May fail or return a non-minimal solution.
    Heuristic { max_weight: Option<usize> },
}

pub trait SyndromeDecoder: Sync {
    fn name(&self) -> &'static str;
    fn capability(&self) -> Capability;
    /// Error vector with `H e = syndrome`, or `None` when the decoder gives
    /// up (or no solution exists).
    fn decode(&self, syndrome: &[u64]) -> Option<Vec<u64>>;
}

/// Number of vectors of length `m` over GF(q) with weight exactly `w`.
pub fn shell_size(m: usize, q: u64, w: usize) -> Option<u128> {
    guard::binomial(m, w)?.checked_mul(guard::checked_pow(q - 1, w)?)
}

/// Number of vectors of length `m` over GF(q) with weight at most `l`.
pub fn ball_size(m: usize, q: u64, l: usize) -> Option<u128> {
    (0..=l.min(m)).try_fold(0u128, |acc, w| acc.checked_add(shell_size(m, q, w)?))
}

/// The `index`-th vector of weight `w`: supports in lexicographic order of
/// position sets, then nonzero values in base `q - 1` order.
pub fn shell_vector(m: usize, q: u64, w: usize, index: u128) -> Vec<u64> {
    let per_support = guard::checked_pow(q - 1, w).expect("caller bounds the shell");
    let (mut rank, mut vals) = (index / per_support, index % per_support);
    let mut e = vec![0u64; m];
    let mut start = 0;
    let mut support = Vec::with_capacity(w);
    for left in (1..=w).rev() {
        let mut pos = start;
        loop {
            let after = guard::binomial(m - pos - 1, left - 1).expect("bounded");
            if rank < after {
                break;
            }
            rank -= after;
            pos += 1;
        }
        support.push(pos);
        start = pos + 1;
    }
    for &pos in support.iter().rev() {
        e[pos] = 1 + (vals % (q - 1) as u128) as u64;
        vals /= (q - 1) as u128;
    }
    e
}

/// The `index`-th vector of weight at most `l`, shells in increasing weight.
pub fn ball_vector(m: usize, q: u64, mut index: u128) -> Vec<u64> {
    for w in 0..=m {
        let s = shell_size(m, q, w).expect("caller bounds the ball");
        if index < s {
            return shell_vector(m, q, w, index);
        }
        index -= s;
    }
    panic!("index outside the space");
}

fn check_syndrome(view: &CodeView, s: &[u64]) -> Result<(), DecoderError> {
    if s.len() != view.checks() {
        return Err(DecoderError::SyndromeLength { expected: view.checks(), found: s.len() });
    }
    Ok(())
}

/// Coset-leader table: for every syndrome the lexicographically smallest
/// minimum-weight error.
#[derive(Debug, Clone)]
pub struct LookupDecoder {
    view: CodeView,
    table: HashMap<Vec<u64>, Vec<u64>>,
    /// Largest coset-leader weight (the covering radius).
    pub max_leader_weight: usize,
    /// Syndromes with more than one minimum-weight error.
    ambiguous: HashSet<Vec<u64>>,
}

impl LookupDecoder {
    pub fn new(view: &CodeView) -> Result<Self, DecoderError> {
        Self::with_limit(view, DEFAULT_TABLE_LIMIT, Exec::default())
    }

    pub fn with_limit(view: &CodeView, limit: u128, exec: Exec) -> Result<Self, DecoderError> {
        let q = view.order().get();
        guard::check("syndrome table", guard::checked_pow(q, view.checks()), limit)?;
        let target = guard::checked_pow(q, view.rank()).expect("bounded by q^n") as usize;
        let m = view.length();
        let mut table: HashMap<Vec<u64>, (Vec<u64>, bool)> = HashMap::with_capacity(target);
        let mut max_leader_weight = 0;
        for w in 0..=m {
            if table.len() == target {
                break;
            }
            let size = shell_size(m, q, w).ok_or(GuardExceeded { what: "error shell", size: u128::MAX, limit })?;
            guard::check("error shell", Some(size), limit.saturating_mul(m as u128 + 1))?;
            let parts = exec.map_chunks(size as usize, DEFAULT_CHUNK, |r| {
                r.map(|i| {
                    let e = shell_vector(m, q, w, i as u128);
                    (view.syndrome(&e), e)
                })
                .collect::<Vec<_>>()
            });
            let mut added_here: HashMap<Vec<u64>, (Vec<u64>, bool)> = HashMap::new();
            for (s, e) in parts.into_iter().flatten() {
                if table.contains_key(&s) {
                    continue;
                }
                match added_here.get_mut(&s) {
                    Some((best, tie)) => {
                        *tie = true;
                        if e < *best {
                            *best = e;
                        }
                    }
                    None => {
                        added_here.insert(s, (e, false));
                    }
                }
            }
            if !added_here.is_empty() {
                max_leader_weight = w;
            }
            table.extend(added_here);
        }
        let ambiguous = table.iter().filter(|(_, (_, tie))| *tie).map(|(s, _)| s.clone()).collect();
        let table = table.into_iter().map(|(s, (e, _))| (s, e)).collect();
        Ok(Self { view: view.clone(), table, max_leader_weight, ambiguous })
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Number of cosets with more than one minimum-weight element.
    pub fn ambiguous_cosets(&self) -> usize {
        self.ambiguous.len()
    }

    /// Whether the coset of `syndrome` has a unique minimum-weight element.
    pub fn has_unique_leader(&self, syndrome: &[u64]) -> bool {
        self.table.contains_key(syndrome) && !self.ambiguous.contains(syndrome)
    }
}

impl SyndromeDecoder for LookupDecoder {
    fn name(&self) -> &'static str {
        "lookup"
    }

    fn capability(&self) -> Capability {
        Capability::Complete
    }

    fn decode(&self, syndrome: &[u64]) -> Option<Vec<u64>> {
        check_syndrome(&self.view, syndrome).ok()?;
        self.table.get(syndrome).cloned()
    }
}

/// All codewords, kept for nearest-codeword search.
#[derive(Debug, Clone)]
pub struct NearestDecoder {
    view: CodeView,
    codewords: Vec<Vec<u64>>,
}

impl NearestDecoder {
    pub fn new(view: &CodeView) -> Result<Self, DecoderError> {
        Self::with_limit(view, DEFAULT_CODEWORD_LIMIT, Exec::default())
    }

    pub fn with_limit(view: &CodeView, limit: u128, exec: Exec) -> Result<Self, DecoderError> {
        let total =
            guard::check("codeword enumeration", guard::checked_pow(view.order().get(), view.dimension()), limit)?;
        let g = view.generator();
        let codewords = exec.map(total as usize, |i| view.codeword(&g, i));
        Ok(Self { view: view.clone(), codewords })
    }

    /// Codeword closest to `word` in Hamming distance; the lexicographically
    /// smallest among ties.
    pub fn nearest(&self, word: &[u64]) -> Result<Vec<u64>, DecoderError> {
        if word.len() != self.view.length() {
            return Err(DecoderError::WordLength { expected: self.view.length(), found: word.len() });
        }
        let dist = |c: &[u64]| c.iter().zip(word).filter(|(a, b)| a != b).count();
        let best = self
            .codewords
            .iter()
            .min_by(|a, b| dist(a).cmp(&dist(b)).then_with(|| a.cmp(b)))
            .expect("the zero word is a codeword");
        Ok(best.clone())
    }
}

/// Codeword nearest to `word` by exhaustive enumeration.
pub fn nearest_codeword(view: &CodeView, word: &[u64]) -> Result<Vec<u64>, DecoderError> {
    NearestDecoder::new(view)?.nearest(word)
}

impl SyndromeDecoder for NearestDecoder {
    fn name(&self) -> &'static str {
        "nearest"
    }

    fn capability(&self) -> Capability {
        Capability::Complete
    }

    fn decode(&self, syndrome: &[u64]) -> Option<Vec<u64>> {
        check_syndrome(&self.view, syndrome).ok()?;
        let p = self.view.order();
        let w = self.view.parity_check().solve(syndrome).ok()??;
        // Among e = w - c the lightest comes from the nearest codeword; ties
        // go to the lexicographically smallest error.
        let dist = |c: &[u64]| c.iter().zip(&w).filter(|(a, b)| a != b).count();
        let best = self.codewords.iter().map(|c| (dist(c), c)).min_by(|a, b| {
            a.0.cmp(&b.0).then_with(|| {
                let ea: Vec<u64> = w.iter().zip(a.1).map(|(&x, &y)| p.sub(x, y)).collect();
                let eb: Vec<u64> = w.iter().zip(b.1).map(|(&x, &y)| p.sub(x, y)).collect();
                ea.cmp(&eb)
            })
        })?;
        Some(w.iter().zip(best.1).map(|(&x, &y)| p.sub(x, y)).collect())
    }
}

/// Prange information-set decoding: each iteration permutes the columns of
/// `H`, takes the first `rank` independent ones as the support of `e`, and
/// solves for `e` there.
#[derive(Debug, Clone)]
pub struct IsdDecoder {
    view: CodeView,
    pub iterations: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl IsdDecoder {
    pub fn new(view: &CodeView, iterations: usize, seed: u64) -> Self {
        Self { view: view.clone(), iterations: iterations.max(1), seed, exec: Exec::default() }
    }

    fn attempt(&self, syndrome: &[u64], iteration: usize) -> Option<Vec<u64>> {
        let h = self.view.parity_check();
        let mut perm: Vec<usize> = (0..h.cols()).collect();
        perm.shuffle(&mut stream_rng(self.seed, iteration as u64));
        let ech = h.select_columns(&perm).reduce_row_echelon();
        let support: Vec<usize> = ech.pivot_cols.iter().map(|&c| perm[c]).collect();
        let part = h.select_columns(&support).solve(syndrome).ok()??;
        let mut e = vec![0; h.cols()];
        for (&c, &v) in support.iter().zip(&part) {
            e[c] = v;
        }
        Some(e)
    }
}

impl SyndromeDecoder for IsdDecoder {
    fn name(&self) -> &'static str {
        "isd"
    }

    fn capability(&self) -> Capability {
        Capability::Heuristic { max_weight: Some(self.view.rank()) }
    }

    fn decode(&self, syndrome: &[u64]) -> Option<Vec<u64>> {
        check_syndrome(&self.view, syndrome).ok()?;
        if syndrome.iter().all(|&s| s == 0) {
            return Some(vec![0; self.view.length()]);
        }
        let found = self.exec.map(self.iterations, |i| self.attempt(syndrome, i));
        found.into_iter().flatten().min_by(|a, b| weight(a).cmp(&weight(b)).then_with(|| a.cmp(b)))
    }
}

/// Decoder choice by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    Lookup,
    Nearest,
    Isd,
}

impl std::str::FromStr for DecoderKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lookup" => Ok(Self::Lookup),
            "nearest" => Ok(Self::Nearest),
            "isd" => Ok(Self::Isd),
            _ => Err(format!("unknown decoder {s:?} (expected lookup, nearest or isd)")),
        }
    }
}

/// Builds a decoder for `view`.
pub fn build_decoder(
    view: &CodeView,
    kind: DecoderKind,
    isd_iterations: usize,
    seed: u64,
) -> Result<Box<dyn SyndromeDecoder>, DecoderError> {
    Ok(match kind {
        DecoderKind::Lookup => Box::new(LookupDecoder::new(view)?),
        DecoderKind::Nearest => Box::new(NearestDecoder::new(view)?),
        DecoderKind::Isd => Box::new(IsdDecoder::new(view, isd_iterations, seed)),
    })
}
