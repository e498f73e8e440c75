//! Desk-scale DQI estimates: the state `sum_x P(f(x)) |x>` built by
//! enumeration, the degree-`l` polynomial maximizing its expected objective,
//! and how often a classical decoder recovers errors of weight at most `l`.
//!
//! # Optimal polynomial
//!
//! Let `t_1 < ... < t_r` be the distinct objective values and `n_j` the number
//! of assignments attaining `t_j`. For a polynomial `P` the expected value
//! after measurement is the Rayleigh quotient
//!
//! ```text
//! E(P) = sum_j n_j P(t_j)^2 t_j / sum_j n_j P(t_j)^2 = c^T A c / c^T M c
//! ```
//!
//! with moment matrices `A_jk = sum_x f(x)^(j+k+1)` and `M_jk = sum_x f(x)^(j+k)`
//! in the monomial basis. Solving `A c = lambda M c` directly is badly
//! conditioned, so the basis is first orthonormalized: with
//! `W_jk = sqrt(n_j) s_j^k` for a centred, scaled variable `s` and `W = QR`,
//! the problem becomes the ordinary symmetric eigenproblem of
//! `Q^T diag(t) Q`. Its top eigenvector `u` gives `c = R^-1 u` and the top
//! eigenvalue is the optimal expectation. Only `min(l, r - 1)` degrees are
//! meaningful, since a polynomial of degree `r - 1` already interpolates any
//! profile over the `r` values.

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{min_distance_auto, CodeView, MinDistance, DEFAULT_DISTANCE_CAP};
use crate::decoders::{
    ball_size, ball_vector, build_decoder, DecoderError, DecoderKind, SyndromeDecoder, DEFAULT_ISD_ITERATIONS,
    DEFAULT_TABLE_LIMIT,
};
use crate::exec::{stream_rng, Exec, DEFAULT_CHUNK};
use crate::guard::{self, GuardExceeded};
use crate::linsat::{LinsatError, LinsatInstance};
use crate::model::Rational;

/// Default cap on `q^n` for state construction.
pub const DEFAULT_STATE_LIMIT: u128 = 1 << 20;
/// Default cap on the number of error patterns enumerated in exact mode.
pub const DEFAULT_PATTERN_LIMIT: u128 = 1 << 22;
/// Samples drawn when exact feasibility is out of reach and none were asked
/// for.
pub const DEFAULT_SAMPLES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DqiError {
    #[error(transparent)]
    Guard(#[from] GuardExceeded),
    #[error(transparent)]
    Linsat(#[from] LinsatError),
    #[error(transparent)]
    Decoder(#[from] DecoderError),
    #[error("the polynomial vanishes on every objective value")]
    ZeroState,
    #[error("instance is weighted; convert it with the unweighted transform first")]
    Weighted,
    #[error("degree {l} needs at least {} constraints, instance has {m}", l + 1)]
    DegreeTooLarge { l: usize, m: usize },
    #[error("state has {found} amplitudes, instance has {expected} assignments")]
    StateLength { expected: usize, found: usize },
}

/// `P(t) = sum_k c_k ((t - center) / scale)^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DqiPolynomial {
    pub coefficients: Vec<f64>,
    pub center: f64,
    pub scale: f64,
}

impl DqiPolynomial {
    /// Polynomial in `t` itself.
    pub fn monomial(coefficients: Vec<f64>) -> Self {
        Self { coefficients, center: 0.0, scale: 1.0 }
    }

    pub fn constant() -> Self {
        Self::monomial(vec![1.0])
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        let s = (t - self.center) / self.scale;
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }
}

/// Distinct objective values and how many assignments reach each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueDistribution {
    pub values: Vec<u64>,
    pub counts: Vec<u128>,
}

impl ValueDistribution {
    pub fn from_table(table: &[u64]) -> Self {
        let mut hist = std::collections::BTreeMap::<u64, u128>::new();
        for &t in table {
            *hist.entry(t).or_default() += 1;
        }
        Self { values: hist.keys().copied().collect(), counts: hist.values().copied().collect() }
    }

    pub fn of(inst: &LinsatInstance, limit: u128, exec: Exec) -> Result<Self, DqiError> {
        Ok(Self::from_table(&inst.objective_table(exec, limit)?))
    }

    /// `E(P)`, or `None` when `P` vanishes on every value.
    pub fn rayleigh_quotient(&self, p: &DqiPolynomial) -> Option<f64> {
        let (mut num, mut den) = (0.0, 0.0);
        for (&t, &n) in self.values.iter().zip(&self.counts) {
            let a = p.evaluate(t as f64);
            num += n as f64 * a * a * t as f64;
            den += n as f64 * a * a;
        }
        (den > 0.0).then(|| num / den)
    }
}

/// Normalized amplitudes `P(f(x))` over all assignments in lexicographic
/// order.
pub fn build_dqi_state(
    inst: &LinsatInstance,
    p: &DqiPolynomial,
    limit: u128,
    exec: Exec,
) -> Result<Vec<f64>, DqiError> {
    state_from_table(&inst.objective_table(exec, limit)?, p, exec)
}

fn state_from_table(table: &[u64], p: &DqiPolynomial, exec: Exec) -> Result<Vec<f64>, DqiError> {
    let mut amp: Vec<f64> = exec
        .map_chunks(table.len(), DEFAULT_CHUNK, |r| r.map(|i| p.evaluate(table[i] as f64)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect();
    let norm = chunked_sum(exec, amp.len(), |i| amp[i] * amp[i]).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(DqiError::ZeroState);
    }
    amp.iter_mut().for_each(|a| *a /= norm);
    Ok(amp)
}

fn chunked_sum(exec: Exec, n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    exec.map_chunks(n, DEFAULT_CHUNK, |r| r.map(&f).sum::<f64>()).into_iter().sum()
}

/// `sum_x |amp(x)|^2 f(x)`.
pub fn expected_satisfied(state: &[f64], inst: &LinsatInstance, limit: u128, exec: Exec) -> Result<f64, DqiError> {
    let table = inst.objective_table(exec, limit)?;
    if state.len() != table.len() {
        return Err(DqiError::StateLength { expected: table.len(), found: state.len() });
    }
    Ok(expectation(state, &table, exec))
}

fn expectation(state: &[f64], table: &[u64], exec: Exec) -> f64 {
    chunked_sum(exec, state.len(), |i| state[i] * state[i] * table[i] as f64)
}

/// Expected objective of a uniformly random assignment: every nonzero linear
/// form is uniform over the field, so constraint `i` contributes
/// `sum_{v in F_i} w_i(v) / q`.
pub fn uniform_expectation(inst: &LinsatInstance) -> Rational {
    let q = inst.order().get() as i128;
    inst.constraints()
        .iter()
        .map(|c| Rational::new(c.rhs.weights().values().map(|&w| w as i128).sum(), q))
        .fold(Rational::zero(), |a, b| a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalPolynomial {
    pub polynomial: DqiPolynomial,
    /// Top eigenvalue: the optimal expectation.
    pub expected: f64,
    pub requested_degree: usize,
    pub effective_degree: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Degree-at-most-`l` polynomial maximizing the expected objective of the
/// state over `dist`.
pub fn optimal_polynomial_for(dist: &ValueDistribution, l: usize) -> OptimalPolynomial {
    let r = dist.values.len();
    if r <= 1 || l == 0 {
        let expected = dist.rayleigh_quotient(&DqiPolynomial::constant()).unwrap_or(0.0);
        let diagnostic = (r <= 1 && l > 0).then(|| "objective is constant; using the constant polynomial".to_string());
        return OptimalPolynomial {
            polynomial: DqiPolynomial::constant(),
            expected,
            requested_degree: l,
            effective_degree: 0,
            diagnostic,
        };
    }
    let d = l.min(r - 1);
    let ts: Vec<f64> = dist.values.iter().map(|&t| t as f64).collect();
    let (lo, hi) = (ts[0], ts[r - 1]);
    let center = (lo + hi) / 2.0;
    let scale = ((hi - lo) / 2.0).max(1.0);
    let w = DMatrix::from_fn(r, d + 1, |j, k| {
        let s = (ts[j] - center) / scale;
        (dist.counts[j] as f64).sqrt() * s.powi(k as i32)
    });
    let qr = w.qr();
    let (q, rr) = (qr.q(), qr.r());
    let s = q.transpose() * DMatrix::from_diagonal(&DVector::from_vec(ts.clone())) * &q;
    let s = (&s + s.transpose()) * 0.5;
    let eig = s.symmetric_eigen();
    let top = (0..eig.eigenvalues.len())
        .max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
        .expect("nonempty spectrum");
    let mut u = eig.eigenvectors.column(top).into_owned();
    // Fix the sign so P is positive on the largest value.
    if (&q * &u)[r - 1] < 0.0 {
        u.neg_mut();
    }
    let c = rr.solve_upper_triangular(&u).expect("Vandermonde on distinct values has full rank");
    OptimalPolynomial {
        polynomial: DqiPolynomial { coefficients: c.iter().copied().collect(), center, scale },
        expected: eig.eigenvalues[top],
        requested_degree: l,
        effective_degree: d,
        diagnostic: (d < l).then(|| format!("only {r} distinct objective values; degree capped at {d}")),
    }
}

pub fn optimal_polynomial(
    inst: &LinsatInstance,
    l: usize,
    limit: u128,
    exec: Exec,
) -> Result<OptimalPolynomial, DqiError> {
    Ok(optimal_polynomial_for(&ValueDistribution::of(inst, limit, exec)?, l))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FeasibilityMode {
    Exact,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Feasibility {
    pub fraction: f64,
    pub successes: u128,
    pub trials: u128,
    #[serde(flatten)]
    pub mode: FeasibilityMode,
}

/// Fraction of error patterns of weight at most `l` that `decoder` recovers
/// from their syndromes. Sampled mode draws patterns uniformly from the ball
/// (equivalently, a weight with probability proportional to the shell size,
/// then a uniform pattern of that weight).
pub fn decoder_feasibility(
    view: &CodeView,
    l: usize,
    decoder: &dyn SyndromeDecoder,
    mode: FeasibilityMode,
    limit: u128,
    exec: Exec,
) -> Result<Feasibility, DqiError> {
    let (m, q) = (view.length(), view.order().get());
    let ball = ball_size(m, q, l).ok_or(GuardExceeded { what: "error patterns", size: u128::MAX, limit })?;
    let hit = |e: Vec<u64>| decoder.decode(&view.syndrome(&e)).as_ref() == Some(&e);
    let (successes, trials) = match mode {
        FeasibilityMode::Exact => {
            let total = guard::check("error patterns", Some(ball), limit)? as usize;
            let parts = exec
                .map_chunks(total, DEFAULT_CHUNK, |r| r.filter(|&i| hit(ball_vector(m, q, i as u128))).count() as u128);
            (parts.into_iter().sum(), total as u128)
        }
        FeasibilityMode::Sampled { samples, seed } => {
            let parts = exec.map_chunks(samples, DEFAULT_CHUNK, |r| {
                r.filter(|&i| {
                    let idx = stream_rng(seed, i as u64).random_range(0..ball);
                    hit(ball_vector(m, q, idx))
                })
                .count() as u128
            });
            (parts.into_iter().sum(), samples as u128)
        }
    };
    let fraction = if trials == 0 { 1.0 } else { successes as f64 / trials as f64 };
    Ok(Feasibility { fraction, successes, trials, mode })
}

/// Degree guaranteed decodable from a minimum distance.
pub fn auto_degree(d: MinDistance, m: usize) -> usize {
    let l = match d {
        MinDistance::Exact(d) => (d - 1) / 2,
        MinDistance::GreaterThan(cap) => cap / 2,
        MinDistance::Trivial => m,
    };
    l.min(m.saturating_sub(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The decoder corrects every error pattern of weight at most `l`, so
    /// the state can be prepared exactly.
    ExactPreparable,
    /// The expectation is the ideal-state value and only an upper-bound proxy.
    Approximate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimateOptions {
    /// `None` picks the largest degree the minimum distance guarantees.
    pub degree: Option<usize>,
    /// `None` picks lookup when its table fits, otherwise ISD.
    pub decoder: Option<DecoderKind>,
    /// `None` enumerates exactly when possible, else samples
    /// [`DEFAULT_SAMPLES`].
    pub samples: Option<usize>,
    pub seed: u64,
    pub isd_iterations: usize,
    pub state_limit: u128,
    pub pattern_limit: u128,
    pub distance_cap: usize,
    pub exec: Exec,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            degree: None,
            decoder: None,
            samples: None,
            seed: 0,
            isd_iterations: DEFAULT_ISD_ITERATIONS,
            state_limit: DEFAULT_STATE_LIMIT,
            pattern_limit: DEFAULT_PATTERN_LIMIT,
            distance_cap: DEFAULT_DISTANCE_CAP,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DqiEstimate {
    pub l: usize,
    pub polynomial: DqiPolynomial,
    /// Expected objective of the measured state, by enumeration.
    pub expected: f64,
    /// Optimal Rayleigh quotient from the eigenproblem.
    pub eigenvalue: f64,
    /// Expected objective of a uniformly random assignment.
    pub uniform_expected: f64,
    pub total_weight: u64,
    /// `sum |amp|^2` of the constructed state.
    pub normalization: f64,
    pub min_distance: MinDistance,
    pub decoder: &'static str,
    pub feasibility: Feasibility,
    pub regime: Regime,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Full estimate for an unweighted instance.
pub fn estimate(inst: &LinsatInstance, opts: &EstimateOptions) -> Result<DqiEstimate, DqiError> {
    if !inst.is_unweighted() {
        return Err(DqiError::Weighted);
    }
    let m = inst.num_constraints();
    let view = CodeView::from_instance(inst);
    let d = min_distance_auto(&view, opts.distance_cap);
    let l = match opts.degree {
        Some(l) => {
            if l > m.saturating_sub(1) {
                return Err(DqiError::DegreeTooLarge { l, m });
            }
            l
        }
        None => auto_degree(d, m),
    };
    let mut notes = Vec::new();

    let table = inst.objective_table(opts.exec, opts.state_limit)?;
    let dist = ValueDistribution::from_table(&table);
    let opt = optimal_polynomial_for(&dist, l);
    notes.extend(opt.diagnostic.clone());
    let state = state_from_table(&table, &opt.polynomial, opts.exec)?;
    let normalization = chunked_sum(opts.exec, state.len(), |i| state[i] * state[i]);
    let expected = expectation(&state, &table, opts.exec);

    let kind = opts.decoder.unwrap_or_else(|| {
        let fits = guard::checked_pow(view.order().get(), view.checks()).is_some_and(|s| s <= DEFAULT_TABLE_LIMIT);
        if fits {
            DecoderKind::Lookup
        } else {
            DecoderKind::Isd
        }
    });
    let decoder = build_decoder(&view, kind, opts.isd_iterations, opts.seed)?;
    let ball = ball_size(view.length(), view.order().get(), l);
    let mode = match opts.samples {
        Some(samples) => FeasibilityMode::Sampled { samples, seed: opts.seed },
        None if ball.is_some_and(|b| b <= opts.pattern_limit) => FeasibilityMode::Exact,
        None => {
            notes.push(format!("error ball too large to enumerate; sampled {DEFAULT_SAMPLES} patterns"));
            FeasibilityMode::Sampled { samples: DEFAULT_SAMPLES, seed: opts.seed }
        }
    };
    let feasibility = decoder_feasibility(&view, l, decoder.as_ref(), mode, opts.pattern_limit, opts.exec)?;
    let regime =
        if feasibility.successes == feasibility.trials { Regime::ExactPreparable } else { Regime::Approximate };
    if regime == Regime::Approximate {
        notes.push("decoder misses some errors; expected value is an ideal-state upper-bound proxy".into());
    }
    Ok(DqiEstimate {
        l,
        polynomial: opt.polynomial,
        expected,
        eigenvalue: opt.expected,
        uniform_expected: uniform_expectation(inst).to_f64().unwrap_or(f64::NAN),
        total_weight: inst.total_weight(),
        normalization,
        min_distance: d,
        decoder: decoder.name(),
        feasibility,
        regime,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::{
        build_dqi_state, decoder_feasibility, estimate, expected_satisfied, min_distance_auto, optimal_polynomial,
        optimal_polynomial_for, stream_rng, uniform_expectation, CodeView, DqiError, DqiPolynomial, EstimateOptions,
        Exec, FeasibilityMode, LinsatInstance, MinDistance, Regime, ToPrimitive, ValueDistribution,
    };
    use crate::decoders::LookupDecoder;
    use crate::gf::FieldOrder;
    use crate::linsat::{LinsatExpr, MergeMode};
    use proptest::prelude::*;
    use rand::Rng;

    fn single(q: u64, members: &[u64]) -> LinsatInstance {
        let mut inst = LinsatInstance::new(FieldOrder::new(q).unwrap());
        inst.new_var("x");
        inst.add_constraint(LinsatExpr::var(0), &members.iter().map(|&v| (v, 1)).collect::<Vec<_>>()).unwrap();
        inst
    }

    fn random_instance(q: u64, n: usize, m: usize, seed: u64) -> LinsatInstance {
        let mut rng = stream_rng(seed, 0);
        let p = FieldOrder::new(q).unwrap();
        let mut inst = LinsatInstance::with_merge_mode(p, MergeMode::Off);
        for v in 0..n {
            inst.new_var(format!("x{v}"));
        }
        while inst.num_constraints() < m {
            let expr = LinsatExpr::new(p, (0..n).map(|v| (v, rng.random_range(0..q) as i128)));
            if expr.is_zero() {
                continue;
            }
            let size = rng.random_range(1..q);
            let mut vals: Vec<u64> = (0..q).collect();
            rand::seq::SliceRandom::shuffle(vals.as_mut_slice(), &mut rng);
            let members: Vec<(u64, u64)> = vals[..size as usize].iter().map(|&v| (v, 1)).collect();
            inst.add_constraint(expr, &members).unwrap();
        }
        inst
    }

    #[test]
    fn state_examples() {
        let inst = single(2, &[1]);
        let uni = build_dqi_state(&inst, &DqiPolynomial::constant(), 1 << 10, Exec::Sequential).unwrap();
        assert!(uni.iter().all(|a| (a - 0.5f64.sqrt()).abs() < 1e-15));
        assert!((expected_satisfied(&uni, &inst, 1 << 10, Exec::Sequential).unwrap() - 0.5).abs() < 1e-15);
        let p = DqiPolynomial::monomial(vec![0.0, 1.0]);
        let s = build_dqi_state(&inst, &p, 1 << 10, Exec::Sequential).unwrap();
        assert_eq!(s, vec![0.0, 1.0]);
        assert_eq!(expected_satisfied(&s, &inst, 1 << 10, Exec::Sequential).unwrap(), 1.0);
        let zero = DqiPolynomial::monomial(vec![0.0]);
        assert_eq!(build_dqi_state(&inst, &zero, 1 << 10, Exec::Sequential), Err(DqiError::ZeroState));
    }

    #[test]
    fn optimal_examples() {
        let inst = single(2, &[1]);
        let o0 = optimal_polynomial(&inst, 0, 1 << 10, Exec::Sequential).unwrap();
        assert_eq!(o0.expected, 0.5);
        let o1 = optimal_polynomial(&inst, 1, 1 << 10, Exec::Sequential).unwrap();
        assert!((o1.expected - 1.0).abs() < 1e-12);
        assert!(o1.polynomial.evaluate(0.0).abs() < 1e-12);
        let mut constant = LinsatInstance::new(FieldOrder::new(2).unwrap());
        constant.new_var("x");
        let oc = optimal_polynomial(&constant, 2, 1 << 10, Exec::Sequential).unwrap();
        assert_eq!(oc.effective_degree, 0);
        assert!(oc.diagnostic.is_some());
    }

    #[test]
    fn repetition_feasibility() {
        // Rows a, a + b, b: H = B^T checks the repetition code of length 3.
        let p = FieldOrder::new(2).unwrap();
        let mut inst = LinsatInstance::with_merge_mode(p, MergeMode::Off);
        inst.new_var("a");
        inst.new_var("b");
        for e in [vec![(0, 1)], vec![(0, 1), (1, 1)], vec![(1, 1)]] {
            inst.add_constraint(LinsatExpr::new(p, e), &[(1, 1)]).unwrap();
        }
        let view = CodeView::from_instance(&inst);
        assert_eq!(min_distance_auto(&view, 6), MinDistance::Exact(3));
        let dec = LookupDecoder::new(&view).unwrap();
        let f = decoder_feasibility(&view, 1, &dec, FeasibilityMode::Exact, 1 << 20, Exec::Sequential).unwrap();
        assert_eq!((f.successes, f.trials), (4, 4));
        let f0 = decoder_feasibility(&view, 0, &dec, FeasibilityMode::Exact, 1 << 20, Exec::Sequential).unwrap();
        assert_eq!(f0.fraction, 1.0);
        let est = estimate(&inst, &EstimateOptions::default()).unwrap();
        assert_eq!(est.l, 1);
        assert_eq!(est.regime, Regime::ExactPreparable);
        assert!(est.expected > est.uniform_expected + 1e-9);
        assert!((est.normalization - 1.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_rows_are_infeasible() {
        let p = FieldOrder::new(2).unwrap();
        let mut inst = LinsatInstance::with_merge_mode(p, MergeMode::Off);
        inst.new_var("x");
        inst.add_constraint(LinsatExpr::var(0), &[(1, 1)]).unwrap();
        inst.add_constraint(LinsatExpr::var(0), &[(1, 1)]).unwrap();
        let view = CodeView::from_instance(&inst);
        let dec = LookupDecoder::new(&view).unwrap();
        let f = decoder_feasibility(&view, 1, &dec, FeasibilityMode::Exact, 1 << 20, Exec::Sequential).unwrap();
        assert!(f.fraction < 1.0);
        let est = estimate(&inst, &EstimateOptions { degree: Some(1), ..Default::default() }).unwrap();
        assert_eq!(est.regime, Regime::Approximate);
    }

    #[test]
    fn rejects_weighted_and_large_degree() {
        let p = FieldOrder::new(2).unwrap();
        let mut inst = LinsatInstance::new(p);
        inst.new_var("x");
        inst.add_constraint(LinsatExpr::var(0), &[(1, 2)]).unwrap();
        assert_eq!(estimate(&inst, &EstimateOptions::default()), Err(DqiError::Weighted));
        let inst = single(2, &[1]);
        let opts = EstimateOptions { degree: Some(1), ..Default::default() };
        assert_eq!(estimate(&inst, &opts), Err(DqiError::DegreeTooLarge { l: 1, m: 1 }));
    }

    #[test]
    fn sampled_matches_exact() {
        let inst = random_instance(3, 3, 6, 11);
        let view = CodeView::from_instance(&inst);
        let dec = LookupDecoder::new(&view).unwrap();
        let exact = decoder_feasibility(&view, 2, &dec, FeasibilityMode::Exact, 1 << 20, Exec::Sequential).unwrap();
        let mode = FeasibilityMode::Sampled { samples: 4000, seed: 5 };
        let a = decoder_feasibility(&view, 2, &dec, mode, 1 << 20, Exec::Parallel).unwrap();
        let b = decoder_feasibility(&view, 2, &dec, mode, 1 << 20, Exec::Sequential).unwrap();
        assert_eq!(a, b);
        let se = (exact.fraction * (1.0 - exact.fraction) / 4000.0).sqrt();
        assert!((a.fraction - exact.fraction).abs() <= 3.0 * se + 1e-12, "{} vs {}", a.fraction, exact.fraction);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn uniform_closed_form(q in prop::sample::select(vec![2u64, 3, 5]), n in 1usize..4, m in 1usize..6, seed in 0u64..500) {
            let inst = random_instance(q, n, m, seed);
            let s = build_dqi_state(&inst, &DqiPolynomial::constant(), 1 << 16, Exec::Sequential).unwrap();
            let e = expected_satisfied(&s, &inst, 1 << 16, Exec::Sequential).unwrap();
            let exact = uniform_expectation(&inst).to_f64().unwrap();
            prop_assert!((e - exact).abs() < 1e-9);
        }

        #[test]
        fn optimal_dominates(q in prop::sample::select(vec![2u64, 3]), n in 1usize..4, m in 2usize..7, seed in 0u64..500) {
            let inst = random_instance(q, n, m, seed);
            let dist = ValueDistribution::of(&inst, 1 << 16, Exec::Sequential).unwrap();
            let mut prev = f64::NEG_INFINITY;
            for l in 0..4 {
                let o = optimal_polynomial_for(&dist, l);
                prop_assert!(o.expected >= prev - 1e-9);
                prev = o.expected;
                let rq = dist.rayleigh_quotient(&o.polynomial).unwrap();
                prop_assert!((rq - o.expected).abs() < 1e-9);
                let mut rng = stream_rng(seed, l as u64);
                for _ in 0..200 {
                    let coeffs = (0..=l).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let p = DqiPolynomial { coefficients: coeffs, ..o.polynomial.clone() };
                    if let Some(r) = dist.rayleigh_quotient(&p) {
                        prop_assert!(r <= o.expected + 1e-9);
                    }
                }
            }
        }
    }
}
