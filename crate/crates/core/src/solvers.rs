//! Classical Max-LINSAT baselines: brute force, simulated annealing and
//! Prange's algorithm.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exec::{stream_rng, Exec, DEFAULT_CHUNK};
use crate::gf::FieldMatrix;
use crate::guard::GuardExceeded;
use crate::linsat::{LinsatError, LinsatInstance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Guard(#[from] GuardExceeded),
    #[error(transparent)]
    Linsat(#[from] LinsatError),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub assignment: Vec<u64>,
    pub weight: u64,
    pub solver: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip)]
    pub wall_time: Duration,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SolveResult {
    fn new(
        inst: &LinsatInstance,
        assignment: Vec<u64>,
        solver: &'static str,
        seed: Option<u64>,
        start: Instant,
    ) -> Self {
        let weight = inst.evaluate(&assignment).expect("solver assignments have instance length");
        Self { assignment, weight, solver, seed, wall_time: start.elapsed(), notes: Vec::new() }
    }
}

/// Higher weight wins, then the lexicographically smaller assignment.
fn better(a: &(u64, Vec<u64>), b: &(u64, Vec<u64>)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

fn best_of(cands: impl IntoIterator<Item = (u64, Vec<u64>)>) -> Option<(u64, Vec<u64>)> {
    cands.into_iter().fold(None, |acc, c| match acc {
        Some(b) if !better(&c, &b) => Some(b),
        _ => Some(c),
    })
}

/// Exhaustive search; the lexicographically smallest optimum.
pub fn brute_force(inst: &LinsatInstance, limit: u128, exec: Exec) -> Result<SolveResult, SolveError> {
    let start = Instant::now();
    let total = inst.assignment_count(limit)?;
    let parts = exec.map_chunks(total, DEFAULT_CHUNK, |r| {
        let mut best: Option<(u64, usize)> = None;
        for i in r {
            let w = inst.evaluate_unchecked(&inst.assignment_at(i));
            if best.is_none_or(|(bw, _)| w > bw) {
                best = Some((w, i));
            }
        }
        best
    });
    // Chunks come in index order, so the first strict maximum is the smallest
    // index, which is the lexicographically smallest assignment.
    let mut best: Option<(u64, usize)> = None;
    for (w, i) in parts.into_iter().flatten() {
        if best.is_none_or(|(bw, _)| w > bw) {
            best = Some((w, i));
        }
    }
    let index = best.map_or(0, |(_, i)| i);
    Ok(SolveResult::new(inst, inst.assignment_at(index), "brute_force", None, start))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnealSchedule {
    /// Starting temperature; `None` uses the total weight.
    pub initial_temperature: Option<f64>,
    pub cooling: f64,
    /// Total moves per chain; `None` uses `200 n q`.
    pub steps: Option<usize>,
    /// Independent chains, best one reported.
    pub restarts: usize,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self { initial_temperature: None, cooling: 0.97, steps: None, restarts: 1 }
    }
}

/// Incremental evaluator: current value of every linear form.
struct Chain<'a> {
    inst: &'a LinsatInstance,
    /// `(constraint, coefficient)` per variable.
    incidence: Vec<Vec<(usize, u64)>>,
    x: Vec<u64>,
    dots: Vec<u64>,
    weight: u64,
}

impl<'a> Chain<'a> {
    fn new(inst: &'a LinsatInstance, x: Vec<u64>) -> Self {
        let mut incidence = vec![Vec::new(); inst.num_vars()];
        for (i, c) in inst.constraints().iter().enumerate() {
            for &(v, b) in c.expr.terms() {
                incidence[v].push((i, b));
            }
        }
        let p = inst.order();
        let dots: Vec<u64> = inst.constraints().iter().map(|c| c.expr.dot(p, &x)).collect();
        let weight = inst.constraints().iter().zip(&dots).map(|(c, &d)| c.rhs.weight_of(d)).sum();
        Self { inst, incidence, x, dots, weight }
    }

    /// Weight change when `x_v` becomes `value`.
    fn delta(&self, v: usize, value: u64) -> i128 {
        let p = self.inst.order();
        let step = p.sub(value, self.x[v]);
        self.incidence[v]
            .iter()
            .map(|&(i, b)| {
                let rhs = &self.inst.constraints()[i].rhs;
                let old = self.dots[i];
                rhs.weight_of(p.add(old, p.mul(b, step))) as i128 - rhs.weight_of(old) as i128
            })
            .sum()
    }

    fn apply(&mut self, v: usize, value: u64, delta: i128) {
        let p = self.inst.order();
        let step = p.sub(value, self.x[v]);
        for &(i, b) in &self.incidence[v] {
            self.dots[i] = p.add(self.dots[i], p.mul(b, step));
        }
        self.x[v] = value;
        self.weight = (self.weight as i128 + delta) as u64;
    }
}

fn anneal_chain(inst: &LinsatInstance, schedule: &AnnealSchedule, seed: u64, restart: usize) -> (u64, Vec<u64>) {
    let (n, q) = (inst.num_vars(), inst.order().get());
    let mut rng = stream_rng(seed, restart as u64);
    let x: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
    let mut chain = Chain::new(inst, x);
    let mut best = (chain.weight, chain.x.clone());
    if n == 0 || q < 2 {
        return best;
    }
    let stage = n * q as usize;
    let steps = schedule.steps.unwrap_or(200 * stage);
    let mut t = schedule.initial_temperature.unwrap_or(inst.total_weight() as f64).max(f64::MIN_POSITIVE);
    for step in 0..steps {
        if step > 0 && step % stage == 0 {
            t *= schedule.cooling;
        }
        let v = rng.random_range(0..n);
        // Uniform over the q - 1 other values.
        let mut value = rng.random_range(0..q - 1);
        if value >= chain.x[v] {
            value += 1;
        }
        let delta = chain.delta(v, value);
        let u: f64 = rng.random();
        if delta >= 0 || u < (delta as f64 / t).exp() {
            chain.apply(v, value, delta);
            let cand = (chain.weight, chain.x.clone());
            if better(&cand, &best) {
                best = cand;
            }
        }
    }
    best
}

/// Simulated annealing with geometric cooling: the temperature drops by
/// `cooling` after every `n q` moves; each move reassigns one variable to a
/// uniformly random different value under the Metropolis rule. Chains run
/// with per-restart streams of `seed`.
pub fn simulated_annealing(inst: &LinsatInstance, schedule: &AnnealSchedule, seed: u64, exec: Exec) -> SolveResult {
    let start = Instant::now();
    let chains = exec.map(schedule.restarts.max(1), |r| anneal_chain(inst, schedule, seed, r));
    let (_, x) = best_of(chains).expect("at least one chain");
    SolveResult::new(inst, x, "simulated_annealing", Some(seed), start)
}

/// One Prange attempt: rows in random order, the first independent ones
/// chosen, each with a uniformly random member as its target, solved
/// exactly. Free variables are 0.
fn prange_attempt(inst: &LinsatInstance, b: &FieldMatrix, seed: u64, restart: usize) -> (u64, Vec<u64>) {
    let mut rng = stream_rng(seed, restart as u64);
    let m = inst.num_constraints();
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let ech = b.transpose().select_columns(&order).reduce_row_echelon();
    let rows: Vec<usize> = ech.pivot_cols.iter().map(|&c| order[c]).collect();
    let targets: Vec<u64> = rows
        .iter()
        .map(|&i| {
            let members: Vec<u64> = inst.constraints()[i].rhs.members().collect();
            members[rng.random_range(0..members.len())]
        })
        .collect();
    let x = b
        .select_rows(&rows)
        .solve(&targets)
        .expect("dimensions agree")
        .expect("independent rows give a consistent system");
    (inst.evaluate_unchecked(&x), x)
}

/// Prange's algorithm with `restarts` independent attempts.
pub fn prange_solve(inst: &LinsatInstance, restarts: usize, seed: u64, exec: Exec) -> SolveResult {
    let start = Instant::now();
    let b = inst.matrix();
    let n = inst.num_vars();
    let attempts = exec.map(restarts.max(1), |r| prange_attempt(inst, &b, seed, r));
    let (_, x) = best_of(attempts).expect("at least one attempt");
    let mut res = SolveResult::new(inst, x, "prange", Some(seed), start);
    let rank = b.rank();
    if rank < n {
        res.notes.push(format!("constraint matrix has rank {rank} < {n}; free variables fixed to 0"));
    }
    res
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Brute,
    Anneal,
    Prange,
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "brute" => Ok(Self::Brute),
            "anneal" => Ok(Self::Anneal),
            "prange" => Ok(Self::Prange),
            _ => Err(format!("unknown solver {s:?} (expected brute, anneal or prange)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldOrder;
    use crate::linsat::{LinsatExpr, MergeMode};

    fn and_instance() -> LinsatInstance {
        crate::linsat::tests::and_instance()
    }

    pub(crate) fn random_instance(q: u64, n: usize, m: usize, seed: u64) -> LinsatInstance {
        let mut rng = stream_rng(seed, u64::MAX);
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
            inst.add_constraint(expr, &[(rng.random_range(0..q), 1)]).unwrap();
        }
        inst
    }

    #[test]
    fn brute_force_examples() {
        let r = brute_force(&and_instance(), 1 << 20, Exec::Sequential).unwrap();
        assert_eq!((r.weight, r.assignment.clone()), (3, vec![1, 1]));
        let empty = LinsatInstance::new(FieldOrder::new(2).unwrap());
        assert_eq!(brute_force(&empty, 1 << 20, Exec::Sequential).unwrap().weight, 0);
    }

    #[test]
    fn brute_force_lexicographic_tie() {
        let p = FieldOrder::new(3).unwrap();
        let mut inst = LinsatInstance::new(p);
        inst.new_var("a");
        inst.new_var("b");
        inst.add_constraint(LinsatExpr::var(0), &[(1, 1), (2, 1)]).unwrap();
        let r = brute_force(&inst, 1 << 20, Exec::Parallel).unwrap();
        assert_eq!(r.assignment, vec![1, 0]);
    }

    #[test]
    fn annealing_one_variable_and_determinism() {
        let p = FieldOrder::new(5).unwrap();
        let mut inst = LinsatInstance::new(p);
        inst.new_var("x");
        inst.add_constraint(LinsatExpr::var(0), &[(3, 2)]).unwrap();
        let r = simulated_annealing(&inst, &AnnealSchedule::default(), 1, Exec::Sequential);
        assert_eq!(r.assignment, vec![3]);
        let inst = random_instance(3, 6, 12, 4);
        let sched = AnnealSchedule { restarts: 4, ..Default::default() };
        let a = simulated_annealing(&inst, &sched, 9, Exec::Parallel);
        let b = simulated_annealing(&inst, &sched, 9, Exec::Sequential);
        assert_eq!((a.assignment, a.weight), (b.assignment, b.weight));
    }

    #[test]
    fn annealing_matches_brute_force_on_corpus() {
        let hits = (0..50)
            .filter(|&s| {
                let inst = random_instance(2, 8, 16, 1000 + s);
                let best = brute_force(&inst, 1 << 20, Exec::Sequential).unwrap().weight;
                simulated_annealing(&inst, &AnnealSchedule::default(), s, Exec::Sequential).weight == best
            })
            .count();
        assert!(hits >= 48, "{hits}/50");
    }

    #[test]
    fn prange_square_system() {
        let p = FieldOrder::new(5).unwrap();
        let mut inst = LinsatInstance::new(p);
        for v in 0..3 {
            inst.new_var(format!("x{v}"));
        }
        inst.add_constraint(LinsatExpr::new(p, [(0, 1), (1, 2)]), &[(3, 1)]).unwrap();
        inst.add_constraint(LinsatExpr::new(p, [(1, 1), (2, 4)]), &[(1, 1)]).unwrap();
        inst.add_constraint(LinsatExpr::new(p, [(0, 1), (2, 1)]), &[(4, 1)]).unwrap();
        let r = prange_solve(&inst, 1, 3, Exec::Sequential);
        assert_eq!(r.weight, 3);
        assert!(r.notes.is_empty());
    }

    #[test]
    fn prange_rank_deficient() {
        let p = FieldOrder::new(2).unwrap();
        let mut inst = LinsatInstance::new(p);
        inst.new_var("a");
        inst.new_var("b");
        inst.add_constraint(LinsatExpr::var(0), &[(1, 1)]).unwrap();
        let r = prange_solve(&inst, 2, 0, Exec::Sequential);
        assert_eq!(r.assignment, vec![1, 0]);
        assert_eq!(r.notes.len(), 1);
    }
}
