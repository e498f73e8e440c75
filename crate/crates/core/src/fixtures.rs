//! Small reference problems used by tests, benches and the command line.

use crate::gf::FieldOrder;
use crate::io::{Metadata, ProblemFile};
use crate::linsat::{LinsatExpr, LinsatInstance, MergeMode};
use crate::model::{ConstraintModel, IntExpr, Rational};

/// Knapsack: maximise the packed value, with the capacity constraint
/// weighted `2 * sum(values)` so it is never traded for value.
pub fn knapsack(items: &[(i64, i64)], capacity: i64) -> ConstraintModel {
    let mut m = ConstraintModel::new();
    let xs: Vec<_> = (0..items.len()).map(|i| m.new_binary_var(format!("x{i}"))).collect();
    let load: IntExpr = xs.iter().zip(items).map(|(x, &(w, _))| IntExpr::from(w) * x).sum();
    let value: IntExpr = xs.iter().zip(items).map(|(x, &(_, v))| IntExpr::from(v) * x).sum();
    let penalty: i64 = 2 * items.iter().map(|&(_, v)| v).sum::<i64>();
    m.add_constraint(load.le(capacity).with_weight(Rational::from_integer(penalty.max(1) as i128)))
        .expect("knapsack constraint is valid");
    m.add_objective(value, false).expect("knapsack objective is valid");
    m
}

pub fn default_knapsack() -> ConstraintModel {
    knapsack(&[(3, 5), (2, 3), (4, 6)], 5)
}

/// Minimum vertex cover: minimise the cover size, each edge rewarded with
/// weight 2 when covered.
pub fn vertex_cover(n: usize, edges: &[(usize, usize)]) -> ConstraintModel {
    let mut m = ConstraintModel::new();
    let xs: Vec<_> = (0..n).map(|i| m.new_binary_var(format!("x{i}"))).collect();
    let size: IntExpr = xs.iter().map(IntExpr::var).sum();
    m.add_objective(size, true).expect("cover objective is valid");
    for &(u, v) in edges {
        m.add_boolean_constraint(&xs[u] | &xs[v], 2).expect("cover constraint is valid");
    }
    m
}

/// Maximum 3-colourable subgraph as a model over `{0, 1, 2}`.
pub fn colouring_model(n: usize, edges: &[(usize, usize)]) -> ConstraintModel {
    let mut m = ConstraintModel::new();
    let xs: Vec<_> = (0..n).map(|i| m.new_var(format!("x{i}"), 0, 2).expect("bounds are valid")).collect();
    for &(u, v) in edges {
        m.add_constraint(IntExpr::var(&xs[u]).ne(&xs[v])).expect("colouring constraint is valid");
    }
    m
}

/// Maximum 3-colourable subgraph directly over GF(3): `x_u - x_v in {1, 2}`.
pub fn colouring_instance(n: usize, edges: &[(usize, usize)]) -> LinsatInstance {
    let p = FieldOrder::new(3).expect("3 is prime");
    let mut inst = LinsatInstance::new(p);
    for i in 0..n {
        inst.new_var(format!("x{i}"));
    }
    for &(u, v) in edges {
        inst.add_constraint(LinsatExpr::new(p, [(u, 1), (v, -1)]), &[(1, 1), (2, 1)])
            .expect("edge constraint is valid");
    }
    inst
}

pub const TRIANGLE: [(usize, usize); 3] = [(0, 1), (1, 2), (0, 2)];

/// `x1 AND x2` over GF(2): `x1 = 1`, `x2 = 1`, `x1 + x2 = 0`. Satisfies 3
/// constraints at (1, 1) and 1 elsewhere.
pub fn and_gadget_instance() -> LinsatInstance {
    let p = FieldOrder::new(2).expect("2 is prime");
    let mut inst = LinsatInstance::new(p);
    inst.new_var("x1");
    inst.new_var("x2");
    inst.add_constraint(LinsatExpr::var(0), &[(1, 1)]).expect("valid");
    inst.add_constraint(LinsatExpr::var(1), &[(1, 1)]).expect("valid");
    inst.add_constraint(LinsatExpr::new(p, [(0, 1), (1, 1)]), &[(0, 1)]).expect("valid");
    inst
}

/// AND as a Boolean objective of a model.
pub fn and_model() -> ConstraintModel {
    let mut m = ConstraintModel::new();
    let x = m.new_binary_var("x1");
    let y = m.new_binary_var("x2");
    m.add_boolean_constraint(&x & &y, Rational::from_integer(1)).expect("valid");
    m
}

/// Instance whose dual code is the length-3 repetition code `{000, 111}`.
pub fn repetition3_instance() -> LinsatInstance {
    let p = FieldOrder::new(2).expect("2 is prime");
    let mut inst = LinsatInstance::new(p);
    inst.new_var("a");
    inst.new_var("b");
    inst.add_constraint(LinsatExpr::var(0), &[(1, 1)]).expect("valid");
    inst.add_constraint(LinsatExpr::new(p, [(0, 1), (1, 1)]), &[(0, 1)]).expect("valid");
    inst.add_constraint(LinsatExpr::var(1), &[(1, 1)]).expect("valid");
    inst
}

/// Three GF(3) constraints `a + 2b`, `2b + c`, `2a + c` whose rows sum to
/// a dependency of size 3 with combination `(1, 2, 1)`.
pub fn eq3_instance() -> LinsatInstance {
    let p = FieldOrder::new(3).expect("3 is prime");
    let mut inst = LinsatInstance::with_merge_mode(p, MergeMode::Literal);
    for v in ["a", "b", "c"] {
        inst.new_var(v);
    }
    inst.add_constraint(LinsatExpr::new(p, [(0, 1), (1, 2)]), &[(1, 1), (2, 1)]).expect("valid");
    inst.add_constraint(LinsatExpr::new(p, [(1, 2), (2, 1)]), &[(0, 1)]).expect("valid");
    inst.add_constraint(LinsatExpr::new(p, [(0, 2), (2, 1)]), &[(1, 1)]).expect("valid");
    inst
}

/// Two identical rows `a + b = 0` plus `a = 1`; minimum distance 2.
pub fn duplicate_rows_instance() -> LinsatInstance {
    let p = FieldOrder::new(2).expect("2 is prime");
    let mut inst = LinsatInstance::with_merge_mode(p, MergeMode::Off);
    inst.new_var("a");
    inst.new_var("b");
    inst.add_constraint(LinsatExpr::new(p, [(0, 1), (1, 1)]), &[(0, 1)]).expect("valid");
    inst.add_constraint(LinsatExpr::new(p, [(0, 1), (1, 1)]), &[(0, 1)]).expect("valid");
    inst.add_constraint(LinsatExpr::var(0), &[(1, 1)]).expect("valid");
    inst
}

/// Max-Cut on a triangle over GF(2).
pub fn triangle_maxcut_instance() -> LinsatInstance {
    let p = FieldOrder::new(2).expect("2 is prime");
    let mut inst = LinsatInstance::new(p);
    for v in 0..3 {
        inst.new_var(format!("x{v}"));
    }
    for (u, v) in TRIANGLE {
        inst.add_constraint(LinsatExpr::new(p, [(u, 1), (v, 1)]), &[(1, 1)]).expect("valid");
    }
    inst
}

/// Every shipped fixture as `(file stem, problem file)`.
pub fn all() -> Vec<(&'static str, ProblemFile)> {
    let meta = |name: &str, what: &str| Metadata { name: Some(name.into()), provenance: Some(what.into()) };
    vec![
        ("knapsack", ProblemFile::constraint(default_knapsack(), meta("knapsack", "3-item knapsack, capacity 5"))),
        (
            "vertex_cover",
            ProblemFile::constraint(
                vertex_cover(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]),
                meta("vertex_cover", "minimum vertex cover on a 4-node graph"),
            ),
        ),
        (
            "triangle_colouring",
            ProblemFile::constraint(
                colouring_model(3, &TRIANGLE),
                meta("triangle_colouring", "3-colourable subgraph of a triangle"),
            ),
        ),
        (
            "and_gadget",
            ProblemFile::linsat(and_gadget_instance(), meta("and_gadget", "x1 AND x2 as three GF(2) constraints")),
        ),
        ("and_model", ProblemFile::constraint(and_model(), meta("and_model", "x1 AND x2 as a Boolean objective"))),
        (
            "repetition3",
            ProblemFile::linsat(
                repetition3_instance(),
                meta("repetition3", "dual code is the length-3 repetition code"),
            ),
        ),
        ("eq3", ProblemFile::linsat(eq3_instance(), meta("eq3", "three GF(3) rows with one size-3 dependency"))),
        (
            "duplicate_rows",
            ProblemFile::linsat(duplicate_rows_instance(), meta("duplicate_rows", "two identical GF(2) rows")),
        ),
        (
            "triangle_maxcut",
            ProblemFile::linsat(triangle_maxcut_instance(), meta("triangle_maxcut", "Max-Cut on a triangle")),
        ),
    ]
}
