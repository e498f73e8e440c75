//! Cross-module properties on random pseudo-Boolean models.

use proptest::prelude::*;

use maxlinsat_core::io::{Metadata, Problem, ProblemFile};
use maxlinsat_core::solvers::{brute_force, prange_solve, simulated_annealing, AnnealSchedule};
use maxlinsat_core::transform::{full_pipeline, PipelineOptions};
use maxlinsat_core::{ConstraintModel, Exec, IntExpr, Rational};

/// Terms are `(coefficient, variable mask)` over `n` binary variables.
fn build(n: usize, terms: &[(i64, u8)], constraint: Option<(Vec<i64>, i64)>) -> ConstraintModel {
    let mut m = ConstraintModel::new();
    let vars: Vec<_> = (0..n).map(|i| m.new_binary_var(format!("b{i}"))).collect();
    let mut obj = IntExpr::zero();
    for &(c, mask) in terms {
        let mono = (0..n).filter(|&i| mask >> i & 1 == 1).fold(IntExpr::constant(1), |acc, i| acc * &vars[i]);
        obj = obj + c * mono;
    }
    if !obj.is_zero() {
        m.add_objective(obj, false).unwrap();
    }
    if let Some((coeffs, bound)) = constraint {
        let lhs = coeffs.iter().zip(&vars).fold(IntExpr::zero(), |acc, (&c, v)| acc + c * IntExpr::var(v));
        m.add_constraint(lhs.le(bound).with_weight(Rational::from_integer(2))).unwrap();
    }
    m
}

fn model_strategy() -> impl Strategy<Value = ConstraintModel> {
    (2usize..=4).prop_flat_map(|n| {
        let terms = prop::collection::vec((-3i64..=3, 1u8..(1 << n)), 1..=4);
        let constraint = prop::option::of((prop::collection::vec(-2i64..=2, n), -1i64..=2));
        (Just(n), terms, constraint).prop_map(|(n, t, c)| build(n, &t, c))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn encoded_assignments_follow_the_certificate(model in model_strategy()) {
        let out = full_pipeline(&model, &PipelineOptions { dependency_cap: None, ..Default::default() }).unwrap();
        let cert = &out.certificate;
        for i in 0..model.assignment_count().unwrap() {
            let x = model.assignment_at(i);
            let y = cert.encode(&x);
            let got = Rational::from_integer(out.weighted.evaluate(&y).unwrap() as i128);
            prop_assert_eq!(got, cert.target_value(model.evaluate(&x).unwrap().total()));
            prop_assert_eq!(cert.decode(&y), Some(x));
        }
    }

    #[test]
    fn heuristics_never_beat_brute_force(model in model_strategy(), seed in 0u64..1000) {
        let out = full_pipeline(&model, &PipelineOptions { dependency_cap: None, ..Default::default() }).unwrap();
        let inst = &out.weighted;
        let best = brute_force(inst, 1 << 20, Exec::Sequential).unwrap();
        let anneal = simulated_annealing(inst, &AnnealSchedule::default(), seed, Exec::Sequential);
        let prange = prange_solve(inst, 4, seed, Exec::Sequential);
        prop_assert!(anneal.weight <= best.weight);
        prop_assert!(prange.weight <= best.weight);
        prop_assert_eq!(inst.evaluate(&anneal.assignment).unwrap(), anneal.weight);
        let decoded = out.certificate.decode(&best.assignment).expect("optimum decodes in range");
        let source = model.evaluate(&decoded).unwrap().total();
        prop_assert_eq!(out.certificate.target_value(source), Rational::from_integer(best.weight as i128));
    }

    #[test]
    fn pipeline_outputs_survive_a_file_round_trip(model in model_strategy()) {
        let out = full_pipeline(&model, &PipelineOptions::default()).unwrap();
        for inst in [&out.weighted, &out.unweighted] {
            let file = ProblemFile::linsat(inst.clone(), Metadata::default());
            let text = file.to_json();
            let back = ProblemFile::from_json(&text).unwrap();
            prop_assert_eq!(back.to_json(), text);
            prop_assert_eq!(back.problem, Problem::Linsat(inst.clone()));
        }
        let source = ProblemFile::constraint(model.clone(), Metadata::default());
        prop_assert_eq!(ProblemFile::from_json(&source.to_json()).unwrap().problem, Problem::Constraint(model));
    }
}
