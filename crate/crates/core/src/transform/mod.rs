//! Lowering pipeline from [`ConstraintModel`]s to Max-LINSAT instances.
//!
//! 1. [`lower_polynomials`]: nonlinear binary terms become weighted parity
//!    constraints and auxiliary product variables.
//! 2. [`plan_prime`] and [`lower_to_modular`]: linear integer constraints
//!    and objectives become weighted set constraints over GF(p).
//! 3. [`LinsatInstance::to_unweighted`], [`repair_duplicates`] and
//!    [`equalize_set_sizes`]: the unweighted, duplicate-free image.
//!
//! The [`TransformCertificate`] relates source values to target weights.

mod modular;
mod poly;
mod sets;

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

pub use modular::{
    lower_linear_objective, lower_to_modular, plan_prime, ConstraintPlan, DropReason, DroppedConstraint,
    LinearObjectiveEncoding, ModularLowering, PrimeBound, PrimePlan, TransformCertificate, VarMapping, MAX_PRIME,
};
pub use poly::{
    fourier_coefficients, fourier_lower, lower_polynomials, AuxVar, LinearModel, ParityConstraint, ParityTerm,
    PseudoBoolean, DEFAULT_DEGREE_THRESHOLD,
};
pub use sets::{attainable_residues, equalize_set_sizes, round_weights, Equalized, Rounded};

use crate::codes::{find_dependent_row_sets_with, DependencyReport, DEFAULT_DISTANCE_CAP};
use crate::exec::Exec;
use crate::gadgets::repair_duplicates;
use crate::guard::GuardExceeded;
use crate::linsat::{LinsatError, LinsatInstance, Origin, Provenance};
use crate::model::{ConstraintModel, ModelError, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("{0} is not linear")]
    NotLinear(String),
    #[error("nonlinear term over non-binary variable {var} in {context}")]
    NonBinaryNonlinear { var: usize, context: String },
    #[error("prime {p} is too small for {what}")]
    PrimeTooSmall { p: u64, what: String },
    #[error("required prime exceeds the supported maximum (bound {0})")]
    PrimeTooLarge(i128),
    #[error("integer weights overflow u64")]
    WeightOverflow,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linsat(#[from] LinsatError),
    #[error(transparent)]
    Guard(#[from] GuardExceeded),
}

/// Legend category of a transformation edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeCategory {
    ConstraintIncreasing,
    AuxAdding,
    DependencyCreating,
    Favourable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeReport {
    pub edge: &'static str,
    pub category: EdgeCategory,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Applied edges in pipeline order.
    pub edges: Vec<EdgeReport>,
    pub prime: u64,
    pub weighted_constraints: usize,
    pub unweighted_constraints: usize,
    /// Factor divided out of the weights by the unweighted view.
    pub weight_gcd: u64,
    /// Pins added by duplicate repair (both repair rounds), each of weight 1
    /// in the unweighted instance.
    pub pins: usize,
    /// Common set size of the non-pin rows of the unweighted instance.
    pub set_size: usize,
    pub padded: usize,
    pub dropped: Vec<DroppedConstraint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependencies: Option<DependencyReport>,
}

impl Diagnostics {
    /// Optimum of the unweighted instance given the weighted optimum.
    pub fn unweighted_optimum(&self, weighted_optimum: u64) -> u64 {
        weighted_optimum / self.weight_gcd.max(1) + self.pins as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    pub degree_threshold: u32,
    /// Pad sets with unattainable residues before equalizing.
    pub pad_sets: bool,
    /// Dependent row sets are searched up to this size; `None` skips the
    /// search.
    pub dependency_cap: Option<usize>,
    pub dependency_subset_limit: u128,
    pub exec: Exec,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            degree_threshold: DEFAULT_DEGREE_THRESHOLD,
            pad_sets: false,
            dependency_cap: Some(DEFAULT_DISTANCE_CAP),
            dependency_subset_limit: 1 << 20,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub weighted: LinsatInstance,
    pub unweighted: LinsatInstance,
    pub certificate: TransformCertificate,
    pub diagnostics: Diagnostics,
}

/// Runs every pass on `model`.
pub fn full_pipeline(model: &ConstraintModel, opts: &PipelineOptions) -> Result<PipelineOutput, TransformError> {
    let mut edges = Vec::new();
    let mut edge = |edge, category, detail: String| edges.push(EdgeReport { edge, category, detail });

    let lm = lower_polynomials(model, opts.degree_threshold)?;
    let threshold = opts.degree_threshold.max(2);
    let split_terms = model
        .objectives
        .iter()
        .flat_map(|o| o.expr.terms().keys())
        .filter(|m| m.degree() >= threshold && m.vars().len() as u32 >= threshold)
        .count();
    if split_terms > 0 {
        edge("degree_reduction", EdgeCategory::AuxAdding, format!("{split_terms} high-degree objective terms split"));
    }
    let nonlinear = model.constraints.iter().filter(|c| !c.expr.is_linear()).count();
    if nonlinear > 0 {
        edge(
            "nonlinear_constraint_substitution",
            EdgeCategory::AuxAdding,
            format!("{nonlinear} constraints rewritten over product variables"),
        );
    }
    let count = |o: Origin| lm.provenance.iter().filter(|p| p.origin == o).count();
    let parities = count(Origin::Objective) + count(Origin::AuxDefinition);
    if parities > 0 {
        edge(
            "pseudo_boolean_to_parity",
            EdgeCategory::DependencyCreating,
            format!("{parities} parity constraints, {} aux variables", lm.aux.len()),
        );
    }

    let plan = plan_prime(&lm.model)?;
    let lowered = lower_to_modular(&lm, &plan)?;
    if lowered.objective_constraints > 0 {
        edge(
            "binary_expansion_objective",
            EdgeCategory::ConstraintIncreasing,
            format!("{} unary set constraints", lowered.objective_constraints),
        );
    }
    if !model.constraints.is_empty() {
        edge("relational_encoding", EdgeCategory::Favourable, format!("encoded over {}", plan.p));
    }
    if lowered.reencoded > 0 {
        edge("modulus_reencoding", EdgeCategory::Favourable, format!("{} modular constraints", lowered.reencoded));
    }
    let ranges = lowered.certificate.range_constraints;
    if ranges > 0 {
        edge("range_constraints", EdgeCategory::ConstraintIncreasing, format!("{ranges} range constraints"));
    }
    let weighted = lowered.instance;

    let (dup, map) = weighted.to_unweighted();
    if dup.num_constraints() > weighted.num_constraints() {
        edge(
            "weight_duplication",
            EdgeCategory::DependencyCreating,
            format!(
                "{} rows from {} (weight gcd {})",
                dup.num_constraints(),
                weighted.num_constraints(),
                map.weight_gcd
            ),
        );
    }
    let repair = repair_duplicates(&dup);
    let spans: Vec<u64> = lowered.certificate.variables.iter().map(|v| (v.upper - v.lower) as u64).collect();
    let eq = equalize_set_sizes(&repair.instance, opts.pad_sets.then_some(spans.as_slice()));
    let pins = repair.pins + eq.pins;
    if pins > 0 {
        edge("duplicate_repair", EdgeCategory::AuxAdding, format!("{pins} pin variables"));
    }
    if eq.split > 0 || eq.padded > 0 {
        edge(
            "set_size_equalization",
            EdgeCategory::ConstraintIncreasing,
            format!("set size {}, {} sets split, {} values padded", eq.set_size, eq.split, eq.padded),
        );
    }

    let dependencies = opts.dependency_cap.map(|cap| {
        let prov: Vec<Provenance> = weighted.constraints().iter().map(|c| c.provenance).collect();
        find_dependent_row_sets_with(&weighted.matrix(), Some(&prov), cap, opts.dependency_subset_limit, opts.exec)
    });
    let diagnostics = Diagnostics {
        edges,
        prime: plan.p.get(),
        weighted_constraints: weighted.num_constraints(),
        unweighted_constraints: eq.instance.num_constraints(),
        weight_gcd: map.weight_gcd,
        pins,
        set_size: eq.set_size,
        padded: eq.padded,
        dropped: lowered.dropped,
        dependencies,
    };
    Ok(PipelineOutput { weighted, unweighted: eq.instance, certificate: lowered.certificate, diagnostics })
}

/// Source value of a target weight as a float, for reports.
pub fn source_value_f64(cert: &TransformCertificate, target: u64) -> f64 {
    cert.source_value(Rational::from_integer(target as i128)).to_f64().unwrap_or(f64::NAN)
}
