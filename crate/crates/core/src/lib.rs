//! Compile constraint models into Max-LINSAT instances over prime fields,
//! analyse the dual code of an instance, and estimate how Decoded Quantum
//! Interferometry (DQI) would perform on it compared with classical
//! baselines.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf`]: prime-field arithmetic and dense linear algebra.
//! * [`model`]: high-level models with integer variables and polynomial
//!   constraints and objectives.
//! * [`linsat`]: weighted Set-Max-LINSAT instances.
//! * [`gadgets`]: reusable constraint templates and gadget synthesis.
//! * [`transform`]: the lowering pipeline from models to instances.
//! * [`codes`], [`decoders`]: dual-code analysis and syndrome decoding.
//! * [`dqi`]: exact desk-scale DQI state construction and estimates.
//! * [`solvers`]: brute force, simulated annealing and Prange baselines.
//! * [`io`]: JSON interchange and reports.
//! * [`fixtures`]: small reference problems.

pub mod codes;
pub mod decoders;
pub mod dqi;
pub mod exec;
pub mod fixtures;
pub mod gadgets;
pub mod gf;
pub mod guard;
pub mod io;
pub mod linsat;
pub mod model;
pub mod solvers;
pub mod transform;

pub use exec::Exec;
pub use gf::{FieldElement, FieldMatrix, FieldOrder};
pub use linsat::{LinsatExpr, LinsatInstance, LinsatRhs};
pub use model::{ConstraintModel, IntExpr, IntVar, Rational, Relation};
