//! Production-planning toolkit for refinery-petrochemical complexes.
//!
//! The crate is organized around a pipeline:
//!
//! 1. [`schema`] loads an instance bundle (sets, parameters, bounds) from a
//!    directory of plain-text tables and validates its cross references.
//! 2. [`network`] materializes the port-stream topology and checks its
//!    structural soundness.
//! 3. [`formulation`] generates the planning model — material balances,
//!    swing-cut distillation, delta-base yields, pooling, blending,
//!    inventory, capacity and the profit objective — into the solver-agnostic
//!    bilinear IR of [`model`].
//! 4. [`relax`] produces valid linear relaxations (bound inference,
//!    McCormick envelopes, optional digit-wise disaggregation).
//! 5. [`solver`] holds an embedded sparse-simplex LP solver, a small
//!    branch-and-bound loop for the inventory binaries, and a successive
//!    linearization heuristic for feasible plans.
//! 6. [`validation`] checks candidate plans against the exact nonlinear
//!    constraints, accounts profit, calibrates fixed-yield plans against the
//!    delta-base yield model and classifies the induced violations.
//! 7. [`io`] serializes models (MPS / LP text), plans and reports.

pub mod formulation;
pub mod io;
pub mod model;
pub mod network;
pub mod plan;
pub mod propagate;
pub mod relax;
pub mod schema;
pub mod solver;
pub mod validation;

pub use model::{AlgebraicModel, ConstraintExpr, ModelStatistics, VarId, VarKind};
pub use plan::PlanSolution;
pub use schema::BenchmarkInstance;
