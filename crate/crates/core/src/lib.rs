//! Optimal screening-then-allocation policies for a budget-constrained
//! decision maker.
//!
//! A lender may pay to screen applicants (revealing a sharper estimate of the
//! utility of lending to them) before allocating loans. For any fixed
//! per-group threshold policy the best screening probabilities solve a small
//! linear program; sweeping the finitely many distinct thresholds yields a
//! globally optimal pair. The crate also traces diversity-constrained Pareto
//! frontiers, evaluates policies exactly and by simulation, and generates
//! the synthetic and credit-data instances used to study them.

pub mod coefficients;
pub mod data;
pub mod evaluator;
pub mod fixtures;
pub mod linprog;
pub mod model;
pub mod optimizer;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;

pub use coefficients::{derive_coefficients, Coefficients};
pub use evaluator::{exact_evaluate, monte_carlo_evaluate, EvalReport};
pub use linprog::{solve_lp, LinearProgram, LpSolution, LpStatus};
pub use model::{
    validate_instance, Applicant, ConstraintMode, DiscreteDistribution, DiversityConstraint, ProblemInstance,
    ScreeningPolicy, SolveResult, SolveStatus, ThresholdPolicy, UtilitySpec,
};
pub use optimizer::{no_screening_baseline, pareto_frontier, sweep_solve, SolveError, SweepConfig};
