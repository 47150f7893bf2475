//! Correctional learning with optimal transport.
//!
//! A teacher who knows the true parameter `theta0` corrects a student's
//! observation sequence, under a budget on the total correction cost, so that
//! the student's estimator lands closer to `theta0`. The pipeline is:
//!
//! 1. build the empirical measure of the observations ([`measure`]);
//! 2. linearize the estimator around it with a numerical Gateaux derivative
//!    ([`estimators`]);
//! 3. solve a budget-constrained transport problem for the plan `alpha` and
//!    turn it into per-sample correction probabilities ([`solver`]);
//! 4. pick an actual corrected sequence with one of the intervention policies
//!    ([`policies`]).
//!
//! [`harness`] runs seeded Monte Carlo sweeps of the whole pipeline and
//! [`cli`] exposes it as a command-line tool.

pub mod cli;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod measure;
pub mod policies;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
pub use estimators::{
    irl_weight_update, numerical_gradient, Estimator, EstimatorSpec, IrlUpdateEstimator, MeanEstimator,
    ParameterVector, VarianceEstimator, WeibullScaleEstimator,
};
pub use harness::{run_monte_carlo, summarize, ExperimentConfig, RunRecord};
pub use measure::{
    build_cost_matrix, empirical_measure, sequence_cost, CostFunctionSpec, EmpiricalMeasure, SampleSequence,
    StateSpace,
};
pub use policies::{
    batch_policy, greedy_policy, oracle_search, receding_horizon_policy, sample_modified_sequence, teach,
    InterventionResult, Policy, SolverInputs, TeacherConfig,
};
pub use solver::{assemble_problem, conditional_pmf, solve_alpha, ConditionalPmf, SolverOptions, TransportPlanAlpha};
