//! Passive target localization from hybrid RSS/TOA measurements.
//!
//! A target transmits from an unknown 2-D position with an unknown reference
//! power and clock bias; N receivers each report a received signal strength
//! (log-normal path loss) and a time of arrival (range over c plus the
//! bias). The maximum-likelihood estimate minimizes a weighted sum of
//! squared RSS and TOA residuals over the four unknowns — a nonconvex
//! problem with no closed form, so it is solved numerically.
//!
//! The crate provides:
//!
//! - [`model`] — scenarios and seeded synthetic measurement generation;
//! - [`objective`] — the ML cost, its weighting factor, and the analytic
//!   gradient;
//! - [`optim`] — three solvers: exhaustive grid search, fixed-rate gradient
//!   descent, and particle swarm optimization;
//! - [`experiment`] — a Monte Carlo harness that compares the solvers'
//!   accuracy (RMSE, percentiles, CDF) and wall-clock cost on the same
//!   measurement sets.
//!
//! All randomness flows from explicit seeds; equal seeds give bit-identical
//! results everywhere, including PSO.

pub mod experiment;
pub mod model;
pub mod objective;
pub mod optim;

pub use experiment::{
    cdf_points, percentile, rmse, run_experiment, run_trial, BenchError, ExperimentConfig,
    ExperimentReport, GdSettings, GridSettings, InitStrategy, PsoSettings, SolverFailure,
    SolverSummary, TrialOutcome, TrialSolve,
};
pub use model::{
    distance, make_ring_scenario, rss_mean, sample_measurements, toa_mean, MeasurementSet,
    ModelError, Position2D, Scenario, SignalParams, D_MIN, SPEED_OF_LIGHT,
};
pub use objective::{cost, cost_gradient, weight, ObjectiveContext, ObjectiveError, ParamVector};
pub use optim::{
    coarse_grid_init, gradient_descent, grid_search, pso, GdConfig, GridSpec, PsoConfig,
    SolveResult, SolverError, SolverKind,
};
