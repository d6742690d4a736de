//! Monte Carlo experiment harness: repeated trials per receiver-ring radius,
//! accuracy metrics, CDF data, and per-solver wall-clock timing.
//!
//! Every trial derives its own sub-seed as `master_seed + trial_index`, so
//! any single trial is independently reproducible. All three solvers see the
//! identical measurement set within a trial, and timing wraps the solve call
//! only. Trials run sequentially: recorded wall times must not compete with
//! concurrent load from the harness itself.

use std::time::Instant;

use crate::model::{
    distance, make_ring_scenario, sample_measurements, ModelError, Position2D, Scenario,
    SignalParams,
};
use crate::objective::{ObjectiveContext, ObjectiveError, ParamVector};
use crate::optim::{
    coarse_grid_init, gradient_descent, grid_search, pso, GdConfig, GridSpec, PsoConfig,
    SolverError, SolverKind,
};

/// How the per-trial initial guess (and search-box center) is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitStrategy {
    /// Offset from the true target, with absolute p0 and range-bias starts.
    /// Only meaningful for synthetic benchmarks where the truth is known.
    TruthOffset { dx: f64, dy: f64, p0: f64, b: f64 },
    /// Truth-free: coarse position grid over the receivers' bounding box
    /// (expanded by the ring radius), p0 and range bias at the given values.
    CoarseGrid { nx: usize, ny: usize, p0: f64, b: f64 },
}

impl InitStrategy {
    /// The benchmark-reproduction default: 20 m behind the truth in both
    /// axes, p0 from -60 dBm, range bias from 1350 m.
    pub fn truth_offset_default() -> Self {
        InitStrategy::TruthOffset {
            dx: -20.0,
            dy: -20.0,
            p0: -60.0,
            b: 1350.0,
        }
    }

    pub fn coarse_grid_default() -> Self {
        InitStrategy::CoarseGrid {
            nx: 16,
            ny: 16,
            p0: -60.0,
            b: 1350.0,
        }
    }

    /// Produces the initial guess. `truth` is required by
    /// [`InitStrategy::TruthOffset`]; the coarse grid scans the receivers'
    /// bounding box expanded by `expand_m` on every side.
    pub fn resolve(
        &self,
        truth: Option<Position2D>,
        ctx: &ObjectiveContext,
        expand_m: f64,
    ) -> Result<ParamVector, BenchError> {
        match *self {
            InitStrategy::TruthOffset { dx, dy, p0, b } => {
                let t = truth.ok_or(BenchError::InvalidConfig {
                    what: "truth-offset init needs the true target position".into(),
                })?;
                Ok(ParamVector::new(t.x + dx, t.y + dy, p0, b))
            }
            InitStrategy::CoarseGrid { nx, ny, p0, b } => {
                let xs = ctx.receivers().iter().map(|r| r.x);
                let ys = ctx.receivers().iter().map(|r| r.y);
                let x_lo = xs.clone().fold(f64::INFINITY, f64::min) - expand_m;
                let x_hi = xs.fold(f64::NEG_INFINITY, f64::max) + expand_m;
                let y_lo = ys.clone().fold(f64::INFINITY, f64::min) - expand_m;
                let y_hi = ys.fold(f64::NEG_INFINITY, f64::max) + expand_m;
                coarse_grid_init(ctx, (x_lo, x_hi), (y_lo, y_hi), p0, b, nx, ny)
                    .map_err(BenchError::Solver)
            }
        }
    }
}

/// Grid-search settings; the position half-span defaults to the ring radius,
/// mirroring a search space of twice the target–receiver distance.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSettings {
    /// Position half-span in meters; `None` uses the scenario radius.
    pub xy_half_span_m: Option<f64>,
    pub p0_half_span_db: f64,
    pub b_half_span_m: f64,
    /// Per-coordinate steps: x m, y m, p0 dB, b m.
    pub interval: [f64; 4],
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            xy_half_span_m: None,
            p0_half_span_db: 3.0,
            b_half_span_m: 25.0,
            interval: [1.0, 1.0, 0.5, 5.0],
        }
    }
}

/// Gradient-descent settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GdSettings {
    pub gamma: f64,
    pub max_iters: usize,
    pub grad_tol: Option<f64>,
}

impl Default for GdSettings {
    fn default() -> Self {
        Self {
            gamma: 0.001,
            max_iters: 200,
            grad_tol: None,
        }
    }
}

/// Particle-swarm settings.
#[derive(Debug, Clone, PartialEq)]
pub struct PsoSettings {
    pub max_iters: usize,
    pub swarm_size: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for PsoSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            swarm_size: 100,
            inertia: 0.8,
            c1: 0.1,
            c2: 0.1,
        }
    }
}

/// Full Monte Carlo experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub target: Position2D,
    pub radii_m: Vec<f64>,
    pub trials_per_radius: usize,
    pub n_receivers: usize,
    pub signal: SignalParams,
    pub init: InitStrategy,
    pub grid: GridSettings,
    pub gd: GdSettings,
    pub pso: PsoSettings,
    pub solvers: Vec<SolverKind>,
    pub master_seed: u64,
    /// When false, solve calls are not timed and every time field is 0.0,
    /// making the whole report a pure function of the config.
    pub measure_time: bool,
    /// Run one discarded untimed trial per solver before measuring.
    pub warmup: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            target: Position2D::new(0.0, 0.0),
            radii_m: vec![50.0, 100.0, 150.0, 200.0],
            trials_per_radius: 90,
            n_receivers: 4,
            signal: SignalParams::defaults(),
            init: InitStrategy::truth_offset_default(),
            grid: GridSettings::default(),
            gd: GdSettings::default(),
            pso: PsoSettings::default(),
            solvers: SolverKind::ALL.to_vec(),
            master_seed: 1,
            measure_time: true,
            warmup: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        self.signal.validate().map_err(BenchError::Model)?;
        if self.radii_m.is_empty() {
            return Err(BenchError::InvalidConfig {
                what: "at least one radius is required".into(),
            });
        }
        if self.radii_m.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(BenchError::InvalidConfig {
                what: "radii must be positive and finite".into(),
            });
        }
        if self.trials_per_radius == 0 {
            return Err(BenchError::InvalidConfig {
                what: "trials_per_radius must be at least 1".into(),
            });
        }
        if self.n_receivers == 0 {
            return Err(BenchError::InvalidConfig {
                what: "n_receivers must be at least 1".into(),
            });
        }
        if self.solvers.is_empty() {
            return Err(BenchError::InvalidConfig {
                what: "at least one solver must be selected".into(),
            });
        }
        Ok(())
    }
}

/// One solver's outcome within a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSolve {
    pub estimate: ParamVector,
    /// 2-D position error against the scenario truth, in meters.
    pub error_m: f64,
    /// Wall time of the solve call alone; 0.0 when timing is disabled.
    pub time_s: f64,
    pub evaluations: u64,
}

/// A solver failure recorded inside a trial; other solvers are unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverFailure {
    pub message: String,
}

/// Everything recorded for one Monte Carlo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub radius_m: f64,
    pub trial_index: usize,
    pub seed: u64,
    pub solves: Vec<(SolverKind, Result<TrialSolve, SolverFailure>)>,
}

/// Aggregated per-solver metrics over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSummary {
    pub solver: SolverKind,
    /// Position errors of successful trials, in trial order.
    pub errors_m: Vec<f64>,
    pub rmse_m: f64,
    pub p80_m: f64,
    pub p95_m: f64,
    pub mean_time_s: f64,
    pub mean_evaluations: f64,
    pub failures: usize,
}

/// Full experiment output: raw trials plus per-solver summaries. Every
/// summary field is recomputable from the stored trial records.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub trials: Vec<TrialOutcome>,
    pub summaries: Vec<SolverSummary>,
}

/// Root mean square of a nonempty error list.
pub fn rmse(errors: &[f64]) -> Result<f64, BenchError> {
    if errors.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    Ok((errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt())
}

/// Nearest-rank percentile: sort ascending and take the element at 1-based
/// index `ceil(q/100 · n)`. Exact and interpolation-free.
pub fn percentile(errors: &[f64], q: f64) -> Result<f64, BenchError> {
    if errors.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    if !(q > 0.0 && q <= 100.0) {
        return Err(BenchError::InvalidQuantile { q });
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("errors must be comparable"));
    let rank = (q / 100.0 * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.clamp(1, sorted.len()) - 1])
}

/// Empirical CDF support points: sorted errors paired with k/n.
pub fn cdf_points(errors: &[f64]) -> Result<Vec<(f64, f64)>, BenchError> {
    if errors.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("errors must be comparable"));
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(k, e)| (e, (k + 1) as f64 / n))
        .collect())
}

/// Runs every configured solver once on the same sampled measurement set.
///
/// `timed` controls wall-clock measurement; warm-up callers pass `false`.
pub fn run_trial(
    scenario: &Scenario,
    cfg: &ExperimentConfig,
    radius_m: f64,
    trial_index: usize,
    trial_seed: u64,
    timed: bool,
) -> Result<TrialOutcome, BenchError> {
    let measurements = sample_measurements(scenario, trial_seed).map_err(BenchError::Model)?;
    let ctx = ObjectiveContext::from_scenario(scenario, measurements)
        .map_err(BenchError::Objective)?;
    let init = cfg.init.resolve(Some(scenario.target()), &ctx, radius_m)?;

    let xy_half = cfg.grid.xy_half_span_m.unwrap_or(radius_m);
    let grid_spec = GridSpec {
        center: init,
        half_span: [
            xy_half,
            xy_half,
            cfg.grid.p0_half_span_db,
            cfg.grid.b_half_span_m,
        ],
        interval: cfg.grid.interval,
    };
    let gd_cfg = GdConfig {
        init,
        gamma: cfg.gd.gamma,
        max_iters: cfg.gd.max_iters,
        grad_tol: cfg.gd.grad_tol,
    };
    let pso_cfg = PsoConfig {
        max_iters: cfg.pso.max_iters,
        swarm_size: cfg.pso.swarm_size,
        lower: ParamVector::from_array(
            std::array::from_fn(|k| init.to_array()[k] - grid_spec.half_span[k]),
        ),
        upper: ParamVector::from_array(
            std::array::from_fn(|k| init.to_array()[k] + grid_spec.half_span[k]),
        ),
        inertia: cfg.pso.inertia,
        c1: cfg.pso.c1,
        c2: cfg.pso.c2,
        // Decorrelated from the measurement-noise stream but still a pure
        // function of the trial seed.
        seed: trial_seed.wrapping_add(0x9E37_79B9_7F4A_7C15),
    };

    let mut solves = Vec::with_capacity(cfg.solvers.len());
    for &solver in &cfg.solvers {
        let started = Instant::now();
        let outcome = match solver {
            SolverKind::Grid => grid_search(&ctx, &grid_spec),
            SolverKind::Gd => gradient_descent(&ctx, &gd_cfg),
            SolverKind::Pso => pso(&ctx, &pso_cfg),
        };
        let elapsed = started.elapsed().as_secs_f64();
        let record = match outcome {
            Ok(result) => Ok(TrialSolve {
                error_m: distance(result.estimate.position(), scenario.target()),
                estimate: result.estimate,
                time_s: if timed { elapsed } else { 0.0 },
                evaluations: result.evaluations,
            }),
            Err(e) => Err(SolverFailure {
                message: e.to_string(),
            }),
        };
        solves.push((solver, record));
    }

    Ok(TrialOutcome {
        radius_m,
        trial_index,
        seed: trial_seed,
        solves,
    })
}

/// Runs the full experiment: a ring scenario per radius, `trials_per_radius`
/// trials each, aggregated per solver over all trials.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;

    let scenarios: Vec<(f64, Scenario)> = cfg
        .radii_m
        .iter()
        .map(|&radius| {
            make_ring_scenario(cfg.target, radius, cfg.n_receivers, cfg.signal)
                .map(|sc| (radius, sc))
                .map_err(BenchError::Model)
        })
        .collect::<Result<_, _>>()?;

    if cfg.warmup {
        // Untimed and discarded: first-call overheads never enter averages.
        let (radius, scenario) = &scenarios[0];
        run_trial(scenario, cfg, *radius, 0, cfg.master_seed, false)?;
    }

    let mut trials = Vec::with_capacity(cfg.radii_m.len() * cfg.trials_per_radius);
    let mut index: u64 = 0;
    for (radius, scenario) in &scenarios {
        for t in 0..cfg.trials_per_radius {
            let seed = cfg.master_seed.wrapping_add(index);
            trials.push(run_trial(scenario, cfg, *radius, t, seed, cfg.measure_time)?);
            index += 1;
        }
    }

    let summaries = summarize(&cfg.solvers, &trials)?;
    Ok(ExperimentReport { trials, summaries })
}

/// Aggregates trial records into per-solver summaries; failures are excluded
/// from the metrics and surfaced as a count.
pub fn summarize(
    solvers: &[SolverKind],
    trials: &[TrialOutcome],
) -> Result<Vec<SolverSummary>, BenchError> {
    solvers
        .iter()
        .map(|&solver| {
            let mut errors = Vec::new();
            let mut times = Vec::new();
            let mut evals = Vec::new();
            let mut failures = 0usize;
            for trial in trials {
                for (kind, result) in &trial.solves {
                    if *kind != solver {
                        continue;
                    }
                    match result {
                        Ok(s) => {
                            errors.push(s.error_m);
                            times.push(s.time_s);
                            evals.push(s.evaluations as f64);
                        }
                        Err(_) => failures += 1,
                    }
                }
            }
            if errors.is_empty() {
                return Err(BenchError::AllTrialsFailed { solver });
            }
            Ok(SolverSummary {
                solver,
                rmse_m: rmse(&errors)?,
                p80_m: percentile(&errors, 80.0)?,
                p95_m: percentile(&errors, 95.0)?,
                mean_time_s: times.iter().sum::<f64>() / times.len() as f64,
                mean_evaluations: evals.iter().sum::<f64>() / evals.len() as f64,
                failures,
                errors_m: errors,
            })
        })
        .collect()
}

/// Errors raised by the experiment harness and its metrics.
#[derive(Debug, Clone, PartialEq)]
pub enum BenchError {
    EmptyInput,
    InvalidQuantile { q: f64 },
    InvalidConfig { what: String },
    AllTrialsFailed { solver: SolverKind },
    Model(ModelError),
    Objective(ObjectiveError),
    Solver(SolverError),
}

impl std::fmt::Display for BenchError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BenchError::EmptyInput => write!(f, "metric input must be nonempty"),
            BenchError::InvalidQuantile { q } => {
                write!(f, "quantile must satisfy 0 < q <= 100, got {q}")
            }
            BenchError::InvalidConfig { what } => write!(f, "invalid experiment config: {what}"),
            BenchError::AllTrialsFailed { solver } => {
                write!(f, "every trial failed for solver {solver}")
            }
            BenchError::Model(e) => write!(f, "{e}"),
            BenchError::Objective(e) => write!(f, "{e}"),
            BenchError::Solver(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for BenchError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            BenchError::Model(e) => Some(e),
            BenchError::Objective(e) => Some(e),
            BenchError::Solver(e) => Some(e),
            _ => None,
        }
    }
}
