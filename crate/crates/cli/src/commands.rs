//! The three CLI verbs: solve, bench, scenario.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use rtloc_core::{
    cdf_points, distance, gradient_descent, grid_search, make_ring_scenario, pso, run_experiment,
    sample_measurements, BenchError, ExperimentReport, GdConfig, GridSpec, ParamVector,
    Position2D, PsoConfig, SolveResult, SolverKind,
};

use crate::config::{parse_solver_choice, FileConfig};
use crate::fixture::{Fixture, FixtureMeasurements, FixtureScenario};
use crate::CliError;

/// Runs the chosen solver(s) on a measurement fixture and prints the
/// estimates, clock bias in both meters and seconds.
pub fn cmd_solve(
    config_path: &Path,
    measurements_path: &Path,
    solver_flag: Option<&str>,
    pso_seed: u64,
) -> Result<(), CliError> {
    let config = FileConfig::load(config_path)?;
    let fixture = Fixture::load(measurements_path)?;
    let ctx = fixture.to_context()?;

    let strategy = config.init.to_strategy()?;
    let init = strategy
        .resolve(fixture.truth(), &ctx, 0.0)
        .map_err(map_bench_error)?;

    // The search space convention ties the position span to twice the
    // target-receiver distance; without a known radius, the farthest
    // receiver from the initial guess plays that role.
    let xy_half = config.grid.xy_half_span_m.unwrap_or_else(|| {
        ctx.receivers()
            .iter()
            .map(|r| distance(init.position(), *r))
            .fold(0.0, f64::max)
    });

    let token = solver_flag.unwrap_or(&config.solve.solver);
    let solvers = parse_solver_choice(token)?;

    for solver in solvers {
        let result = run_one(solver, &ctx, &config, init, xy_half, pso_seed)
            .map_err(|e| CliError::solver(e.to_string()))?;
        print_estimate(solver, &result);
    }
    Ok(())
}

fn run_one(
    solver: SolverKind,
    ctx: &rtloc_core::ObjectiveContext,
    config: &FileConfig,
    init: ParamVector,
    xy_half: f64,
    pso_seed: u64,
) -> Result<SolveResult, rtloc_core::SolverError> {
    let half_span = [
        xy_half,
        xy_half,
        config.grid.p0_half_span_db,
        config.grid.b_half_span_m,
    ];
    match solver {
        SolverKind::Grid => grid_search(
            ctx,
            &GridSpec {
                center: init,
                half_span,
                interval: config.grid.interval,
            },
        ),
        SolverKind::Gd => gradient_descent(
            ctx,
            &GdConfig {
                init,
                gamma: config.gd.gamma,
                max_iters: config.gd.max_iters,
                grad_tol: config.gd.grad_tol,
            },
        ),
        SolverKind::Pso => pso(
            ctx,
            &PsoConfig {
                max_iters: config.pso.max_iters,
                swarm_size: config.pso.swarm_size,
                lower: ParamVector::from_array(std::array::from_fn(|k| {
                    init.to_array()[k] - half_span[k]
                })),
                upper: ParamVector::from_array(std::array::from_fn(|k| {
                    init.to_array()[k] + half_span[k]
                })),
                inertia: config.pso.inertia,
                c1: config.pso.c1,
                c2: config.pso.c2,
                seed: pso_seed,
            },
        ),
    }
}

fn print_estimate(solver: SolverKind, r: &SolveResult) {
    println!("solver: {solver}");
    println!("x_m: {}", r.estimate.x);
    println!("y_m: {}", r.estimate.y);
    println!("p0_dbm: {}", r.estimate.p0);
    println!("b_m: {}", r.estimate.b);
    println!("tau_s: {}", r.estimate.tau_s());
    println!("cost: {}", r.cost);
    println!("evaluations: {}", r.evaluations);
}

/// Runs the Monte Carlo benchmark and writes errors.csv, cdf.csv,
/// summary.csv, and manifest.toml into the output directory.
pub fn cmd_bench(
    config_path: &Path,
    out_dir: &Path,
    seed_override: Option<u64>,
    solver_flag: Option<&str>,
    no_time: bool,
) -> Result<(), CliError> {
    let config = FileConfig::load(config_path)?;
    let solvers = parse_solver_choice(solver_flag.unwrap_or("all"))?;
    let experiment = config.to_experiment(seed_override, solvers, !no_time)?;

    let report = run_experiment(&experiment).map_err(map_bench_error)?;

    std::fs::create_dir_all(out_dir).map_err(|e| {
        CliError::config(format!("cannot create output dir {}: {e}", out_dir.display()))
    })?;

    let mut written: Vec<PathBuf> = Vec::new();
    let result = write_outputs(
        out_dir,
        &config,
        &experiment,
        &report,
        &mut written,
    );
    if let Err(e) = result {
        for path in &written {
            let _ = std::fs::remove_file(path);
        }
        return Err(e);
    }

    print_summary_table(&report, no_time);
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    created_unix_s: u64,
    master_seed: u64,
    timing_recorded: bool,
    solvers: Vec<String>,
    outputs: Vec<String>,
    /// Full config snapshot with the effective master seed folded in;
    /// feeding this table back as a config file reproduces errors.csv
    /// byte-identically (with timing disabled).
    config: &'a FileConfig,
}

fn write_outputs(
    out_dir: &Path,
    config: &FileConfig,
    experiment: &rtloc_core::ExperimentConfig,
    report: &ExperimentReport,
    written: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    let write = |name: &str, content: String, written: &mut Vec<PathBuf>| -> Result<(), CliError> {
        let path = out_dir.join(name);
        std::fs::write(&path, content)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };

    write("errors.csv", render_errors_csv(report), written)?;
    write("cdf.csv", render_cdf_csv(report)?, written)?;
    write("summary.csv", render_summary_csv(report), written)?;

    let mut snapshot = config.clone();
    snapshot.bench.master_seed = experiment.master_seed;
    let manifest = Manifest {
        tool: "rtloc",
        version: env!("CARGO_PKG_VERSION"),
        created_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        master_seed: experiment.master_seed,
        timing_recorded: experiment.measure_time,
        solvers: experiment.solvers.iter().map(|s| s.to_string()).collect(),
        outputs: vec!["errors.csv".into(), "cdf.csv".into(), "summary.csv".into()],
        config: &snapshot,
    };
    let manifest_text = toml::to_string(&manifest)
        .map_err(|e| CliError::config(format!("cannot serialize manifest: {e}")))?;
    write("manifest.toml", manifest_text, written)?;
    Ok(())
}

fn render_errors_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("solver,radius,trial,seed,error_m,time_s,evaluations\n");
    for trial in &report.trials {
        for (solver, solve) in &trial.solves {
            if let Ok(s) = solve {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    solver, trial.radius_m, trial.trial_index, trial.seed, s.error_m, s.time_s,
                    s.evaluations
                );
            }
        }
    }
    out
}

fn render_cdf_csv(report: &ExperimentReport) -> Result<String, CliError> {
    let mut out = String::from("solver,error_m,fraction\n");
    for summary in &report.summaries {
        let points = cdf_points(&summary.errors_m).map_err(map_bench_error)?;
        for (error_m, fraction) in points {
            let _ = writeln!(out, "{},{},{}", summary.solver, error_m, fraction);
        }
    }
    Ok(out)
}

fn render_summary_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("solver,rmse_m,p80_m,p95_m,mean_time_s\n");
    for s in &report.summaries {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            s.solver, s.rmse_m, s.p80_m, s.p95_m, s.mean_time_s
        );
    }
    out
}

fn print_summary_table(report: &ExperimentReport, no_time: bool) {
    let mut rows = vec![vec!["metric".to_string()]];
    for label in ["rmse_m", "p80_m", "p95_m", "mean_time_s", "failures"] {
        rows.push(vec![label.to_string()]);
    }
    for s in &report.summaries {
        rows[0].push(s.solver.to_string());
        rows[1].push(format!("{:.4}", s.rmse_m));
        rows[2].push(format!("{:.4}", s.p80_m));
        rows[3].push(format!("{:.4}", s.p95_m));
        rows[4].push(format!("{:.6}", s.mean_time_s));
        rows[5].push(s.failures.to_string());
    }
    for row in rows {
        let mut line = format!("{:<14}", row[0]);
        for cell in &row[1..] {
            let _ = write!(line, "{cell:>16}");
        }
        println!("{line}");
    }
    if no_time {
        println!("(timing disabled: time fields recorded as 0)");
    }
}

/// Generates a ring scenario, samples one measurement set, and writes the
/// fixture file consumed by `solve`.
pub fn cmd_scenario(
    config_path: &Path,
    out_path: &Path,
    radius: Option<f64>,
    seed: Option<u64>,
    n_receivers: Option<usize>,
    target: Option<&str>,
) -> Result<(), CliError> {
    let config = FileConfig::load(config_path)?;
    let radius = radius.unwrap_or_else(|| config.scenario.radii_m.first().copied().unwrap_or(100.0));
    let seed = seed.unwrap_or(config.bench.master_seed);
    let n = n_receivers.unwrap_or(config.scenario.n_receivers);
    let target = match target {
        Some(text) => parse_target(text)?,
        None => Position2D::new(config.scenario.target[0], config.scenario.target[1]),
    };

    let scenario = make_ring_scenario(target, radius, n, config.signal.to_params())
        .map_err(|e| CliError::config(e.to_string()))?;
    let measurements =
        sample_measurements(&scenario, seed).map_err(|e| CliError::config(e.to_string()))?;

    let fixture = Fixture {
        scenario: FixtureScenario {
            target: Some([target.x, target.y]),
            receivers: scenario.receivers().iter().map(|r| [r.x, r.y]).collect(),
        },
        signal: config.signal.clone(),
        measurements: FixtureMeasurements {
            seed: Some(seed),
            rss_dbm: measurements.rss_dbm().to_vec(),
            toa_s: measurements.toa_s().to_vec(),
        },
    };
    fixture.save(out_path)?;
    println!(
        "wrote fixture: {} receivers at radius {radius} m, seed {seed} -> {}",
        n,
        out_path.display()
    );
    Ok(())
}

fn parse_target(text: &str) -> Result<Position2D, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::config(format!(
            "target must be \"x,y\", got \"{text}\""
        )));
    }
    let x: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad target x in \"{text}\"")))?;
    let y: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::config(format!("bad target y in \"{text}\"")))?;
    Ok(Position2D::new(x, y))
}

fn map_bench_error(e: BenchError) -> CliError {
    match e {
        BenchError::Solver(_) | BenchError::AllTrialsFailed { .. } => {
            CliError::solver(e.to_string())
        }
        _ => CliError::config(e.to_string()),
    }
}
