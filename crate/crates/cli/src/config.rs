//! The human-editable TOML configuration file.
//!
//! Every section and key is optional and falls back to the documented
//! default; unknown keys are a hard error so hyperparameter typos cannot
//! silently revert to defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rtloc_core::{
    ExperimentConfig, GdSettings, GridSettings, InitStrategy, Position2D, PsoSettings,
    SignalParams, SolverKind,
};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub signal: SignalSection,
    #[serde(default)]
    pub init: InitSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub gd: GdSection,
    #[serde(default)]
    pub pso: PsoSection,
    #[serde(default)]
    pub bench: BenchSection,
    #[serde(default)]
    pub solve: SolveSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    /// True target position [x, y] in meters.
    pub target: [f64; 2],
    /// Receiver-ring radii in meters, one experiment setting per entry.
    pub radii_m: Vec<f64>,
    pub n_receivers: usize,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        Self {
            target: [0.0, 0.0],
            radii_m: vec![50.0, 100.0, 150.0, 200.0],
            n_receivers: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub p0_dbm: f64,
    pub beta: f64,
    pub d0_m: f64,
    pub sigma_rss_db: f64,
    pub sigma_toa_s: f64,
    pub tau_s: f64,
}

impl Default for SignalSection {
    fn default() -> Self {
        let s = SignalParams::defaults();
        Self {
            p0_dbm: s.p0_dbm,
            beta: s.beta,
            d0_m: s.d0_m,
            sigma_rss_db: s.sigma_rss_db,
            sigma_toa_s: s.sigma_toa_s,
            tau_s: s.tau_s,
        }
    }
}

impl SignalSection {
    pub fn to_params(&self) -> SignalParams {
        SignalParams {
            p0_dbm: self.p0_dbm,
            beta: self.beta,
            d0_m: self.d0_m,
            sigma_rss_db: self.sigma_rss_db,
            sigma_toa_s: self.sigma_toa_s,
            tau_s: self.tau_s,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    /// "truth-offset" (synthetic benchmarks) or "coarse-grid" (truth-free).
    pub mode: String,
    pub dx_m: f64,
    pub dy_m: f64,
    pub p0_dbm: f64,
    pub b_m: f64,
    /// Coarse-grid resolution (ignored in truth-offset mode).
    pub nx: usize,
    pub ny: usize,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            mode: "truth-offset".into(),
            dx_m: -20.0,
            dy_m: -20.0,
            p0_dbm: -60.0,
            b_m: 1350.0,
            nx: 16,
            ny: 16,
        }
    }
}

impl InitSection {
    pub fn to_strategy(&self) -> Result<InitStrategy, CliError> {
        match self.mode.as_str() {
            "truth-offset" => Ok(InitStrategy::TruthOffset {
                dx: self.dx_m,
                dy: self.dy_m,
                p0: self.p0_dbm,
                b: self.b_m,
            }),
            "coarse-grid" => Ok(InitStrategy::CoarseGrid {
                nx: self.nx,
                ny: self.ny,
                p0: self.p0_dbm,
                b: self.b_m,
            }),
            other => Err(CliError::config(format!(
                "init.mode must be \"truth-offset\" or \"coarse-grid\", got \"{other}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Position half-span in meters; omitted = the scenario ring radius
    /// (bench) or the largest init-to-receiver distance (solve).
    pub xy_half_span_m: Option<f64>,
    pub p0_half_span_db: f64,
    pub b_half_span_m: f64,
    /// Steps per coordinate: x m, y m, p0 dB, b m.
    pub interval: [f64; 4],
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridSettings::default();
        Self {
            xy_half_span_m: g.xy_half_span_m,
            p0_half_span_db: g.p0_half_span_db,
            b_half_span_m: g.b_half_span_m,
            interval: g.interval,
        }
    }
}

impl GridSection {
    pub fn to_settings(&self) -> GridSettings {
        GridSettings {
            xy_half_span_m: self.xy_half_span_m,
            p0_half_span_db: self.p0_half_span_db,
            b_half_span_m: self.b_half_span_m,
            interval: self.interval,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GdSection {
    pub gamma: f64,
    pub max_iters: usize,
    pub grad_tol: Option<f64>,
}

impl Default for GdSection {
    fn default() -> Self {
        let g = GdSettings::default();
        Self {
            gamma: g.gamma,
            max_iters: g.max_iters,
            grad_tol: g.grad_tol,
        }
    }
}

impl GdSection {
    pub fn to_settings(&self) -> GdSettings {
        GdSettings {
            gamma: self.gamma,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoSection {
    pub max_iters: usize,
    pub swarm_size: usize,
    pub inertia: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for PsoSection {
    fn default() -> Self {
        let p = PsoSettings::default();
        Self {
            max_iters: p.max_iters,
            swarm_size: p.swarm_size,
            inertia: p.inertia,
            c1: p.c1,
            c2: p.c2,
        }
    }
}

impl PsoSection {
    pub fn to_settings(&self) -> PsoSettings {
        PsoSettings {
            max_iters: self.max_iters,
            swarm_size: self.swarm_size,
            inertia: self.inertia,
            c1: self.c1,
            c2: self.c2,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchSection {
    pub trials_per_radius: usize,
    pub master_seed: u64,
    pub warmup: bool,
}

impl Default for BenchSection {
    fn default() -> Self {
        Self {
            trials_per_radius: 90,
            master_seed: 1,
            warmup: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    /// Default solver for the solve command: grid | gd | pso | all.
    pub solver: String,
}

impl Default for SolveSection {
    fn default() -> Self {
        Self { solver: "gd".into() }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        toml::from_str(&text)
            .map_err(|e| CliError::config(format!("cannot parse config {}: {e}", path.display())))
    }

    /// Resolves into the experiment configuration, applying CLI overrides.
    pub fn to_experiment(
        &self,
        seed_override: Option<u64>,
        solvers: Vec<SolverKind>,
        measure_time: bool,
    ) -> Result<ExperimentConfig, CliError> {
        let cfg = ExperimentConfig {
            target: Position2D::new(self.scenario.target[0], self.scenario.target[1]),
            radii_m: self.scenario.radii_m.clone(),
            trials_per_radius: self.bench.trials_per_radius,
            n_receivers: self.scenario.n_receivers,
            signal: self.signal.to_params(),
            init: self.init.to_strategy()?,
            grid: self.grid.to_settings(),
            gd: self.gd.to_settings(),
            pso: self.pso.to_settings(),
            solvers,
            master_seed: seed_override.unwrap_or(self.bench.master_seed),
            measure_time,
            warmup: self.bench.warmup,
        };
        cfg.validate()
            .map_err(|e| CliError::config(e.to_string()))?;
        Ok(cfg)
    }
}

/// Parses a solver token from the CLI or the [solve] section.
pub fn parse_solver_choice(token: &str) -> Result<Vec<SolverKind>, CliError> {
    match token {
        "grid" => Ok(vec![SolverKind::Grid]),
        "gd" => Ok(vec![SolverKind::Gd]),
        "pso" => Ok(vec![SolverKind::Pso]),
        "all" => Ok(SolverKind::ALL.to_vec()),
        other => Err(CliError::config(format!(
            "unknown solver \"{other}\": expected grid, gd, pso, or all"
        ))),
    }
}
