//! The measurement fixture file: one scenario's receivers, signal constants,
//! and a sampled (or recorded) measurement set. Synthetic fixtures carry the
//! true target so offset initializers and error reporting can use it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use rtloc_core::{MeasurementSet, ObjectiveContext, Position2D};

use crate::config::SignalSection;
use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub scenario: FixtureScenario,
    pub signal: SignalSection,
    pub measurements: FixtureMeasurements,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureScenario {
    /// True target position; absent for field recordings.
    pub target: Option<[f64; 2]>,
    pub receivers: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureMeasurements {
    /// Seed the measurements were sampled with, when synthetic.
    pub seed: Option<u64>,
    pub rss_dbm: Vec<f64>,
    pub toa_s: Vec<f64>,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::config(format!("cannot read measurements {}: {e}", path.display()))
        })?;
        toml::from_str(&text).map_err(|e| {
            CliError::config(format!(
                "cannot parse measurements {}: {e}",
                path.display()
            ))
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self)
            .map_err(|e| CliError::config(format!("cannot serialize fixture: {e}")))?;
        std::fs::write(path, text).map_err(|e| {
            CliError::config(format!("cannot write fixture {}: {e}", path.display()))
        })
    }

    pub fn truth(&self) -> Option<Position2D> {
        self.scenario.target.map(|t| Position2D::new(t[0], t[1]))
    }

    pub fn receivers(&self) -> Vec<Position2D> {
        self.scenario
            .receivers
            .iter()
            .map(|r| Position2D::new(r[0], r[1]))
            .collect()
    }

    /// Builds the objective context this fixture describes.
    pub fn to_context(&self) -> Result<ObjectiveContext, CliError> {
        let measurements = MeasurementSet::new(
            self.measurements.rss_dbm.clone(),
            self.measurements.toa_s.clone(),
        )
        .map_err(|e| CliError::config(format!("invalid measurements: {e}")))?;
        ObjectiveContext::new(
            self.receivers(),
            measurements,
            self.signal.beta,
            self.signal.d0_m,
        )
        .map_err(|e| CliError::config(format!("invalid fixture: {e}")))
    }
}
