//! The maximum-likelihood cost for joint RSS/TOA localization, its
//! distance-dependent weighting factor, and the analytic gradient.
//!
//! Four unknowns are estimated: target position (x, y), reference power p0,
//! and the transmitter clock bias. The bias is carried internally as a range
//! bias `b = c·tau` in meters so that all four coordinates share comparable
//! scales, which a single scalar learning rate needs. The TOA residual is
//! likewise expressed in meters, `c·T_i − d_i − b`, with the weighting factor
//! rescaled by `1/c²`; the summed value is algebraically identical to the
//! seconds-based form `w · (T_i − d_i/c − tau)²`.

use crate::model::{distance, MeasurementSet, Position2D, D_MIN, SPEED_OF_LIGHT};

const LN_10: f64 = std::f64::consts::LN_10;

/// The estimated parameter vector: position in meters, reference power in
/// dBm, clock bias as range bias in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamVector {
    pub x: f64,
    pub y: f64,
    pub p0: f64,
    pub b: f64,
}

impl ParamVector {
    pub fn new(x: f64, y: f64, p0: f64, b: f64) -> Self {
        Self { x, y, p0, b }
    }

    pub fn position(&self) -> Position2D {
        Position2D::new(self.x, self.y)
    }

    /// Clock bias in seconds, `b / c`.
    pub fn tau_s(&self) -> f64 {
        self.b / SPEED_OF_LIGHT
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.p0, self.b]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Everything a cost evaluation needs: receiver positions, one measurement
/// set aligned with them, and the propagation constants.
#[derive(Debug, Clone)]
pub struct ObjectiveContext {
    receivers: Vec<Position2D>,
    measurements: MeasurementSet,
    beta: f64,
    d0_m: f64,
}

impl ObjectiveContext {
    pub fn new(
        receivers: Vec<Position2D>,
        measurements: MeasurementSet,
        beta: f64,
        d0_m: f64,
    ) -> Result<Self, ObjectiveError> {
        if receivers.len() != measurements.len() {
            return Err(ObjectiveError::LengthMismatch {
                receivers: receivers.len(),
                measurements: measurements.len(),
            });
        }
        if receivers.is_empty() {
            return Err(ObjectiveError::Empty);
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(ObjectiveError::InvalidBeta { beta });
        }
        Ok(Self {
            receivers,
            measurements,
            beta,
            d0_m,
        })
    }

    /// Binds a scenario's geometry and constants to one measurement set.
    pub fn from_scenario(
        scenario: &crate::model::Scenario,
        measurements: MeasurementSet,
    ) -> Result<Self, ObjectiveError> {
        Self::new(
            scenario.receivers().to_vec(),
            measurements,
            scenario.signal().beta,
            scenario.signal().d0_m,
        )
    }

    pub fn receivers(&self) -> &[Position2D] {
        &self.receivers
    }

    pub fn measurements(&self) -> &MeasurementSet {
        &self.measurements
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn d0_m(&self) -> f64 {
        self.d0_m
    }

    pub fn len(&self) -> usize {
        self.receivers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.receivers.is_empty()
    }
}

/// Distance-dependent weighting factor for the TOA residual,
/// `max(4e-5·d − 1e-3, 0)`.
///
/// The affine form goes negative below d = 25 m, which would make the cost
/// unbounded below; it is clamped to zero there.
pub fn weight(d_m: f64) -> f64 {
    (4e-5 * d_m - 1e-3).max(0.0)
}

/// The ML cost: per receiver, squared RSS residual in dB plus the weighted
/// squared TOA residual.
///
/// Accumulated in receiver order starting from zero, so the N-receiver cost
/// equals the sum of the N single-receiver costs exactly.
pub fn cost(theta: ParamVector, ctx: &ObjectiveContext) -> Result<f64, ObjectiveError> {
    let mut acc = 0.0;
    for i in 0..ctx.len() {
        acc += receiver_term(theta, ctx, i)?;
    }
    Ok(acc)
}

fn receiver_term(theta: ParamVector, ctx: &ObjectiveContext, i: usize) -> Result<f64, ObjectiveError> {
    let d = distance(theta.position(), ctx.receivers[i]);
    if d.is_nan() || d < D_MIN {
        return Err(ObjectiveError::DegenerateGeometry {
            receiver: i,
            distance: d,
        });
    }
    let e_rss = ctx.measurements.rss_dbm()[i] - theta.p0 + 10.0 * ctx.beta * (d / ctx.d0_m).log10();
    let e_toa = SPEED_OF_LIGHT * ctx.measurements.toa_s()[i] - d - theta.b;
    let w = weight(d) / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    Ok(e_rss * e_rss + w * (e_toa * e_toa))
}

/// Analytic gradient of [`cost`] under the frozen-weight convention:
/// the weighting factor is treated as a constant at the candidate's current
/// distances, so its own distance dependence contributes nothing.
///
/// Returns `(dF/dx, dF/dy, dF/dp0, dF/db)`.
pub fn cost_gradient(theta: ParamVector, ctx: &ObjectiveContext) -> Result<[f64; 4], ObjectiveError> {
    let mut g = [0.0; 4];
    for i in 0..ctx.len() {
        let rx = ctx.receivers[i];
        let d = distance(theta.position(), rx);
        if d.is_nan() || d < D_MIN {
            return Err(ObjectiveError::DegenerateGeometry {
                receiver: i,
                distance: d,
            });
        }
        let ux = (theta.x - rx.x) / d;
        let uy = (theta.y - rx.y) / d;
        let e_rss =
            ctx.measurements.rss_dbm()[i] - theta.p0 + 10.0 * ctx.beta * (d / ctx.d0_m).log10();
        let e_toa = SPEED_OF_LIGHT * ctx.measurements.toa_s()[i] - d - theta.b;
        let w = weight(d) / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);
        let rss_radial = 2.0 * e_rss * (10.0 * ctx.beta) / (d * LN_10);
        let toa_radial = 2.0 * w * e_toa;
        g[0] += rss_radial * ux - toa_radial * ux;
        g[1] += rss_radial * uy - toa_radial * uy;
        g[2] += -2.0 * e_rss;
        g[3] += -toa_radial;
    }
    Ok(g)
}

/// Errors raised by objective evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectiveError {
    /// A candidate position came within [`D_MIN`] of a receiver.
    DegenerateGeometry { receiver: usize, distance: f64 },
    LengthMismatch { receivers: usize, measurements: usize },
    InvalidBeta { beta: f64 },
    Empty,
}

impl std::fmt::Display for ObjectiveError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ObjectiveError::DegenerateGeometry { receiver, distance } => write!(
                f,
                "candidate is {distance} m from receiver {receiver}, below the {D_MIN} m minimum"
            ),
            ObjectiveError::LengthMismatch {
                receivers,
                measurements,
            } => write!(
                f,
                "{receivers} receivers but {measurements} measurements"
            ),
            ObjectiveError::InvalidBeta { beta } => {
                write!(f, "path-loss exponent must be finite and > 0, got {beta}")
            }
            ObjectiveError::Empty => write!(f, "objective needs at least one receiver"),
        }
    }
}

impl std::error::Error for ObjectiveError {}
