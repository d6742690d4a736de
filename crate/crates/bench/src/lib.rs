//! Shared fixtures for the solver microbenchmarks.

use rtloc_core::{
    make_ring_scenario, sample_measurements, ObjectiveContext, ParamVector, Position2D,
    SignalParams,
};

/// A noisy ring instance at the given radius with the default signal
/// parameters, plus the fixed-offset initial guess used across benchmarks.
pub fn ring_instance(radius_m: f64, seed: u64) -> (ObjectiveContext, ParamVector) {
    let scenario = make_ring_scenario(
        Position2D::new(0.0, 0.0),
        radius_m,
        4,
        SignalParams::defaults(),
    )
    .expect("valid ring scenario");
    let measurements = sample_measurements(&scenario, seed).expect("sampling succeeds");
    let ctx = ObjectiveContext::from_scenario(&scenario, measurements).expect("valid context");
    let init = ParamVector::new(-20.0, -20.0, -60.0, 1350.0);
    (ctx, init)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_builds() {
        let (ctx, init) = ring_instance(100.0, 1);
        assert_eq!(ctx.len(), 4);
        assert!(rtloc_core::cost(init, &ctx).unwrap().is_finite());
    }
}
