//! Shared fixtures for the benches.

use std::f64::consts::PI;

use vesture::targets::{kerr_config, BLParams};
use vesture::verification::{Axis, GridSpec};
use vesture::{DomainPoint, SolitonConfig};

/// Kerr with m = 1, s = 1 and a 40x40 Boyer-Lindquist grid outside the horizon.
pub fn kerr_fixture() -> (SolitonConfig, GridSpec) {
    let p = BLParams::kerr(1.0, 1.0).expect("kerr parameters");
    let cfg = kerr_config(&p).expect("kerr configuration");
    let spec = GridSpec::boyer_lindquist(
        p,
        Axis::new(2.5, 11.0, 40).expect("r axis"),
        Axis::new(PI / 8.0, 7.0 * PI / 8.0, 40).expect("theta axis"),
    )
    .expect("grid");
    (cfg, spec)
}

pub fn sample_point() -> DomainPoint {
    DomainPoint::new(1.7, 0.4).expect("domain point")
}
