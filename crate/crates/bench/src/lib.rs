//! Fixtures shared by the criterion benches.

use xxrelay::field::FieldEngine;
use xxrelay::state::symmetric_params;
use xxrelay::{ChainConfig, InitialStateParams};

/// A representative symmetric state inside the entangled region.
pub fn sample_params() -> InitialStateParams {
    symmetric_params(0.9, 0.2).expect("valid parameters")
}

/// Engine for an `n`-site chain sampled to `t_end` with step `dt`.
pub fn engine(n: usize, t_end: f64, dt: f64) -> FieldEngine {
    let cfg = ChainConfig::with_length(n).and_then(|c| c.with_registration_time(t_end)).expect("valid chain");
    FieldEngine::for_registration(&cfg, dt).expect("engine")
}
