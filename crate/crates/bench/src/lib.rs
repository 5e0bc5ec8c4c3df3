//! Shared fixtures for the kernel benchmarks.

use gprlab_core::{PowerAllocation, SystemParams};

/// Square link at 10 dB, rate 1, unit budget.
pub fn square_link(n: usize) -> SystemParams {
    SystemParams::from_rho_db(n, n, 10.0, 1.0, 1.0).expect("valid fixture")
}

pub fn upa(n: usize, total: f64) -> PowerAllocation {
    PowerAllocation::uniform(n, total).expect("valid fixture")
}
