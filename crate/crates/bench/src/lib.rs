//! Shared fixtures for the benchmarks: the figure parameter set.

use dsb_core::{BathParams, QubitParams};

pub fn figure_qubit() -> QubitParams {
    QubitParams::new(1.0, 1.0, 1.0, 1.0).expect("valid qubit")
}

pub fn figure_bath() -> BathParams {
    BathParams::new(0.01, 36.0, 8.0).expect("valid bath")
}
