//! Fixtures shared by the benchmarks.

use amr_core::solomon::grid_instance;
use amr_core::{Instance, Period};

/// The `<period>-<base>-<n>` grid instance under seed 1.
pub fn instance(base: &str, period: Period, n: usize) -> Instance {
    grid_instance(base, period, n, 1).expect("known base and size")
}
