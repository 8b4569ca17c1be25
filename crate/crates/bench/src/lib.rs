//! Fixtures shared by the benchmarks.

use casimir_core::bridges::{generate_unit_bridge, substream};
use casimir_core::UnitBridge;

/// Deterministic bridges for benchmarking.
pub fn fixture_bridges(count: usize, points: usize) -> Vec<UnitBridge> {
    (0..count as u64)
        .map(|i| generate_unit_bridge(&mut substream(7, i), points).expect("power-of-two size"))
        .collect()
}
