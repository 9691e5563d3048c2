//! Shared fixtures for the benchmarks.

use std::sync::Arc;

use compdna::{ChannelSpec, CodeRegistry, ExperimentConfig, MappingTable, Simulation};

/// A WRAN-code simulation over the given channel, seed 1.
pub fn wran_simulation(channel: ChannelSpec, n: usize) -> Simulation {
    let code = CodeRegistry::builtin().load("wran_r05").expect("shipped code");
    let mut cfg = ExperimentConfig::new(
        "wran_r05",
        Arc::new(code),
        Arc::new(MappingTable::table_l3()),
        channel,
        vec![n],
    );
    cfg.master_seed = 1;
    Simulation::new(cfg).expect("valid config")
}
