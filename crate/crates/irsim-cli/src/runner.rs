//! Sweep execution over one or more sigma_e values, serial or parallel.
//!
//! Every (sigma, point, trial) work unit draws from its own keyed noise
//! stream, so the records are bit-identical whichever way the points are
//! scheduled; parallelism is purely a throughput knob.

use anyhow::{anyhow, Result};
use irsim_core::sim::{
    run_sweep_point, sweep_positions, ScenarioConfig, Sweep, SweepRecord,
};
use rayon::prelude::*;

use crate::config::SweepDefaults;

/// Run the sweep for each sigma_e value in turn; rows are grouped by
/// sigma_e in the given order and ordered by position within a group.
pub fn run_sweeps(
    scenario: &ScenarioConfig,
    defaults: &SweepDefaults,
    parallel: bool,
) -> Result<Vec<SweepRecord>> {
    let sweep = Sweep {
        axis: defaults.axis,
        from_m: defaults.from_m,
        to_m: defaults.to_m,
        step_m: defaults.step_m,
        trials: defaults.trials,
    };
    let mut records = Vec::new();
    for &sigma_e in &defaults.sigma_e_values {
        let mut config = scenario.clone();
        config.sigma_e = sigma_e;
        config.validate().map_err(|e| anyhow!("{e}"))?;
        let positions = sweep_positions(&config, &sweep).map_err(|e| anyhow!("{e}"))?;
        let group: Result<Vec<SweepRecord>> = if parallel {
            positions
                .par_iter()
                .enumerate()
                .map(|(i, p)| {
                    run_sweep_point(&config, *p, i as u64, sweep.trials)
                        .map_err(|e| anyhow!("{e}"))
                })
                .collect()
        } else {
            positions
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    run_sweep_point(&config, *p, i as u64, sweep.trials)
                        .map_err(|e| anyhow!("{e}"))
                })
                .collect()
        };
        records.extend(group?);
    }
    Ok(records)
}
