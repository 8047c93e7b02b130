//! Scenario runner and self-verification for `kfcalc`.

pub mod experiments;
pub mod report;
pub mod scenario;
pub mod verify;

use std::time::Instant;

use rayon::prelude::*;

use experiments::RunContext;
use report::{ExperimentRecord, Report, ScenarioInfo, Status, REPORT_SCHEMA, TOOL};
use scenario::Scenario;

/// A problem with the user's input, as opposed to a failed check.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct InputError(pub String);

impl InputError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

/// Seed of experiment `k`; distinct experiments get unrelated streams.
pub fn experiment_seed(seed: u64, k: usize) -> u64 {
    seed ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs every experiment (in parallel) and collects records in file order.
pub fn run_scenario(scenario: &Scenario, seed_override: Option<u64>, timings: bool) -> Report {
    let seed = seed_override.unwrap_or(scenario.seed);
    let records: Vec<ExperimentRecord> = scenario
        .experiments
        .par_iter()
        .enumerate()
        .map(|(k, e)| {
            let ctx = RunContext {
                space: &scenario.space,
                family: scenario.family.as_ref(),
                seed: experiment_seed(seed, k),
                replicas: scenario.replicas,
            };
            let start = Instant::now();
            let result = e.experiment.run(&ctx);
            let elapsed_ms = timings.then(|| start.elapsed().as_secs_f64() * 1e3);
            let inputs_sha256 =
                report::sha256_hex(&serde_json::to_vec(&e.params).expect("params serialize"));
            let (status, error, outputs, checks) = match result {
                Ok(o) => (
                    if o.pass { Status::Pass } else { Status::Fail },
                    None,
                    o.outputs,
                    o.checks,
                ),
                Err(err) => (Status::Error, Some(err.to_string()), serde_json::Value::Null, Vec::new()),
            };
            ExperimentRecord {
                index: k,
                id: e.id.clone(),
                op: e.op.to_string(),
                inputs_sha256,
                status,
                error,
                outputs,
                checks,
                elapsed_ms,
            }
        })
        .collect();
    Report {
        schema: REPORT_SCHEMA,
        tool: TOOL,
        scenario: ScenarioInfo {
            name: scenario.name.clone(),
            sha256: scenario.digest.clone(),
            atoms: scenario.space.len(),
        },
        seed,
        replicas: scenario.replicas,
        summary: Report::summarize(&records),
        experiments: records,
    }
}
