//! A backend that simulates nothing: zero-valued tables of the right shape
//! and the SHA-256 of the canonical spec text in the summary.

use serde_json::{json, Map};
use sha2::{Digest, Sha256};

use super::{Backend, BackendError, ExecutionResult, ModelResolver, RunStatus, SimRow, SimTable, ANY_FORMAT};
use crate::canonical_exp::{serialize_canonical, CanonicalExperiment, ExperimentType};

pub const MOCK_BACKEND: &str = "mock";

#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

pub fn spec_hash(spec: &CanonicalExperiment) -> String {
    hex::encode(Sha256::digest(serialize_canonical(spec).as_bytes()))
}

impl Backend for MockBackend {
    fn name(&self) -> &str {
        MOCK_BACKEND
    }

    fn supports(&self) -> Vec<(String, String)> {
        ExperimentType::KEYS.iter().map(|t| (ANY_FORMAT.to_string(), t.to_string())).collect()
    }

    fn execute(&self, spec: &CanonicalExperiment, _models: &dyn ModelResolver, seed: u64) -> Result<ExecutionResult, BackendError> {
        let obs = &spec.observation;
        let stop = spec.stop_time().unwrap_or(f64::INFINITY);
        let mut rows = Vec::new();
        for replication in 0..spec.simulation.replications as usize {
            for &time in obs.times.iter().filter(|&&t| t <= stop) {
                rows.push(SimRow { point: 0, replication, time, values: vec![0.0; obs.aliases.len()] });
            }
        }
        let mut summary = Map::new();
        summary.insert("backend".into(), json!(MOCK_BACKEND));
        summary.insert("seed".into(), json!(seed));
        summary.insert("specHash".into(), json!(spec_hash(spec)));
        let status = matches!(spec.experiment, ExperimentType::StatisticalModelChecking(_)).then_some(RunStatus::Success);
        Ok(ExecutionResult {
            table: SimTable { aliases: obs.aliases.clone(), rows },
            status,
            new_model_artifact: None,
            summary,
        })
    }
}
