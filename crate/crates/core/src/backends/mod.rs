//! Experiment execution: backend registry and selection, the built-in
//! reaction-network simulator, and a mock backend for pipeline tests.
//!
//! Every stochastic run draws from ChaCha8 keyed by the experiment seed, with
//! stream `(point << 32) | replication`; results therefore do not depend on
//! evaluation order or thread count.

mod mock;
pub mod observe;
pub mod rnet;
pub mod sensitivity;
pub mod smc;
pub mod ssa;
mod ssa_backend;

pub use mock::{spec_hash, MockBackend, MOCK_BACKEND};
pub use rnet::ReactionModel;
pub use ssa::ssa_simulate;
pub use ssa_backend::{SsaBackend, MAX_POINTS, RNET_FORMAT, SSA_BACKEND};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::canonical_exp::{CanonicalExperiment, ExperimentType};
use crate::prov_graph::{attr, EntityKind, ProvenanceGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("no backend supports model format {format} with experiment type {experiment_type}")]
    NoCompatibleBackend { format: String, experiment_type: String },
    #[error("{0}")]
    ExecError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Success,
    Failure,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Success => "success",
            RunStatus::Failure => "failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub point: usize,
    pub replication: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

/// Simulation output: one row per design point, replication and
/// observation time, one column per observation alias.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTable {
    pub aliases: Vec<String>,
    pub rows: Vec<SimRow>,
}

impl SimTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("point,replication,time");
        for a in &self.aliases {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{}", r.point, r.replication, r.time);
            for v in &r.values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Compact JSON form used for inline simulation data.
    pub fn to_value(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![json!(r.point), json!(r.replication), json!(r.time)];
                row.extend(r.values.iter().map(|v| json!(v)));
                Value::Array(row)
            })
            .collect();
        json!({"aliases": self.aliases, "rows": rows})
    }

    pub fn from_value(v: &Value) -> Option<SimTable> {
        let aliases: Vec<String> = v.get("aliases")?.as_array()?.iter().map(|a| a.as_str().map(String::from)).collect::<Option<_>>()?;
        let mut rows = Vec::new();
        for r in v.get("rows")?.as_array()? {
            let r = r.as_array()?;
            if r.len() != 3 + aliases.len() {
                return None;
            }
            rows.push(SimRow {
                point: r[0].as_u64()? as usize,
                replication: r[1].as_u64()? as usize,
                time: r[2].as_f64()?,
                values: r[3..].iter().map(Value::as_f64).collect::<Option<_>>()?,
            });
        }
        Some(SimTable { aliases, rows })
    }

    /// Mean over replications per (point, time) for one alias.
    pub fn mean_series(&self, alias: &str, point: usize) -> Vec<(f64, f64)> {
        let Some(col) = self.aliases.iter().position(|a| a == alias) else {
            return Vec::new();
        };
        let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.point == point) {
            let e = acc.entry(r.time.to_bits()).or_insert((r.time, 0.0, 0));
            e.1 += r.values[col];
            e.2 += 1;
        }
        let mut out: Vec<(f64, f64)> = acc.into_values().map(|(t, s, n)| (t, s / n as f64)).collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecutionResult {
    pub table: SimTable,
    pub status: Option<RunStatus>,
    pub new_model_artifact: Option<String>,
    pub summary: Map<String, Value>,
}

/// Looks up model text by the path named in a specification.
pub trait ModelResolver: Sync {
    fn resolve(&self, model_path: &str) -> Option<String>;
}

/// Models held in memory, keyed by path.
#[derive(Debug, Clone, Default)]
pub struct MemoryModels(pub BTreeMap<String, String>);

impl ModelResolver for MemoryModels {
    fn resolve(&self, model_path: &str) -> Option<String> {
        self.0.get(model_path).cloned()
    }
}

/// Models read from disk relative to a root directory.
#[derive(Debug, Clone)]
pub struct FsModels {
    pub root: PathBuf,
}

impl ModelResolver for FsModels {
    fn resolve(&self, model_path: &str) -> Option<String> {
        std::fs::read_to_string(self.root.join(model_path)).ok()
    }
}

/// Tries each resolver in turn.
pub struct ChainModels<'a>(pub Vec<&'a dyn ModelResolver>);

impl ModelResolver for ChainModels<'_> {
    fn resolve(&self, model_path: &str) -> Option<String> {
        self.0.iter().find_map(|r| r.resolve(model_path))
    }
}

/// Model format accepted by every format; used by the mock backend.
pub const ANY_FORMAT: &str = "*";

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    /// Supported (model format, experiment type) pairs.
    fn supports(&self) -> Vec<(String, String)>;
    fn execute(
        &self,
        spec: &CanonicalExperiment,
        models: &dyn ModelResolver,
        seed: u64,
    ) -> Result<ExecutionResult, BackendError>;
}

/// How well a backend fits: exact format match ranks before wildcard.
fn fit(backend: &dyn Backend, format: Option<&str>, experiment_type: &str) -> Option<u8> {
    backend
        .supports()
        .iter()
        .filter(|(_, t)| t == experiment_type)
        .filter_map(|(f, _)| match format {
            Some(fmt) if f == fmt => Some(0),
            None if f != ANY_FORMAT => Some(0),
            _ if f == ANY_FORMAT => Some(1),
            _ => None,
        })
        .min()
}

#[derive(Clone, Default)]
pub struct BackendRegistry {
    backends: Vec<Arc<dyn Backend>>,
}

impl BackendRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with the built-in simulator and the mock backend.
    pub fn with_builtins() -> Self {
        let mut r = Self::new();
        r.register(Arc::new(SsaBackend::default()));
        r.register(Arc::new(MockBackend));
        r
    }

    /// Adds a backend, replacing one with the same name.
    pub fn register(&mut self, backend: Arc<dyn Backend>) {
        self.backends.retain(|b| b.name() != backend.name());
        self.backends.push(backend);
    }

    pub fn get(&self, name: &str) -> Option<Arc<dyn Backend>> {
        self.backends.iter().find(|b| b.name() == name).cloned()
    }

    pub fn names(&self) -> Vec<String> {
        let mut v: Vec<String> = self.backends.iter().map(|b| b.name().to_string()).collect();
        v.sort();
        v
    }

    pub fn is_empty(&self) -> bool {
        self.backends.is_empty()
    }
}

/// Picks the backend for an experiment in `study_id`. Backends named by the
/// `backend` attribute of the study's own experiments win when they support
/// the (format, type) pair; otherwise the best-fitting backend is used, ties
/// broken by name.
pub fn select_backend(
    registry: &BackendRegistry,
    graph: &ProvenanceGraph,
    study_id: &str,
    model_format: Option<&str>,
    experiment_type: &str,
) -> Result<Arc<dyn Backend>, BackendError> {
    let preferred: Vec<&str> = graph
        .entities()
        .iter()
        .filter(|e| e.kind == EntityKind::SimulationExperiment && e.study_id() == Some(study_id))
        .filter_map(|e| e.attr_str(attr::BACKEND))
        .collect();
    let mut candidates: Vec<(bool, u8, &Arc<dyn Backend>)> = registry
        .backends
        .iter()
        .filter_map(|b| fit(b.as_ref(), model_format, experiment_type).map(|f| (!preferred.contains(&b.name()), f, b)))
        .collect();
    candidates.sort_by(|a, b| (a.0, a.1, a.2.name()).cmp(&(b.0, b.1, b.2.name())));
    candidates.first().map(|c| Arc::clone(c.2)).ok_or_else(|| BackendError::NoCompatibleBackend {
        format: model_format.unwrap_or("(unspecified)").to_string(),
        experiment_type: experiment_type.to_string(),
    })
}

/// Runs a specification after checking that the backend supports it.
pub fn execute_experiment(
    backend: &dyn Backend,
    spec: &CanonicalExperiment,
    models: &dyn ModelResolver,
    seed: u64,
) -> Result<ExecutionResult, BackendError> {
    if fit(backend, spec.model.model_format.as_deref(), spec.experiment_type()).is_none() {
        return Err(BackendError::ExecError(format!(
            "backend {} does not support {} experiments on format {}",
            backend.name(),
            spec.experiment_type(),
            spec.model.model_format.as_deref().unwrap_or("(unspecified)")
        )));
    }
    let result = backend.execute(spec, models, seed)?;
    if result.table.aliases != spec.observation.aliases {
        return Err(BackendError::ExecError(format!("backend {} returned mismatched columns", backend.name())));
    }
    Ok(result)
}

/// Every experiment type the canonical form knows.
pub fn all_experiment_types() -> [&'static str; 5] {
    ExperimentType::KEYS
}
