//! The default adapt and execute hooks: provenance-traced adaptation and
//! study-aware backend selection over a registry.

use crate::adapt::{adapt_experiment, build_context, specification_of, AdaptError, AdaptReport};
use crate::backends::{
    execute_experiment, select_backend, BackendError, BackendRegistry, ChainModels, ModelResolver,
};
use crate::canonical_exp::CanonicalExperiment;
use crate::prov_graph::{attr, EntityKind, NodeId, ProvenanceGraph};
use crate::rules::{Executed, Hooks};

/// Resolves model paths to artifacts stored on model entities, which is
/// where calibration runs keep the models they produce.
pub struct GraphModels<'g>(pub &'g ProvenanceGraph);

impl ModelResolver for GraphModels<'_> {
    fn resolve(&self, path: &str) -> Option<String> {
        self.0
            .entities()
            .iter()
            .filter(|e| e.kind == EntityKind::SimulationModel && e.attr_str(attr::MODEL_PATH) == Some(path))
            .find_map(|e| e.attr_str(attr::MODEL_ARTIFACT))
            .map(String::from)
    }
}

pub struct Pipeline {
    pub registry: BackendRegistry,
    pub models: Box<dyn ModelResolver>,
    pub seed: u64,
}

impl Pipeline {
    pub fn new(registry: BackendRegistry, models: Box<dyn ModelResolver>, seed: u64) -> Self {
        Pipeline { registry, models, seed }
    }
}

/// Adapts the specification of `old` for `new_model` using the graph context.
pub fn adapt_for(
    graph: &ProvenanceGraph,
    old: &str,
    new_model: &str,
) -> Result<(CanonicalExperiment, AdaptReport), AdaptError> {
    let ctx = build_context(graph, old, new_model)?;
    let spec = specification_of(graph, old)?;
    adapt_experiment(&spec, &ctx)
}

impl Hooks for Pipeline {
    fn adapt(
        &self,
        graph: &ProvenanceGraph,
        old_experiment: &NodeId,
        new_model: &NodeId,
    ) -> Result<(CanonicalExperiment, AdaptReport), AdaptError> {
        adapt_for(graph, old_experiment.as_str(), new_model.as_str())
    }

    fn execute(
        &self,
        graph: &ProvenanceGraph,
        study_id: &str,
        spec: &CanonicalExperiment,
        seed: u64,
    ) -> Result<Executed, BackendError> {
        let backend = select_backend(&self.registry, graph, study_id, spec.model.model_format.as_deref(), spec.experiment_type())?;
        let from_graph = GraphModels(graph);
        let models = ChainModels(vec![&from_graph, self.models.as_ref()]);
        let result = execute_experiment(backend.as_ref(), spec, &models, seed)?;
        Ok(Executed { backend: backend.name().to_string(), result })
    }

    fn base_seed(&self) -> u64 {
        self.seed
    }
}
