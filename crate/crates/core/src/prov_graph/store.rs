use std::sync::{Arc, RwLock};

use super::{GraphDelta, GraphError, ProvenanceGraph};

/// Single-writer handle around a provenance graph.
///
/// Readers take cheap immutable snapshots that stay valid across later
/// writes; writers serialize on the lock and swap in a new version.
#[derive(Debug, Default)]
pub struct GraphStore {
    inner: RwLock<Arc<ProvenanceGraph>>,
}

impl GraphStore {
    pub fn new(graph: ProvenanceGraph) -> Self {
        GraphStore { inner: RwLock::new(Arc::new(graph)) }
    }

    pub fn snapshot(&self) -> Arc<ProvenanceGraph> {
        Arc::clone(&self.inner.read().expect("graph lock poisoned"))
    }

    pub fn write<T>(
        &self,
        f: impl FnOnce(&mut ProvenanceGraph) -> Result<T, GraphError>,
    ) -> Result<T, GraphError> {
        let mut guard = self.inner.write().expect("graph lock poisoned");
        // Mutate a private copy so a failed closure leaves the store untouched.
        let mut next = ProvenanceGraph::clone(&guard);
        let out = f(&mut next)?;
        *guard = Arc::new(next);
        Ok(out)
    }

    pub fn append(&self, delta: GraphDelta) -> Result<(), GraphError> {
        self.write(|g| g.append_delta(delta))
    }

    pub fn into_inner(self) -> ProvenanceGraph {
        let arc = self.inner.into_inner().expect("graph lock poisoned");
        Arc::try_unwrap(arc).unwrap_or_else(|a| (*a).clone())
    }
}
