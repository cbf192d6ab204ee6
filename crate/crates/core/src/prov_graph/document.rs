//! Persistence as a single JSON document.

use serde::{Deserialize, Serialize};
use serde_json::error::Category;

use super::{
    Activity, AttributeMap, DepKind, Dependency, Entity, EntityKind, GraphError, NodeId,
    ProvenanceGraph,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Document {
    entities: Vec<StoredEntity>,
    activities: Vec<StoredActivity>,
    deps: Vec<StoredDep>,
    event_log: Vec<NodeId>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredEntity {
    id: NodeId,
    kind: String,
    #[serde(default)]
    attrs: AttributeMap,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredActivity {
    id: NodeId,
    #[serde(default)]
    label: String,
    #[serde(default)]
    attrs: AttributeMap,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StoredDep {
    kind: String,
    from: NodeId,
    to: NodeId,
}

pub fn save_graph(graph: &ProvenanceGraph) -> String {
    let doc = Document {
        entities: graph
            .entities()
            .iter()
            .map(|e| StoredEntity {
                id: e.id.clone(),
                kind: e.kind.abbrev().to_string(),
                attrs: e.attrs.clone(),
            })
            .collect(),
        activities: graph
            .activities()
            .iter()
            .map(|a| StoredActivity { id: a.id.clone(), label: a.label.clone(), attrs: a.attrs.clone() })
            .collect(),
        deps: graph
            .deps()
            .iter()
            .map(|d| StoredDep {
                kind: match d.kind {
                    DepKind::Used => "used".into(),
                    DepKind::WasGeneratedBy => "wasGeneratedBy".into(),
                },
                from: d.from.clone(),
                to: d.to.clone(),
            })
            .collect(),
        event_log: graph.event_log().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("graph documents always serialize");
    text.push('\n');
    text
}

pub fn load_graph(text: &str) -> Result<ProvenanceGraph, GraphError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| match e.classify() {
        Category::Data => GraphError::SchemaViolation(e.to_string()),
        _ => GraphError::ParseError(e.to_string()),
    })?;

    let entities = doc
        .entities
        .into_iter()
        .map(|e| {
            let kind = EntityKind::from_abbrev(&e.kind).ok_or_else(|| {
                GraphError::SchemaViolation(format!("entity `{}` has unknown kind `{}`", e.id, e.kind))
            })?;
            Ok(Entity { id: e.id, kind, attrs: e.attrs })
        })
        .collect::<Result<Vec<_>, GraphError>>()?;
    let activities = doc
        .activities
        .into_iter()
        .map(|a| Activity { id: a.id, label: a.label, attrs: a.attrs })
        .collect();
    let deps = doc
        .deps
        .into_iter()
        .map(|d| {
            let kind = match d.kind.as_str() {
                "used" => DepKind::Used,
                "wasGeneratedBy" => DepKind::WasGeneratedBy,
                other => {
                    return Err(GraphError::SchemaViolation(format!("unknown dependency kind `{other}`")))
                }
            };
            Ok(Dependency { kind, from: d.from, to: d.to })
        })
        .collect::<Result<Vec<_>, GraphError>>()?;

    ProvenanceGraph::from_parts(entities, activities, deps, doc.event_log).map_err(|e| match e {
        GraphError::SchemaViolation(_) => e,
        other => GraphError::SchemaViolation(other.to_string()),
    })
}
