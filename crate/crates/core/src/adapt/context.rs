use std::collections::{BTreeSet, VecDeque};

use super::{AdaptContext, AdaptError};
use crate::canonical_exp::{from_value, parse_canonical, CanonicalExperiment};
use crate::prov_graph::{attr, Direction, Entity, EntityKind, NodeId, ProvenanceGraph};

fn entity_of<'g>(graph: &'g ProvenanceGraph, id: &str, kind: EntityKind) -> Result<&'g Entity, AdaptError> {
    let e = graph.entity(id).ok_or_else(|| AdaptError::UnknownNodeId(NodeId::from(id)))?;
    if e.kind != kind {
        return Err(AdaptError::KindMismatch(e.id.clone(), kind));
    }
    Ok(e)
}

/// The canonical specification stored on an experiment entity, either as an
/// embedded object or as JSON text.
pub fn specification_of(graph: &ProvenanceGraph, se: &str) -> Result<CanonicalExperiment, AdaptError> {
    let e = entity_of(graph, se, EntityKind::SimulationExperiment)?;
    let raw = e.attrs.get(attr::SPECIFICATION).ok_or_else(|| AdaptError::MissingSpecification(e.id.clone()))?;
    let parsed = match raw {
        serde_json::Value::String(text) => parse_canonical(text),
        other => from_value(other),
    };
    parsed.map_err(|err| AdaptError::UnreadableSpecification { id: e.id.clone(), reason: err.to_string() })
}

/// Closest qualitative model behind a simulation model: one used directly by
/// its producing activity, else one found further up through the models
/// that activity used.
pub fn nearest_qualitative_model<'g>(graph: &'g ProvenanceGraph, sm: &str) -> Option<&'g Entity> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([sm.to_string()]);
    while let Some(cur) = queue.pop_front() {
        if !seen.insert(cur.clone()) {
            continue;
        }
        let Some(act) = graph.generator_of(&cur) else { continue };
        let used: Vec<&Entity> = graph.used_by(act.as_str()).iter().filter_map(|u| graph.entity(u.as_str())).collect();
        if let Some(qm) = used.iter().find(|e| e.kind == EntityKind::QualitativeModel) {
            return Some(qm);
        }
        for u in used.iter().filter(|e| e.kind == EntityKind::SimulationModel) {
            queue.push_back(u.id.as_str().to_string());
        }
    }
    None
}

/// Gathers the context for reusing `old_se` on `new_sm`.
pub fn build_context(graph: &ProvenanceGraph, old_se: &str, new_sm: &str) -> Result<AdaptContext, AdaptError> {
    let se = entity_of(graph, old_se, EntityKind::SimulationExperiment)?;
    if !se.attrs.contains_key(attr::SPECIFICATION) {
        return Err(AdaptError::MissingSpecification(se.id.clone()));
    }
    let new_model = entity_of(graph, new_sm, EntityKind::SimulationModel)?.clone();
    let exp_act = graph.generator_of(old_se).ok_or_else(|| AdaptError::NoOldModel(se.id.clone()))?;
    let old_model = graph
        .used_by(exp_act.as_str())
        .iter()
        .filter_map(|u| graph.entity(u.as_str()))
        .find(|e| e.kind == EntityKind::SimulationModel)
        .ok_or_else(|| AdaptError::NoOldModel(se.id.clone()))?
        .clone();

    // activities between the old experiment and the new model
    let exp_pos = graph.log_position(exp_act.as_str()).unwrap_or(0);
    let ancestors = graph.query_lineage(new_sm, Direction::Ancestors).unwrap_or_default();
    let descendants = graph.query_lineage(old_model.id.as_str(), Direction::Descendants).unwrap_or_default();
    let mut path_acts: Vec<(usize, &NodeId)> = ancestors
        .intersection(&descendants)
        .filter(|id| graph.is_activity(id.as_str()))
        .filter_map(|id| graph.log_position(id.as_str()).map(|p| (p, id)))
        .filter(|(p, _)| *p > exp_pos)
        .collect();
    path_acts.sort();

    let mut assumptions = Vec::new();
    let mut requirements = Vec::new();
    let mut seen = BTreeSet::new();
    for (_, act) in &path_acts {
        for u in graph.used_by(act.as_str()) {
            let Some(e) = graph.entity(u.as_str()) else { continue };
            if !seen.insert(e.id.clone()) {
                continue;
            }
            match e.kind {
                EntityKind::Assumption => assumptions.push(e.clone()),
                EntityKind::Requirement => requirements.push(e.clone()),
                _ => {}
            }
        }
    }

    let declared = assumptions
        .iter()
        .rev()
        .find_map(|a| a.attrs.get(attr::TIME_SCALE_FACTOR).and_then(|v| v.as_f64()));
    let ratio = || {
        let get = |e: &Entity| e.attrs.get(attr::TIME_SCALE_FACTOR).and_then(|v| v.as_f64());
        match (get(&old_model), get(&new_model)) {
            (Some(o), Some(n)) if o != 0.0 => Some(n / o),
            (None, Some(n)) => Some(n),
            _ => None,
        }
    };
    let time_scale_factor = declared.or_else(ratio);

    Ok(AdaptContext {
        old_qm: nearest_qualitative_model(graph, old_model.id.as_str()).cloned(),
        new_qm: nearest_qualitative_model(graph, new_sm).cloned(),
        old_model,
        new_model,
        assumptions,
        requirements,
        time_scale_factor,
    })
}
