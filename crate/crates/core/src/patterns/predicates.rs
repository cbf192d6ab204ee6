use std::collections::{BTreeSet, VecDeque};

use super::{match_anchored, BuiltinPattern, PatternError, PatternRole};
use crate::prov_graph::{attr, Entity, EntityKind, NodeId, ProvenanceGraph};

fn model<'g>(graph: &'g ProvenanceGraph, id: &str) -> Result<&'g Entity, PatternError> {
    if !graph.contains(id) {
        return Err(PatternError::UnknownNodeId(NodeId::from(id)));
    }
    match graph.entity(id) {
        Some(e) if e.kind == EntityKind::SimulationModel => Ok(e),
        _ => Err(PatternError::KindMismatch(NodeId::from(id), EntityKind::SimulationModel)),
    }
}

fn study<'g>(graph: &'g ProvenanceGraph, id: &str) -> Result<&'g str, PatternError> {
    let e = graph.entity(id).ok_or_else(|| PatternError::UnknownNodeId(NodeId::from(id)))?;
    e.study_id().ok_or_else(|| PatternError::MissingStudyId(NodeId::from(id)))
}

/// `sm_b` equals `sm_a` or derives from it through model-producing activities.
pub fn is_based_on(graph: &ProvenanceGraph, sm_b: &str, sm_a: &str) -> Result<bool, PatternError> {
    model(graph, sm_b)?;
    model(graph, sm_a)?;
    if sm_a == sm_b {
        return Ok(true);
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue = VecDeque::from([sm_a]);
    while let Some(cur) = queue.pop_front() {
        for act in graph.users_of(cur) {
            for out in graph.generated_by(act.as_str()) {
                let is_model = graph.entity(out.as_str()).is_some_and(|e| e.kind == EntityKind::SimulationModel);
                if !is_model {
                    continue;
                }
                if out.as_str() == sm_b {
                    return Ok(true);
                }
                if seen.insert(out.as_str()) {
                    queue.push_back(out.as_str());
                }
            }
        }
    }
    Ok(false)
}

/// Some validation activity used `sm` and produced data marked successful.
pub fn is_validated(graph: &ProvenanceGraph, sm: &str) -> Result<bool, PatternError> {
    model(graph, sm)?;
    let pattern = BuiltinPattern::ValidatingSM.pattern(PatternRole::Experiment);
    for act in graph.users_of(sm) {
        let Some(b) = match_anchored(graph, pattern, act.as_str())? else {
            continue;
        };
        if b.one("SM").map(NodeId::as_str) != Some(sm) {
            continue;
        }
        let ok = b
            .one("SD")
            .and_then(|sd| graph.entity(sd.as_str()))
            .is_some_and(|sd| sd.attr_str(attr::STATUS) == Some("success"));
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

pub fn different_study(graph: &ProvenanceGraph, a: &str, b: &str) -> Result<bool, PatternError> {
    Ok(study(graph, a)? != study(graph, b)?)
}

pub fn same_study(graph: &ProvenanceGraph, a: &str, b: &str) -> Result<bool, PatternError> {
    Ok(study(graph, a)? == study(graph, b)?)
}
