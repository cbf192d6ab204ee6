use std::collections::BTreeSet;

use super::Fixture;
use crate::prov_graph::{GraphDelta, NodeId, ProvenanceGraph};
use crate::rules::{notify, Hooks, RuleError, RunReport};

/// Splits a recorded graph into one delta per activity in event-log order.
/// Each delta carries the source entities first needed by that activity.
pub fn replay_steps(full: &ProvenanceGraph) -> Vec<(NodeId, GraphDelta)> {
    let mut emitted: BTreeSet<NodeId> = BTreeSet::new();
    let mut steps = Vec::new();
    for act in full.event_log() {
        let mut delta = GraphDelta::default();
        for u in full.used_by(act.as_str()) {
            if full.generator_of(u.as_str()).is_none() && emitted.insert(u.clone()) {
                delta.entities.push(full.entity(u.as_str()).expect("used entity exists").clone());
            }
        }
        for g in full.generated_by(act.as_str()) {
            if emitted.insert(g.clone()) {
                delta.entities.push(full.entity(g.as_str()).expect("generated entity exists").clone());
            }
        }
        delta.activities.push(full.activity(act.as_str()).expect("logged activity").clone());
        delta.deps.extend(full.deps().iter().filter(|d| d.endpoints().0 == act).cloned());
        steps.push((act.clone(), delta));
    }
    let leftovers: Vec<_> = full.entities().iter().filter(|e| !emitted.contains(&e.id)).cloned().collect();
    if let Some((_, last)) = steps.last_mut() {
        last.entities.splice(0..0, leftovers);
    }
    steps
}

/// The recorded graph up to and including `activity`, without any rule runs.
pub fn graph_until(full: &ProvenanceGraph, activity: &str) -> ProvenanceGraph {
    let mut g = ProvenanceGraph::new();
    for (act, delta) in replay_steps(full) {
        g.append_delta(delta).expect("replayed step applies");
        if act.as_str() == activity {
            break;
        }
    }
    g
}

/// Replays the fixture's event log, notifying the engine after every
/// recorded activity.
pub fn run_demo(fx: &Fixture, hooks: &dyn Hooks) -> Result<(ProvenanceGraph, RunReport), RuleError> {
    let mut g = ProvenanceGraph::new();
    let mut report = RunReport::default();
    for (act, delta) in replay_steps(&fx.graph) {
        g.append_delta(delta).map_err(|e| RuleError::Append(e.to_string()))?;
        report.merge(notify(&mut g, &fx.rules, act.as_str(), hooks)?);
    }
    Ok((g, report))
}
