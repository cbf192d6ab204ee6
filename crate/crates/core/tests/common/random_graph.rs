//! Small random provenance graphs biased towards the shapes the built-in
//! patterns look for.

use expreuse::prov_graph::{attrs, ActivityRecord, AttributeMap, EntityKind, Generated, ProvenanceGraph};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SOURCE_KINDS: [EntityKind; 6] = [
    EntityKind::SimulationModel,
    EntityKind::SimulationModel,
    EntityKind::Data,
    EntityKind::Requirement,
    EntityKind::ResearchQuestion,
    EntityKind::Other,
];

fn entity_attrs(rng: &mut ChaCha8Rng, kind: EntityKind) -> AttributeMap {
    let study = if rng.random_bool(0.8) { "s1" } else { "s2" };
    let mut a = attrs([("studyId", json!(study))]);
    match kind {
        EntityKind::SimulationExperiment => {
            let t = ["sensitivityAnalysis", "parameterScan", "timeCourse"].choose(rng).unwrap();
            a.insert("experimentType".into(), json!(t));
        }
        EntityKind::SimulationData => match rng.random_range(0..3) {
            0 => {}
            1 => {
                a.insert("status".into(), json!("success"));
            }
            _ => {
                a.insert("status".into(), json!("failure"));
            }
        },
        _ => {}
    }
    a
}

fn outputs(rng: &mut ChaCha8Rng) -> Vec<EntityKind> {
    use EntityKind::*;
    match rng.random_range(0..6) {
        0 | 1 => vec![SimulationModel],
        2 | 3 => vec![SimulationExperiment, SimulationData],
        4 => vec![SimulationExperiment, SimulationData, SimulationModel],
        _ => {
            let n = rng.random_range(1..=3);
            (0..n).map(|_| *EntityKind::ALL.choose(rng).unwrap()).collect()
        }
    }
}

/// A random graph with at most `max_nodes` nodes.
pub fn random_graph(seed: u64, max_nodes: usize) -> ProvenanceGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = ProvenanceGraph::new();
    let mut nodes = 0;
    let sources = rng.random_range(2..=5).min(max_nodes);
    for i in 0..sources {
        let kind = *SOURCE_KINDS.choose(&mut rng).unwrap();
        let a = entity_attrs(&mut rng, kind);
        g.add_entity(kind, a, Some(format!("s{i}").into())).unwrap();
        nodes += 1;
    }
    let mut step = 0;
    while nodes + 2 <= max_nodes {
        let outs = outputs(&mut rng);
        let outs: Vec<EntityKind> = outs.into_iter().take(max_nodes - nodes - 1).collect();
        let ids: Vec<String> = g.entities().iter().map(|e| e.id.as_str().to_string()).collect();
        let n_used = rng.random_range(0..=ids.len().min(4));
        let used: Vec<String> = ids.choose_multiple(&mut rng, n_used).cloned().collect();
        if used.is_empty() && outs.is_empty() {
            continue;
        }
        let mut rec = ActivityRecord::new(format!("step {step}")).id(format!("a{step}")).uses(used);
        for (j, kind) in outs.iter().enumerate() {
            let a = entity_attrs(&mut rng, *kind);
            rec = rec.generates(Generated::with_id(format!("e{step}_{j}"), *kind, a));
        }
        nodes += 1 + outs.len();
        g.record_activity(rec).unwrap();
        step += 1;
    }
    g
}
