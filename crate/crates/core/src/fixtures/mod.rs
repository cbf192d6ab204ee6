//! Case-study provenance graphs, specifications and models used by the demo
//! command and the tests.

mod epi;
mod migration;
pub mod models;
mod replay;
pub mod specs;
mod wnt;

pub use replay::{graph_until, replay_steps, run_demo};

use serde_json::{json, Value};

use crate::backends::MemoryModels;
use crate::prov_graph::{attr, ActivityRecord, AttributeMap, EntityKind, Generated, ProvenanceGraph};
use crate::rules::{builtin_rules, RuleSet};

pub const DEMOS: [&str; 3] = ["migration", "wnt", "abstract-epi"];

/// A recorded study together with the rules its demo enables and the model
/// files its specifications refer to.
pub struct Fixture {
    pub name: &'static str,
    pub graph: ProvenanceGraph,
    pub rules: RuleSet,
    pub models: MemoryModels,
}

pub fn fixture(name: &str) -> Option<Fixture> {
    match name {
        "migration" => Some(migration::fixture()),
        "wnt" => Some(wnt::fixture()),
        "abstract-epi" => Some(epi::fixture()),
        _ => None,
    }
}

/// Every bundled model keyed by the path specifications use.
pub fn bundled_models() -> MemoryModels {
    let mut m = MemoryModels::default();
    m.0.insert(models::SIR_PATH.to_string(), models::SIR_RNET.to_string());
    for name in DEMOS {
        if let Some(f) = fixture(name) {
            m.0.extend(f.models.0);
        }
    }
    m
}

fn rules_only(ids: &[&str]) -> RuleSet {
    builtin_rules().only(ids)
}

type Attrs<'a> = Vec<(&'a str, Value)>;

/// Small helper that records entities and activities for one study at a time.
struct Builder {
    graph: ProvenanceGraph,
    study: String,
}

impl Builder {
    fn new(study: &str) -> Self {
        Builder { graph: ProvenanceGraph::new(), study: study.into() }
    }

    fn study(&mut self, study: &str) {
        self.study = study.into();
    }

    fn attrs(&self, extra: Attrs) -> AttributeMap {
        let mut a = AttributeMap::new();
        a.insert(attr::STUDY_ID.into(), json!(self.study));
        for (k, v) in extra {
            a.insert(k.to_string(), v);
        }
        a
    }

    fn source(&mut self, id: &str, kind: EntityKind, extra: Attrs) {
        let a = self.attrs(extra);
        self.graph.add_entity(kind, a, Some(id.into())).expect("fixture entity");
    }

    fn act(&mut self, id: &str, uses: &[&str], gens: Vec<(&str, EntityKind, Attrs)>) {
        let mut rec = ActivityRecord::new(id).id(id).uses(uses.iter().copied());
        for (gid, kind, extra) in gens {
            rec = rec.generates(Generated::with_id(gid, kind, self.attrs(extra)));
        }
        self.graph.record_activity(rec).expect("fixture activity");
    }
}

fn qm_species(list: &[(&str, &str)]) -> Value {
    Value::Array(list.iter().map(|(n, t)| json!({"name": n, "ontologyTag": t})).collect())
}

fn model_attrs<'a>(path: &str, format: &str, params: Value) -> Attrs<'a> {
    vec![(attr::MODEL_PATH, json!(path)), (attr::MODEL_FORMAT, json!(format)), (attr::PARAMETERS, params)]
}

fn experiment_attrs<'a>(spec: Value, backend: Option<&str>) -> Attrs<'a> {
    let kind = ["parameterScan", "sensitivityAnalysis", "statisticalModelChecking", "optimization", "timeCourse"]
        .into_iter()
        .find(|k| spec.get(k).is_some())
        .expect("spec names its experiment type");
    let mut a = vec![(attr::EXPERIMENT_TYPE, json!(kind)), (attr::SPECIFICATION, spec)];
    if let Some(b) = backend {
        a.push((attr::BACKEND, json!(b)));
    }
    a
}

fn success<'a>() -> Attrs<'a> {
    vec![(attr::STATUS, json!("success"))]
}

#[cfg(test)]
mod tests;
