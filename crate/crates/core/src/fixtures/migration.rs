//! Five successive versions of a migration model. Only the sensitivity
//! analysis repetition is enabled for this demo.

use serde_json::{json, Value};

use super::{experiment_attrs, model_attrs, models, rules_only, Builder, Fixture};
use crate::backends::MemoryModels;
use crate::prov_graph::{attr, EntityKind::*};

pub const STUDY: &str = "migration";

fn observation() -> Value {
    json!({
        "observables": {
            "observationExpression": ["count(\"planning\")", "count(\"arrived\")"],
            "observationAlias": ["freq_plan", "arrived"]
        },
        "observationTime": {"observationTime": [0, 25, 50, 75, 100]}
    })
}

fn simulation() -> Value {
    json!({"simulator": "SSA", "replications": 2, "stopCondition": {"stopTime": 100}})
}

fn m3_params() -> Value {
    json!([
        {"name": "k_plan", "value": 1.0},
        {"name": "k_depart", "value": 1.0},
        {"name": "k_speed", "value": 1.0},
        {"name": "k_replan", "value": 1.0}
    ])
}

fn m4_params() -> Value {
    let mut p = m3_params();
    let list = p.as_array_mut().unwrap();
    list.push(json!({"name": "risk_aversion", "value": 1.0, "factorBounds": {"min": 0.5, "max": 2.0}}));
    list.push(json!({"name": "risk_sharing", "value": 1.0, "factorBounds": {"min": 0.5, "max": 2.0}}));
    p
}

fn m5_params() -> Value {
    let mut p = m4_params();
    p[1]["value"] = json!(0.8);
    p
}

pub fn e1_spec() -> Value {
    json!({
        "model": {"modelPath": "models/M3.rnet", "modelFormat": "rnet"},
        "simulation": simulation(),
        "observation": observation(),
        "parameterScan": {"factorName": ["k_depart"], "factorMinimum": [0.5], "factorMaximum": [1.5], "interval": [0.5]}
    })
}

pub fn e2_spec() -> Value {
    let uniform = json!({"kind": "uniform", "params": {"min": 0.5, "max": 2.0}});
    json!({
        "model": {"modelPath": "models/M3.rnet", "modelFormat": "rnet"},
        "simulation": simulation(),
        "observation": observation(),
        "sensitivityAnalysis": {
            "factorName": ["k_plan", "k_depart", "k_speed"],
            "parameterDistribution": [uniform, uniform, uniform],
            "sampleSize": 16,
            "method": "saltelli"
        }
    })
}

pub fn fixture() -> Fixture {
    let mut b = Builder::new(STUDY);
    b.source("RQ1", ResearchQuestion, vec![]);
    b.source("T1", Theory, vec![]);
    b.source("A1", Assumption, vec![]);
    b.source("T2", Theory, vec![]);
    b.source("K01", Other, vec![(attr::NAME, json!("sensitivity analysis knowledge"))]);
    b.source("RQ2", ResearchQuestion, vec![]);
    b.source("RF", Data, vec![(attr::NAME, json!("risk and information exchange data"))]);
    b.source("RQ3", ResearchQuestion, vec![]);
    b.source("D3", Data, vec![]);

    b.act("m1", &["RQ1", "T1"], vec![("M1", SimulationModel, model_attrs("models/M1.jl", "julia", json!([])))]);
    b.act("m2", &["M1", "A1"], vec![("M2", SimulationModel, model_attrs("models/M2.jl", "julia", json!([])))]);
    b.act("m2'", &["M2", "T2"], vec![("A2", Assumption, vec![])]);
    b.act("m3", &["M2", "A2"], vec![("M3", SimulationModel, model_attrs("models/M3.rnet", "rnet", m3_params()))]);
    b.act(
        "a1",
        &["M3"],
        vec![("E1", SimulationExperiment, experiment_attrs(e1_spec(), Some("ssa-rnet"))), ("S1", SimulationData, vec![])],
    );
    b.act(
        "a2",
        &["M3", "K01", "S1"],
        vec![("E2", SimulationExperiment, experiment_attrs(e2_spec(), Some("ssa-rnet"))), ("S2", SimulationData, vec![])],
    );
    b.act("m4", &["M3", "RQ2", "RF"], vec![("M4", SimulationModel, model_attrs("models/M4.rnet", "rnet", m4_params()))]);
    b.act("m5", &["M4", "RQ3", "D3"], vec![("M5", SimulationModel, model_attrs("models/M5.rnet", "rnet", m5_params()))]);

    let mut m = MemoryModels::default();
    m.0.insert("models/M3.rnet".into(), models::migration_m3());
    m.0.insert("models/M4.rnet".into(), models::migration_m4());
    m.0.insert("models/M5.rnet".into(), models::migration_m5());
    Fixture { name: "migration", graph: b.graph, rules: rules_only(&["r1"]), models: m }
}
