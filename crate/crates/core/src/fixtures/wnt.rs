//! Two Wnt/beta-catenin studies. The second extends and recalibrates a model
//! of the first; the first study's analyses get rerun as cross-validation.

use serde_json::{json, Value};

use super::{experiment_attrs, model_attrs, models, qm_species, rules_only, success, Builder, Fixture};
use crate::backends::MemoryModels;
use crate::prov_graph::{attr, EntityKind::*};

pub const LEE: &str = "lee2003";
pub const HAACK: &str = "haack2015";

const LEE_PATH: &str = "models/lee2003.xml";
const HAACK_PATH: &str = "models/haack2015.rnet";

fn lee_params() -> Value {
    json!([
        {"name": "k_act", "value": 1.0},
        {"name": "k_axdeg", "value": 1.0},
        {"name": "k_syn", "value": 1.0},
        {"name": "k_deg", "value": 1.0}
    ])
}

fn haack_params() -> Value {
    let names = ["k_act", "k_inact", "k_axdeg", "k_axsyn", "k_axturn", "k_syn", "k_deg", "k_wdeg"];
    Value::Array(names.iter().map(|n| json!({"name": n, "value": 1.0})).collect())
}

fn lee_spec(observed: &[&str], aliases: &[&str], section: (&str, Value)) -> Value {
    let exprs: Vec<String> = observed.iter().map(|s| format!("count(\"{s}\")")).collect();
    let mut spec = json!({
        "model": {"modelPath": LEE_PATH, "modelFormat": "sbml"},
        "simulation": {"simulator": "SSA", "replications": 2, "stopCondition": {"stopTime": 50}},
        "observation": {
            "observables": {"observationExpression": exprs, "observationAlias": aliases},
            "observationTime": {"observationTime": [0, 10, 20, 30, 40, 50]}
        }
    });
    spec[section.0] = section.1;
    spec
}

fn time_course(observed: &[&str], aliases: &[&str]) -> Value {
    lee_spec(observed, aliases, ("timeCourse", json!({})))
}

pub fn fixture() -> Fixture {
    let lee_tags = [
        ("W", "UniProtKB:P31285"),
        ("Axin", "UniProtKB:Q9YGY0"),
        ("beta-catenin", "UniProtKB:P26233"),
        ("Dsh", "UniProtKB:P51142"),
    ];
    let haack_tags = [
        ("Wnt", "UniProtKB:P31285"),
        ("Axin", "UniProtKB:Q9YGY0"),
        ("beta-catenin", "UniProtKB:P26233"),
        ("Dvl", "UniProtKB:P51142"),
    ];

    let mut b = Builder::new(LEE);
    b.source("RQ1_Lee", ResearchQuestion, vec![]);
    b.source("QM1_Lee", QualitativeModel, vec![(attr::SPECIES, qm_species(&lee_tags))]);
    b.source("WD1", Data, vec![(attr::NAME, json!("Xenopus egg extract kinetics"))]);
    b.source("WD3", Data, vec![]);
    b.source("WD6", Data, vec![]);
    b.source("A1_Lee", Assumption, vec![]);
    b.source("WD8", Data, vec![]);

    b.act("BSM1_Lee", &["RQ1_Lee", "QM1_Lee"], vec![("SM1_Lee", SimulationModel, model_attrs(LEE_PATH, "sbml", lee_params()))]);
    let cal = lee_spec(
        &["beta-catenin"],
        &["beta-catenin"],
        (
            "optimization",
            json!({"objectiveExpression": "minimize(beta-catenin)", "factorName": ["k_deg"], "factorMinimum": [0.5], "factorMaximum": [2.0], "budget": 8}),
        ),
    );
    b.act(
        "CSM1_Lee",
        &["SM1_Lee", "WD1"],
        vec![
            ("SE1_Lee", SimulationExperiment, experiment_attrs(cal, None)),
            ("SD1_Lee", SimulationData, vec![]),
            ("SM2_Lee", SimulationModel, model_attrs(LEE_PATH, "sbml", lee_params())),
        ],
    );
    b.act(
        "VSM1_Lee",
        &["SM2_Lee", "WD3"],
        vec![
            ("SE2", SimulationExperiment, experiment_attrs(time_course(&["beta-catenin"], &["beta-catenin"]), None)),
            ("SD2", SimulationData, success()),
        ],
    );
    let analyses: [(&str, &[&str], Value); 4] = [
        ("ASM1", &["WD6"], time_course(&["beta-catenin", "Axin"], &["beta-catenin", "Axin"])),
        (
            "ASM2",
            &["A1_Lee"],
            lee_spec(
                &["beta-catenin"],
                &["beta-catenin"],
                ("parameterScan", json!({"factorName": ["k_deg"], "factorMinimum": [0.5], "factorMaximum": [1.5], "interval": [0.5]})),
            ),
        ),
        ("ASM3", &["WD8"], time_course(&["W", "Dsh"], &["W", "Dsh"])),
        ("ASM4", &[], time_course(&["beta-catenin", "Dsh", "Axin"], &["beta-catenin", "Dsh", "Axin"])),
    ];
    for (i, (act, extra, spec)) in analyses.into_iter().enumerate() {
        let mut uses = vec!["SM2_Lee"];
        uses.extend_from_slice(extra);
        let n = i + 3;
        b.act(
            act,
            &uses,
            vec![
                (&format!("SE{n}"), SimulationExperiment, experiment_attrs(spec, None)),
                (&format!("SD{n}"), SimulationData, vec![]),
            ],
        );
    }

    b.study(HAACK);
    b.source("QM1_Haack", QualitativeModel, vec![(attr::SPECIES, qm_species(&haack_tags))]);
    b.source("RQ1_Haack", ResearchQuestion, vec![]);
    b.source("A1_Haack", Assumption, vec![(attr::TIME_SCALE_FACTOR, json!(2.0))]);
    b.source("WD2", Data, vec![]);
    b.act(
        "BSM1_Haack",
        &["SM2_Lee", "QM1_Haack", "RQ1_Haack", "A1_Haack"],
        vec![("SM1_Haack", SimulationModel, model_attrs(HAACK_PATH, "rnet", haack_params()))],
    );
    let mut cal = lee_spec(
        &["beta-catenin"],
        &["beta-catenin"],
        (
            "optimization",
            json!({"objectiveExpression": "minimize(beta-catenin)", "factorName": ["k_deg"], "factorMinimum": [0.5], "factorMaximum": [2.0], "budget": 8}),
        ),
    );
    cal["model"] = json!({"modelPath": HAACK_PATH, "modelFormat": "rnet"});
    b.act(
        "CSM1_Haack",
        &["SM1_Haack", "WD2"],
        vec![
            ("SE1_Haack", SimulationExperiment, experiment_attrs(cal, Some("ssa-rnet"))),
            ("SD1_Haack", SimulationData, vec![]),
            ("SM2_Haack", SimulationModel, model_attrs(HAACK_PATH, "rnet", haack_params())),
        ],
    );

    let mut m = MemoryModels::default();
    m.0.insert(HAACK_PATH.into(), models::wnt_haack());
    Fixture { name: "wnt", graph: b.graph, rules: rules_only(&["r2"]), models: m }
}
