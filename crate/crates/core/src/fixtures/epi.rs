//! An abstract epidemiological study that exercises every built-in rule:
//! a reference SIR model is extended, calibrated, refined to SEIR, composed
//! with a vaccination model and finally reimplemented.

use serde_json::{json, Value};

use super::{builtin_rules, experiment_attrs, model_attrs, models, qm_species, success, Builder, Fixture};
use crate::backends::MemoryModels;
use crate::prov_graph::{attr, EntityKind::*};

pub const REFERENCE: &str = "epi-ref";
pub const STUDY: &str = "epi";

const REF_PATH: &str = "models/epi_ref.rnet";
const SIR1_PATH: &str = "models/sir1.rnet";
const SIR2_PATH: &str = "models/sir2.rnet";
const SEIR_PATH: &str = "models/seir1.rnet";
const VAX_PATH: &str = "models/vax1.rnet";
const SEIRV_PATH: &str = "models/seirv1.rnet";
const SEIRV_B_PATH: &str = "models/seirv1b.rnet";

fn spec(path: &str, observed: &[(&str, &str)], stop: f64, section: (&str, Value)) -> Value {
    let exprs: Vec<String> = observed.iter().map(|(s, _)| format!("count(\"{s}\")")).collect();
    let aliases: Vec<&str> = observed.iter().map(|(_, a)| *a).collect();
    let times: Vec<f64> = (0..=4).map(|i| stop * i as f64 / 4.0).collect();
    let mut v = json!({
        "model": {"modelPath": path, "modelFormat": "rnet"},
        "simulation": {"simulator": "SSA", "replications": 4, "stopCondition": {"stopTime": stop}},
        "observation": {
            "observables": {"observationExpression": exprs, "observationAlias": aliases},
            "observationTime": {"observationTime": times}
        }
    });
    v[section.0] = section.1;
    v
}

fn smc(property: &str) -> (&'static str, Value) {
    ("statisticalModelChecking", json!({"propertyExpression": property, "checkingParameters": {"probabilityThreshold": 0.5}}))
}

fn params(list: &[(&str, f64)]) -> Value {
    Value::Array(list.iter().map(|(n, v)| json!({"name": n, "value": v})).collect())
}

pub fn fixture() -> Fixture {
    let mut b = Builder::new(REFERENCE);
    b.source("RQ_r1", ResearchQuestion, vec![]);
    b.source(
        "QM_r1",
        QualitativeModel,
        vec![(attr::SPECIES, qm_species(&[("S", "ido:Susceptible"), ("I", "ido:Infected"), ("R", "ido:Recovered")]))],
    );
    b.source("D_r1", Data, vec![(attr::NAME, json!("reported incidence"))]);
    b.source("D_r2", Data, vec![]);

    let sir = [("k1", 1.0), ("k2", 1.0)];
    b.act("ref_build", &["RQ_r1", "QM_r1"], vec![("RSM1", SimulationModel, model_attrs(REF_PATH, "rnet", params(&sir)))]);
    b.act(
        "ref_val",
        &["RSM1", "D_r1"],
        vec![
            (
                "SE_r1",
                SimulationExperiment,
                experiment_attrs(spec(REF_PATH, &[("S", "susceptible"), ("I", "infected")], 60.0, smc("F[<=60](infected >= 20)")), Some("ssa-rnet")),
            ),
            ("SD_r1", SimulationData, success()),
        ],
    );
    b.act(
        "ref_ts",
        &["RSM1", "D_r2"],
        vec![
            (
                "SE_r2",
                SimulationExperiment,
                experiment_attrs(spec(REF_PATH, &[("S", "S"), ("I", "I")], 80.0, ("timeCourse", json!({}))), Some("ssa-rnet")),
            ),
            ("SD_r2", SimulationData, vec![]),
        ],
    );

    b.study(STUDY);
    b.source("RQ_e1", ResearchQuestion, vec![]);
    b.source(
        "QM_e1",
        QualitativeModel,
        vec![(attr::SPECIES, qm_species(&[("s", "ido:Susceptible"), ("i", "ido:Infected"), ("r", "ido:Recovered")]))],
    );
    b.act("build_sir", &["RSM1", "RQ_e1", "QM_e1"], vec![("SIR1", SimulationModel, model_attrs(SIR1_PATH, "rnet", params(&sir)))]);
    b.act(
        "ts_sir1",
        &["SIR1"],
        vec![
            (
                "SE_e1",
                SimulationExperiment,
                experiment_attrs(
                    spec(SIR1_PATH, &[("s", "susceptible"), ("i", "infected"), ("r", "recovered")], 80.0, ("timeCourse", json!({}))),
                    Some("ssa-rnet"),
                ),
            ),
            ("SD_e1", SimulationData, vec![]),
        ],
    );
    b.source("A_e2", Assumption, vec![]);
    let uniform = json!({"kind": "uniform", "params": {"min": 0.5, "max": 2.0}});
    b.act(
        "sa_sir1",
        &["SIR1", "A_e2"],
        vec![
            (
                "SE_e2",
                SimulationExperiment,
                experiment_attrs(
                    spec(
                        SIR1_PATH,
                        &[("i", "infected")],
                        60.0,
                        (
                            "sensitivityAnalysis",
                            json!({"factorName": ["k1", "k2"], "parameterDistribution": [uniform, uniform], "sampleSize": 8, "method": "saltelli"}),
                        ),
                    ),
                    Some("ssa-rnet"),
                ),
            ),
            ("SD_e2", SimulationData, vec![]),
        ],
    );
    b.source("R_e1", Requirement, vec![(attr::FORMAL_EXPRESSION, json!("F[<=60](infected >= 20)"))]);
    b.act(
        "val_sir1",
        &["SIR1", "R_e1"],
        vec![
            (
                "SE_e3",
                SimulationExperiment,
                experiment_attrs(spec(SIR1_PATH, &[("i", "infected")], 60.0, smc("F[<=60](infected >= 20)")), Some("ssa-rnet")),
            ),
            ("SD_e3", SimulationData, success()),
        ],
    );
    b.source("D_e1", Data, vec![(attr::NAME, json!("peak prevalence"))]);
    b.act(
        "cal_sir1",
        &["SIR1", "D_e1"],
        vec![
            (
                "SE_e4",
                SimulationExperiment,
                experiment_attrs(
                    spec(
                        SIR1_PATH,
                        &[("i", "infected")],
                        60.0,
                        (
                            "optimization",
                            json!({"objectiveExpression": "minimize(infected)", "factorName": ["k1"], "factorMinimum": [0.5], "factorMaximum": [2.0], "budget": 8}),
                        ),
                    ),
                    Some("ssa-rnet"),
                ),
            ),
            ("SD_e4", SimulationData, vec![]),
            ("SIR2", SimulationModel, model_attrs(SIR2_PATH, "rnet", params(&[("k1", 1.2), ("k2", 1.0)]))),
        ],
    );

    b.source("RQ_e2", ResearchQuestion, vec![]);
    b.source(
        "QM_e2",
        QualitativeModel,
        vec![(
            attr::SPECIES,
            qm_species(&[("s", "ido:Susceptible"), ("e", "ido:Exposed"), ("i", "ido:Infected"), ("rec", "ido:Removed")]),
        )],
    );
    b.source("R_e2", Requirement, vec![(attr::FORMAL_EXPRESSION, json!("F[<=80](infected >= 30)"))]);
    let mut seir = params(&[("k1", 1.2), ("k2", 1.0), ("k3", 1.0)]);
    seir[2][attr::FACTOR_BOUNDS] = json!({"min": 0.5, "max": 2.0, "interval": 0.5});
    b.act("refine_seir", &["SIR2", "RQ_e2", "QM_e2", "R_e2"], vec![("SEIR1", SimulationModel, model_attrs(SEIR_PATH, "rnet", seir.clone()))]);

    b.source("RQ_e3", ResearchQuestion, vec![]);
    b.source("QM_e3", QualitativeModel, vec![(attr::SPECIES, qm_species(&[("s", "ido:Susceptible"), ("v", "vo:Vaccinated")]))]);
    b.source("D_e3", Data, vec![(attr::NAME, json!("vaccination coverage"))]);
    b.act("build_vax", &["RQ_e3", "QM_e3"], vec![("VAX1", SimulationModel, model_attrs(VAX_PATH, "rnet", params(&[("kv", 1.0)])))]);
    b.act(
        "val_vax",
        &["VAX1", "D_e3"],
        vec![
            (
                "SE_e5",
                SimulationExperiment,
                experiment_attrs(spec(VAX_PATH, &[("v", "vaccinated")], 100.0, smc("F[<=100](vaccinated >= 300)")), Some("ssa-rnet")),
            ),
            ("SD_e5", SimulationData, success()),
        ],
    );

    b.source(
        "QM_e4",
        QualitativeModel,
        vec![(
            attr::SPECIES,
            qm_species(&[
                ("s", "ido:Susceptible"),
                ("e", "ido:Exposed"),
                ("i", "ido:Infected"),
                ("r", "ido:Recovered"),
                ("v", "vo:Vaccinated"),
            ]),
        )],
    );
    b.source("A_e3", Assumption, vec![(attr::NAME, json!("vaccinated individuals do not lose immunity"))]);
    let seirv = params(&[("k1", 1.2), ("k2", 1.0), ("k3", 1.0), ("kv", 1.0)]);
    b.act("compose", &["SEIR1", "VAX1", "QM_e4", "A_e3"], vec![("SEIRV1", SimulationModel, model_attrs(SEIRV_PATH, "rnet", seirv.clone()))]);
    b.act("reimpl", &["SEIRV1"], vec![("SEIRV1b", SimulationModel, model_attrs(SEIRV_B_PATH, "rnet", seirv))]);

    let mut m = MemoryModels::default();
    m.0.insert(REF_PATH.into(), models::epi_reference());
    m.0.insert(SIR1_PATH.into(), models::SIR_RNET.to_string());
    m.0.insert(SIR2_PATH.into(), models::epi_sir2());
    m.0.insert(SEIR_PATH.into(), models::epi_seir());
    m.0.insert(VAX_PATH.into(), models::epi_vax());
    m.0.insert(SEIRV_PATH.into(), models::epi_seirv());
    m.0.insert(SEIRV_B_PATH.into(), models::epi_seirv());
    Fixture { name: "abstract-epi", graph: b.graph, rules: builtin_rules(), models: m }
}
