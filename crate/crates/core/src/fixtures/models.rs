//! Bundled "rnet" models referenced by the fixture specifications.

/// Closed SIR: infection s + i -> 2i at 0.001 * k1, recovery i -> r at 0.1 * k2.
pub const SIR_RNET: &str = r#"{
  "species": [
    {"name": "s", "init": 990},
    {"name": "i", "init": 10},
    {"name": "r", "init": 0}
  ],
  "reactions": [
    {"reactants": ["s", "i"], "products": ["i", "i"], "rate": 0.001, "parameter": "k1"},
    {"reactants": ["i"], "products": ["r"], "rate": 0.1, "parameter": "k2"}
  ],
  "parameters": {"k1": 1.0, "k2": 1.0}
}
"#;

/// Path under which the bundled scan specification names the SIR model.
pub const SIR_PATH: &str = "./sir.mlrj";

fn network(species: &[(&str, u64)], reactions: &[(&[&str], &[&str], f64, &str)], params: &[(&str, f64)]) -> String {
    use crate::backends::ReactionModel;
    use crate::backends::rnet::{Reaction, Species};
    ReactionModel {
        species: species.iter().map(|(n, i)| Species { name: n.to_string(), init: *i }).collect(),
        reactions: reactions
            .iter()
            .map(|(r, p, rate, k)| Reaction {
                reactants: r.iter().map(|s| s.to_string()).collect(),
                products: p.iter().map(|s| s.to_string()).collect(),
                rate: *rate,
                parameter: Some(k.to_string()),
            })
            .collect(),
        parameters: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
    }
    .to_text()
}

/// Route-planning abstraction of the migration models. Agents wait, plan a
/// route, travel and arrive; travellers may fall back to planning when new
/// information arrives.
pub fn migration_m3() -> String {
    network(
        &[("waiting", 200), ("planning", 0), ("transit", 0), ("arrived", 0)],
        &[
            (&["waiting"], &["planning"], 0.05, "k_plan"),
            (&["planning"], &["transit"], 0.1, "k_depart"),
            (&["transit"], &["arrived"], 0.04, "k_speed"),
            (&["transit"], &["planning"], 0.01, "k_replan"),
        ],
        &[("k_plan", 1.0), ("k_depart", 1.0), ("k_speed", 1.0), ("k_replan", 1.0)],
    )
}

/// M3 plus risk behaviour: travellers turn back and warn others.
pub fn migration_m4() -> String {
    network(
        &[("waiting", 200), ("planning", 0), ("transit", 0), ("arrived", 0)],
        &[
            (&["waiting"], &["planning"], 0.05, "k_plan"),
            (&["planning"], &["transit"], 0.1, "k_depart"),
            (&["transit"], &["arrived"], 0.04, "k_speed"),
            (&["transit"], &["planning"], 0.01, "k_replan"),
            (&["transit"], &["waiting"], 0.01, "risk_aversion"),
            (&["transit", "planning"], &["transit", "waiting"], 0.0005, "risk_sharing"),
        ],
        &[("k_plan", 1.0), ("k_depart", 1.0), ("k_speed", 1.0), ("k_replan", 1.0), ("risk_aversion", 1.0), ("risk_sharing", 1.0)],
    )
}

/// M4 with a recalibrated departure rate.
pub fn migration_m5() -> String {
    migration_m4().replace("\"k_depart\": 1.0", "\"k_depart\": 0.8")
}

/// Extended Wnt model: membrane receptor activation of Dvl, Axin turnover
/// and Axin-mediated beta-catenin degradation under a decaying stimulus.
pub fn wnt_haack() -> String {
    network(
        &[("Wnt", 50), ("LRP6", 100), ("Dvl", 100), ("Dvl_active", 0), ("Axin", 50), ("beta-catenin", 20)],
        &[
            (&["Wnt", "Dvl"], &["Wnt", "Dvl_active"], 0.001, "k_act"),
            (&["Dvl_active"], &["Dvl"], 0.1, "k_inact"),
            (&["Dvl_active", "Axin"], &["Dvl_active"], 0.0005, "k_axdeg"),
            (&[], &["Axin"], 1.0, "k_axsyn"),
            (&["Axin"], &[], 0.02, "k_axturn"),
            (&[], &["beta-catenin"], 5.0, "k_syn"),
            (&["beta-catenin", "Axin"], &["Axin"], 0.002, "k_deg"),
            (&["Wnt"], &[], 0.05, "k_wdeg"),
        ],
        &[
            ("k_act", 1.0),
            ("k_inact", 1.0),
            ("k_axdeg", 1.0),
            ("k_axsyn", 1.0),
            ("k_axturn", 1.0),
            ("k_syn", 1.0),
            ("k_deg", 1.0),
            ("k_wdeg", 1.0),
        ],
    )
}

/// SIR with capitalised species names, as used by the reference study.
pub fn epi_reference() -> String {
    SIR_RNET.replace("\"s\"", "\"S\"").replace("\"i\"", "\"I\"").replace("\"r\"", "\"R\"")
}

pub fn epi_sir2() -> String {
    SIR_RNET.replace("\"k1\": 1.0", "\"k1\": 1.2")
}

/// SEIR with an exposed stage; recovered individuals are counted as removed.
pub fn epi_seir() -> String {
    network(
        &[("s", 990), ("e", 0), ("i", 10), ("rec", 0)],
        &[
            (&["s", "i"], &["e", "i"], 0.001, "k1"),
            (&["e"], &["i"], 0.2, "k3"),
            (&["i"], &["rec"], 0.1, "k2"),
        ],
        &[("k1", 1.2), ("k2", 1.0), ("k3", 1.0)],
    )
}

pub fn epi_vax() -> String {
    network(&[("s", 990), ("v", 0)], &[(&["s"], &["v"], 0.01, "kv")], &[("kv", 1.0)])
}

/// SEIR composed with vaccination.
pub fn epi_seirv() -> String {
    network(
        &[("s", 990), ("e", 0), ("i", 10), ("r", 0), ("v", 0)],
        &[
            (&["s", "i"], &["e", "i"], 0.001, "k1"),
            (&["e"], &["i"], 0.2, "k3"),
            (&["i"], &["r"], 0.1, "k2"),
            (&["s"], &["v"], 0.01, "kv"),
        ],
        &[("k1", 1.2), ("k2", 1.0), ("k3", 1.0), ("kv", 1.0)],
    )
}
