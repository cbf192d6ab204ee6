use std::path::Path;
use std::process::{Command, Output};

use expreuse::fixtures::{fixture, graph_until};
use expreuse::prov_graph::{load_graph, save_graph, EntityKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expreuse"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_fixture(dir: &Path, name: &str, until: Option<&str>) -> String {
    let fx = fixture(name).unwrap();
    let g = match until {
        Some(a) => graph_until(&fx.graph, a),
        None => fx.graph,
    };
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, save_graph(&g)).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn ingest_reports_the_migration_models() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "migration", None);
    let o = run(&["ingest", "--graph", &g]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("  SM: 5\n"), "{}", stdout(&o));
    assert!(stdout(&o).contains("active rules: r1, r2, r3, r4, r5, r6, r7"));
}

#[test]
fn ingest_honours_a_rule_document() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "migration", None);
    let rules = dir.path().join("rules.json");
    std::fs::write(&rules, r#"{"rules": [{"id": "r2", "enabled": false}]}"#).unwrap();
    let out = dir.path().join("norm");
    let o = run(&["ingest", "--graph", &g, "--rules", rules.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("active rules: r1, r3, r4, r5, r6, r7"));
    assert!(out.join("graph.json").exists() && out.join("rules.json").exists());
}

#[test]
fn malformed_input_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = run(&["ingest", "--graph", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    let o = run(&["ingest", "--graph", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["notify"]).status.code(), Some(2));
    assert_eq!(run(&["demo", "wnt", "--seed", "abc"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn notify_m4_then_m5_follows_the_reuse_chain() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "migration", Some("m4"));
    let rules = dir.path().join("r1.json");
    std::fs::write(&rules, r#"{"includeBuiltins": true, "rules": [{"id": "r2", "enabled": false}, {"id": "r3", "enabled": false}, {"id": "r4", "enabled": false}, {"id": "r5", "enabled": false}, {"id": "r6", "enabled": false}, {"id": "r7", "enabled": false}]}"#).unwrap();
    let r = rules.to_str().unwrap();

    let o = run(&["notify", "m4", "--graph", &g, "--rules", r]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("generated")).count(), 1, "{text}");
    assert!(text.contains("r1 at m4: reuse E2 from a2"));

    // the graph file was updated in place; add m5 and notify again
    let mut graph = load_graph(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(graph.entities().iter().filter(|e| e.kind == EntityKind::SimulationExperiment).count(), 3);
    let full = fixture("migration").unwrap().graph;
    let step = expreuse::fixtures::replay_steps(&full).into_iter().find(|(a, _)| a.as_str() == "m5").unwrap().1;
    graph.append_delta(step).unwrap();
    std::fs::write(&g, save_graph(&graph)).unwrap();

    let o = run(&["notify", "m5", "--graph", &g, "--rules", r]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("r1 at m5: reuse gen-r1-2 from gen-r1-1: generated"), "{text}");
    assert!(text.contains("reuse E2 from a2: skipped"), "{text}");
}

#[test]
fn notify_errors_are_domain_errors() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "migration", Some("m4"));
    let o = run(&["notify", "m3", "--graph", &g]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("m4"));
    assert_eq!(run(&["notify", "zzz", "--graph", &g]).status.code(), Some(1));
}

#[test]
fn notify_without_a_trigger_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "migration", Some("a2"));
    let out = dir.path().join("o");
    let o = run(&["notify", "a2", "--graph", &g, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "no rule fired");
    assert!(out.join("graph.json").exists());
}

#[test]
fn demo_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wnt");
    let o = run(&["--parallel", "2", "demo", "wnt", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("r2 at CSM1_Haack") && l.contains("generated")).count(), 4);
    for f in ["graph.json", "graph.dot", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert_eq!(std::fs::read_dir(out.join("specs")).unwrap().count(), 4);
    assert_eq!(std::fs::read_dir(out.join("data")).unwrap().count(), 4);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let rounds = report["rounds"].as_array().unwrap();
    let fired = rounds.iter().find(|r| !r["outcomes"].as_array().unwrap().is_empty()).unwrap();
    assert_eq!(fired["anchor"], "CSM1_Haack");
    assert_eq!(fired["outcomes"][0]["ruleId"], "r2");
}

#[test]
fn demo_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(run(&["demo", "migration", "--out", a.to_str().unwrap()]).status.success());
    assert!(run(&["--parallel", "1", "demo", "migration", "--out", b.to_str().unwrap()]).status.success());
    for f in ["graph.json", "graph.dot", "report.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let other = dir.path().join("c");
    assert!(run(&["--seed", "7", "demo", "migration", "--out", other.to_str().unwrap()]).status.success());
    assert_ne!(std::fs::read(a.join("graph.json")).unwrap(), std::fs::read(other.join("graph.json")).unwrap());
}

#[test]
fn demo_epi_covers_all_rules() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("epi");
    let o = run(&["demo", "abstract-epi", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for r in 1..=7 {
        assert!(text.lines().any(|l| l.starts_with(&format!("r{r} at")) && l.contains("generated")), "r{r}\n{text}");
    }
    assert_eq!(text.lines().filter(|l| l.contains("aborted in adapt")).count(), 1);
}

#[test]
fn export_prints_json_or_dot() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "wnt", None);
    let o = run(&["export", "--graph", &g]);
    assert_eq!(o.status.code(), Some(0));
    let back = load_graph(&stdout(&o)).unwrap();
    assert_eq!(back, fixture("wnt").unwrap().graph);
    let o = run(&["export", "--graph", &g, "--dot"]);
    assert!(stdout(&o).starts_with("digraph"));
    let file = dir.path().join("g.dot");
    assert!(run(&["export", "--graph", &g, "--dot", "--out", file.to_str().unwrap()]).status.success());
    assert!(std::fs::read_to_string(file).unwrap().contains("SE6"));
}
