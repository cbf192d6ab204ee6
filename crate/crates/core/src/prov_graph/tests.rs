use super::*;
use proptest::prelude::*;
use serde_json::json;

fn study(s: &str) -> AttributeMap {
    attrs([("studyId", json!(s))])
}

fn named(s: &str, name: &str) -> AttributeMap {
    attrs([("studyId", json!(s)), ("name", json!(name))])
}

fn add(g: &mut ProvenanceGraph, id: &str, kind: EntityKind) {
    g.add_entity(kind, study("migration"), Some(id.into())).unwrap();
}

/// Checks the structural invariants that every public mutation must keep.
fn assert_invariants(g: &ProvenanceGraph) {
    let mut generators: HashMap<&NodeId, usize> = HashMap::new();
    for d in g.deps() {
        let (a, e) = d.endpoints();
        assert!(g.is_activity(a.as_str()) && g.is_entity(e.as_str()), "bipartite: {d}");
        if d.kind == DepKind::WasGeneratedBy {
            *generators.entry(e).or_default() += 1;
        }
    }
    assert!(generators.values().all(|&n| n == 1));
    for a in g.activities() {
        assert!(!g.used_by(a.id.as_str()).is_empty() || !g.generated_by(a.id.as_str()).is_empty());
    }
    for n in g.entities().iter().map(|e| &e.id).chain(g.activities().iter().map(|a| &a.id)) {
        let anc = g.query_lineage(n.as_str(), Direction::Ancestors).unwrap();
        assert!(!anc.contains(n), "cycle through {n}");
    }
    let unique: HashSet<&Dependency> = g.deps().iter().collect();
    assert_eq!(unique.len(), g.deps().len());
}

#[test]
fn add_entity_with_and_without_id() {
    let mut g = ProvenanceGraph::new();
    let id = g
        .add_entity(EntityKind::SimulationModel, named("migration", "M3"), Some("M3".into()))
        .unwrap();
    assert_eq!(id.as_str(), "M3");
    let fresh = g.add_entity(EntityKind::Other, study("s"), None).unwrap();
    assert!(g.contains(fresh.as_str()));
    assert_ne!(fresh, id);
    assert_eq!(
        g.add_entity(EntityKind::SimulationModel, study("migration"), Some("M3".into())),
        Err(GraphError::DuplicateId("M3".into()))
    );
    assert_eq!(
        g.add_entity(EntityKind::Data, AttributeMap::new(), None),
        Err(GraphError::MissingStudyId("auto-2".into()))
    );
    assert_invariants(&g);
}

#[test]
fn record_refinement_activity() {
    let mut g = ProvenanceGraph::new();
    add(&mut g, "M3", EntityKind::SimulationModel);
    add(&mut g, "RQ2", EntityKind::ResearchQuestion);
    add(&mut g, "RF", EntityKind::Data);
    let (a, gen) = g
        .record_activity(
            ActivityRecord::new("model refinement m4")
                .id("m4")
                .uses(["M3", "RQ2", "RF"])
                .generates(Generated::with_id("M4", EntityKind::SimulationModel, named("migration", "M4"))),
        )
        .unwrap();
    assert_eq!(a.as_str(), "m4");
    assert_eq!(gen, vec![NodeId::from("M4")]);
    assert_eq!(g.event_log(), &[NodeId::from("m4")]);
    assert_eq!(g.generator_of("M4").map(NodeId::as_str), Some("m4"));
    assert_eq!(g.used_by("m4").len(), 3);
    assert_invariants(&g);
}

#[test]
fn isolated_and_unknown_activities_are_rejected() {
    let mut g = ProvenanceGraph::new();
    let before = g.clone();
    assert_eq!(
        g.record_activity(ActivityRecord::new("noop").id("noop")),
        Err(GraphError::IsolatedActivity("noop".into()))
    );
    assert_eq!(
        g.record_activity(ActivityRecord::new("a").uses(["ghost"])),
        Err(GraphError::UnknownNodeId("ghost".into()))
    );
    assert_eq!(g, before);
}

#[test]
fn two_step_cycle_is_rejected() {
    let mut g = ProvenanceGraph::new();
    add(&mut g, "E", EntityKind::Data);
    add(&mut g, "X0", EntityKind::Data);
    g.record_activity(
        ActivityRecord::new("b")
            .id("b")
            .uses(["X0"])
            .generates(Generated::Existing("E".into())),
    )
    .unwrap();
    g.record_activity(
        ActivityRecord::new("c")
            .id("c")
            .uses(["E"])
            .generates(Generated::with_id("X", EntityKind::Data, study("migration"))),
    )
    .unwrap();
    // a uses X (derived from X0 via b, E, c) and claims to generate X0.
    let before = g.clone();
    let err = g
        .record_activity(ActivityRecord::new("a").id("a").uses(["X"]).generates(Generated::Existing("X0".into())))
        .unwrap_err();
    assert_eq!(err, GraphError::CycleWouldForm("a".into()));
    assert_eq!(g, before);
}

#[test]
fn cycle_through_source_entity() {
    let mut g = ProvenanceGraph::new();
    add(&mut g, "E", EntityKind::Data);
    g.record_activity(
        ActivityRecord::new("b")
            .id("b")
            .uses(["E"])
            .generates(Generated::with_id("X", EntityKind::Data, study("migration"))),
    )
    .unwrap();
    let err = g
        .record_activity(ActivityRecord::new("a").id("a").uses(["X"]).generates(Generated::Existing("E".into())))
        .unwrap_err();
    assert_eq!(err, GraphError::CycleWouldForm("a".into()));
}

#[test]
fn generated_after_use_is_rejected() {
    let mut g = ProvenanceGraph::new();
    add(&mut g, "E", EntityKind::Data);
    add(&mut g, "F", EntityKind::Data);
    g.record_activity(ActivityRecord::new("b").id("b").uses(["E"])).unwrap();
    let err = g
        .record_activity(ActivityRecord::new("a").id("a").uses(["F"]).generates(Generated::Existing("E".into())))
        .unwrap_err();
    assert_eq!(err, GraphError::GeneratedAfterUse("E".into()));
}

#[test]
fn append_delta_cases() {
    let mut g = ProvenanceGraph::new();
    add(&mut g, "M4", EntityKind::SimulationModel);
    let before = g.clone();
    g.append_delta(GraphDelta::default()).unwrap();
    assert_eq!(g, before);

    let dangling = GraphDelta {
        activities: vec![Activity { id: "a3".into(), label: "x".into(), attrs: AttributeMap::new() }],
        entities: vec![],
        deps: vec![Dependency::used("a3", "ZZZ")],
    };
    assert!(matches!(g.append_delta(dangling), Err(GraphError::InconsistentDelta(_))));
    assert_eq!(g, before);

    let closed = GraphDelta {
        activities: vec![Activity { id: "a3".into(), label: "x".into(), attrs: AttributeMap::new() }],
        entities: vec![],
        deps: vec![Dependency::used("a3", "M4")],
    };
    g.append_delta(closed).unwrap();
    // Edges onto an already recorded activity would rewrite history.
    let late_edge = GraphDelta {
        activities: vec![],
        entities: vec![Entity { id: "E9".into(), kind: EntityKind::Data, attrs: study("m") }],
        deps: vec![Dependency::generated("E9", "a3")],
    };
    assert!(matches!(g.append_delta(late_edge), Err(GraphError::InconsistentDelta(_))));
    assert_invariants(&g);
}

#[test]
fn generated_counter_is_monotone() {
    let mut g = ProvenanceGraph::new();
    add(&mut g, "M", EntityKind::SimulationModel);
    assert_eq!(g.next_generated_counter(), 1);
    let delta = GraphDelta {
        activities: vec![Activity { id: "gen-r1-1".into(), label: "x".into(), attrs: AttributeMap::new() }],
        entities: vec![Entity { id: "gen-r1-2".into(), kind: EntityKind::SimulationData, attrs: study("m") }],
        deps: vec![Dependency::used("gen-r1-1", "M"), Dependency::generated("gen-r1-2", "gen-r1-1")],
    };
    g.append_delta(delta).unwrap();
    assert_eq!(g.next_generated_counter(), 3);
    let reloaded = load_graph(&save_graph(&g)).unwrap();
    assert_eq!(reloaded.next_generated_counter(), 3);
}

#[test]
fn lineage_of_source_is_empty() {
    let mut g = ProvenanceGraph::new();
    add(&mut g, "RQ", EntityKind::ResearchQuestion);
    assert!(g.query_lineage("RQ", Direction::Ancestors).unwrap().is_empty());
    assert_eq!(
        g.query_lineage("nope", Direction::Descendants),
        Err(GraphError::UnknownNodeId("nope".into()))
    );
}

#[test]
fn empty_graph_round_trips() {
    let g = ProvenanceGraph::new();
    let text = save_graph(&g);
    assert_eq!(load_graph(&text).unwrap(), g);
    assert_eq!(export_dot(&g), format!("{}{}", dot_header(), "}\n"));
}

fn dot_header() -> &'static str {
    "digraph provenance {\n  rankdir=BT;\n  node [fontname=\"Helvetica\"];\n"
}

#[test]
fn document_schema_violations() {
    let reversed = r#"{"entities":[{"id":"E","kind":"D","attrs":{"studyId":"s"}}],
        "activities":[{"id":"a","label":"x","attrs":{}}],
        "deps":[{"kind":"used","from":"E","to":"a"}],
        "eventLog":["a"]}"#;
    assert!(matches!(load_graph(reversed), Err(GraphError::SchemaViolation(_))));

    let bad_kind = r#"{"entities":[{"id":"E","kind":"XX","attrs":{"studyId":"s"}}],
        "activities":[],"deps":[],"eventLog":[]}"#;
    assert!(matches!(load_graph(bad_kind), Err(GraphError::SchemaViolation(_))));

    let missing_log = r#"{"entities":[{"id":"E","kind":"D","attrs":{"studyId":"s"}}],
        "activities":[{"id":"a","label":"x","attrs":{}}],
        "deps":[{"kind":"used","from":"a","to":"E"}],
        "eventLog":[]}"#;
    assert!(matches!(load_graph(missing_log), Err(GraphError::SchemaViolation(_))));

    let out_of_order = r#"{"entities":[{"id":"E","kind":"D","attrs":{"studyId":"s"}},
                      {"id":"F","kind":"D","attrs":{"studyId":"s"}}],
        "activities":[{"id":"a","label":"x","attrs":{}},{"id":"b","label":"y","attrs":{}}],
        "deps":[{"kind":"used","from":"a","to":"E"},{"kind":"wasGeneratedBy","from":"F","to":"a"},
                {"kind":"used","from":"b","to":"F"}],
        "eventLog":["b","a"]}"#;
    assert!(matches!(load_graph(out_of_order), Err(GraphError::SchemaViolation(_))));

    assert!(matches!(load_graph("{not json"), Err(GraphError::ParseError(_))));
}

#[test]
fn dot_is_deterministic_and_marks_generated_nodes() {
    let mut g = ProvenanceGraph::new();
    add(&mut g, "M", EntityKind::SimulationModel);
    let mut a = study("migration");
    a.insert(attr::GENERATED_BY_RULE.into(), json!("r1"));
    g.record_activity(
        ActivityRecord::new("analysis")
            .id("gen-r1-1")
            .uses(["M"])
            .generates(Generated::with_id("gen-r1-2", EntityKind::SimulationData, a)),
    )
    .unwrap();
    let first = export_dot(&g);
    assert_eq!(first, export_dot(&g));
    assert!(first.contains("\"M\" [shape=ellipse, label=\"SM\\nM\"];"));
    assert!(first.contains("\"gen-r1-2\" [shape=ellipse, label=\"SD\\ngen-r1-2\", style=filled"));
    assert!(first.contains("\"gen-r1-1\" [shape=box"));
}

#[test]
fn store_snapshots_survive_writes() {
    let store = GraphStore::new(ProvenanceGraph::new());
    let before = store.snapshot();
    store
        .write(|g| g.add_entity(EntityKind::Data, study("s"), Some("D1".into())))
        .unwrap();
    assert!(before.is_empty());
    assert!(store.snapshot().contains("D1"));
    let failed = store.write(|g| g.add_entity(EntityKind::Data, study("s"), Some("D1".into())));
    assert!(failed.is_err());
    assert_eq!(store.snapshot().entities().len(), 1);
    let snap = store.snapshot();
    std::thread::spawn(move || assert!(snap.contains("D1"))).join().unwrap();
}

/// Random DAG construction: a sequence of activities, each using some
/// earlier entities and generating fresh ones.
fn random_graph(spec: &[(Vec<usize>, usize)], sources: usize) -> ProvenanceGraph {
    let mut g = ProvenanceGraph::new();
    let mut ents: Vec<NodeId> = Vec::new();
    for i in 0..sources {
        ents.push(g.add_entity(EntityKind::Data, study("s"), Some(format!("S{i}").into())).unwrap());
    }
    for (ai, (uses, gens)) in spec.iter().enumerate() {
        let mut used: Vec<NodeId> = uses.iter().map(|u| ents[u % ents.len()].clone()).collect();
        used.sort();
        used.dedup();
        let mut rec = ActivityRecord::new(format!("a{ai}")).id(format!("a{ai}")).uses(used);
        for k in 0..*gens {
            rec = rec.generates(Generated::with_id(format!("E{ai}_{k}"), EntityKind::Data, study("s")));
        }
        let (_, generated) = g.record_activity(rec).unwrap();
        ents.extend(generated);
    }
    g
}

fn naive_closure(g: &ProvenanceGraph, start: &str, dir: Direction) -> BTreeSet<NodeId> {
    // Repeated edge expansion until a fixpoint.
    let mut set: BTreeSet<NodeId> = BTreeSet::new();
    set.insert(start.into());
    loop {
        let mut grew = false;
        for d in g.deps() {
            // derivation edge: (earlier, later)
            // Both edge kinds point from the later node to the earlier one.
            let (earlier, later) = (&d.to, &d.from);
            let (src, dst) = match dir {
                Direction::Descendants => (earlier, later),
                Direction::Ancestors => (later, earlier),
            };
            if set.contains(src) && !set.contains(dst) {
                set.insert(dst.clone());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    set.remove(start);
    set
}

proptest! {
    #[test]
    fn lineage_matches_naive_closure(
        sources in 1usize..6,
        spec in prop::collection::vec((prop::collection::vec(0usize..40, 0..4), 0usize..3), 1..12),
    ) {
        let spec: Vec<_> = spec.into_iter().map(|(u, n)| if u.is_empty() && n == 0 { (vec![0], 1) } else { (u, n) }).collect();
        let g = random_graph(&spec, sources);
        prop_assume!(g.entities().len() + g.activities().len() <= 50);
        assert_invariants(&g);
        for id in g.entities().iter().map(|e| e.id.clone()).chain(g.activities().iter().map(|a| a.id.clone())) {
            for dir in [Direction::Ancestors, Direction::Descendants] {
                prop_assert_eq!(g.query_lineage(id.as_str(), dir).unwrap(), naive_closure(&g, id.as_str(), dir));
            }
        }
    }

    #[test]
    fn save_load_is_identity(
        sources in 1usize..5,
        spec in prop::collection::vec((prop::collection::vec(0usize..30, 1..4), 0usize..3), 0..10),
    ) {
        let g = random_graph(&spec, sources);
        let text = save_graph(&g);
        let back = load_graph(&text).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(save_graph(&back), text);
    }
}
