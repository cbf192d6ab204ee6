use super::*;
use crate::prov_graph::{attrs, ActivityRecord, EntityKind as K, Generated};
use serde_json::json;

fn src(g: &mut ProvenanceGraph, id: &str, kind: K, study: &str) {
    g.add_entity(kind, attrs([("studyId", json!(study))]), Some(id.into())).unwrap();
}

fn act(g: &mut ProvenanceGraph, id: &str, uses: &[&str], gens: &[(&str, K, &[(&str, Value)])]) {
    let mut rec = ActivityRecord::new(id).id(id).uses(uses.iter().copied());
    for (gid, kind, extra) in gens {
        let mut a = attrs([("studyId", json!("migration"))]);
        for (k, v) in extra.iter() {
            a.insert(k.to_string(), v.clone());
        }
        rec = rec.generates(Generated::with_id(*gid, *kind, a));
    }
    g.record_activity(rec).unwrap();
}

/// The part of the migration graph around m4.
fn migration() -> ProvenanceGraph {
    let mut g = ProvenanceGraph::new();
    src(&mut g, "M3", K::SimulationModel, "migration");
    src(&mut g, "K01", K::Other, "migration");
    src(&mut g, "S1", K::SimulationData, "migration");
    src(&mut g, "RQ2", K::ResearchQuestion, "migration");
    src(&mut g, "RF", K::Data, "migration");
    act(
        &mut g,
        "a2",
        &["M3", "K01", "S1"],
        &[("E2", K::SimulationExperiment, &[("experimentType", json!("sensitivityAnalysis"))]), ("S2", K::SimulationData, &[])],
    );
    act(&mut g, "m4", &["M3", "RQ2", "RF"], &[("M4", K::SimulationModel, &[])]);
    g
}

fn trigger(p: BuiltinPattern) -> &'static Pattern {
    p.pattern(PatternRole::Trigger)
}

fn experiment(p: BuiltinPattern) -> &'static Pattern {
    p.pattern(PatternRole::Experiment)
}

#[test]
fn refining_match_at_m4() {
    let g = migration();
    let b = match_anchored(&g, trigger(BuiltinPattern::RefiningSM), "m4").unwrap().unwrap();
    let expected = Binding::from([("t", one("m4")), ("SM'", one("M3")), ("X", many(&["RQ2", "RF"])), ("SM''", one("M4"))]);
    assert_eq!(b, expected);
    assert!(match_anchored(&g, trigger(BuiltinPattern::ComposingSM), "m4").unwrap().is_none());
}

#[test]
fn sensitivity_match_at_a2() {
    let g = migration();
    let b = match_anchored(&g, experiment(BuiltinPattern::SensitivityAnalysis), "a2").unwrap().unwrap();
    assert_eq!(b.one("SM").unwrap().as_str(), "M3");
    assert_eq!(b.many("Y").unwrap(), &BTreeSet::from(["K01".into(), "S1".into()]));
    assert_eq!(b.one("SE").unwrap().as_str(), "E2");
    assert_eq!(b.one("SD").unwrap().as_str(), "S2");
}

#[test]
fn classify_migration_activities() {
    let g = migration();
    assert_eq!(classify_activity(&g, "m4").unwrap(), BTreeSet::from(["RefiningSM"]));
    assert_eq!(
        classify_activity(&g, "a2").unwrap(),
        BTreeSet::from(["AnalyzingSM", "SensitivityAnalysis"])
    );
    assert_eq!(classify_activity(&g, "nope"), Err(PatternError::UnknownNodeId("nope".into())));
    assert_eq!(match_anchored(&g, experiment(BuiltinPattern::AnalyzingSM), "zzz"), Err(PatternError::UnknownNodeId("zzz".into())));
}

#[test]
fn composing_and_reimplementing() {
    let mut g = ProvenanceGraph::new();
    src(&mut g, "A", K::SimulationModel, "s");
    src(&mut g, "B", K::SimulationModel, "s");
    src(&mut g, "Q", K::QualitativeModel, "s");
    act(&mut g, "c", &["B", "A", "Q"], &[("AB", K::SimulationModel, &[])]);
    act(&mut g, "r", &["AB"], &[("AB2", K::SimulationModel, &[])]);
    act(&mut g, "r2", &["AB2", "Q"], &[("AB3", K::SimulationModel, &[])]);
    assert_eq!(classify_activity(&g, "c").unwrap(), BTreeSet::from(["ComposingSM"]));
    let b = match_anchored(&g, trigger(BuiltinPattern::ComposingSM), "c").unwrap().unwrap();
    assert_eq!(b.one("SM'1").unwrap().as_str(), "A");
    assert_eq!(b.one("SM'2").unwrap().as_str(), "B");
    assert_eq!(classify_activity(&g, "r").unwrap(), BTreeSet::from(["ReimplementingSM"]));
    assert_eq!(classify_activity(&g, "r2").unwrap(), BTreeSet::from(["RefiningSM"]));
}

#[test]
fn creating_uses_no_model() {
    let mut g = ProvenanceGraph::new();
    src(&mut g, "RQ", K::ResearchQuestion, "s");
    act(&mut g, "b", &["RQ"], &[("M1", K::SimulationModel, &[])]);
    assert_eq!(classify_activity(&g, "b").unwrap(), BTreeSet::from(["CreatingSM"]));
}

#[test]
fn validation_needs_status() {
    let mut g = ProvenanceGraph::new();
    src(&mut g, "M", K::SimulationModel, "s");
    src(&mut g, "W", K::Data, "s");
    act(&mut g, "v", &["M", "W"], &[("SE", K::SimulationExperiment, &[]), ("SD", K::SimulationData, &[("status", json!("failure"))])]);
    act(&mut g, "x", &["M", "W"], &[("SE2", K::SimulationExperiment, &[]), ("SD2", K::SimulationData, &[])]);
    assert_eq!(classify_activity(&g, "v").unwrap(), BTreeSet::from(["ValidatingSM"]));
    assert_eq!(classify_activity(&g, "x").unwrap(), BTreeSet::from(["AnalyzingSM"]));
    assert!(!is_validated(&g, "M").unwrap());
    act(&mut g, "v2", &["M", "W"], &[("SE3", K::SimulationExperiment, &[]), ("SD3", K::SimulationData, &[("status", json!("success"))])]);
    assert!(is_validated(&g, "M").unwrap());
    assert_eq!(is_validated(&g, "W"), Err(PatternError::KindMismatch("W".into(), K::SimulationModel)));
}

#[test]
fn calibration_generates_three() {
    let mut g = ProvenanceGraph::new();
    src(&mut g, "M", K::SimulationModel, "s");
    src(&mut g, "W", K::Data, "s");
    act(
        &mut g,
        "cal",
        &["M", "W"],
        &[("SE", K::SimulationExperiment, &[]), ("SD", K::SimulationData, &[]), ("M2", K::SimulationModel, &[])],
    );
    assert_eq!(classify_activity(&g, "cal").unwrap(), BTreeSet::from(["CalibratingSM"]));
    let b = match_anchored(&g, trigger(BuiltinPattern::CalibratingSM), "cal").unwrap().unwrap();
    assert_eq!(b.one("D'").unwrap().as_str(), "W");
    assert_eq!(b.many("X").unwrap().len(), 0);
}

#[test]
fn based_on_and_study_predicates() {
    let g = migration();
    assert!(is_based_on(&g, "M4", "M3").unwrap());
    assert!(is_based_on(&g, "M3", "M3").unwrap());
    assert!(!is_based_on(&g, "M3", "M4").unwrap());
    assert_eq!(is_based_on(&g, "RF", "M3"), Err(PatternError::KindMismatch("RF".into(), K::SimulationModel)));
    assert!(!different_study(&g, "M3", "M4").unwrap());
    assert!(same_study(&g, "M3", "M4").unwrap());

    let mut g2 = ProvenanceGraph::new();
    g2.add_entity(K::Other, AttributeMap::new(), Some("x".into())).unwrap_err();
    src(&mut g2, "a", K::SimulationModel, "one");
    src(&mut g2, "b", K::SimulationModel, "two");
    assert!(different_study(&g2, "a", "b").unwrap());
    assert_eq!(different_study(&g2, "a", "zz"), Err(PatternError::UnknownNodeId("zz".into())));
}

#[test]
fn match_all_in_log_order() {
    let g = migration();
    assert!(match_all(&ProvenanceGraph::new(), experiment(BuiltinPattern::AnalyzingSM), |_| true).is_empty());
    let all = match_all(&g, trigger(BuiltinPattern::RefiningSM), |_| true);
    assert_eq!(all.len(), 1);
    assert!(match_all(&g, trigger(BuiltinPattern::RefiningSM), |_| false).is_empty());
}

#[test]
fn pattern_document_round_trip() {
    for p in BuiltinPattern::ALL {
        for role in [PatternRole::Trigger, PatternRole::Experiment] {
            let pat = p.pattern(role);
            let text = serde_json::to_string(&pat.to_value()).unwrap();
            assert_eq!(&Pattern::from_document(&text).unwrap(), pat);
        }
    }
}

#[test]
fn pattern_document_errors() {
    let two_acts = r#"{"name":"p","nodes":[{"var":"a","role":"activity"},{"var":"b","role":"activity"}],"edges":[]}"#;
    assert!(matches!(Pattern::from_document(two_acts), Err(PatternError::InvalidPattern(..))));
    let bad_kind = r#"{"name":"p","nodes":[{"var":"a","role":"activity"},{"var":"x","role":"entity","kind":"ZZ"}],"edges":[{"kind":"used","from":"a","to":"x"}]}"#;
    assert!(matches!(Pattern::from_document(bad_kind), Err(PatternError::Parse(_))));
    let dangling = r#"{"name":"p","nodes":[{"var":"a","role":"activity"},{"var":"x","role":"entity"}],"edges":[]}"#;
    assert!(matches!(Pattern::from_document(dangling), Err(PatternError::InvalidPattern(..))));
}

#[test]
fn custom_pattern_with_attr_in() {
    let doc = r#"{"name":"typed","anchor":"a","nodes":[
        {"var":"a","role":"activity"},
        {"var":"M","role":"entity","kind":"SM"},
        {"var":"E","role":"entity","kind":"SE","attrIn":{"experimentType":["parameterScan","sensitivityAnalysis"]}},
        {"var":"D","role":"multiEntity"}],
      "edges":[{"kind":"used","from":"a","to":"M"},{"kind":"wasGeneratedBy","from":"E","to":"a"},{"kind":"wasGeneratedBy","from":"D","to":"a"}]}"#;
    let p = Pattern::from_document(doc).unwrap();
    let g = migration();
    assert!(match_anchored(&g, &p, "a2").unwrap().is_none(), "a2 uses more than M");
    let mut g2 = ProvenanceGraph::new();
    src(&mut g2, "M", K::SimulationModel, "s");
    act(&mut g2, "a", &["M"], &[("E", K::SimulationExperiment, &[("experimentType", json!("parameterScan"))]), ("S", K::SimulationData, &[])]);
    let b = match_anchored(&g2, &p, "a").unwrap().unwrap();
    assert_eq!(b.many("D").unwrap().len(), 1);
}

#[test]
fn binding_display() {
    let b = Binding::from([("SM'", one("M3")), ("X", many(&["RQ2", "RF"]))]);
    assert_eq!(b.to_string(), "{SM'<-M3, X<-{RF,RQ2}}");
}
