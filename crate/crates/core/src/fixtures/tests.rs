use super::*;
use crate::backends::BackendRegistry;
use crate::patterns::classify_activity;
use crate::pipeline::Pipeline;
use crate::rules::{OutcomeKind, RunReport};

fn pipeline(fx: &Fixture) -> Pipeline {
    Pipeline::new(BackendRegistry::with_builtins(), Box::new(fx.models.clone()), 42)
}

fn run(name: &str) -> (ProvenanceGraph, RunReport) {
    let fx = fixture(name).unwrap();
    run_demo(&fx, &pipeline(&fx)).unwrap()
}

fn count(report: &RunReport, rule: &str) -> usize {
    report.outcomes().filter(|o| o.rule_id == rule && o.is_generated()).count()
}

fn aborts(report: &RunReport) -> Vec<String> {
    report
        .outcomes()
        .filter_map(|o| match &o.outcome {
            OutcomeKind::Aborted { stage, reason } => Some(format!("{} {}: {stage} {reason}", o.rule_id, o.experiment_activity)),
            _ => None,
        })
        .collect()
}

#[test]
fn recorded_graphs_are_valid_and_replay_round_trips() {
    for name in DEMOS {
        let fx = fixture(name).unwrap();
        let mut g = ProvenanceGraph::new();
        for (_, d) in replay_steps(&fx.graph) {
            g.append_delta(d).unwrap();
        }
        assert_eq!(g.entities().len(), fx.graph.entities().len(), "{name}");
        assert_eq!(g.event_log(), fx.graph.event_log(), "{name}");
    }
}

#[test]
fn migration_repeats_the_sensitivity_analysis_for_m4_and_m5() {
    let (g, report) = run("migration");
    assert!(aborts(&report).is_empty(), "{:?}", aborts(&report));
    let fired: Vec<_> = report.outcomes().filter(|o| o.is_generated()).collect();
    assert_eq!(fired.len(), 2);
    assert_eq!(fired[0].trigger_activity.as_str(), "m4");
    assert_eq!(fired[0].reused_experiment.as_str(), "E2");
    assert_eq!(fired[1].trigger_activity.as_str(), "m5");
    let first = fired[0].activity().unwrap();
    assert_eq!(fired[1].reused_experiment.as_str(), g.generated_by(first.as_str())[0].as_str());
    let used: Vec<_> = g.used_by(first.as_str()).iter().map(|n| n.to_string()).collect();
    assert_eq!(used, ["M4", "K01", "S1", "E2"]);
    assert!(report.outcomes().any(|o| matches!(o.outcome, OutcomeKind::CascadeFiltered) && o.reused_experiment.as_str() == "E2"));
}

#[test]
fn wnt_cross_validates_the_four_analyses() {
    let (_, report) = run("wnt");
    assert!(aborts(&report).is_empty(), "{:?}", aborts(&report));
    assert_eq!(count(&report, "r2"), 4);
}

#[test]
fn abstract_epi_exercises_every_rule() {
    let (g, report) = run("abstract-epi");
    for o in report.outcomes() {
        eprintln!("{} {} {} {:?}", o.rule_id, o.trigger_activity, o.experiment_activity, o.outcome);
    }
    for r in ["r1", "r2", "r3", "r4", "r5", "r6", "r7"] {
        assert!(count(&report, r) > 0, "{r} never fired");
    }
    let a = aborts(&report);
    assert_eq!(a.len(), 1, "{a:?}");
    assert!(a[0].starts_with("r7 ts_sir1"), "{a:?}");
    for act in report.generated_activities() {
        let rule = g.activity(act.as_str()).unwrap().attrs[attr::GENERATED_BY_RULE].as_str().unwrap().to_string();
        let template = fx_rules().get(&rule).unwrap().generation.pattern;
        let classes = classify_activity(&g, act.as_str()).unwrap();
        assert!(classes.contains(template.name()), "{act} ({rule}) is not {template:?}: {classes:?}");
    }
}

fn fx_rules() -> RuleSet {
    builtin_rules()
}
