//! Reuse rules and their matching.
//!
//! A rule pairs a trigger pattern (an activity that produced a simulation
//! model) with an experiment pattern (an earlier experiment activity), a
//! condition over both bindings, and a template for the activity that reuses
//! the experiment on the new model.

mod condition;
mod document;
mod engine;

pub use condition::{evaluate_condition, parse_condition, Atom, Condition};
pub use document::{load_rules, rules_to_value};
pub use engine::{
    notify, run_rule_matching, Executed, Hooks, MatchOutcome, OutcomeKind, RoundOutput, RoundReport, RunReport,
    INLINE_DATA_LIMIT, MAX_ROUNDS,
};

use std::collections::BTreeSet;

use thiserror::Error;

use crate::patterns::{match_all, match_anchored, Binding, Bound, BuiltinPattern, Pattern, PatternRole};
use crate::prov_graph::{Direction, EntityKind, NodeId, ProvenanceGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RuleError {
    #[error("unknown node `{0}`")]
    UnknownNodeId(NodeId),
    #[error("`{0}` is not the latest activity (latest is `{1}`)")]
    NotLatestActivity(NodeId, String),
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("predicate failed: {0}")]
    Predicate(String),
    #[error("cannot parse condition: {0}")]
    ConditionParse(String),
    #[error("invalid rule `{0}`: {1}")]
    InvalidRule(String, String),
    #[error("duplicate rule id `{0}`")]
    DuplicateRule(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("cannot read rules document: {0}")]
    Parse(String),
    #[error("graph rejected the generated delta: {0}")]
    Append(String),
    #[error("follow-up rounds did not settle after {0} rounds")]
    TooManyRounds(usize),
}

/// Shape of the activity a rule adds to the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationTemplate {
    pub label: String,
    /// Variables whose bound entities the new activity uses. Experiment
    /// entities inside multi-entity variables are left out.
    pub uses: Vec<String>,
    /// Built-in experiment pattern the new activity must satisfy.
    pub pattern: BuiltinPattern,
}

impl GenerationTemplate {
    pub fn new(label: &str, uses: &[&str], pattern: BuiltinPattern) -> Self {
        GenerationTemplate { label: label.into(), uses: uses.iter().map(|s| s.to_string()).collect(), pattern }
    }

    /// Whether the activity also produces a (calibrated) model.
    pub fn emits_model(&self) -> bool {
        self.pattern == BuiltinPattern::CalibratingSM
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReuseRule {
    pub id: String,
    pub name: String,
    pub trigger: Pattern,
    pub experiment: Pattern,
    pub condition: Condition,
    pub generation: GenerationTemplate,
    trigger_model: String,
    experiment_se: String,
}

fn single_generated(p: &Pattern, kind: EntityKind) -> Result<String, String> {
    match p.generated_vars_of_kind(kind).as_slice() {
        [v] => Ok(v.to_string()),
        vs => Err(format!("pattern `{}` must generate exactly one {kind} variable, found {}", p.name(), vs.len())),
    }
}

impl ReuseRule {
    pub fn new(
        id: &str,
        name: &str,
        trigger: Pattern,
        experiment: Pattern,
        condition: Condition,
        generation: GenerationTemplate,
    ) -> Result<Self, RuleError> {
        let invalid = |m: String| RuleError::InvalidRule(id.to_string(), m);
        let trigger_model = single_generated(&trigger, EntityKind::SimulationModel).map_err(invalid)?;
        let experiment_se = single_generated(&experiment, EntityKind::SimulationExperiment).map_err(invalid)?;
        let tvars: BTreeSet<&str> = trigger.vars().collect();
        let evars: BTreeSet<&str> = experiment.vars().collect();
        if let Some(v) = tvars.intersection(&evars).next() {
            return Err(invalid(format!("variable `{v}` appears in both patterns")));
        }
        for v in condition.vars() {
            if !tvars.contains(v) && !evars.contains(v) {
                return Err(invalid(format!("condition uses undeclared variable `{v}`")));
            }
        }
        for v in &generation.uses {
            if !tvars.contains(v.as_str()) && !evars.contains(v.as_str()) {
                return Err(invalid(format!("generation uses undeclared variable `{v}`")));
            }
        }
        if !generation.uses.contains(&experiment_se) {
            return Err(invalid(format!("generation must use the reused experiment `{experiment_se}`")));
        }
        if !generation.uses.contains(&trigger_model) {
            return Err(invalid(format!("generation must use the new model `{trigger_model}`")));
        }
        Ok(ReuseRule {
            id: id.into(),
            name: name.into(),
            trigger,
            experiment,
            condition,
            generation,
            trigger_model,
            experiment_se,
        })
    }

    /// Variable of the trigger that binds the new model.
    pub fn model_var(&self) -> &str {
        &self.trigger_model
    }

    /// Variable of the experiment pattern that binds the reused experiment.
    pub fn experiment_var(&self) -> &str {
        &self.experiment_se
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSet {
    rules: Vec<(ReuseRule, bool)>,
}

impl RuleSet {
    pub fn new() -> Self {
        RuleSet::default()
    }

    pub fn add(&mut self, rule: ReuseRule, enabled: bool) -> Result<(), RuleError> {
        if self.get(&rule.id).is_some() {
            return Err(RuleError::DuplicateRule(rule.id));
        }
        self.rules.push((rule, enabled));
        Ok(())
    }

    /// Replaces a rule with the same id, or appends it.
    pub fn upsert(&mut self, rule: ReuseRule, enabled: bool) {
        match self.rules.iter_mut().find(|(r, _)| r.id == rule.id) {
            Some(slot) => *slot = (rule, enabled),
            None => self.rules.push((rule, enabled)),
        }
    }

    pub fn set_enabled(&mut self, id: &str, enabled: bool) -> Result<(), RuleError> {
        let slot = self.rules.iter_mut().find(|(r, _)| r.id == id).ok_or_else(|| RuleError::UnknownRule(id.into()))?;
        slot.1 = enabled;
        Ok(())
    }

    /// Keeps only the listed rules enabled.
    pub fn only(mut self, ids: &[&str]) -> Self {
        for (r, on) in &mut self.rules {
            *on = ids.contains(&r.id.as_str());
        }
        self
    }

    pub fn get(&self, id: &str) -> Option<&ReuseRule> {
        self.rules.iter().find(|(r, _)| r.id == id).map(|(r, _)| r)
    }

    pub fn is_enabled(&self, id: &str) -> bool {
        self.rules.iter().any(|(r, on)| r.id == id && *on)
    }

    pub fn active(&self) -> impl Iterator<Item = &ReuseRule> {
        self.rules.iter().filter(|(_, on)| *on).map(|(r, _)| r)
    }

    pub fn all(&self) -> impl Iterator<Item = (&ReuseRule, bool)> {
        self.rules.iter().map(|(r, on)| (r, *on))
    }

    pub fn active_ids(&self) -> Vec<&str> {
        self.active().map(|r| r.id.as_str()).collect()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Same rules in a different order, for permutation checks.
    pub fn reordered(&self, order: &[usize]) -> Self {
        RuleSet { rules: order.iter().map(|&i| self.rules[i].clone()).collect() }
    }
}

fn trig(p: BuiltinPattern) -> Pattern {
    p.pattern(PatternRole::Trigger).clone()
}

fn exp(p: BuiltinPattern) -> Pattern {
    p.pattern(PatternRole::Experiment).clone()
}

fn based_on(a: &str, b: &str) -> Condition {
    Condition::Atom(Atom::IsBasedOn(a.into(), b.into()))
}

/// The seven built-in reuse rules, all enabled.
pub fn builtin_rules() -> RuleSet {
    use BuiltinPattern::*;
    let rules = [
        ReuseRule::new(
            "r1",
            "RepeatSensitivityAnalysis",
            trig(RefiningSM),
            exp(SensitivityAnalysis),
            based_on("SM'", "SM"),
            GenerationTemplate::new("repeatSensitivityAnalysis", &["SM''", "Y", "SE"], SensitivityAnalysis),
        ),
        ReuseRule::new(
            "r2",
            "CrossValidate",
            trig(CalibratingSM),
            exp(AnalyzingSM),
            Condition::And(vec![
                based_on("SM'", "SM"),
                Condition::Atom(Atom::DifferentStudy("SM''".into(), "SM".into())),
                Condition::Atom(Atom::IsValidated("SM".into())),
            ]),
            GenerationTemplate::new("crossValidate", &["SM''", "Y", "SE", "SD"], ValidatingSM),
        ),
        ReuseRule::new(
            "r3",
            "RepeatValidation",
            trig(RefiningSM),
            exp(ValidatingSM),
            based_on("SM'", "SM"),
            GenerationTemplate::new("repeatValidation", &["SM''", "D", "Y", "SE"], ValidatingSM),
        ),
        ReuseRule::new(
            "r4",
            "RepeatCalibration",
            trig(RefiningSM),
            exp(CalibratingSM),
            based_on("SM'", "SM"),
            GenerationTemplate::new("repeatCalibration", &["SM''", "D", "Y", "SE"], CalibratingSM),
        ),
        ReuseRule::new(
            "r5",
            "ValidateComposition",
            trig(ComposingSM),
            exp(ValidatingSM),
            Condition::Or(vec![based_on("SM'1", "SM"), based_on("SM'2", "SM")]),
            GenerationTemplate::new("validateComposition", &["SM''", "D", "Y", "SE"], ValidatingSM),
        ),
        ReuseRule::new(
            "r6",
            "CompareReimplementation",
            trig(ReimplementingSM),
            exp(AnalyzingSM),
            based_on("SM'", "SM"),
            GenerationTemplate::new("compareReimplementation", &["SM''", "Y", "SE", "SD"], AnalyzingSM),
        ),
        ReuseRule::new(
            "r7",
            "RepeatAnalysis",
            trig(RefiningSM),
            exp(AnalyzingSM),
            Condition::And(vec![
                based_on("SM'", "SM"),
                Condition::negate(Condition::Atom(Atom::HasExperimentType("SE".into(), "sensitivityAnalysis".into()))),
            ]),
            GenerationTemplate::new("repeatAnalysis", &["SM''", "Y", "SE"], AnalyzingSM),
        ),
    ];
    let mut set = RuleSet::new();
    for r in rules {
        set.add(r.expect("built-in rule is well formed"), true).expect("built-in ids are unique");
    }
    set
}

/// A trigger match paired with one experiment match of the same rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleMatch {
    pub rule_id: String,
    pub trigger_activity: NodeId,
    pub experiment_activity: NodeId,
    pub new_model: NodeId,
    pub old_experiment: NodeId,
    pub trigger: Binding,
    pub experiment: Binding,
}

impl RuleMatch {
    /// Both bindings without the two activity variables.
    pub fn bindings(&self, rule: &ReuseRule) -> Binding {
        let mut out = Binding::new();
        let skip = [rule.trigger.activity_var(), rule.experiment.activity_var()];
        for (var, b) in self.trigger.iter().chain(self.experiment.iter()) {
            if skip.contains(&var.as_str()) {
                continue;
            }
            match b {
                Bound::One(id) => out.insert_one(var.clone(), id.clone()),
                Bound::Many(ids) => out.insert_many(var.clone(), ids.clone()),
            }
        }
        out
    }

    /// Entities the generated activity uses, in template order without
    /// repeats; experiment entities inside multi-entity variables are dropped.
    pub fn used_entities(&self, rule: &ReuseRule, graph: &ProvenanceGraph) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = Vec::new();
        let push = |id: &NodeId, out: &mut Vec<NodeId>| {
            if !out.contains(id) {
                out.push(id.clone());
            }
        };
        for var in &rule.generation.uses {
            match self.trigger.get(var).or_else(|| self.experiment.get(var)) {
                Some(Bound::One(id)) => push(id, &mut out),
                Some(Bound::Many(ids)) => {
                    for id in ids {
                        let is_se = graph.entity(id.as_str()).is_some_and(|e| e.kind == EntityKind::SimulationExperiment);
                        if !is_se {
                            push(id, &mut out);
                        }
                    }
                }
                None => {}
            }
        }
        out
    }
}

/// Drops every match whose experiment was already reused by the activity of
/// another match, so only the newest experiment of a reuse chain survives.
pub fn filter_cascade(graph: &ProvenanceGraph, matches: Vec<RuleMatch>) -> (Vec<RuleMatch>, Vec<RuleMatch>) {
    let ancestry: Vec<BTreeSet<NodeId>> = matches
        .iter()
        .map(|m| graph.query_lineage(m.experiment_activity.as_str(), Direction::Ancestors).unwrap_or_default())
        .collect();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (i, m) in matches.iter().enumerate() {
        let superseded = ancestry.iter().enumerate().any(|(j, anc)| j != i && anc.contains(&m.old_experiment));
        if superseded {
            dropped.push(m.clone());
        } else {
            kept.push(m.clone());
        }
    }
    (kept, dropped)
}

/// Condition-satisfying matches of one rule at `activity`, before cascade
/// filtering. Condition errors are returned alongside instead of aborting.
pub fn find_matches(
    graph: &ProvenanceGraph,
    rule: &ReuseRule,
    activity: &str,
) -> Result<(Vec<RuleMatch>, Vec<String>), RuleError> {
    if !graph.contains(activity) {
        return Err(RuleError::UnknownNodeId(NodeId::from(activity)));
    }
    let trigger = match match_anchored(graph, &rule.trigger, activity) {
        Ok(Some(b)) => b,
        Ok(None) => return Ok((Vec::new(), Vec::new())),
        Err(e) => return Err(RuleError::Predicate(e.to_string())),
    };
    let new_model = trigger.one(rule.model_var()).cloned().expect("trigger binds its model");
    let mut warnings = Vec::new();
    let experiments = match_all(graph, &rule.experiment, |eb| {
        match evaluate_condition(&rule.condition, graph, &trigger, eb) {
            Ok(ok) => ok,
            Err(e) => {
                warnings.push(format!("rule {}: {e}", rule.id));
                false
            }
        }
    });
    let matches = experiments
        .into_iter()
        .map(|eb| RuleMatch {
            rule_id: rule.id.clone(),
            trigger_activity: NodeId::from(activity),
            experiment_activity: eb.one(rule.experiment.activity_var()).cloned().expect("activity var bound"),
            new_model: new_model.clone(),
            old_experiment: eb.one(rule.experiment_var()).cloned().expect("experiment var bound"),
            trigger: trigger.clone(),
            experiment: eb,
        })
        .collect();
    Ok((matches, warnings))
}
