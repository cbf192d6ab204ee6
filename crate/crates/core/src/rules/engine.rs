use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::{filter_cascade, find_matches, ReuseRule, RuleError, RuleMatch, RuleSet};
use crate::adapt::{AdaptError, AdaptReport};
use crate::backends::{BackendError, ExecutionResult, SimTable};
use crate::canonical_exp::{serialize_canonical, to_value, CanonicalExperiment};
use crate::patterns::{Binding, BuiltinPattern};
use crate::prov_graph::{
    attr, Activity, AttributeMap, Dependency, Entity, EntityKind, GraphDelta, NodeId, ProvenanceGraph, GENERATED_PREFIX,
};

/// Upper bound on follow-up rounds started by one notification.
pub const MAX_ROUNDS: usize = 64;
/// Result tables whose JSON encoding exceeds this many bytes are referenced
/// through `dataRef` instead of being stored on the data entity.
pub const INLINE_DATA_LIMIT: usize = 1 << 20;

/// Relative tolerance when comparing final means against reference data.
const COMPARISON_TOLERANCE: f64 = 0.25;

pub struct Executed {
    pub backend: String,
    pub result: ExecutionResult,
}

/// The adapt and execute steps applied to every surviving match.
pub trait Hooks: Sync {
    fn adapt(
        &self,
        graph: &ProvenanceGraph,
        old_experiment: &NodeId,
        new_model: &NodeId,
    ) -> Result<(CanonicalExperiment, AdaptReport), AdaptError>;

    fn execute(
        &self,
        graph: &ProvenanceGraph,
        study_id: &str,
        spec: &CanonicalExperiment,
        seed: u64,
    ) -> Result<Executed, BackendError>;

    fn base_seed(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum OutcomeKind {
    Generated,
    SkippedDuplicate { existing: NodeId },
    CascadeFiltered,
    Aborted { stage: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MatchOutcome {
    pub rule_id: String,
    pub trigger_activity: NodeId,
    pub experiment_activity: NodeId,
    pub reused_experiment: NodeId,
    pub new_model: NodeId,
    pub bindings: Binding,
    pub outcome: OutcomeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adapt_report: Option<AdaptReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exec_status: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub backend: Option<String>,
    pub generated_ids: Vec<NodeId>,
}

impl MatchOutcome {
    fn new(rule: &ReuseRule, m: &RuleMatch, outcome: OutcomeKind) -> Self {
        MatchOutcome {
            rule_id: rule.id.clone(),
            trigger_activity: m.trigger_activity.clone(),
            experiment_activity: m.experiment_activity.clone(),
            reused_experiment: m.old_experiment.clone(),
            new_model: m.new_model.clone(),
            bindings: m.bindings(rule),
            outcome,
            adapt_report: None,
            exec_status: None,
            backend: None,
            generated_ids: Vec::new(),
        }
    }

    pub fn is_generated(&self) -> bool {
        self.outcome == OutcomeKind::Generated
    }

    /// Id of the generated activity, if any.
    pub fn activity(&self) -> Option<&NodeId> {
        self.generated_ids.first()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RoundReport {
    pub round: usize,
    pub anchor: NodeId,
    pub outcomes: Vec<MatchOutcome>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub rounds: Vec<RoundReport>,
    /// Tables too large to inline, keyed by their `dataRef`.
    #[serde(skip)]
    pub external_tables: BTreeMap<String, SimTable>,
}

impl RunReport {
    pub fn outcomes(&self) -> impl Iterator<Item = &MatchOutcome> {
        self.rounds.iter().flat_map(|r| r.outcomes.iter())
    }

    /// Number of generated activities per rule id.
    pub fn fired(&self, rule_id: &str) -> usize {
        self.outcomes().filter(|o| o.rule_id == rule_id && o.is_generated()).count()
    }

    pub fn generated_activities(&self) -> Vec<&NodeId> {
        self.outcomes().filter_map(MatchOutcome::activity).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes().next().is_none()
    }

    pub fn merge(&mut self, other: RunReport) {
        let offset = self.rounds.len();
        self.rounds.extend(other.rounds.into_iter().map(|mut r| {
            r.round += offset;
            r
        }));
        self.external_tables.extend(other.external_tables);
    }
}

/// Everything one matching round produced; the caller appends `delta`.
#[derive(Debug, Clone, Default)]
pub struct RoundOutput {
    pub delta: GraphDelta,
    pub report: RoundReport,
    /// Generated activities that produced a model and start the next round.
    pub follow_ups: Vec<NodeId>,
    pub external_tables: BTreeMap<String, SimTable>,
}

struct Job<'r> {
    rule: &'r ReuseRule,
    m: RuleMatch,
    used: Vec<NodeId>,
}

struct Success {
    spec: CanonicalExperiment,
    report: AdaptReport,
    exec: Executed,
}

type Failure = (&'static str, String, Option<AdaptReport>);

enum Slot {
    Done(MatchOutcome),
    Job(usize),
}

/// Seed of one execution. It depends on the rule and the adapted
/// specification only, so renaming generated nodes never changes results.
fn match_seed(base: u64, rule_id: &str, spec: &CanonicalExperiment) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(rule_id.as_bytes());
    h.update([0u8]);
    h.update(serialize_canonical(spec).as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

fn existing_duplicate(graph: &ProvenanceGraph, rule_id: &str, used: &[NodeId]) -> Option<NodeId> {
    let want: BTreeSet<&NodeId> = used.iter().collect();
    graph
        .activities()
        .iter()
        .filter(|a| a.attrs.get(attr::GENERATED_BY_RULE).and_then(Value::as_str) == Some(rule_id))
        .find(|a| graph.used_by(a.id.as_str()).iter().collect::<BTreeSet<_>>() == want)
        .map(|a| a.id.clone())
}

fn run_job(graph: &ProvenanceGraph, hooks: &dyn Hooks, job: &Job) -> Result<Success, Failure> {
    let (spec, report) =
        hooks.adapt(graph, &job.m.old_experiment, &job.m.new_model).map_err(|e| ("adapt", e.to_string(), None))?;
    let study = graph.entity(job.m.new_model.as_str()).and_then(Entity::study_id).unwrap_or_default().to_string();
    let seed = match_seed(hooks.base_seed(), &job.m.rule_id, &spec);
    match hooks.execute(graph, &study, &spec, seed) {
        Ok(exec) => Ok(Success { spec, report, exec }),
        Err(e) => Err(("execute", e.to_string(), Some(report))),
    }
}

/// Final-time replicate means per alias at design point 0.
fn final_means(table: &SimTable) -> BTreeMap<String, f64> {
    table
        .aliases
        .iter()
        .filter_map(|a| table.mean_series(a, 0).last().map(|&(_, v)| (a.clone(), v)))
        .collect()
}

/// Status of a validation run: the backend's own verdict, else agreement
/// with reference data among the used entities, else success by default.
fn validation_status(graph: &ProvenanceGraph, used: &[NodeId], exec: &ExecutionResult) -> (String, &'static str) {
    if let Some(s) = exec.status {
        return (s.as_str().to_string(), "propertyCheck");
    }
    let reference = used.iter().filter_map(|id| graph.entity(id.as_str())).find_map(|e| {
        if !matches!(e.kind, EntityKind::SimulationData | EntityKind::Data) {
            return None;
        }
        let t = SimTable::from_value(e.attrs.get(attr::DATA)?)?;
        (t.aliases == exec.table.aliases).then_some(t)
    });
    let Some(reference) = reference else {
        return ("success".into(), "noReference");
    };
    let new = final_means(&exec.table);
    let old = final_means(&reference);
    let agree = old.iter().all(|(a, o)| new.get(a).is_some_and(|n| (n - o).abs() <= COMPARISON_TOLERANCE * o.abs().max(1.0)));
    (if agree { "success" } else { "failure" }.into(), "dataComparison")
}

fn gen_id(rule: &str, counter: &mut u64) -> NodeId {
    let id = NodeId::from(format!("{GENERATED_PREFIX}{rule}-{counter}").as_str());
    *counter += 1;
    id
}

fn calibrated_parameters(graph: &ProvenanceGraph, new_model: &NodeId, summary: &serde_json::Map<String, Value>) -> Option<Value> {
    let params = graph.entity(new_model.as_str())?.attrs.get(attr::PARAMETERS)?.as_array()?.clone();
    let best = summary.get("bestFactors").and_then(Value::as_object);
    Some(Value::Array(
        params
            .into_iter()
            .map(|mut p| {
                let name = p.get("name").and_then(Value::as_str).map(String::from);
                if let (Some(name), Some(best), Some(obj)) = (name, best, p.as_object_mut()) {
                    if let Some(v) = best.get(&name) {
                        obj.insert("value".into(), v.clone());
                    }
                }
                p
            })
            .collect(),
    ))
}

/// One matching round anchored at `activity`: every enabled rule's trigger
/// is matched there, experiments satisfying the condition are collected and
/// cascade-filtered, and each survivor is adapted and executed. The graph is
/// not modified.
pub fn run_rule_matching(
    graph: &ProvenanceGraph,
    rules: &RuleSet,
    activity: &str,
    hooks: &dyn Hooks,
) -> Result<RoundOutput, RuleError> {
    if !graph.contains(activity) {
        return Err(RuleError::UnknownNodeId(NodeId::from(activity)));
    }
    let mut slots = Vec::new();
    let mut jobs: Vec<Job> = Vec::new();
    let mut warnings = Vec::new();
    for rule in rules.active() {
        let (matches, w) = find_matches(graph, rule, activity)?;
        warnings.extend(w);
        let (kept, dropped) = filter_cascade(graph, matches);
        for m in &dropped {
            slots.push(Slot::Done(MatchOutcome::new(rule, m, OutcomeKind::CascadeFiltered)));
        }
        for m in kept {
            let used = m.used_entities(rule, graph);
            if let Some(existing) = existing_duplicate(graph, &rule.id, &used) {
                slots.push(Slot::Done(MatchOutcome::new(rule, &m, OutcomeKind::SkippedDuplicate { existing })));
                continue;
            }
            let same_round = jobs.iter().any(|j| {
                j.rule.id == rule.id && j.used.iter().collect::<BTreeSet<_>>() == used.iter().collect::<BTreeSet<_>>()
            });
            if same_round {
                let outcome = OutcomeKind::SkippedDuplicate { existing: NodeId::from("(this round)") };
                slots.push(Slot::Done(MatchOutcome::new(rule, &m, outcome)));
                continue;
            }
            slots.push(Slot::Job(jobs.len()));
            jobs.push(Job { rule, m, used });
        }
    }

    // executions are independent; results come back in job order
    let results: Vec<Result<Success, Failure>> = jobs.par_iter().map(|j| run_job(graph, hooks, j)).collect();

    let mut out = RoundOutput::default();
    let mut counter = graph.next_generated_counter();
    let mut finished: Vec<Option<MatchOutcome>> = Vec::with_capacity(jobs.len());
    for (job, result) in jobs.iter().zip(results) {
        let mut outcome = MatchOutcome::new(job.rule, &job.m, OutcomeKind::Generated);
        match result {
            Err((stage, reason, report)) => {
                outcome.outcome = OutcomeKind::Aborted { stage: stage.into(), reason };
                outcome.adapt_report = report;
            }
            Ok(s) => {
                outcome.backend = Some(s.exec.backend.clone());
                let ids = emit(graph, job, &s, &mut counter, &mut out);
                outcome.exec_status = ids.status.clone();
                outcome.generated_ids = ids.ids;
                outcome.adapt_report = Some(s.report);
            }
        }
        finished.push(Some(outcome));
    }

    out.report = RoundReport {
        round: 0,
        anchor: NodeId::from(activity),
        outcomes: slots
            .into_iter()
            .map(|s| match s {
                Slot::Done(o) => o,
                Slot::Job(i) => finished[i].take().expect("each job reported once"),
            })
            .collect(),
        warnings,
    };
    Ok(out)
}

struct Emitted {
    ids: Vec<NodeId>,
    status: Option<String>,
}

/// Adds the generated activity and its entities for one successful job.
fn emit(graph: &ProvenanceGraph, job: &Job, s: &Success, counter: &mut u64, out: &mut RoundOutput) -> Emitted {
    let rule = job.rule;
    let m = &job.m;
    let study = graph.entity(m.new_model.as_str()).and_then(Entity::study_id).unwrap_or_default().to_string();
    let provenance = |a: &mut AttributeMap| {
        a.insert(attr::STUDY_ID.into(), json!(study));
        a.insert(attr::GENERATED_BY_RULE.into(), json!(rule.id));
        a.insert(attr::REUSED_EXPERIMENT.into(), json!(m.old_experiment.as_str()));
    };

    let act_id = gen_id(&rule.id, counter);
    let se_id = gen_id(&rule.id, counter);
    let sd_id = gen_id(&rule.id, counter);

    let mut se = AttributeMap::new();
    provenance(&mut se);
    se.insert(attr::EXPERIMENT_TYPE.into(), json!(s.spec.experiment_type()));
    se.insert(attr::SPECIFICATION.into(), to_value(&s.spec));
    se.insert(attr::BACKEND.into(), json!(s.exec.backend));

    let result = &s.exec.result;
    let mut sd = AttributeMap::new();
    provenance(&mut sd);
    sd.insert(attr::SUMMARY.into(), Value::Object(result.summary.clone()));
    let table = result.table.to_value();
    if serde_json::to_string(&table).map(|t| t.len()).unwrap_or(0) > INLINE_DATA_LIMIT {
        let key = format!("data/{sd_id}.csv");
        sd.insert(attr::DATA_REF.into(), json!(key));
        out.external_tables.insert(key, result.table.clone());
    } else {
        sd.insert(attr::DATA.into(), table);
    }
    let mut status = result.status.map(|s| s.as_str().to_string());
    if rule.generation.pattern == BuiltinPattern::ValidatingSM {
        let (st, basis) = validation_status(graph, &job.used, result);
        sd.insert(attr::STATUS.into(), json!(st));
        sd.insert("statusBasis".into(), json!(basis));
        status = Some(st);
    }

    let mut entities = vec![
        Entity { id: se_id.clone(), kind: EntityKind::SimulationExperiment, attrs: se },
        Entity { id: sd_id.clone(), kind: EntityKind::SimulationData, attrs: sd },
    ];
    if rule.generation.emits_model() {
        let sm_id = gen_id(&rule.id, counter);
        let new_model = graph.entity(m.new_model.as_str());
        let mut sm = AttributeMap::new();
        provenance(&mut sm);
        sm.remove(attr::REUSED_EXPERIMENT);
        let format = s.spec.model.model_format.clone().or_else(|| new_model.and_then(|e| e.attr_str(attr::MODEL_FORMAT)).map(String::from));
        if let Some(f) = format {
            sm.insert(attr::MODEL_FORMAT.into(), json!(f));
        }
        if let Some(p) = calibrated_parameters(graph, &m.new_model, &result.summary) {
            sm.insert(attr::PARAMETERS.into(), p);
        }
        match &result.new_model_artifact {
            Some(artifact) => {
                let digest = hex::encode(Sha256::digest(artifact.as_bytes()));
                sm.insert(attr::MODEL_PATH.into(), json!(format!("generated/{}-{}.rnet", rule.id, &digest[..8])));
                sm.insert(attr::MODEL_ARTIFACT.into(), json!(artifact));
            }
            None => {
                let path = new_model.and_then(|e| e.attr_str(attr::MODEL_PATH)).unwrap_or_default();
                sm.insert(attr::MODEL_PATH.into(), json!(path));
                sm.insert(attr::PENDING_USER_EDIT.into(), json!(true));
            }
        }
        entities.push(Entity { id: sm_id, kind: EntityKind::SimulationModel, attrs: sm });
        out.follow_ups.push(act_id.clone());
    }

    let mut act_attrs = AttributeMap::new();
    act_attrs.insert(attr::GENERATED_BY_RULE.into(), json!(rule.id));
    act_attrs.insert(attr::REUSED_EXPERIMENT.into(), json!(m.old_experiment.as_str()));
    act_attrs.insert("triggeredBy".into(), json!(m.trigger_activity.as_str()));
    out.delta.activities.push(Activity { id: act_id.clone(), label: rule.generation.label.clone(), attrs: act_attrs });
    let mut ids = vec![act_id.clone()];
    for e in &entities {
        out.delta.deps.push(Dependency::generated(e.id.clone(), act_id.clone()));
        ids.push(e.id.clone());
    }
    for u in &job.used {
        out.delta.deps.push(Dependency::used(act_id.clone(), u.clone()));
    }
    out.delta.entities.extend(entities);
    Emitted { ids, status }
}

/// Handles completion of `activity`: runs a matching round there, appends
/// its delta, then runs follow-up rounds breadth-first at every generated
/// activity that produced a model. Each round starts only after the
/// previous round's executions have all finished.
pub fn notify(
    graph: &mut ProvenanceGraph,
    rules: &RuleSet,
    activity: &str,
    hooks: &dyn Hooks,
) -> Result<RunReport, RuleError> {
    if !graph.contains(activity) {
        return Err(RuleError::UnknownNodeId(NodeId::from(activity)));
    }
    let latest = graph.latest_activity().map(|a| a.as_str().to_string()).unwrap_or_default();
    if latest != activity {
        return Err(RuleError::NotLatestActivity(NodeId::from(activity), latest));
    }
    let mut report = RunReport::default();
    let mut queue = VecDeque::from([NodeId::from(activity)]);
    while let Some(anchor) = queue.pop_front() {
        if report.rounds.len() >= MAX_ROUNDS {
            return Err(RuleError::TooManyRounds(MAX_ROUNDS));
        }
        let out = run_rule_matching(graph, rules, anchor.as_str(), hooks)?;
        graph.append_delta(out.delta).map_err(|e| RuleError::Append(e.to_string()))?;
        let mut round = out.report;
        round.round = report.rounds.len();
        report.rounds.push(round);
        report.external_tables.extend(out.external_tables);
        queue.extend(out.follow_ups);
    }
    Ok(report)
}
