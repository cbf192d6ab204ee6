//! Append-only provenance graph of a simulation study.
//!
//! The graph is bipartite: entities (models, experiments, data, ...) and
//! activities (building, calibrating, validating, ...) connected by `used`
//! edges (activity to entity) and `wasGeneratedBy` edges (entity to
//! activity). Nodes and edges are only ever added; every mutation is
//! validated as a whole and lands atomically or not at all.

mod document;
mod dot;
mod store;

pub use document::{load_graph, save_graph};
pub use dot::export_dot;
pub use store::GraphStore;

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

/// Attribute map carried by every node. Insertion order is preserved.
pub type AttributeMap = serde_json::Map<String, Value>;

/// Reserved attribute keys.
pub mod attr {
    pub const STUDY_ID: &str = "studyId";
    pub const EXPERIMENT_TYPE: &str = "experimentType";
    pub const SPECIFICATION: &str = "specification";
    pub const STATUS: &str = "status";
    pub const BACKEND: &str = "backend";
    pub const MODEL_PATH: &str = "modelPath";
    pub const MODEL_FORMAT: &str = "modelFormat";
    pub const MODEL_ARTIFACT: &str = "modelArtifact";
    pub const PARAMETERS: &str = "parameters";
    pub const SPECIES: &str = "species";
    pub const FACTOR_BOUNDS: &str = "factorBounds";
    pub const TIME_SCALE_FACTOR: &str = "timeScaleFactor";
    pub const FORMAL_EXPRESSION: &str = "formalExpression";
    pub const GENERATED_BY_RULE: &str = "generatedByRule";
    pub const REUSED_EXPERIMENT: &str = "reusedExperiment";
    pub const PENDING_USER_EDIT: &str = "pendingUserEdit";
    pub const DATA: &str = "data";
    pub const DATA_REF: &str = "dataRef";
    pub const SUMMARY: &str = "summary";
    pub const NAME: &str = "name";
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("node id `{0}` is already in use")]
    DuplicateId(NodeId),
    #[error("node ids must be non-empty")]
    EmptyId,
    #[error("entity `{0}` has no string `studyId` attribute")]
    MissingStudyId(NodeId),
    #[error("unknown node `{0}`")]
    UnknownNodeId(NodeId),
    #[error("activity `{0}` has neither used nor generated entities")]
    IsolatedActivity(NodeId),
    #[error("adding activity `{0}` would create a derivation cycle")]
    CycleWouldForm(NodeId),
    #[error("entity `{0}` already has a generating activity")]
    AlreadyGenerated(NodeId),
    #[error("entity `{0}` is already used by an earlier activity and cannot be generated later")]
    GeneratedAfterUse(NodeId),
    #[error("edge {0} has the wrong endpoint kinds")]
    WrongDirection(String),
    #[error("edge {0} is already present")]
    DuplicateEdge(String),
    #[error("activity `{0}` is already recorded; edges may only be added to new activities")]
    ActivityClosed(NodeId),
    #[error("`{0}` is not an activity")]
    NotAnActivity(NodeId),
    #[error("`{0}` is not an entity")]
    NotAnEntity(NodeId),
    #[error("inconsistent delta: {0}")]
    InconsistentDelta(String),
    #[error("cannot parse provenance document: {0}")]
    ParseError(String),
    #[error("provenance document violates the schema: {0}")]
    SchemaViolation(String),
}

/// Identifier of an entity or activity, unique within one graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_string())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl std::borrow::Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    #[serde(rename = "RQ")]
    ResearchQuestion,
    #[serde(rename = "SM")]
    SimulationModel,
    #[serde(rename = "SE")]
    SimulationExperiment,
    #[serde(rename = "SD")]
    SimulationData,
    #[serde(rename = "D")]
    Data,
    #[serde(rename = "R")]
    Requirement,
    #[serde(rename = "QM")]
    QualitativeModel,
    #[serde(rename = "A")]
    Assumption,
    #[serde(rename = "T")]
    Theory,
    #[serde(rename = "O")]
    Other,
}

impl EntityKind {
    pub const ALL: [EntityKind; 10] = [
        EntityKind::ResearchQuestion,
        EntityKind::SimulationModel,
        EntityKind::SimulationExperiment,
        EntityKind::SimulationData,
        EntityKind::Data,
        EntityKind::Requirement,
        EntityKind::QualitativeModel,
        EntityKind::Assumption,
        EntityKind::Theory,
        EntityKind::Other,
    ];

    pub fn abbrev(self) -> &'static str {
        match self {
            EntityKind::ResearchQuestion => "RQ",
            EntityKind::SimulationModel => "SM",
            EntityKind::SimulationExperiment => "SE",
            EntityKind::SimulationData => "SD",
            EntityKind::Data => "D",
            EntityKind::Requirement => "R",
            EntityKind::QualitativeModel => "QM",
            EntityKind::Assumption => "A",
            EntityKind::Theory => "T",
            EntityKind::Other => "O",
        }
    }

    pub fn from_abbrev(s: &str) -> Option<Self> {
        EntityKind::ALL.into_iter().find(|k| k.abbrev() == s)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abbrev())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub id: NodeId,
    pub kind: EntityKind,
    pub attrs: AttributeMap,
}

impl Entity {
    pub fn attr_str(&self, key: &str) -> Option<&str> {
        self.attrs.get(key).and_then(Value::as_str)
    }

    pub fn study_id(&self) -> Option<&str> {
        self.attr_str(attr::STUDY_ID)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activity {
    pub id: NodeId,
    pub label: String,
    pub attrs: AttributeMap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DepKind {
    #[serde(rename = "used")]
    Used,
    #[serde(rename = "wasGeneratedBy")]
    WasGeneratedBy,
}

/// `used` goes activity → entity, `wasGeneratedBy` goes entity → activity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dependency {
    pub kind: DepKind,
    pub from: NodeId,
    pub to: NodeId,
}

impl Dependency {
    pub fn used(activity: impl Into<NodeId>, entity: impl Into<NodeId>) -> Self {
        Dependency { kind: DepKind::Used, from: activity.into(), to: entity.into() }
    }

    pub fn generated(entity: impl Into<NodeId>, activity: impl Into<NodeId>) -> Self {
        Dependency { kind: DepKind::WasGeneratedBy, from: entity.into(), to: activity.into() }
    }

    /// (activity, entity) regardless of direction.
    pub fn endpoints(&self) -> (&NodeId, &NodeId) {
        match self.kind {
            DepKind::Used => (&self.from, &self.to),
            DepKind::WasGeneratedBy => (&self.to, &self.from),
        }
    }
}

impl fmt::Display for Dependency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DepKind::Used => "used",
            DepKind::WasGeneratedBy => "wasGeneratedBy",
        };
        write!(f, "{}({} -> {})", kind, self.from, self.to)
    }
}

/// A batch of new nodes and edges appended in one step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDelta {
    pub activities: Vec<Activity>,
    pub entities: Vec<Entity>,
    pub deps: Vec<Dependency>,
}

impl GraphDelta {
    pub fn is_empty(&self) -> bool {
        self.activities.is_empty() && self.entities.is_empty() && self.deps.is_empty()
    }

    pub fn extend(&mut self, other: GraphDelta) {
        self.activities.extend(other.activities);
        self.entities.extend(other.entities);
        self.deps.extend(other.deps);
    }
}

/// An entity produced by [`ProvenanceGraph::record_activity`].
#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    New { id: Option<NodeId>, kind: EntityKind, attrs: AttributeMap },
    /// A previously added source entity that this activity produced.
    Existing(NodeId),
}

impl Generated {
    pub fn new(kind: EntityKind, attrs: AttributeMap) -> Self {
        Generated::New { id: None, kind, attrs }
    }

    pub fn with_id(id: impl Into<NodeId>, kind: EntityKind, attrs: AttributeMap) -> Self {
        Generated::New { id: Some(id.into()), kind, attrs }
    }
}

/// Description of a completed activity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ActivityRecord {
    pub id: Option<NodeId>,
    pub label: String,
    pub attrs: AttributeMap,
    pub used: Vec<NodeId>,
    pub generated: Vec<Generated>,
}

impl ActivityRecord {
    pub fn new(label: impl Into<String>) -> Self {
        ActivityRecord { label: label.into(), ..Default::default() }
    }

    pub fn id(mut self, id: impl Into<NodeId>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn uses<I, S>(mut self, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<NodeId>,
    {
        self.used.extend(ids.into_iter().map(Into::into));
        self
    }

    pub fn generates(mut self, generated: Generated) -> Self {
        self.generated.push(generated);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Ancestors,
    Descendants,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Entity(usize),
    Activity(usize),
}

#[derive(Debug, Clone, Default)]
pub struct ProvenanceGraph {
    entities: Vec<Entity>,
    activities: Vec<Activity>,
    deps: Vec<Dependency>,
    event_log: Vec<NodeId>,
    index: HashMap<NodeId, Slot>,
    used: HashMap<NodeId, Vec<NodeId>>,
    generated: HashMap<NodeId, Vec<NodeId>>,
    generator: HashMap<NodeId, NodeId>,
    users: HashMap<NodeId, Vec<NodeId>>,
    dep_set: HashSet<Dependency>,
    log_pos: HashMap<NodeId, usize>,
    gen_counter: u64,
    auto_counter: u64,
}

impl PartialEq for ProvenanceGraph {
    fn eq(&self, other: &Self) -> bool {
        self.entities == other.entities
            && self.activities == other.activities
            && self.deps == other.deps
            && self.event_log == other.event_log
    }
}

/// Prefix for ids of rule-generated nodes: `gen-<ruleId>-<counter>`.
pub const GENERATED_PREFIX: &str = "gen-";

fn generated_counter(id: &str) -> Option<u64> {
    let rest = id.strip_prefix(GENERATED_PREFIX)?;
    let (_, n) = rest.rsplit_once('-')?;
    n.parse().ok()
}

impl ProvenanceGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn activities(&self) -> &[Activity] {
        &self.activities
    }

    pub fn deps(&self) -> &[Dependency] {
        &self.deps
    }

    pub fn event_log(&self) -> &[NodeId] {
        &self.event_log
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        match self.index.get(id)? {
            Slot::Entity(i) => Some(&self.entities[*i]),
            Slot::Activity(_) => None,
        }
    }

    pub fn activity(&self, id: &str) -> Option<&Activity> {
        match self.index.get(id)? {
            Slot::Activity(i) => Some(&self.activities[*i]),
            Slot::Entity(_) => None,
        }
    }

    pub fn is_activity(&self, id: &str) -> bool {
        matches!(self.index.get(id), Some(Slot::Activity(_)))
    }

    pub fn is_entity(&self, id: &str) -> bool {
        matches!(self.index.get(id), Some(Slot::Entity(_)))
    }

    /// Entities used by an activity, in edge order.
    pub fn used_by(&self, activity: &str) -> &[NodeId] {
        self.used.get(activity).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Entities generated by an activity, in edge order.
    pub fn generated_by(&self, activity: &str) -> &[NodeId] {
        self.generated.get(activity).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The activity that generated an entity, if any.
    pub fn generator_of(&self, entity: &str) -> Option<&NodeId> {
        self.generator.get(entity)
    }

    /// Activities that used an entity, in edge order.
    pub fn users_of(&self, entity: &str) -> &[NodeId] {
        self.users.get(entity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_dep(&self, dep: &Dependency) -> bool {
        self.dep_set.contains(dep)
    }

    /// Position of an activity in the event log.
    pub fn log_position(&self, activity: &str) -> Option<usize> {
        self.log_pos.get(activity).copied()
    }

    pub fn latest_activity(&self) -> Option<&NodeId> {
        self.event_log.last()
    }

    /// Next value of the generated-node counter.
    pub fn next_generated_counter(&self) -> u64 {
        self.gen_counter + 1
    }

    pub fn add_entity(
        &mut self,
        kind: EntityKind,
        attrs: AttributeMap,
        id: Option<NodeId>,
    ) -> Result<NodeId, GraphError> {
        let id = match id {
            Some(id) => id,
            None => self.fresh_id(),
        };
        let delta = GraphDelta {
            entities: vec![Entity { id: id.clone(), kind, attrs }],
            ..Default::default()
        };
        self.validate(&delta)?;
        self.commit(delta);
        Ok(id)
    }

    /// Append a completed activity with its used and generated entities.
    pub fn record_activity(
        &mut self,
        record: ActivityRecord,
    ) -> Result<(NodeId, Vec<NodeId>), GraphError> {
        for u in &record.used {
            if !self.contains(u.as_str()) {
                return Err(GraphError::UnknownNodeId(u.clone()));
            }
        }
        let activity_id = match record.id {
            Some(id) => id,
            None => self.fresh_id(),
        };
        let mut delta = GraphDelta::default();
        let mut generated_ids = Vec::with_capacity(record.generated.len());
        for g in record.generated {
            let eid = match g {
                Generated::New { id, kind, attrs } => {
                    let eid = match id {
                        Some(id) => id,
                        None => self.fresh_id_avoiding(&delta),
                    };
                    delta.entities.push(Entity { id: eid.clone(), kind, attrs });
                    eid
                }
                Generated::Existing(id) => id,
            };
            delta.deps.push(Dependency::generated(eid.clone(), activity_id.clone()));
            generated_ids.push(eid);
        }
        for u in record.used {
            delta.deps.push(Dependency::used(activity_id.clone(), u));
        }
        delta.activities.push(Activity { id: activity_id.clone(), label: record.label, attrs: record.attrs });
        self.validate(&delta)?;
        self.commit(delta);
        Ok((activity_id, generated_ids))
    }

    /// Append a whole delta atomically.
    pub fn append_delta(&mut self, delta: GraphDelta) -> Result<(), GraphError> {
        if delta.is_empty() {
            return Ok(());
        }
        self.validate(&delta)
            .map_err(|e| GraphError::InconsistentDelta(e.to_string()))?;
        self.commit(delta);
        Ok(())
    }

    /// Transitive closure along the derivation order, excluding `node` itself.
    pub fn query_lineage(
        &self,
        node: &str,
        direction: Direction,
    ) -> Result<BTreeSet<NodeId>, GraphError> {
        if !self.contains(node) {
            return Err(GraphError::UnknownNodeId(NodeId::from(node)));
        }
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        queue.push_back(NodeId::from(node));
        while let Some(cur) = queue.pop_front() {
            for next in self.derivation_neighbours(&cur, direction) {
                if next.as_str() != node && seen.insert(next.clone()) {
                    queue.push_back(next.clone());
                }
            }
        }
        Ok(seen)
    }

    fn derivation_neighbours<'a>(
        &'a self,
        node: &NodeId,
        direction: Direction,
    ) -> Box<dyn Iterator<Item = &'a NodeId> + 'a> {
        let is_activity = self.is_activity(node.as_str());
        match (direction, is_activity) {
            (Direction::Ancestors, true) => Box::new(self.used_by(node.as_str()).iter()),
            (Direction::Ancestors, false) => Box::new(self.generator_of(node.as_str()).into_iter()),
            (Direction::Descendants, true) => Box::new(self.generated_by(node.as_str()).iter()),
            (Direction::Descendants, false) => Box::new(self.users_of(node.as_str()).iter()),
        }
    }

    /// True if `self` is `earlier` plus appended content only.
    pub fn extends(&self, earlier: &ProvenanceGraph) -> bool {
        self.entities.starts_with(&earlier.entities)
            && self.activities.starts_with(&earlier.activities)
            && self.deps.starts_with(&earlier.deps)
            && self.event_log.starts_with(&earlier.event_log)
    }

    fn fresh_id(&mut self) -> NodeId {
        loop {
            self.auto_counter += 1;
            let id = NodeId(format!("auto-{}", self.auto_counter));
            if !self.contains(id.as_str()) {
                return id;
            }
        }
    }

    fn fresh_id_avoiding(&mut self, delta: &GraphDelta) -> NodeId {
        loop {
            let id = self.fresh_id();
            if !delta.entities.iter().any(|e| e.id == id) {
                return id;
            }
        }
    }

    fn validate(&self, delta: &GraphDelta) -> Result<(), GraphError> {
        let mut new_entities: HashMap<&NodeId, &Entity> = HashMap::new();
        let mut new_activities: HashSet<&NodeId> = HashSet::new();
        for e in &delta.entities {
            check_new_id(&e.id, self, &new_entities, &new_activities)?;
            if e.study_id().is_none() {
                return Err(GraphError::MissingStudyId(e.id.clone()));
            }
            new_entities.insert(&e.id, e);
        }
        for a in &delta.activities {
            check_new_id(&a.id, self, &new_entities, &new_activities)?;
            new_activities.insert(&a.id);
        }

        let is_entity = |id: &NodeId| new_entities.contains_key(id) || self.is_entity(id.as_str());
        let is_activity = |id: &NodeId| new_activities.contains(id) || self.is_activity(id.as_str());

        let mut seen_deps: HashSet<&Dependency> = HashSet::new();
        let mut new_generator: HashMap<&NodeId, &NodeId> = HashMap::new();
        let mut touched: HashSet<&NodeId> = HashSet::new();
        for d in &delta.deps {
            for end in [&d.from, &d.to] {
                if !is_entity(end) && !is_activity(end) {
                    return Err(GraphError::UnknownNodeId(end.clone()));
                }
            }
            let (act, ent) = d.endpoints();
            if !is_activity(act) || !is_entity(ent) {
                return Err(GraphError::WrongDirection(d.to_string()));
            }
            if !new_activities.contains(act) {
                return Err(GraphError::ActivityClosed(act.clone()));
            }
            if self.dep_set.contains(d) || !seen_deps.insert(d) {
                return Err(GraphError::DuplicateEdge(d.to_string()));
            }
            touched.insert(act);
            if d.kind == DepKind::WasGeneratedBy {
                if self.generator.contains_key(ent) || new_generator.insert(ent, act).is_some() {
                    return Err(GraphError::AlreadyGenerated(ent.clone()));
                }
            }
        }
        for a in &delta.activities {
            if !touched.contains(&a.id) {
                return Err(GraphError::IsolatedActivity(a.id.clone()));
            }
        }

        // Cycles can only close through an existing entity that a new
        // activity claims to have generated.
        let reclaimed: Vec<&NodeId> = new_generator
            .keys()
            .copied()
            .filter(|e| !new_entities.contains_key(e))
            .collect();
        if !reclaimed.is_empty() {
            if let Some(a) = self.find_cycle(delta) {
                return Err(GraphError::CycleWouldForm(a.clone()));
            }
            for e in reclaimed {
                if !self.users_of(e.as_str()).is_empty() {
                    return Err(GraphError::GeneratedAfterUse(e.clone()));
                }
            }
        }
        Ok(())
    }

    /// Looks for a new activity that can reach itself in the merged graph.
    fn find_cycle<'d>(&self, delta: &'d GraphDelta) -> Option<&'d NodeId> {
        let mut extra_users: HashMap<&NodeId, Vec<&NodeId>> = HashMap::new();
        let mut extra_generated: HashMap<&NodeId, Vec<&NodeId>> = HashMap::new();
        for d in &delta.deps {
            let (act, ent) = d.endpoints();
            match d.kind {
                DepKind::Used => extra_users.entry(ent).or_default().push(act),
                DepKind::WasGeneratedBy => extra_generated.entry(act).or_default().push(ent),
            }
        }
        for a in &delta.activities {
            let mut stack: Vec<&NodeId> = vec![&a.id];
            let mut seen: HashSet<&NodeId> = HashSet::new();
            while let Some(cur) = stack.pop() {
                let mut next: Vec<&NodeId> = Vec::new();
                if let Some(v) = extra_generated.get(cur) {
                    next.extend(v.iter().copied());
                } else {
                    next.extend(self.generated_by(cur.as_str()).iter());
                }
                next.extend(self.users_of(cur.as_str()).iter());
                if let Some(v) = extra_users.get(cur) {
                    next.extend(v.iter().copied());
                }
                for n in next {
                    if n == &a.id {
                        return Some(&a.id);
                    }
                    if seen.insert(n) {
                        stack.push(n);
                    }
                }
            }
        }
        None
    }

    fn commit(&mut self, delta: GraphDelta) {
        for e in delta.entities {
            if let Some(n) = generated_counter(e.id.as_str()) {
                self.gen_counter = self.gen_counter.max(n);
            }
            self.index.insert(e.id.clone(), Slot::Entity(self.entities.len()));
            self.entities.push(e);
        }
        for a in delta.activities {
            if let Some(n) = generated_counter(a.id.as_str()) {
                self.gen_counter = self.gen_counter.max(n);
            }
            self.index.insert(a.id.clone(), Slot::Activity(self.activities.len()));
            self.log_pos.insert(a.id.clone(), self.event_log.len());
            self.event_log.push(a.id.clone());
            self.activities.push(a);
        }
        for d in delta.deps {
            self.insert_dep_unchecked(d);
        }
    }

    fn insert_dep_unchecked(&mut self, d: Dependency) {
        let (act, ent) = d.endpoints();
        let (act, ent) = (act.clone(), ent.clone());
        match d.kind {
            DepKind::Used => {
                self.used.entry(act.clone()).or_default().push(ent.clone());
                self.users.entry(ent).or_default().push(act);
            }
            DepKind::WasGeneratedBy => {
                self.generated.entry(act.clone()).or_default().push(ent.clone());
                self.generator.insert(ent, act);
            }
        }
        self.dep_set.insert(d.clone());
        self.deps.push(d);
    }

    /// Builds a graph from stored parts, checking every structural invariant.
    pub(crate) fn from_parts(
        entities: Vec<Entity>,
        activities: Vec<Activity>,
        deps: Vec<Dependency>,
        event_log: Vec<NodeId>,
    ) -> Result<Self, GraphError> {
        let mut g = ProvenanceGraph::new();
        for e in entities {
            if e.id.as_str().is_empty() {
                return Err(GraphError::EmptyId);
            }
            if g.contains(e.id.as_str()) {
                return Err(GraphError::DuplicateId(e.id));
            }
            if e.study_id().is_none() {
                return Err(GraphError::MissingStudyId(e.id));
            }
            if let Some(n) = generated_counter(e.id.as_str()) {
                g.gen_counter = g.gen_counter.max(n);
            }
            g.index.insert(e.id.clone(), Slot::Entity(g.entities.len()));
            g.entities.push(e);
        }
        for a in activities {
            if a.id.as_str().is_empty() {
                return Err(GraphError::EmptyId);
            }
            if g.contains(a.id.as_str()) {
                return Err(GraphError::DuplicateId(a.id));
            }
            if let Some(n) = generated_counter(a.id.as_str()) {
                g.gen_counter = g.gen_counter.max(n);
            }
            g.index.insert(a.id.clone(), Slot::Activity(g.activities.len()));
            g.activities.push(a);
        }
        for d in deps {
            for end in [&d.from, &d.to] {
                if !g.contains(end.as_str()) {
                    return Err(GraphError::UnknownNodeId(end.clone()));
                }
            }
            let (act, ent) = d.endpoints();
            if !g.is_activity(act.as_str()) || !g.is_entity(ent.as_str()) {
                return Err(GraphError::WrongDirection(d.to_string()));
            }
            if g.dep_set.contains(&d) {
                return Err(GraphError::DuplicateEdge(d.to_string()));
            }
            if d.kind == DepKind::WasGeneratedBy && g.generator.contains_key(ent.as_str()) {
                return Err(GraphError::AlreadyGenerated(ent.clone()));
            }
            g.insert_dep_unchecked(d);
        }
        for a in &g.activities {
            if g.used_by(a.id.as_str()).is_empty() && g.generated_by(a.id.as_str()).is_empty() {
                return Err(GraphError::IsolatedActivity(a.id.clone()));
            }
        }
        if event_log.len() != g.activities.len() {
            return Err(GraphError::SchemaViolation(format!(
                "eventLog lists {} ids for {} activities",
                event_log.len(),
                g.activities.len()
            )));
        }
        for (pos, id) in event_log.iter().enumerate() {
            if !g.is_activity(id.as_str()) {
                return Err(GraphError::NotAnActivity(id.clone()));
            }
            if g.log_pos.insert(id.clone(), pos).is_some() {
                return Err(GraphError::SchemaViolation(format!("eventLog lists `{id}` twice")));
            }
        }
        g.event_log = event_log;
        if let Some(a) = g.first_cycle() {
            return Err(GraphError::CycleWouldForm(a));
        }
        // Activities may only use entities generated earlier in the log.
        for a in &g.event_log {
            let pos = g.log_pos[a];
            for u in g.used_by(a.as_str()) {
                if let Some(gen) = g.generator_of(u.as_str()) {
                    if g.log_pos[gen] >= pos {
                        return Err(GraphError::SchemaViolation(format!(
                            "`{a}` uses `{u}` before its generator `{gen}` completed"
                        )));
                    }
                }
            }
        }
        Ok(g)
    }

    fn first_cycle(&self) -> Option<NodeId> {
        // Kahn's algorithm over the derivation order.
        let mut indegree: HashMap<&NodeId, usize> = HashMap::new();
        for id in self.index.keys() {
            indegree.insert(id, 0);
        }
        for d in &self.deps {
            // Both edge kinds point from the later node in derivation order.
            *indegree.get_mut(&d.from).unwrap() += 1;
        }
        let mut queue: VecDeque<&NodeId> =
            indegree.iter().filter(|(_, &n)| n == 0).map(|(id, _)| *id).collect();
        let mut visited = 0usize;
        while let Some(cur) = queue.pop_front() {
            visited += 1;
            for n in self.derivation_neighbours(cur, Direction::Descendants) {
                let deg = indegree.get_mut(n).unwrap();
                *deg -= 1;
                if *deg == 0 {
                    queue.push_back(n);
                }
            }
        }
        if visited == self.index.len() {
            return None;
        }
        let mut stuck: Vec<&NodeId> = indegree
            .iter()
            .filter(|(id, &n)| n > 0 && self.is_activity(id.as_str()))
            .map(|(id, _)| *id)
            .collect();
        stuck.sort();
        stuck.first().map(|id| (*id).clone())
    }
}

fn check_new_id(
    id: &NodeId,
    graph: &ProvenanceGraph,
    new_entities: &HashMap<&NodeId, &Entity>,
    new_activities: &HashSet<&NodeId>,
) -> Result<(), GraphError> {
    if id.as_str().is_empty() {
        return Err(GraphError::EmptyId);
    }
    if graph.contains(id.as_str()) || new_entities.contains_key(id) || new_activities.contains(id) {
        return Err(GraphError::DuplicateId(id.clone()));
    }
    Ok(())
}

/// Builds an attribute map from `(key, value)` pairs.
pub fn attrs<I, K>(pairs: I) -> AttributeMap
where
    I: IntoIterator<Item = (K, Value)>,
    K: Into<String>,
{
    pairs.into_iter().map(|(k, v)| (k.into(), v)).collect()
}

#[cfg(test)]
mod tests;
