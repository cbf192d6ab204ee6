//! Structural provenance patterns and the anchored matcher.
//!
//! Every pattern describes a single activity together with the entities it
//! must use and generate. Matching is closed-world per side: every entity the
//! anchor used (or generated) has to be bound to some pattern variable, and a
//! multi-entity variable absorbs all remaining qualifying entities.

mod builtin;
mod document;
mod predicates;

pub use builtin::{BuiltinPattern, PatternRole};
pub use predicates::{different_study, is_based_on, is_validated, same_study};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::prov_graph::{AttributeMap, DepKind, Entity, EntityKind, NodeId, ProvenanceGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("unknown node `{0}`")]
    UnknownNodeId(NodeId),
    #[error("`{0}` is not a {1} entity")]
    KindMismatch(NodeId, EntityKind),
    #[error("entity `{0}` has no studyId")]
    MissingStudyId(NodeId),
    #[error("invalid pattern `{0}`: {1}")]
    InvalidPattern(String, String),
    #[error("cannot parse pattern document: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NodeRole {
    Activity,
    Entity,
    MultiEntity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrPredicate {
    Equals(Value),
    Present,
    Absent,
    OneOf(Vec<Value>),
}

impl AttrPredicate {
    fn holds(&self, attrs: &AttributeMap, key: &str) -> bool {
        match self {
            AttrPredicate::Equals(v) => attrs.get(key) == Some(v),
            AttrPredicate::Present => attrs.contains_key(key),
            AttrPredicate::Absent => !attrs.contains_key(key),
            AttrPredicate::OneOf(vs) => attrs.get(key).is_some_and(|v| vs.contains(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternNode {
    pub var: String,
    pub role: NodeRole,
    /// Allowed kinds; `None` admits every kind.
    pub kinds: Option<BTreeSet<EntityKind>>,
    pub attrs: Vec<(String, AttrPredicate)>,
    /// Kinds a multi-entity variable must not contain.
    pub exclude: BTreeSet<EntityKind>,
    /// Lower bound on the size of a multi-entity binding.
    pub min_count: usize,
}

impl PatternNode {
    pub fn activity(var: impl Into<String>) -> Self {
        PatternNode {
            var: var.into(),
            role: NodeRole::Activity,
            kinds: None,
            attrs: Vec::new(),
            exclude: BTreeSet::new(),
            min_count: 0,
        }
    }

    pub fn entity(var: impl Into<String>, kinds: &[EntityKind]) -> Self {
        PatternNode {
            var: var.into(),
            role: NodeRole::Entity,
            kinds: Some(kinds.iter().copied().collect()),
            attrs: Vec::new(),
            exclude: BTreeSet::new(),
            min_count: 0,
        }
    }

    pub fn multi(var: impl Into<String>, exclude: &[EntityKind]) -> Self {
        PatternNode {
            var: var.into(),
            role: NodeRole::MultiEntity,
            kinds: None,
            attrs: Vec::new(),
            exclude: exclude.iter().copied().collect(),
            min_count: 0,
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, pred: AttrPredicate) -> Self {
        self.attrs.push((key.into(), pred));
        self
    }

    pub fn at_least(mut self, n: usize) -> Self {
        self.min_count = n;
        self
    }

    /// Whether an entity may be bound to this (entity or multi-entity) node.
    pub fn admits(&self, entity: &Entity) -> bool {
        if let Some(kinds) = &self.kinds {
            if !kinds.contains(&entity.kind) {
                return false;
            }
        }
        if self.exclude.contains(&entity.kind) {
            return false;
        }
        self.attrs.iter().all(|(k, p)| p.holds(&entity.attrs, k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternEdge {
    pub kind: DepKind,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Used,
    Generated,
}

#[derive(Debug, Clone, PartialEq)]
struct SidePlan {
    singles: Vec<usize>,
    multi: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    name: String,
    nodes: Vec<PatternNode>,
    edges: Vec<PatternEdge>,
    activity: usize,
    used: SidePlan,
    generated: SidePlan,
}

impl Pattern {
    pub fn new(
        name: impl Into<String>,
        nodes: Vec<PatternNode>,
        edges: Vec<PatternEdge>,
        anchor: Option<String>,
    ) -> Result<Self, PatternError> {
        let name = name.into();
        let invalid = |msg: String| PatternError::InvalidPattern(name.clone(), msg);

        let mut seen = BTreeSet::new();
        for n in &nodes {
            if n.var.is_empty() || !seen.insert(n.var.as_str()) {
                return Err(invalid(format!("variable `{}` is empty or duplicated", n.var)));
            }
        }
        let activities: Vec<usize> = nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.role == NodeRole::Activity)
            .map(|(i, _)| i)
            .collect();
        let [activity] = activities[..] else {
            return Err(invalid(format!("expected exactly one activity variable, found {}", activities.len())));
        };
        let act_var = nodes[activity].var.clone();
        if let Some(anchor) = &anchor {
            if anchor != &act_var {
                return Err(invalid(format!("anchor `{anchor}` is not the activity variable")));
            }
        }

        let mut side_of: BTreeMap<&str, Side> = BTreeMap::new();
        for e in &edges {
            let (act, ent, side) = match e.kind {
                DepKind::Used => (&e.from, &e.to, Side::Used),
                DepKind::WasGeneratedBy => (&e.to, &e.from, Side::Generated),
            };
            if act != &act_var {
                return Err(invalid(format!("edge {}->{} does not touch the activity", e.from, e.to)));
            }
            let Some(node) = nodes.iter().find(|n| &n.var == ent) else {
                return Err(invalid(format!("edge references unknown variable `{ent}`")));
            };
            if node.role == NodeRole::Activity {
                return Err(invalid("edges must connect the activity with an entity".into()));
            }
            if side_of.insert(ent.as_str(), side).is_some() {
                return Err(invalid(format!("variable `{ent}` has more than one edge")));
            }
        }

        let mut used = SidePlan { singles: Vec::new(), multi: None };
        let mut generated = SidePlan { singles: Vec::new(), multi: None };
        for (i, n) in nodes.iter().enumerate() {
            if i == activity {
                continue;
            }
            let Some(side) = side_of.get(n.var.as_str()) else {
                return Err(invalid(format!("variable `{}` is not connected", n.var)));
            };
            let plan = match side {
                Side::Used => &mut used,
                Side::Generated => &mut generated,
            };
            match n.role {
                NodeRole::Entity => plan.singles.push(i),
                NodeRole::MultiEntity => {
                    if plan.multi.replace(i).is_some() {
                        return Err(invalid("at most one multi-entity variable per side".into()));
                    }
                }
                NodeRole::Activity => unreachable!(),
            }
        }

        Ok(Pattern { name, nodes, edges, activity, used, generated })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[PatternNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[PatternEdge] {
        &self.edges
    }

    pub fn activity_var(&self) -> &str {
        &self.nodes[self.activity].var
    }

    pub fn node(&self, var: &str) -> Option<&PatternNode> {
        self.nodes.iter().find(|n| n.var == var)
    }

    pub fn side_of(&self, var: &str) -> Option<Side> {
        let idx = self.nodes.iter().position(|n| n.var == var)?;
        let in_plan = |p: &SidePlan| p.singles.contains(&idx) || p.multi == Some(idx);
        if in_plan(&self.used) {
            Some(Side::Used)
        } else if in_plan(&self.generated) {
            Some(Side::Generated)
        } else {
            None
        }
    }

    /// Variables of single generated entities with the given kind.
    pub fn generated_vars_of_kind(&self, kind: EntityKind) -> Vec<&str> {
        self.generated
            .singles
            .iter()
            .map(|&i| &self.nodes[i])
            .filter(|n| n.kinds.as_ref().is_some_and(|k| k.len() == 1 && k.contains(&kind)))
            .map(|n| n.var.as_str())
            .collect()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.var.as_str())
    }

    fn match_side(
        &self,
        graph: &ProvenanceGraph,
        plan: &SidePlan,
        candidates: &[NodeId],
    ) -> Option<(Vec<NodeId>, BTreeSet<NodeId>)> {
        let mut sorted: Vec<&Entity> = candidates.iter().filter_map(|id| graph.entity(id.as_str())).collect();
        sorted.sort_by(|a, b| a.id.cmp(&b.id));
        let mut chosen: Vec<usize> = Vec::with_capacity(plan.singles.len());
        if self.assign(plan, &sorted, &mut chosen) {
            let singles = chosen.iter().map(|&i| sorted[i].id.clone()).collect();
            let rest = (0..sorted.len())
                .filter(|i| !chosen.contains(i))
                .map(|i| sorted[i].id.clone())
                .collect();
            Some((singles, rest))
        } else {
            None
        }
    }

    /// Depth-first over candidates in id order, so the first complete
    /// assignment is the lexicographically smallest one.
    fn assign(&self, plan: &SidePlan, cands: &[&Entity], chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == plan.singles.len() {
            let rest = (0..cands.len()).filter(|i| !chosen.contains(i));
            return match plan.multi {
                Some(m) => {
                    let node = &self.nodes[m];
                    let mut n = 0;
                    for i in rest {
                        if !node.admits(cands[i]) {
                            return false;
                        }
                        n += 1;
                    }
                    n >= node.min_count
                }
                None => rest.count() == 0,
            };
        }
        let node = &self.nodes[plan.singles[chosen.len()]];
        for (i, cand) in cands.iter().enumerate() {
            if chosen.contains(&i) || !node.admits(cand) {
                continue;
            }
            chosen.push(i);
            if self.assign(plan, cands, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Value bound to a pattern variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    One(NodeId),
    Many(BTreeSet<NodeId>),
}

/// Variable assignment produced by a match.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Binding(BTreeMap<String, Bound>);

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn insert_one(&mut self, var: impl Into<String>, id: NodeId) {
        self.0.insert(var.into(), Bound::One(id));
    }

    pub fn insert_many(&mut self, var: impl Into<String>, ids: BTreeSet<NodeId>) {
        self.0.insert(var.into(), Bound::Many(ids));
    }

    pub fn get(&self, var: &str) -> Option<&Bound> {
        self.0.get(var)
    }

    pub fn one(&self, var: &str) -> Option<&NodeId> {
        match self.0.get(var)? {
            Bound::One(id) => Some(id),
            Bound::Many(_) => None,
        }
    }

    pub fn many(&self, var: &str) -> Option<&BTreeSet<NodeId>> {
        match self.0.get(var)? {
            Bound::Many(ids) => Some(ids),
            Bound::One(_) => None,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Bound)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Every node id mentioned by the binding.
    pub fn node_ids(&self) -> BTreeSet<&NodeId> {
        let mut out = BTreeSet::new();
        for b in self.0.values() {
            match b {
                Bound::One(id) => {
                    out.insert(id);
                }
                Bound::Many(ids) => out.extend(ids.iter()),
            }
        }
        out
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (var, b)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match b {
                Bound::One(id) => write!(f, "{var}<-{id}")?,
                Bound::Many(ids) => {
                    let ids: Vec<&str> = ids.iter().map(NodeId::as_str).collect();
                    write!(f, "{var}<-{{{}}}", ids.join(","))?;
                }
            }
        }
        f.write_str("}")
    }
}

impl<const N: usize> From<[(&str, Bound); N]> for Binding {
    fn from(pairs: [(&str, Bound); N]) -> Self {
        Binding(pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

/// Convenience constructors for bindings in tests and fixtures.
pub fn one(id: &str) -> Bound {
    Bound::One(NodeId::from(id))
}

pub fn many(ids: &[&str]) -> Bound {
    Bound::Many(ids.iter().map(|s| NodeId::from(*s)).collect())
}

/// Matches `pattern` with its activity variable fixed to `anchor`.
pub fn match_anchored(
    graph: &ProvenanceGraph,
    pattern: &Pattern,
    anchor: &str,
) -> Result<Option<Binding>, PatternError> {
    if !graph.contains(anchor) {
        return Err(PatternError::UnknownNodeId(NodeId::from(anchor)));
    }
    let Some(activity) = graph.activity(anchor) else {
        return Ok(None);
    };
    let act_node = &pattern.nodes[pattern.activity];
    if !act_node.attrs.iter().all(|(k, p)| p.holds(&activity.attrs, k)) {
        return Ok(None);
    }
    let Some((used_singles, used_rest)) = pattern.match_side(graph, &pattern.used, graph.used_by(anchor)) else {
        return Ok(None);
    };
    let Some((gen_singles, gen_rest)) =
        pattern.match_side(graph, &pattern.generated, graph.generated_by(anchor))
    else {
        return Ok(None);
    };

    let mut binding = Binding::new();
    binding.insert_one(act_node.var.clone(), activity.id.clone());
    for (plan, singles, rest) in [(&pattern.used, used_singles, used_rest), (&pattern.generated, gen_singles, gen_rest)] {
        for (&idx, id) in plan.singles.iter().zip(singles) {
            binding.insert_one(pattern.nodes[idx].var.clone(), id);
        }
        if let Some(m) = plan.multi {
            binding.insert_many(pattern.nodes[m].var.clone(), rest);
        }
    }
    Ok(Some(binding))
}

/// One binding per anchor activity satisfying the pattern and `accept`, in
/// event-log order.
pub fn match_all<F>(graph: &ProvenanceGraph, pattern: &Pattern, mut accept: F) -> Vec<Binding>
where
    F: FnMut(&Binding) -> bool,
{
    let mut out = Vec::new();
    for a in graph.event_log() {
        if let Ok(Some(b)) = match_anchored(graph, pattern, a.as_str()) {
            if accept(&b) {
                out.push(b);
            }
        }
    }
    out
}

/// Names of every built-in pattern that matches at the activity.
pub fn classify_activity(
    graph: &ProvenanceGraph,
    activity: &str,
) -> Result<BTreeSet<&'static str>, PatternError> {
    if !graph.contains(activity) {
        return Err(PatternError::UnknownNodeId(NodeId::from(activity)));
    }
    let mut out = BTreeSet::new();
    for p in BuiltinPattern::ALL {
        if match_anchored(graph, builtin::cached(p, PatternRole::Experiment), activity)?.is_some() {
            out.insert(p.name());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
