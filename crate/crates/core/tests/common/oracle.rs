//! Exhaustive matcher used as a reference for `match_anchored`.
//!
//! Enumerates every injective assignment of singleton variables over all
//! entities of the graph and every subset of the anchor's neighbours for
//! multi-entity variables, keeps the assignments that satisfy the pattern,
//! and returns the one whose singleton ids are lexicographically smallest in
//! declaration order.

use std::collections::BTreeSet;

use expreuse::patterns::{Binding, NodeRole, Pattern, PatternNode};
use expreuse::prov_graph::{DepKind, NodeId, ProvenanceGraph};

fn edge_kind(p: &Pattern, var: &str) -> DepKind {
    p.edges().iter().find(|e| e.from == var || e.to == var).expect("connected").kind
}

fn neighbours(g: &ProvenanceGraph, anchor: &str, kind: DepKind) -> BTreeSet<NodeId> {
    match kind {
        DepKind::Used => g.used_by(anchor).iter().cloned().collect(),
        DepKind::WasGeneratedBy => g.generated_by(anchor).iter().cloned().collect(),
    }
}

fn attrs_hold(node: &PatternNode, g: &ProvenanceGraph, id: &str) -> bool {
    let e = g.entity(id).unwrap();
    node.admits(e)
}

fn has_edge(g: &ProvenanceGraph, anchor: &str, kind: DepKind, ent: &str) -> bool {
    neighbours(g, anchor, kind).iter().any(|n| n.as_str() == ent)
}

fn subsets(items: &[NodeId]) -> Vec<BTreeSet<NodeId>> {
    let n = items.len();
    (0u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| items[i].clone()).collect())
        .collect()
}

/// All valid bindings (unordered), each paired with its singleton id tuple.
pub fn all_bindings(g: &ProvenanceGraph, p: &Pattern, anchor: &str) -> Vec<(Vec<NodeId>, Binding)> {
    let Some(activity) = g.activity(anchor) else {
        return Vec::new();
    };
    let act_node = p.node(p.activity_var()).unwrap();
    // activity predicates are evaluated against the activity's attribute map
    let act_ok = act_node.attrs.iter().all(|(k, pred)| {
        let probe = expreuse::prov_graph::Entity {
            id: activity.id.clone(),
            kind: expreuse::prov_graph::EntityKind::Other,
            attrs: activity.attrs.clone(),
        };
        let mut n = PatternNode::multi("probe", &[]);
        n.attrs.push((k.clone(), pred.clone()));
        n.admits(&probe)
    });
    if !act_ok {
        return Vec::new();
    }
    let singles: Vec<&PatternNode> = p.nodes().iter().filter(|n| n.role == NodeRole::Entity).collect();
    let multis: Vec<&PatternNode> = p.nodes().iter().filter(|n| n.role == NodeRole::MultiEntity).collect();
    let entities: Vec<NodeId> = g.entities().iter().map(|e| e.id.clone()).collect();

    let mut out = Vec::new();
    let mut chosen: Vec<NodeId> = Vec::new();
    enumerate(g, p, anchor, &singles, &multis, &entities, &mut chosen, &mut out);
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    g: &ProvenanceGraph,
    p: &Pattern,
    anchor: &str,
    singles: &[&PatternNode],
    multis: &[&PatternNode],
    entities: &[NodeId],
    chosen: &mut Vec<NodeId>,
    out: &mut Vec<(Vec<NodeId>, Binding)>,
) {
    if chosen.len() == singles.len() {
        // pick a subset for each multi variable among the anchor's neighbours
        let mut options: Vec<Vec<BTreeSet<NodeId>>> = Vec::new();
        for m in multis {
            let kind = edge_kind(p, &m.var);
            let cands: Vec<NodeId> = neighbours(g, anchor, kind).into_iter().collect();
            options.push(subsets(&cands));
        }
        let mut idx = vec![0usize; multis.len()];
        loop {
            let sets: Vec<&BTreeSet<NodeId>> = idx.iter().enumerate().map(|(i, &j)| &options[i][j]).collect();
            if valid(g, p, anchor, singles, chosen, multis, &sets) {
                let mut b = Binding::new();
                b.insert_one(p.activity_var(), activity_id(anchor));
                for (n, id) in singles.iter().zip(chosen.iter()) {
                    b.insert_one(n.var.clone(), id.clone());
                }
                for (m, s) in multis.iter().zip(&sets) {
                    b.insert_many(m.var.clone(), (*s).clone());
                }
                out.push((chosen.clone(), b));
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return;
                }
                idx[k] += 1;
                if idx[k] < options[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
    for e in entities {
        if chosen.contains(e) {
            continue;
        }
        // prune branches whose newest variable already violates its constraints
        let n = singles[chosen.len()];
        if !has_edge(g, anchor, edge_kind(p, &n.var), e.as_str()) || !attrs_hold(n, g, e.as_str()) {
            continue;
        }
        chosen.push(e.clone());
        enumerate(g, p, anchor, singles, multis, entities, chosen, out);
        chosen.pop();
    }
}

fn activity_id(a: &str) -> NodeId {
    NodeId::from(a)
}

fn valid(
    g: &ProvenanceGraph,
    p: &Pattern,
    anchor: &str,
    singles: &[&PatternNode],
    chosen: &[NodeId],
    multis: &[&PatternNode],
    sets: &[&BTreeSet<NodeId>],
) -> bool {
    for (n, id) in singles.iter().zip(chosen) {
        if !has_edge(g, anchor, edge_kind(p, &n.var), id.as_str()) || !attrs_hold(n, g, id.as_str()) {
            return false;
        }
    }
    for (m, s) in multis.iter().zip(sets) {
        if s.len() < m.min_count || s.iter().any(|id| chosen.contains(id) || !attrs_hold(m, g, id.as_str())) {
            return false;
        }
    }
    // closed world: every neighbour on each side is bound exactly once
    for kind in [DepKind::Used, DepKind::WasGeneratedBy] {
        let mut bound: Vec<&NodeId> = Vec::new();
        for (n, id) in singles.iter().zip(chosen) {
            if edge_kind(p, &n.var) == kind {
                bound.push(id);
            }
        }
        for (m, s) in multis.iter().zip(sets) {
            if edge_kind(p, &m.var) == kind {
                bound.extend(s.iter());
            }
        }
        let as_set: BTreeSet<&NodeId> = bound.iter().copied().collect();
        if as_set.len() != bound.len() {
            return false;
        }
        let expected = neighbours(g, anchor, kind);
        if as_set.len() != expected.len() || !expected.iter().all(|e| as_set.contains(e)) {
            return false;
        }
    }
    true
}

/// Canonical oracle answer for an anchored match.
pub fn oracle_match(g: &ProvenanceGraph, p: &Pattern, anchor: &str) -> Option<Binding> {
    all_bindings(g, p, anchor).into_iter().min_by(|a, b| a.0.cmp(&b.0)).map(|(_, b)| b)
}

pub fn oracle_match_all(g: &ProvenanceGraph, p: &Pattern) -> Vec<Binding> {
    g.event_log().iter().filter_map(|a| oracle_match(g, p, a.as_str())).collect()
}
