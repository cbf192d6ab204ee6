//! Declarative pattern documents.
//!
//! ```json
//! {"name": "P", "anchor": "a",
//!  "nodes": [{"var": "a", "role": "activity"},
//!            {"var": "SM", "role": "entity", "kind": "SM"},
//!            {"var": "Y", "role": "multiEntity", "exclude": ["SM"]}],
//!  "edges": [{"kind": "used", "from": "a", "to": "SM"},
//!            {"kind": "used", "from": "a", "to": "Y"}]}
//! ```

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{AttrPredicate, NodeRole, Pattern, PatternEdge, PatternError, PatternNode};
use crate::prov_graph::EntityKind;

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum KindSpec {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct NodeDoc {
    var: String,
    role: NodeRole,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<KindSpec>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    attr_equals: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attr_present: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    attr_absent: Vec<String>,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    attr_in: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    exclude: Vec<String>,
    #[serde(default, skip_serializing_if = "is_zero")]
    min_count: usize,
}

fn is_zero(n: &usize) -> bool {
    *n == 0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternDoc {
    name: String,
    nodes: Vec<NodeDoc>,
    edges: Vec<PatternEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    anchor: Option<String>,
}

fn kind(s: &str) -> Result<EntityKind, PatternError> {
    EntityKind::from_abbrev(s).ok_or_else(|| PatternError::Parse(format!("unknown entity kind `{s}`")))
}

impl Pattern {
    pub fn from_document(text: &str) -> Result<Pattern, PatternError> {
        let value: Value = serde_json::from_str(text).map_err(|e| PatternError::Parse(e.to_string()))?;
        Pattern::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Pattern, PatternError> {
        let doc: PatternDoc = serde_json::from_value(value).map_err(|e| PatternError::Parse(e.to_string()))?;
        let mut nodes = Vec::with_capacity(doc.nodes.len());
        for n in doc.nodes {
            let kinds = match n.kind {
                None => None,
                Some(KindSpec::One(k)) => Some(BTreeSet::from([kind(&k)?])),
                Some(KindSpec::Many(ks)) => Some(ks.iter().map(|k| kind(k)).collect::<Result<_, _>>()?),
            };
            let mut attrs = Vec::new();
            for (k, v) in n.attr_equals {
                attrs.push((k, AttrPredicate::Equals(v)));
            }
            for k in n.attr_present {
                attrs.push((k, AttrPredicate::Present));
            }
            for k in n.attr_absent {
                attrs.push((k, AttrPredicate::Absent));
            }
            for (k, v) in n.attr_in {
                let Value::Array(vs) = v else {
                    return Err(PatternError::Parse(format!("attrIn.{k} must be a list")));
                };
                attrs.push((k, AttrPredicate::OneOf(vs)));
            }
            let exclude = n.exclude.iter().map(|k| kind(k)).collect::<Result<_, _>>()?;
            if n.role != NodeRole::MultiEntity && (!n.exclude.is_empty() || n.min_count > 0) {
                return Err(PatternError::Parse(format!(
                    "`{}`: exclude and minCount apply to multiEntity nodes only",
                    n.var
                )));
            }
            nodes.push(PatternNode { var: n.var, role: n.role, kinds, attrs, exclude, min_count: n.min_count });
        }
        Pattern::new(doc.name, nodes, doc.edges, doc.anchor)
    }

    pub fn to_value(&self) -> Value {
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let mut doc = NodeDoc {
                    var: n.var.clone(),
                    role: n.role,
                    kind: n.kinds.as_ref().map(|ks| {
                        let v: Vec<String> = ks.iter().map(|k| k.abbrev().to_string()).collect();
                        if v.len() == 1 {
                            KindSpec::One(v[0].clone())
                        } else {
                            KindSpec::Many(v)
                        }
                    }),
                    attr_equals: Map::new(),
                    attr_present: Vec::new(),
                    attr_absent: Vec::new(),
                    attr_in: Map::new(),
                    exclude: n.exclude.iter().map(|k| k.abbrev().to_string()).collect(),
                    min_count: n.min_count,
                };
                for (k, p) in &n.attrs {
                    match p {
                        AttrPredicate::Equals(v) => {
                            doc.attr_equals.insert(k.clone(), v.clone());
                        }
                        AttrPredicate::Present => doc.attr_present.push(k.clone()),
                        AttrPredicate::Absent => doc.attr_absent.push(k.clone()),
                        AttrPredicate::OneOf(vs) => {
                            doc.attr_in.insert(k.clone(), Value::Array(vs.clone()));
                        }
                    }
                }
                doc
            })
            .collect();
        let doc = PatternDoc {
            name: self.name.clone(),
            nodes,
            edges: self.edges.clone(),
            anchor: Some(self.activity_var().to_string()),
        };
        serde_json::to_value(doc).expect("pattern document serializes")
    }
}
