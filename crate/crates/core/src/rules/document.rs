//! Rule set documents.
//!
//! ```json
//! {"includeBuiltins": true,
//!  "rules": [
//!    {"id": "r7", "enabled": false},
//!    {"id": "x1", "name": "RepeatScan",
//!     "trigger": "RefiningSM", "experiment": "AnalyzingSM",
//!     "condition": "isBasedOn(SM', SM) && hasExperimentType(SE, \"parameterScan\")",
//!     "generation": {"label": "repeatScan", "uses": ["SM''", "Y", "SE"], "pattern": "AnalyzingSM"}}]}
//! ```
//!
//! `trigger` and `experiment` are either built-in pattern names or inline
//! pattern documents. An entry with only `id` and `enabled` toggles an
//! existing rule.

use serde::Deserialize;
use serde_json::{json, Value};

use super::{builtin_rules, parse_condition, GenerationTemplate, ReuseRule, RuleError, RuleSet};
use crate::patterns::{BuiltinPattern, Pattern, PatternRole};

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Doc {
    #[serde(default = "yes")]
    include_builtins: bool,
    #[serde(default)]
    rules: Vec<RuleDoc>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct RuleDoc {
    id: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    enabled: Option<bool>,
    #[serde(default)]
    trigger: Option<Value>,
    #[serde(default)]
    experiment: Option<Value>,
    #[serde(default)]
    condition: Option<String>,
    #[serde(default)]
    generation: Option<GenDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenDoc {
    label: String,
    uses: Vec<String>,
    pattern: String,
}

fn pattern_of(v: &Value, role: PatternRole) -> Result<Pattern, RuleError> {
    match v {
        Value::String(name) => BuiltinPattern::from_name(name)
            .map(|p| p.pattern(role).clone())
            .ok_or_else(|| RuleError::Parse(format!("unknown pattern `{name}`"))),
        other => Pattern::from_value(other.clone()).map_err(|e| RuleError::Parse(e.to_string())),
    }
}

fn builtin(name: &str) -> Result<BuiltinPattern, RuleError> {
    BuiltinPattern::from_name(name).ok_or_else(|| RuleError::Parse(format!("unknown pattern `{name}`")))
}

/// Reads a rules document. Built-ins come first unless excluded.
pub fn load_rules(text: &str) -> Result<RuleSet, RuleError> {
    let doc: Doc = serde_json::from_str(text).map_err(|e| RuleError::Parse(e.to_string()))?;
    let mut set = if doc.include_builtins { builtin_rules() } else { RuleSet::new() };
    for r in doc.rules {
        let full = r.trigger.is_some() || r.experiment.is_some() || r.generation.is_some();
        if !full {
            set.set_enabled(&r.id, r.enabled.unwrap_or(true))?;
            continue;
        }
        let missing = |what: &str| RuleError::InvalidRule(r.id.clone(), format!("missing `{what}`"));
        let trigger = pattern_of(r.trigger.as_ref().ok_or_else(|| missing("trigger"))?, PatternRole::Trigger)?;
        let experiment = pattern_of(r.experiment.as_ref().ok_or_else(|| missing("experiment"))?, PatternRole::Experiment)?;
        let g = r.generation.as_ref().ok_or_else(|| missing("generation"))?;
        let generation = GenerationTemplate {
            label: g.label.clone(),
            uses: g.uses.clone(),
            pattern: builtin(&g.pattern)?,
        };
        let condition = parse_condition(r.condition.as_deref().unwrap_or(""))?;
        let rule = ReuseRule::new(&r.id, r.name.as_deref().unwrap_or(&r.id), trigger, experiment, condition, generation)?;
        set.upsert(rule, r.enabled.unwrap_or(true));
    }
    Ok(set)
}

/// Full document form of a rule set; `load_rules` reads it back unchanged.
pub fn rules_to_value(set: &RuleSet) -> Value {
    let rules: Vec<Value> = set
        .all()
        .map(|(r, on)| {
            json!({
                "id": r.id,
                "name": r.name,
                "enabled": on,
                "trigger": pattern_value(&r.trigger, PatternRole::Trigger),
                "experiment": pattern_value(&r.experiment, PatternRole::Experiment),
                "condition": r.condition.to_string(),
                "generation": {"label": r.generation.label, "uses": r.generation.uses, "pattern": r.generation.pattern.name()},
            })
        })
        .collect();
    json!({"includeBuiltins": false, "rules": rules})
}

/// Built-in patterns by name, anything else spelled out.
fn pattern_value(p: &Pattern, role: PatternRole) -> Value {
    match BuiltinPattern::from_name(p.name()) {
        Some(b) if b.pattern(role) == p => Value::from(p.name()),
        _ => p.to_value(),
    }
}
