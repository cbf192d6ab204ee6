//! Rewriting a reused experiment specification for a new model.
//!
//! The steps run in a fixed order and later steps see earlier rewrites:
//! model path and format, model parameters, observed species, factor
//! bounds from assumptions, property expressions from requirements, and the
//! time scale. The result is re-validated before it is returned.

mod context;
pub mod expr;

pub use context::{build_context, nearest_qualitative_model, specification_of};

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::canonical_exp::{CanonError, CanonicalExperiment, Distribution, ExperimentType, StopCondition};
use crate::prov_graph::{attr, Entity, EntityKind, NodeId};

pub const ONTOLOGY_TAG: &str = "ontologyTag";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdaptError {
    #[error("unknown node `{0}`")]
    UnknownNodeId(NodeId),
    #[error("`{0}` is not a {1} entity")]
    KindMismatch(NodeId, EntityKind),
    #[error("experiment `{0}` has no specification")]
    MissingSpecification(NodeId),
    #[error("specification of `{id}` cannot be read: {reason}")]
    UnreadableSpecification { id: NodeId, reason: String },
    #[error("no model can be traced for experiment `{0}`")]
    NoOldModel(NodeId),
    #[error("species `{0}` of the old model has no counterpart in the new model")]
    MissingSpecies(String),
    #[error("parameter `{0}` of the old specification has no counterpart in the new model")]
    MissingParameter(String),
    #[error("time scale factor {0} must be positive")]
    InvalidTimeScale(f64),
    #[error("adapted specification is invalid: {0}")]
    Invalid(CanonError),
}

/// Entities that describe the old and new experiment contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptContext {
    pub old_model: Entity,
    pub new_model: Entity,
    pub old_qm: Option<Entity>,
    pub new_qm: Option<Entity>,
    pub assumptions: Vec<Entity>,
    pub requirements: Vec<Entity>,
    pub time_scale_factor: Option<f64>,
}

impl AdaptContext {
    /// Context that reuses an experiment on its own model.
    pub fn identity(model: Entity, qm: Option<Entity>) -> Self {
        AdaptContext {
            old_model: model.clone(),
            new_model: model,
            old_qm: qm.clone(),
            new_qm: qm,
            assumptions: Vec::new(),
            requirements: Vec::new(),
            time_scale_factor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpeciesPair {
    pub old_name: String,
    pub new_name: String,
    pub ontology_tag: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SpeciesMap {
    pub entries: Vec<SpeciesPair>,
    /// Old species without a counterpart.
    pub unresolved: Vec<String>,
}

impl SpeciesMap {
    pub fn lookup(&self, old: &str) -> Option<&str> {
        self.entries.iter().find(|p| p.old_name == old).map(|p| p.new_name.as_str())
    }

    pub fn is_unresolved(&self, old: &str) -> bool {
        self.unresolved.iter().any(|u| u == old)
    }
}

/// (name, ontology tag) pairs from a `species` attribute.
fn species_of(qm: &Entity) -> Vec<(String, Option<String>)> {
    qm.attrs
        .get(attr::SPECIES)
        .and_then(Value::as_array)
        .map(|list| {
            list.iter()
                .filter_map(|s| {
                    let name = s.get("name")?.as_str()?.to_string();
                    let tag = s.get(ONTOLOGY_TAG).and_then(Value::as_str).map(String::from);
                    Some((name, tag))
                })
                .collect()
        })
        .unwrap_or_default()
}

/// Pairs species of two qualitative models by identical ontology tag. Each
/// new species is used at most once.
pub fn build_species_map(old_qm: &Entity, new_qm: &Entity) -> SpeciesMap {
    let new_species = species_of(new_qm);
    let mut taken = vec![false; new_species.len()];
    let mut map = SpeciesMap::default();
    for (name, tag) in species_of(old_qm) {
        let hit = tag.as_ref().and_then(|t| {
            new_species.iter().enumerate().position(|(i, (_, nt))| !taken[i] && nt.as_ref() == Some(t))
        });
        match (hit, tag) {
            (Some(i), Some(tag)) => {
                taken[i] = true;
                map.entries.push(SpeciesPair { old_name: name, new_name: new_species[i].0.clone(), ontology_tag: tag });
            }
            _ => map.unresolved.push(name),
        }
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum StepKind {
    ModelPath,
    ModelFormat,
    ParameterRename,
    ParameterValue,
    FactorAdded,
    FactorBounds,
    SpeciesRename,
    AliasRename,
    PropertyExpression,
    TimeScale,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AdaptStep {
    pub kind: StepKind,
    pub path: String,
    pub old_value: Value,
    pub new_value: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unresolved {
    pub item: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AdaptReport {
    pub applied: Vec<AdaptStep>,
    pub unresolved: Vec<Unresolved>,
}

impl AdaptReport {
    pub fn is_empty(&self) -> bool {
        self.applied.is_empty() && self.unresolved.is_empty()
    }

    fn step(&mut self, kind: StepKind, path: impl Into<String>, old: Value, new: Value) {
        self.applied.push(AdaptStep { kind, path: path.into(), old_value: old, new_value: new });
    }

    fn skip(&mut self, item: impl Into<String>, reason: impl Into<String>) {
        self.unresolved.push(Unresolved { item: item.into(), reason: reason.into() });
    }
}

/// Bounds for one factor as carried by `factorBounds`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorBound {
    pub factor: String,
    pub min: f64,
    pub max: f64,
    pub distribution: Option<String>,
    pub interval: Option<f64>,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

impl FactorBound {
    fn from_value(v: &Value, default_factor: Option<&str>) -> Option<Self> {
        let num = |k: &str| v.get(k).and_then(Value::as_f64);
        let factor = v.get("factor").and_then(Value::as_str).or(default_factor)?.to_string();
        Some(FactorBound {
            factor,
            min: num("min")?,
            max: num("max")?,
            distribution: v.get("distribution").and_then(Value::as_str).map(String::from),
            interval: num("interval"),
            mean: num("mean"),
            sd: num("sd"),
        })
    }

    /// All bounds of an entity's `factorBounds` attribute (object or list).
    pub fn all_of(entity: &Entity) -> Vec<FactorBound> {
        match entity.attrs.get(attr::FACTOR_BOUNDS) {
            Some(Value::Array(list)) => list.iter().filter_map(|b| Self::from_value(b, None)).collect(),
            Some(v @ Value::Object(_)) => Self::from_value(v, None).into_iter().collect(),
            _ => Vec::new(),
        }
    }

    fn distribution_for(&self) -> Result<Distribution, String> {
        match self.distribution.as_deref().unwrap_or("uniform") {
            "uniform" => Ok(Distribution::Uniform { min: self.min, max: self.max }),
            "logUniform" => Ok(Distribution::LogUniform { min: self.min, max: self.max }),
            "normal" => match (self.mean, self.sd) {
                (Some(mean), Some(sd)) => Ok(Distribution::Normal { mean, sd }),
                _ => Err("normal distribution needs mean and sd".into()),
            },
            other => Err(format!("unknown distribution `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ModelParam {
    name: String,
    value: Option<f64>,
    tag: Option<String>,
    bound: Option<FactorBound>,
}

fn params_of(model: &Entity) -> Option<Vec<ModelParam>> {
    let list = model.attrs.get(attr::PARAMETERS)?.as_array()?;
    Some(
        list.iter()
            .filter_map(|p| {
                let name = p.get("name")?.as_str()?.to_string();
                Some(ModelParam {
                    value: p.get("value").and_then(Value::as_f64),
                    tag: p.get(ONTOLOGY_TAG).and_then(Value::as_str).map(String::from),
                    bound: p.get(attr::FACTOR_BOUNDS).and_then(|b| FactorBound::from_value(b, Some(&name))),
                    name,
                })
            })
            .collect(),
    )
}

/// Reuses `spec` in the new context described by `ctx`.
pub fn adapt_experiment(
    spec: &CanonicalExperiment,
    ctx: &AdaptContext,
) -> Result<(CanonicalExperiment, AdaptReport), AdaptError> {
    spec.validate().map_err(AdaptError::Invalid)?;
    let mut out = spec.clone();
    let mut report = AdaptReport::default();
    let species = match (&ctx.old_qm, &ctx.new_qm) {
        (Some(o), Some(n)) if o != n => Some(build_species_map(o, n)),
        _ => None,
    };
    model_location(&mut out, ctx, &mut report);
    parameters(&mut out, ctx, species.as_ref(), &mut report)?;
    if let Some(map) = &species {
        observed_species(&mut out, ctx, map, &mut report)?;
    }
    assumption_bounds(&mut out, ctx, &mut report);
    requirement_properties(&mut out, ctx, &mut report);
    time_scale(&mut out, ctx, &mut report)?;
    out.validate().map_err(AdaptError::Invalid)?;
    Ok((out, report))
}

fn model_location(out: &mut CanonicalExperiment, ctx: &AdaptContext, report: &mut AdaptReport) {
    match ctx.new_model.attr_str(attr::MODEL_PATH) {
        Some(path) if path != out.model.model_path => {
            report.step(StepKind::ModelPath, "model.modelPath", json!(out.model.model_path), json!(path));
            out.model.model_path = path.to_string();
        }
        Some(_) => {}
        None => report.skip("model.modelPath", format!("model `{}` declares no modelPath", ctx.new_model.id)),
    }
    // an absent format stays absent unless the model format itself changed
    let old_format = ctx.old_model.attr_str(attr::MODEL_FORMAT);
    if let Some(format) = ctx.new_model.attr_str(attr::MODEL_FORMAT) {
        let declared = out.model.model_format.is_some() || old_format != Some(format);
        if declared && out.model.model_format.as_deref() != Some(format) {
            report.step(StepKind::ModelFormat, "model.modelFormat", json!(out.model.model_format), json!(format));
            out.model.model_format = Some(format.to_string());
        }
    }
}

/// Mutable view of the factor list of any experiment type that has one.
fn factor_names(exp: &mut ExperimentType) -> Option<(&'static str, &mut Vec<String>)> {
    match exp {
        ExperimentType::ParameterScan(s) => Some(("parameterScan", &mut s.factor_name)),
        ExperimentType::SensitivityAnalysis(s) => Some(("sensitivityAnalysis", &mut s.factor_name)),
        ExperimentType::Optimization(o) => Some(("optimization", &mut o.factor_name)),
        _ => None,
    }
}

fn parameters(
    out: &mut CanonicalExperiment,
    ctx: &AdaptContext,
    species: Option<&SpeciesMap>,
    report: &mut AdaptReport,
) -> Result<(), AdaptError> {
    let Some(new_params) = params_of(&ctx.new_model) else {
        return Ok(());
    };
    let old_params = params_of(&ctx.old_model).unwrap_or_default();
    let new_species: Vec<String> = ctx.new_qm.as_ref().map(|q| species_of(q).into_iter().map(|s| s.0).collect()).unwrap_or_default();
    let find = |list: &[ModelParam], name: &str| list.iter().position(|p| p.name == name);

    let resolve = |name: &str| -> Result<String, AdaptError> {
        if find(&new_params, name).is_some() {
            return Ok(name.to_string());
        }
        if let Some(tag) = find(&old_params, name).and_then(|i| old_params[i].tag.as_ref()) {
            if let Some(p) = new_params.iter().find(|p| p.tag.as_ref() == Some(tag)) {
                return Ok(p.name.clone());
            }
        }
        // factors may also name species whose initial counts are varied
        if new_species.iter().any(|s| s == name) {
            return Ok(name.to_string());
        }
        if let Some(mapped) = species.and_then(|m| m.lookup(name)) {
            return Ok(mapped.to_string());
        }
        Err(AdaptError::MissingParameter(name.to_string()))
    };

    for (i, p) in out.model.parameters.iter_mut().enumerate() {
        let new_name = resolve(&p.name)?;
        if new_name != p.name {
            report.step(StepKind::ParameterRename, format!("model.parameters[{i}].parameterName"), json!(p.name), json!(new_name));
        }
        let old_value = find(&old_params, &p.name).and_then(|j| old_params[j].value);
        let new_value = find(&new_params, &new_name).and_then(|j| new_params[j].value);
        if let (Some(o), Some(n)) = (old_value, new_value) {
            if o != n && p.value != n {
                report.step(StepKind::ParameterValue, format!("model.parameters[{i}].parameterValue"), json!(p.value), json!(n));
                p.value = n;
            }
        }
        p.name = new_name;
    }

    if let Some((section, names)) = factor_names(&mut out.experiment) {
        for (i, name) in names.iter_mut().enumerate() {
            let new_name = resolve(name)?;
            if new_name != *name {
                report.step(StepKind::ParameterRename, format!("{section}.factorName[{i}]"), json!(name), json!(new_name));
                *name = new_name;
            }
        }
    }

    // parameters the new model introduces, with bounds, become new factors
    let old_tags: Vec<&String> = old_params.iter().filter_map(|p| p.tag.as_ref()).collect();
    for p in &new_params {
        let Some(bound) = &p.bound else { continue };
        let is_new = find(&old_params, &p.name).is_none() && p.tag.as_ref().is_none_or(|t| !old_tags.contains(&t));
        if is_new {
            add_or_update_factor(out, bound, report);
        }
    }
    Ok(())
}

fn add_or_update_factor(out: &mut CanonicalExperiment, bound: &FactorBound, report: &mut AdaptReport) {
    let f = &bound.factor;
    match &mut out.experiment {
        ExperimentType::ParameterScan(s) => {
            if let Some(i) = s.factor_name.iter().position(|n| n == f) {
                if s.factor_minimum[i] != bound.min || s.factor_maximum[i] != bound.max {
                    report.step(
                        StepKind::FactorBounds,
                        format!("parameterScan.factor[{i}]"),
                        json!([s.factor_minimum[i], s.factor_maximum[i]]),
                        json!([bound.min, bound.max]),
                    );
                    s.factor_minimum[i] = bound.min;
                    s.factor_maximum[i] = bound.max;
                }
            } else {
                let Some(interval) = bound.interval else {
                    report.skip(format!("parameterScan.factorName `{f}`"), "bound declares no interval");
                    return;
                };
                s.factor_name.push(f.clone());
                s.factor_minimum.push(bound.min);
                s.factor_maximum.push(bound.max);
                s.interval.push(interval);
                report.step(StepKind::FactorAdded, "parameterScan.factorName", Value::Null, json!(f));
            }
        }
        ExperimentType::SensitivityAnalysis(sa) => {
            let dist = match bound.distribution_for() {
                Ok(d) => d,
                Err(reason) => {
                    report.skip(format!("sensitivityAnalysis.factorName `{f}`"), reason);
                    return;
                }
            };
            if let Some(i) = sa.factor_name.iter().position(|n| n == f) {
                if sa.distributions[i] != dist {
                    report.step(
                        StepKind::FactorBounds,
                        format!("sensitivityAnalysis.parameterDistribution[{i}]"),
                        json!(format!("{:?}", sa.distributions[i])),
                        json!(format!("{dist:?}")),
                    );
                    sa.distributions[i] = dist;
                }
            } else {
                sa.factor_name.push(f.clone());
                sa.distributions.push(dist);
                report.step(StepKind::FactorAdded, "sensitivityAnalysis.factorName", Value::Null, json!(f));
            }
        }
        ExperimentType::Optimization(o) => {
            if let Some(i) = o.factor_name.iter().position(|n| n == f) {
                if o.factor_minimum[i] != bound.min || o.factor_maximum[i] != bound.max {
                    report.step(
                        StepKind::FactorBounds,
                        format!("optimization.factor[{i}]"),
                        json!([o.factor_minimum[i], o.factor_maximum[i]]),
                        json!([bound.min, bound.max]),
                    );
                    o.factor_minimum[i] = bound.min;
                    o.factor_maximum[i] = bound.max;
                }
            } else {
                o.factor_name.push(f.clone());
                o.factor_minimum.push(bound.min);
                o.factor_maximum.push(bound.max);
                report.step(StepKind::FactorAdded, "optimization.factorName", Value::Null, json!(f));
            }
        }
        ExperimentType::StatisticalModelChecking(_) | ExperimentType::TimeCourse => {
            report.skip(format!("factor `{f}`"), "experiment type varies no factors");
        }
    }
}

fn observed_species(
    out: &mut CanonicalExperiment,
    ctx: &AdaptContext,
    map: &SpeciesMap,
    report: &mut AdaptReport,
) -> Result<(), AdaptError> {
    let old_names: Vec<String> = ctx.old_qm.as_ref().map(|q| species_of(q).into_iter().map(|s| s.0).collect()).unwrap_or_default();
    let translate = |text: &str| -> Result<String, AdaptError> {
        let mut missing = None;
        let rewritten = expr::rewrite(text, |name| {
            if let Some(new) = map.lookup(name) {
                return (new != name).then(|| new.to_string());
            }
            if old_names.iter().any(|o| o == name) && missing.is_none() {
                missing = Some(name.to_string());
            }
            None
        });
        match missing {
            Some(m) => Err(AdaptError::MissingSpecies(m)),
            None => Ok(rewritten),
        }
    };

    let obs = &mut out.observation;
    for (i, e) in obs.expressions.iter_mut().enumerate() {
        let new = translate(e)?;
        if new != *e {
            report.step(StepKind::SpeciesRename, format!("observation.observables.observationExpression[{i}]"), json!(e), json!(new));
            *e = new;
        }
    }
    for (i, a) in obs.aliases.iter_mut().enumerate() {
        if let Some(new) = map.lookup(a).filter(|n| *n != a.as_str()) {
            report.step(StepKind::AliasRename, format!("observation.observables.observationAlias[{i}]"), json!(a), json!(new));
            *a = new.to_string();
        }
    }
    let (path, text) = match &mut out.experiment {
        ExperimentType::StatisticalModelChecking(s) => ("statisticalModelChecking.propertyExpression", &mut s.property_expression),
        ExperimentType::Optimization(o) => ("optimization.objectiveExpression", &mut o.objective_expression),
        _ => return Ok(()),
    };
    let new = translate(text)?;
    if new != *text {
        report.step(StepKind::SpeciesRename, path, json!(text), json!(new));
        *text = new;
    }
    Ok(())
}

fn assumption_bounds(out: &mut CanonicalExperiment, ctx: &AdaptContext, report: &mut AdaptReport) {
    // the newest bound for a factor wins
    let mut latest: BTreeMap<String, FactorBound> = BTreeMap::new();
    let mut order = Vec::new();
    for a in &ctx.assumptions {
        for b in FactorBound::all_of(a) {
            if !latest.contains_key(&b.factor) {
                order.push(b.factor.clone());
            }
            latest.insert(b.factor.clone(), b);
        }
    }
    for f in order {
        add_or_update_factor(out, &latest[&f], report);
    }
}

fn requirement_properties(out: &mut CanonicalExperiment, ctx: &AdaptContext, report: &mut AdaptReport) {
    let ExperimentType::StatisticalModelChecking(smc) = &mut out.experiment else {
        return;
    };
    let newest = ctx.requirements.iter().rev().find_map(|r| r.attr_str(attr::FORMAL_EXPRESSION));
    if let Some(formal) = newest {
        if formal != smc.property_expression {
            report.step(
                StepKind::PropertyExpression,
                "statisticalModelChecking.propertyExpression",
                json!(smc.property_expression),
                json!(formal),
            );
            smc.property_expression = formal.to_string();
        }
    }
}

fn time_scale(out: &mut CanonicalExperiment, ctx: &AdaptContext, report: &mut AdaptReport) -> Result<(), AdaptError> {
    let Some(f) = ctx.time_scale_factor else {
        return Ok(());
    };
    if !(f.is_finite() && f > 0.0) {
        return Err(AdaptError::InvalidTimeScale(f));
    }
    if f == 1.0 {
        return Ok(());
    }
    if let StopCondition::StopTime(t) = out.simulation.stop {
        report.step(StepKind::TimeScale, "simulation.stopCondition.stopTime", json!(t), json!(t * f));
        out.simulation.stop = StopCondition::StopTime(t * f);
    }
    let scaled: Vec<f64> = out.observation.times.iter().map(|t| t * f).collect();
    report.step(
        StepKind::TimeScale,
        "observation.observationTime.observationTime",
        json!(out.observation.times),
        json!(scaled),
    );
    out.observation.times = scaled;
    Ok(())
}
