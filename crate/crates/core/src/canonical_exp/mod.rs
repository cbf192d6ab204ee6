//! Canonical experiment specifications.
//!
//! A specification is a JSON document with a `model`, a `simulation` and an
//! `observation` section plus exactly one experiment-type section. Parsing is
//! strict: unknown keys and malformed values are schema violations.

mod reader;
mod writer;

use std::collections::BTreeMap;

use serde_json::Value;
use thiserror::Error;

use reader::Reader;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CanonError {
    #[error("malformed document: {0}")]
    ParseError(String),
    #[error("schema violation at `{path}`: {reason}")]
    SchemaViolation { path: String, reason: String },
}

pub(crate) fn violation(path: impl Into<String>, reason: impl Into<String>) -> CanonError {
    CanonError::SchemaViolation { path: path.into(), reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSection {
    pub model_path: String,
    pub model_format: Option<String>,
    pub parameters: Vec<Parameter>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCondition {
    StopTime(f64),
    SteadyState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSection {
    pub simulator: String,
    pub replications: u64,
    pub stop: StopCondition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSection {
    pub expressions: Vec<String>,
    pub aliases: Vec<String>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterScan {
    pub factor_name: Vec<String>,
    pub factor_minimum: Vec<f64>,
    pub factor_maximum: Vec<f64>,
    pub interval: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Uniform { min: f64, max: f64 },
    Normal { mean: f64, sd: f64 },
    LogUniform { min: f64, max: f64 },
}

impl Distribution {
    pub fn kind(&self) -> &'static str {
        match self {
            Distribution::Uniform { .. } => "uniform",
            Distribution::Normal { .. } => "normal",
            Distribution::LogUniform { .. } => "logUniform",
        }
    }

    /// Maps a probability in (0, 1) onto the distribution.
    pub fn quantile(&self, u: f64) -> f64 {
        use statrs::distribution::{ContinuousCDF, Normal};
        match *self {
            Distribution::Uniform { min, max } => min + u * (max - min),
            Distribution::Normal { mean, sd } => {
                let n = Normal::new(mean, sd).expect("validated normal");
                n.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12))
            }
            Distribution::LogUniform { min, max } => (min.ln() + u * (max.ln() - min.ln())).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityAnalysis {
    pub factor_name: Vec<String>,
    pub distributions: Vec<Distribution>,
    pub sample_size: u64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StatisticalModelChecking {
    pub property_expression: String,
    pub checking_parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimization {
    pub objective_expression: String,
    pub factor_name: Vec<String>,
    pub factor_minimum: Vec<f64>,
    pub factor_maximum: Vec<f64>,
    pub budget: u64,
    pub target_data: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentType {
    ParameterScan(ParameterScan),
    SensitivityAnalysis(SensitivityAnalysis),
    StatisticalModelChecking(StatisticalModelChecking),
    Optimization(Optimization),
    TimeCourse,
}

impl ExperimentType {
    pub const KEYS: [&'static str; 5] =
        ["parameterScan", "sensitivityAnalysis", "statisticalModelChecking", "optimization", "timeCourse"];

    /// Section key, which doubles as the `experimentType` attribute value.
    pub fn key(&self) -> &'static str {
        match self {
            ExperimentType::ParameterScan(_) => "parameterScan",
            ExperimentType::SensitivityAnalysis(_) => "sensitivityAnalysis",
            ExperimentType::StatisticalModelChecking(_) => "statisticalModelChecking",
            ExperimentType::Optimization(_) => "optimization",
            ExperimentType::TimeCourse => "timeCourse",
        }
    }

    /// Factor names the experiment varies, if any.
    pub fn factors(&self) -> &[String] {
        match self {
            ExperimentType::ParameterScan(s) => &s.factor_name,
            ExperimentType::SensitivityAnalysis(s) => &s.factor_name,
            ExperimentType::Optimization(o) => &o.factor_name,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalExperiment {
    pub model: ModelSection,
    pub simulation: SimulationSection,
    pub observation: ObservationSection,
    pub experiment: ExperimentType,
}

impl CanonicalExperiment {
    pub fn experiment_type(&self) -> &'static str {
        self.experiment.key()
    }

    pub fn stop_time(&self) -> Option<f64> {
        match self.simulation.stop {
            StopCondition::StopTime(t) => Some(t),
            StopCondition::SteadyState => None,
        }
    }

    /// Checks every invariant of the metamodel.
    pub fn validate(&self) -> Result<(), CanonError> {
        let m = &self.model;
        if m.model_path.is_empty() {
            return Err(violation("model.modelPath", "must not be empty"));
        }
        if m.model_format.as_deref() == Some("") {
            return Err(violation("model.modelFormat", "must not be empty"));
        }
        for (i, p) in m.parameters.iter().enumerate() {
            let path = format!("model.parameters[{i}]");
            if p.name.is_empty() {
                return Err(violation(format!("{path}.parameterName"), "must not be empty"));
            }
            finite(&format!("{path}.parameterValue"), p.value)?;
            if m.parameters[..i].iter().any(|q| q.name == p.name) {
                return Err(violation(format!("{path}.parameterName"), format!("duplicate parameter `{}`", p.name)));
            }
        }

        let s = &self.simulation;
        if s.simulator.is_empty() {
            return Err(violation("simulation.simulator", "must not be empty"));
        }
        if s.replications == 0 {
            return Err(violation("simulation.replications", "must be positive"));
        }
        if let StopCondition::StopTime(t) = s.stop {
            finite("simulation.stopCondition.stopTime", t)?;
            if t <= 0.0 {
                return Err(violation("simulation.stopCondition.stopTime", "must be positive"));
            }
        }

        let o = &self.observation;
        let obs = "observation.observables";
        if o.expressions.is_empty() {
            return Err(violation(format!("{obs}.observationExpression"), "must not be empty"));
        }
        if o.expressions.len() != o.aliases.len() {
            return Err(violation(
                format!("{obs}.observationAlias"),
                format!("expected {} aliases, found {}", o.expressions.len(), o.aliases.len()),
            ));
        }
        if let Some(i) = first_empty(&o.expressions) {
            return Err(violation(format!("{obs}.observationExpression[{i}]"), "must not be empty"));
        }
        if let Some(i) = first_empty(&o.aliases) {
            return Err(violation(format!("{obs}.observationAlias[{i}]"), "must not be empty"));
        }
        if let Some(i) = first_duplicate(&o.aliases) {
            return Err(violation(format!("{obs}.observationAlias[{i}]"), "duplicate alias"));
        }
        let times = "observation.observationTime.observationTime";
        if o.times.is_empty() {
            return Err(violation(times, "must not be empty"));
        }
        for (i, &t) in o.times.iter().enumerate() {
            finite(&format!("{times}[{i}]"), t)?;
            if t < 0.0 {
                return Err(violation(format!("{times}[{i}]"), "must not be negative"));
            }
            if i > 0 && t <= o.times[i - 1] {
                return Err(violation(format!("{times}[{i}]"), "must be strictly increasing"));
            }
        }
        if let StopCondition::StopTime(stop) = s.stop {
            let last = *o.times.last().unwrap();
            if last > stop {
                return Err(violation(times, format!("last observation {last} exceeds stopTime {stop}")));
            }
        }

        match &self.experiment {
            ExperimentType::ParameterScan(p) => {
                let base = "parameterScan";
                factor_names(base, &p.factor_name)?;
                same_len(base, "factorMinimum", p.factor_minimum.len(), p.factor_name.len())?;
                same_len(base, "factorMaximum", p.factor_maximum.len(), p.factor_name.len())?;
                same_len(base, "interval", p.interval.len(), p.factor_name.len())?;
                for i in 0..p.factor_name.len() {
                    bounds(base, i, p.factor_minimum[i], p.factor_maximum[i])?;
                    let step = p.interval[i];
                    finite(&format!("{base}.interval[{i}]"), step)?;
                    if step <= 0.0 {
                        return Err(violation(format!("{base}.interval[{i}]"), "must be positive"));
                    }
                }
            }
            ExperimentType::SensitivityAnalysis(sa) => {
                let base = "sensitivityAnalysis";
                factor_names(base, &sa.factor_name)?;
                same_len(base, "parameterDistribution", sa.distributions.len(), sa.factor_name.len())?;
                for (i, d) in sa.distributions.iter().enumerate() {
                    let path = format!("{base}.parameterDistribution[{i}].params");
                    let ok = match *d {
                        Distribution::Uniform { min, max } => min.is_finite() && max.is_finite() && min < max,
                        Distribution::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && sd > 0.0,
                        Distribution::LogUniform { min, max } => {
                            min.is_finite() && max.is_finite() && min > 0.0 && min < max
                        }
                    };
                    if !ok {
                        return Err(violation(path, format!("invalid {} parameters", d.kind())));
                    }
                }
                if sa.sample_size == 0 {
                    return Err(violation(format!("{base}.sampleSize"), "must be positive"));
                }
                if sa.method.is_empty() {
                    return Err(violation(format!("{base}.method"), "must not be empty"));
                }
            }
            ExperimentType::StatisticalModelChecking(smc) => {
                if smc.property_expression.trim().is_empty() {
                    return Err(violation("statisticalModelChecking.propertyExpression", "must not be empty"));
                }
                for (k, &v) in &smc.checking_parameters {
                    finite(&format!("statisticalModelChecking.checkingParameters.{k}"), v)?;
                }
            }
            ExperimentType::Optimization(opt) => {
                let base = "optimization";
                if opt.objective_expression.trim().is_empty() {
                    return Err(violation(format!("{base}.objectiveExpression"), "must not be empty"));
                }
                factor_names(base, &opt.factor_name)?;
                same_len(base, "factorMinimum", opt.factor_minimum.len(), opt.factor_name.len())?;
                same_len(base, "factorMaximum", opt.factor_maximum.len(), opt.factor_name.len())?;
                for i in 0..opt.factor_name.len() {
                    bounds(base, i, opt.factor_minimum[i], opt.factor_maximum[i])?;
                }
                if opt.budget == 0 {
                    return Err(violation(format!("{base}.budget"), "must be positive"));
                }
                if opt.target_data.as_deref() == Some("") {
                    return Err(violation(format!("{base}.targetData"), "must not be empty"));
                }
            }
            ExperimentType::TimeCourse => {}
        }
        Ok(())
    }
}

fn finite(path: &str, v: f64) -> Result<(), CanonError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(violation(path, "must be a finite number"))
    }
}

fn first_empty(xs: &[String]) -> Option<usize> {
    xs.iter().position(String::is_empty)
}

fn first_duplicate(xs: &[String]) -> Option<usize> {
    (1..xs.len()).find(|&i| xs[..i].contains(&xs[i]))
}

fn factor_names(base: &str, names: &[String]) -> Result<(), CanonError> {
    if names.is_empty() {
        return Err(violation(format!("{base}.factorName"), "must not be empty"));
    }
    if let Some(i) = first_empty(names) {
        return Err(violation(format!("{base}.factorName[{i}]"), "must not be empty"));
    }
    if let Some(i) = first_duplicate(names) {
        return Err(violation(format!("{base}.factorName[{i}]"), "duplicate factor"));
    }
    Ok(())
}

fn same_len(base: &str, key: &str, got: usize, want: usize) -> Result<(), CanonError> {
    if got == want {
        Ok(())
    } else {
        Err(violation(format!("{base}.{key}"), format!("expected {want} entries, found {got}")))
    }
}

fn bounds(base: &str, i: usize, lo: f64, hi: f64) -> Result<(), CanonError> {
    finite(&format!("{base}.factorMinimum[{i}]"), lo)?;
    finite(&format!("{base}.factorMaximum[{i}]"), hi)?;
    if lo > hi {
        return Err(violation(format!("{base}.factorMaximum[{i}]"), format!("{hi} is below the minimum {lo}")));
    }
    Ok(())
}

/// Parses and validates a canonical document.
pub fn parse_canonical(text: &str) -> Result<CanonicalExperiment, CanonError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CanonError::ParseError(e.to_string()))?;
    from_value(&value)
}

/// Validates an already parsed JSON value.
pub fn from_value(value: &Value) -> Result<CanonicalExperiment, CanonError> {
    let Value::Object(root) = value else {
        return Err(violation("$", "document must be an object"));
    };
    let present: Vec<&str> = ExperimentType::KEYS.iter().copied().filter(|k| root.contains_key(*k)).collect();
    if present.len() != 1 {
        return Err(violation(
            "$",
            format!("exactly one experiment section required, found {}", if present.is_empty() { "none".to_string() } else { present.join(", ") }),
        ));
    }
    let mut top = Reader::new("", root);
    let model = {
        let mut r = top.object("model")?;
        let model_path = r.string("modelPath")?;
        let model_format = r.opt_string("modelFormat")?;
        let mut parameters = Vec::new();
        if let Some(list) = r.opt_objects("parameters")? {
            for mut p in list {
                parameters.push(Parameter { name: p.string("parameterName")?, value: p.number("parameterValue")? });
                p.finish()?;
            }
        }
        r.finish()?;
        ModelSection { model_path, model_format, parameters }
    };
    let simulation = {
        let mut r = top.object("simulation")?;
        let simulator = r.string("simulator")?;
        let replications = r.positive_int("replications")?;
        let mut sc = r.object("stopCondition")?;
        let stop = match (sc.has("stopTime"), sc.has("steadyState")) {
            (true, false) => StopCondition::StopTime(sc.number("stopTime")?),
            (false, true) => {
                if !sc.boolean("steadyState")? {
                    return Err(violation(sc.path_of("steadyState"), "must be true when given"));
                }
                StopCondition::SteadyState
            }
            _ => return Err(violation(sc.path(), "exactly one of stopTime or steadyState required")),
        };
        sc.finish()?;
        r.finish()?;
        SimulationSection { simulator, replications, stop }
    };
    let observation = {
        let mut r = top.object("observation")?;
        let mut obs = r.object("observables")?;
        let expressions = obs.strings("observationExpression")?;
        let aliases = obs.strings("observationAlias")?;
        obs.finish()?;
        let mut ot = r.object("observationTime")?;
        let times = ot.numbers("observationTime")?;
        ot.finish()?;
        r.finish()?;
        ObservationSection { expressions, aliases, times }
    };
    let key = present[0];
    let experiment = match key {
        "parameterScan" => {
            let mut r = top.object(key)?;
            let scan = ParameterScan {
                factor_name: r.strings("factorName")?,
                factor_minimum: r.numbers("factorMinimum")?,
                factor_maximum: r.numbers("factorMaximum")?,
                interval: r.numbers("interval")?,
            };
            r.finish()?;
            ExperimentType::ParameterScan(scan)
        }
        "sensitivityAnalysis" => {
            let mut r = top.object(key)?;
            let factor_name = r.strings("factorName")?;
            let mut distributions = Vec::new();
            for mut d in r.objects("parameterDistribution")? {
                let kind = d.string("kind")?;
                let mut p = d.object("params")?;
                let dist = match kind.as_str() {
                    "uniform" => Distribution::Uniform { min: p.number("min")?, max: p.number("max")? },
                    "normal" => Distribution::Normal { mean: p.number("mean")?, sd: p.number("sd")? },
                    "logUniform" => Distribution::LogUniform { min: p.number("min")?, max: p.number("max")? },
                    other => return Err(violation(d.path_of("kind"), format!("unknown distribution `{other}`"))),
                };
                p.finish()?;
                d.finish()?;
                distributions.push(dist);
            }
            let sample_size = r.positive_int("sampleSize")?;
            let method = r.string("method")?;
            r.finish()?;
            ExperimentType::SensitivityAnalysis(SensitivityAnalysis { factor_name, distributions, sample_size, method })
        }
        "statisticalModelChecking" => {
            let mut r = top.object(key)?;
            let property_expression = r.string("propertyExpression")?;
            let mut checking_parameters = BTreeMap::new();
            if let Some(mut p) = r.opt_object("checkingParameters")? {
                for k in p.keys() {
                    checking_parameters.insert(k.clone(), p.number(&k)?);
                }
                p.finish()?;
            }
            r.finish()?;
            ExperimentType::StatisticalModelChecking(StatisticalModelChecking { property_expression, checking_parameters })
        }
        "optimization" => {
            let mut r = top.object(key)?;
            let opt = Optimization {
                objective_expression: r.string("objectiveExpression")?,
                factor_name: r.strings("factorName")?,
                factor_minimum: r.numbers("factorMinimum")?,
                factor_maximum: r.numbers("factorMaximum")?,
                budget: r.positive_int("budget")?,
                target_data: r.opt_string("targetData")?,
            };
            r.finish()?;
            ExperimentType::Optimization(opt)
        }
        "timeCourse" => {
            let r = top.object(key)?;
            r.finish()?;
            ExperimentType::TimeCourse
        }
        _ => unreachable!(),
    };
    top.finish()?;
    let exp = CanonicalExperiment { model, simulation, observation, experiment };
    exp.validate()?;
    Ok(exp)
}

/// JSON value with the canonical key order.
pub fn to_value(exp: &CanonicalExperiment) -> Value {
    writer::to_value(exp)
}

/// Deterministic text form: tab indentation, scalar lists on one line, no
/// trailing newline.
pub fn serialize_canonical(exp: &CanonicalExperiment) -> String {
    writer::write(exp)
}

/// Full-factorial grid of a scan; the last factor varies fastest.
pub fn design_points(scan: &ParameterScan) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = (0..scan.factor_name.len())
        .map(|i| axis_values(scan.factor_minimum[i], scan.factor_maximum[i], scan.interval[i]))
        .collect();
    let mut out = vec![Vec::with_capacity(axes.len())];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Number of grid points without materialising them.
pub fn design_point_count(scan: &ParameterScan) -> u128 {
    (0..scan.factor_name.len())
        .map(|i| axis_len(scan.factor_minimum[i], scan.factor_maximum[i], scan.interval[i]) as u128)
        .product()
}

const GRID_EPS: f64 = 1e-12;

fn axis_len(min: f64, max: f64, step: f64) -> u64 {
    let mut k = ((max - min) / step).floor().max(0.0) as u64;
    while min + (k + 1) as f64 * step <= max + GRID_EPS {
        k += 1;
    }
    while k > 0 && min + k as f64 * step > max + GRID_EPS {
        k -= 1;
    }
    k + 1
}

fn axis_values(min: f64, max: f64, step: f64) -> Vec<f64> {
    (0..axis_len(min, max, step)).map(|k| (min + k as f64 * step).min(max)).collect()
}

#[cfg(test)]
mod tests;
