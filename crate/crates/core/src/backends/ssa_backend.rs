//! The built-in backend: runs every experiment type on "rnet" models with
//! the Gillespie simulator.

use rand::Rng;
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use super::observe::Observable;
use super::rnet::ReactionModel;
use super::sensitivity::{SaltelliDesign, MAX_FACTORS, MAX_SAMPLE};
use super::smc::Property;
use super::ssa::{simulate_with, stream_rng};
use super::{Backend, BackendError, ExecutionResult, ModelResolver, RunStatus, SimRow, SimTable};
use crate::canonical_exp::{
    design_point_count, design_points, CanonicalExperiment, ExperimentType, StopCondition,
};

pub const SSA_BACKEND: &str = "ssa-rnet";
pub const RNET_FORMAT: &str = "rnet";

/// Upper bound on design points in one experiment.
pub const MAX_POINTS: u128 = 1_000_000;
/// Stream index reserved for drawing optimisation candidates.
const SEARCH_STREAM: u64 = 0xffff_ffff;
const DEFAULT_THRESHOLD: f64 = 0.5;

fn exec(msg: impl Into<String>) -> BackendError {
    BackendError::ExecError(msg.into())
}

/// Gillespie backend. `threads` above 1 evaluates design points on a rayon
/// pool of that size; output is identical either way.
#[derive(Debug, Clone, Default)]
pub struct SsaBackend {
    pub threads: usize,
}

impl SsaBackend {
    pub fn with_threads(threads: usize) -> Self {
        SsaBackend { threads }
    }
}

/// Per replication, per observation time, one value per observable.
type PointRuns = Vec<Vec<Vec<f64>>>;

struct Runner<'a> {
    base: &'a ReactionModel,
    factors: &'a [String],
    observables: &'a [Observable],
    replications: u64,
    stop: f64,
    times: &'a [f64],
    seed: u64,
}

impl Runner<'_> {
    fn point(&self, index: usize, values: &[f64]) -> Result<PointRuns, BackendError> {
        let mut model = self.base.clone();
        for (f, v) in self.factors.iter().zip(values) {
            model.set(f, *v)?;
        }
        Ok((0..self.replications)
            .map(|rep| {
                let mut rng = stream_rng(self.seed, index as u64, rep);
                simulate_with(&model, self.stop, self.times, &mut rng)
                    .iter()
                    .map(|state| self.observables.iter().map(|o| o.eval(state)).collect())
                    .collect()
            })
            .collect())
    }

    fn all(&self, points: &[Vec<f64>], threads: usize) -> Result<Vec<PointRuns>, BackendError> {
        if threads > 1 && points.len() > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| exec(format!("cannot start worker pool: {e}")))?;
            // collect keeps input order, so the merge is by point index
            pool.install(|| points.par_iter().enumerate().map(|(i, p)| self.point(i, p)).collect())
        } else {
            points.iter().enumerate().map(|(i, p)| self.point(i, p)).collect()
        }
    }
}

fn table(aliases: &[String], times: &[f64], runs: &[PointRuns]) -> SimTable {
    let mut rows = Vec::new();
    for (point, reps) in runs.iter().enumerate() {
        for (replication, series) in reps.iter().enumerate() {
            for (time, values) in times.iter().zip(series) {
                rows.push(SimRow { point, replication, time: *time, values: values.clone() });
            }
        }
    }
    SimTable { aliases: aliases.to_vec(), rows }
}

/// Replicate mean of observable `col` at the last observation time.
fn final_mean(runs: &PointRuns, col: usize) -> f64 {
    let n = runs.len().max(1) as f64;
    runs.iter().map(|series| series.last().map_or(0.0, |v| v[col])).sum::<f64>() / n
}

fn factor_map(names: &[String], values: &[f64]) -> Value {
    let mut m = Map::new();
    for (n, v) in names.iter().zip(values) {
        m.insert(n.clone(), json!(v));
    }
    Value::Object(m)
}

/// Resolves an alias or observable expression to a column of `extra`
/// observables appended after the spec's own.
fn column_for(expr: &str, aliases: &[String], model: &ReactionModel, extra: &mut Vec<Observable>) -> Result<usize, BackendError> {
    let expr = expr.trim();
    if let Some(i) = aliases.iter().position(|a| a == expr) {
        return Ok(i);
    }
    extra.push(Observable::compile(expr, model)?);
    Ok(aliases.len() + extra.len() - 1)
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Minimize,
    Maximize,
}

fn parse_objective(text: &str) -> (Direction, &str) {
    let t = text.trim();
    for (prefix, dir) in [("minimize(", Direction::Minimize), ("maximize(", Direction::Maximize)] {
        if let Some(inner) = t.strip_prefix(prefix).and_then(|r| r.strip_suffix(')')) {
            return (dir, inner.trim());
        }
    }
    (Direction::Minimize, t)
}

impl Backend for SsaBackend {
    fn name(&self) -> &str {
        SSA_BACKEND
    }

    fn supports(&self) -> Vec<(String, String)> {
        ExperimentType::KEYS.iter().map(|t| (RNET_FORMAT.to_string(), t.to_string())).collect()
    }

    fn execute(&self, spec: &CanonicalExperiment, models: &dyn ModelResolver, seed: u64) -> Result<ExecutionResult, BackendError> {
        let path = &spec.model.model_path;
        let text = models.resolve(path).ok_or_else(|| exec(format!("model `{path}` cannot be resolved")))?;
        let mut base = ReactionModel::parse(&text)?;
        for p in &spec.model.parameters {
            base.set(&p.name, p.value)?;
        }
        let obs = &spec.observation;
        let mut observables: Vec<Observable> =
            obs.expressions.iter().map(|e| Observable::compile(e, &base)).collect::<Result<_, _>>()?;
        // steady state runs until the last requested observation
        let stop = match spec.simulation.stop {
            StopCondition::StopTime(t) => t,
            StopCondition::SteadyState => obs.times.iter().copied().fold(0.0, f64::max),
        };
        let times: Vec<f64> = obs.times.iter().copied().filter(|&t| t <= stop).collect();
        let reps = spec.simulation.replications;

        let mut summary = Map::new();
        summary.insert("backend".into(), json!(SSA_BACKEND));
        summary.insert("seed".into(), json!(seed));
        let mut status = None;
        let mut artifact = None;

        let (factors, points): (Vec<String>, Vec<Vec<f64>>) = match &spec.experiment {
            ExperimentType::TimeCourse | ExperimentType::StatisticalModelChecking(_) => (Vec::new(), vec![Vec::new()]),
            ExperimentType::ParameterScan(scan) => {
                let count = design_point_count(scan);
                if count > MAX_POINTS {
                    return Err(exec(format!("scan has {count} design points; the limit is {MAX_POINTS}")));
                }
                (scan.factor_name.clone(), design_points(scan))
            }
            ExperimentType::SensitivityAnalysis(sa) => {
                if !sa.method.eq_ignore_ascii_case("saltelli") {
                    return Err(exec(format!("sensitivity method `{}` is not available; use saltelli", sa.method)));
                }
                if sa.sample_size > MAX_SAMPLE {
                    return Err(exec(format!("sampleSize {} exceeds {MAX_SAMPLE}", sa.sample_size)));
                }
                if sa.factor_name.len() > MAX_FACTORS {
                    return Err(exec(format!("{} factors exceed the limit of {MAX_FACTORS}", sa.factor_name.len())));
                }
                let design = SaltelliDesign::new(&sa.distributions, sa.sample_size as usize, (seed ^ (seed >> 32)) as u32);
                (sa.factor_name.clone(), design.rows)
            }
            ExperimentType::Optimization(opt) => {
                if opt.budget as u128 > MAX_POINTS {
                    return Err(exec(format!("budget {} exceeds {MAX_POINTS}", opt.budget)));
                }
                let mut rng = stream_rng(seed, SEARCH_STREAM, 0);
                let pts = (0..opt.budget)
                    .map(|_| {
                        opt.factor_minimum
                            .iter()
                            .zip(&opt.factor_maximum)
                            .map(|(lo, hi)| lo + rng.random::<f64>() * (hi - lo))
                            .collect()
                    })
                    .collect();
                (opt.factor_name.clone(), pts)
            }
        };

        // extra observables needed by properties or objectives
        let n_aliases = obs.aliases.len();
        let mut extra = Vec::new();
        let target_col = match &spec.experiment {
            ExperimentType::StatisticalModelChecking(smc) => {
                let prop = Property::parse(&smc.property_expression)?;
                Some(column_for(&prop.lhs, &obs.aliases, &base, &mut extra)?)
            }
            ExperimentType::Optimization(opt) => {
                Some(column_for(parse_objective(&opt.objective_expression).1, &obs.aliases, &base, &mut extra)?)
            }
            _ => None,
        };
        observables.extend(extra);

        let runner = Runner {
            base: &base,
            factors: &factors,
            observables: &observables,
            replications: reps,
            stop,
            times: &times,
            seed,
        };
        let mut runs = runner.all(&points, self.threads)?;

        match &spec.experiment {
            ExperimentType::TimeCourse => {
                let finals: Map<String, Value> =
                    obs.aliases.iter().enumerate().map(|(i, a)| (a.clone(), json!(final_mean(&runs[0], i)))).collect();
                summary.insert("finalMeans".into(), Value::Object(finals));
            }
            ExperimentType::ParameterScan(_) => {
                summary.insert("designPoints".into(), json!(points.len()));
                summary.insert("factorName".into(), json!(factors));
            }
            ExperimentType::SensitivityAnalysis(sa) => {
                let n = sa.sample_size as usize;
                let design = SaltelliDesign { n, k: factors.len(), rows: Vec::new() };
                let mut main = Map::new();
                let mut total = Map::new();
                let mut degenerate = Vec::new();
                for (col, alias) in obs.aliases.iter().enumerate() {
                    let y: Vec<f64> = runs.iter().map(|r| final_mean(r, col)).collect();
                    match design.indices(&y) {
                        Some((s, st)) => {
                            main.insert(alias.clone(), factor_map(&factors, &s));
                            total.insert(alias.clone(), factor_map(&factors, &st));
                        }
                        None => degenerate.push(alias.clone()),
                    }
                }
                if main.is_empty() {
                    return Err(exec(format!("zero-variance output for every observable: {}", degenerate.join(", "))));
                }
                summary.insert("mainEffects".into(), Value::Object(main));
                summary.insert("totalEffects".into(), Value::Object(total));
                summary.insert("degenerateObservables".into(), json!(degenerate));
                summary.insert("sampleSize".into(), json!(n));
                summary.insert("method".into(), json!(sa.method));
            }
            ExperimentType::StatisticalModelChecking(smc) => {
                let prop = Property::parse(&smc.property_expression)?;
                let col = target_col.expect("property column");
                let satisfied = runs[0]
                    .iter()
                    .filter(|series| prop.holds(times.iter().zip(series.iter()).map(|(t, v)| (*t, v[col]))))
                    .count();
                let p = satisfied as f64 / reps.max(1) as f64;
                let threshold = smc.checking_parameters.get("probabilityThreshold").copied().unwrap_or(DEFAULT_THRESHOLD);
                status = Some(if p >= threshold { RunStatus::Success } else { RunStatus::Failure });
                summary.insert("probability".into(), json!(p));
                summary.insert("probabilityThreshold".into(), json!(threshold));
                summary.insert("satisfiedRuns".into(), json!(satisfied));
                summary.insert("runs".into(), json!(reps));
            }
            ExperimentType::Optimization(opt) => {
                let (dir, _) = parse_objective(&opt.objective_expression);
                let col = target_col.expect("objective column");
                let mut best: Option<(usize, f64)> = None;
                for (i, r) in runs.iter().enumerate() {
                    let v = final_mean(r, col);
                    let better = match best {
                        None => true,
                        Some((_, b)) => match dir {
                            Direction::Minimize => v < b,
                            Direction::Maximize => v > b,
                        },
                    };
                    if better {
                        best = Some((i, v));
                    }
                }
                if let Some((i, v)) = best {
                    let mut fitted = base.clone();
                    for (f, x) in factors.iter().zip(&points[i]) {
                        fitted.set(f, *x)?;
                    }
                    artifact = Some(fitted.to_text());
                    summary.insert("bestFactors".into(), factor_map(&factors, &points[i]));
                    summary.insert("bestObjective".into(), json!(v));
                    summary.insert("bestPoint".into(), json!(i));
                }
                summary.insert("evaluations".into(), json!(runs.len()));
                summary.insert(
                    "direction".into(),
                    json!(if dir == Direction::Minimize { "minimize" } else { "maximize" }),
                );
                if let Some(t) = &opt.target_data {
                    summary.insert("targetData".into(), json!(t));
                }
            }
        }

        // drop helper columns before building the table
        for point in &mut runs {
            for series in point.iter_mut() {
                for values in series.iter_mut() {
                    values.truncate(n_aliases);
                }
            }
        }
        Ok(ExecutionResult { table: table(&obs.aliases, &times, &runs), status, new_model_artifact: artifact, summary })
    }
}
