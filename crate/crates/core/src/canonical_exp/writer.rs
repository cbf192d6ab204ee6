use serde_json::{json, Value};

use super::{CanonicalExperiment, Distribution, ExperimentType, StopCondition};

/// Numbers keep a lexical style: time points print integral values without
/// a fraction, factor and parameter values always print as reals.
#[derive(Debug, Clone)]
enum Node {
    Obj(Vec<(String, Node)>),
    Arr(Vec<Node>),
    Str(String),
    Int(u64),
    Time(f64),
    Real(f64),
    Bool(bool),
}

impl Node {
    fn to_value(&self) -> Value {
        match self {
            Node::Obj(kv) => Value::Object(kv.iter().map(|(k, v)| (k.clone(), v.to_value())).collect()),
            Node::Arr(xs) => Value::Array(xs.iter().map(Node::to_value).collect()),
            Node::Str(s) => json!(s),
            Node::Int(i) => json!(i),
            Node::Time(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => json!(*f as i64),
            Node::Time(f) | Node::Real(f) => json!(f),
            Node::Bool(b) => json!(b),
        }
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Node::Obj(_) | Node::Arr(_))
    }

    fn scalar_text(&self) -> String {
        match self {
            Node::Str(s) => serde_json::to_string(s).expect("string serializes"),
            Node::Int(i) => i.to_string(),
            Node::Time(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => format!("{}", *f as i64),
            Node::Time(f) | Node::Real(f) => format!("{f:?}"),
            Node::Bool(b) => b.to_string(),
            Node::Obj(_) | Node::Arr(_) => unreachable!("not a scalar"),
        }
    }
}

fn strs(xs: &[String]) -> Node {
    Node::Arr(xs.iter().map(|x| Node::Str(x.clone())).collect())
}

fn reals(xs: &[f64]) -> Node {
    Node::Arr(xs.iter().map(|&x| Node::Real(x)).collect())
}

fn obj(kv: Vec<(&str, Node)>) -> Node {
    Node::Obj(kv.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
}

pub(super) fn to_value(exp: &CanonicalExperiment) -> Value {
    tree(exp).to_value()
}

pub(super) fn write(exp: &CanonicalExperiment) -> String {
    let mut out = String::new();
    write_node(&tree(exp), 0, &mut out);
    out
}

fn tree(exp: &CanonicalExperiment) -> Node {
    let mut model = vec![("modelPath", Node::Str(exp.model.model_path.clone()))];
    if let Some(f) = &exp.model.model_format {
        model.push(("modelFormat", Node::Str(f.clone())));
    }
    if !exp.model.parameters.is_empty() {
        let ps = exp
            .model
            .parameters
            .iter()
            .map(|p| obj(vec![("parameterName", Node::Str(p.name.clone())), ("parameterValue", Node::Real(p.value))]))
            .collect();
        model.push(("parameters", Node::Arr(ps)));
    }

    let stop = match exp.simulation.stop {
        StopCondition::StopTime(t) => obj(vec![("stopTime", Node::Time(t))]),
        StopCondition::SteadyState => obj(vec![("steadyState", Node::Bool(true))]),
    };
    let simulation = obj(vec![
        ("simulator", Node::Str(exp.simulation.simulator.clone())),
        ("replications", Node::Int(exp.simulation.replications)),
        ("stopCondition", stop),
    ]);

    let times = Node::Arr(exp.observation.times.iter().map(|&t| Node::Time(t)).collect());
    let observation = obj(vec![
        (
            "observables",
            obj(vec![
                ("observationExpression", strs(&exp.observation.expressions)),
                ("observationAlias", strs(&exp.observation.aliases)),
            ]),
        ),
        ("observationTime", obj(vec![("observationTime", times)])),
    ]);

    let section = match &exp.experiment {
        ExperimentType::ParameterScan(p) => obj(vec![
            ("factorName", strs(&p.factor_name)),
            ("factorMinimum", reals(&p.factor_minimum)),
            ("factorMaximum", reals(&p.factor_maximum)),
            ("interval", reals(&p.interval)),
        ]),
        ExperimentType::SensitivityAnalysis(sa) => {
            let dists = sa
                .distributions
                .iter()
                .map(|d| {
                    let params = match *d {
                        Distribution::Uniform { min, max } | Distribution::LogUniform { min, max } => {
                            obj(vec![("min", Node::Real(min)), ("max", Node::Real(max))])
                        }
                        Distribution::Normal { mean, sd } => obj(vec![("mean", Node::Real(mean)), ("sd", Node::Real(sd))]),
                    };
                    obj(vec![("kind", Node::Str(d.kind().to_string())), ("params", params)])
                })
                .collect();
            obj(vec![
                ("factorName", strs(&sa.factor_name)),
                ("parameterDistribution", Node::Arr(dists)),
                ("sampleSize", Node::Int(sa.sample_size)),
                ("method", Node::Str(sa.method.clone())),
            ])
        }
        ExperimentType::StatisticalModelChecking(smc) => {
            let mut kv = vec![("propertyExpression", Node::Str(smc.property_expression.clone()))];
            if !smc.checking_parameters.is_empty() {
                let params = smc.checking_parameters.iter().map(|(k, &v)| (k.clone(), Node::Real(v))).collect();
                kv.push(("checkingParameters", Node::Obj(params)));
            }
            obj(kv)
        }
        ExperimentType::Optimization(o) => {
            let mut kv = vec![
                ("objectiveExpression", Node::Str(o.objective_expression.clone())),
                ("factorName", strs(&o.factor_name)),
                ("factorMinimum", reals(&o.factor_minimum)),
                ("factorMaximum", reals(&o.factor_maximum)),
                ("budget", Node::Int(o.budget)),
            ];
            if let Some(t) = &o.target_data {
                kv.push(("targetData", Node::Str(t.clone())));
            }
            obj(kv)
        }
        ExperimentType::TimeCourse => Node::Obj(Vec::new()),
    };

    obj(vec![
        ("model", obj(model)),
        ("simulation", simulation),
        ("observation", observation),
        (exp.experiment.key(), section),
    ])
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push('\t');
    }
}

fn write_node(n: &Node, depth: usize, out: &mut String) {
    match n {
        Node::Obj(kv) if kv.is_empty() => out.push_str("{}"),
        Node::Obj(kv) => {
            out.push_str("{\n");
            for (i, (k, v)) in kv.iter().enumerate() {
                indent(depth + 1, out);
                out.push_str(&Node::Str(k.clone()).scalar_text());
                out.push_str(": ");
                write_node(v, depth + 1, out);
                if i + 1 < kv.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(depth, out);
            out.push('}');
        }
        Node::Arr(items) if items.iter().all(Node::is_scalar) => {
            let parts: Vec<String> = items.iter().map(Node::scalar_text).collect();
            out.push('[');
            out.push_str(&parts.join(", "));
            out.push(']');
        }
        Node::Arr(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                indent(depth + 1, out);
                write_node(item, depth + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(depth, out);
            out.push(']');
        }
        scalar => out.push_str(&scalar.scalar_text()),
    }
}
