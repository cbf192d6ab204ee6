use super::*;
use proptest::prelude::*;

use crate::fixtures::specs::SIR_SCAN;

fn sir() -> CanonicalExperiment {
    parse_canonical(SIR_SCAN).unwrap()
}

fn scan(exp: &CanonicalExperiment) -> &ParameterScan {
    match &exp.experiment {
        ExperimentType::ParameterScan(s) => s,
        other => panic!("not a scan: {other:?}"),
    }
}

#[test]
fn parses_sir_scan() {
    let e = sir();
    assert_eq!(e.model.model_path, "./sir.mlrj");
    assert_eq!(e.simulation.replications, 100);
    assert_eq!(e.simulation.stop, StopCondition::StopTime(80.0));
    assert_eq!(e.observation.times, vec![0.0, 20.0, 40.0, 60.0, 80.0]);
    assert_eq!(e.observation.aliases, vec!["susceptible", "infected", "recovered"]);
    let s = scan(&e);
    assert_eq!(s.factor_name, vec!["k1", "k2"]);
    assert_eq!(s.factor_minimum, vec![0.5, 0.5]);
    assert_eq!(s.factor_maximum, vec![2.0, 2.0]);
    assert_eq!(s.interval, vec![0.1, 0.1]);
    assert_eq!(e.experiment_type(), "parameterScan");
}

#[test]
fn crlf_input_parses() {
    assert_eq!(parse_canonical(&SIR_SCAN.replace('\n', "\r\n")).unwrap(), sir());
}

#[test]
fn round_trip_and_determinism() {
    let e = sir();
    let text = serialize_canonical(&e);
    assert_eq!(parse_canonical(&text).unwrap(), e);
    assert_eq!(serialize_canonical(&e), text);
    assert_eq!(text, SIR_SCAN);
}

#[test]
fn minimal_time_course() {
    let text = r#"{"model":{"modelPath":"m.json","modelFormat":"rnet"},
        "simulation":{"simulator":"SSA","replications":1,"stopCondition":{"steadyState":true}},
        "observation":{"observables":{"observationExpression":["x"],"observationAlias":["x"]},
                       "observationTime":{"observationTime":[1.5]}},
        "timeCourse":{}}"#;
    let e = parse_canonical(text).unwrap();
    assert_eq!(e.experiment, ExperimentType::TimeCourse);
    assert_eq!(e.stop_time(), None);
    assert_eq!(parse_canonical(&serialize_canonical(&e)).unwrap(), e);
}

fn with(f: impl FnOnce(&mut serde_json::Value)) -> Result<CanonicalExperiment, CanonError> {
    let mut v: serde_json::Value = serde_json::from_str(SIR_SCAN).unwrap();
    f(&mut v);
    from_value(&v)
}

fn path_of(r: Result<CanonicalExperiment, CanonError>) -> String {
    match r {
        Err(CanonError::SchemaViolation { path, .. }) => path,
        other => panic!("expected a schema violation, got {other:?}"),
    }
}

#[test]
fn rejects_two_type_sections() {
    let r = with(|v| {
        v["optimization"] = serde_json::json!({"objectiveExpression":"minimize(x)","factorName":["k1"],
            "factorMinimum":[0],"factorMaximum":[1],"budget":3});
    });
    assert_eq!(path_of(r), "$");
    let r = with(|v| {
        v.as_object_mut().unwrap().remove("parameterScan");
    });
    assert_eq!(path_of(r), "$");
}

#[test]
fn rejects_observation_beyond_stop() {
    let r = with(|v| v["observation"]["observationTime"]["observationTime"] = serde_json::json!([0, 20, 100]));
    assert_eq!(path_of(r), "observation.observationTime.observationTime");
}

#[test]
fn malformed_text_is_parse_error() {
    assert!(matches!(parse_canonical("{\"model\": "), Err(CanonError::ParseError(_))));
}

/// Every single-field corruption that breaks an invariant must be caught.
#[test]
fn mutations_are_rejected() {
    use serde_json::json;
    type Mutation = (&'static str, fn(&mut serde_json::Value));
    let cases: Vec<Mutation> = vec![
        ("model.modelPath", |v| v["model"]["modelPath"] = json!("")),
        ("model.modelPath", |v| v["model"]["modelPath"] = json!(3)),
        ("model.modelPath", |v| {
            v["model"].as_object_mut().unwrap().remove("modelPath");
        }),
        ("model.extra", |v| v["model"]["extra"] = json!(1)),
        ("simulation.simulator", |v| v["simulation"]["simulator"] = json!("")),
        ("simulation.replications", |v| v["simulation"]["replications"] = json!(0)),
        ("simulation.replications", |v| v["simulation"]["replications"] = json!(2.5)),
        ("simulation.replications", |v| v["simulation"]["replications"] = json!(-1)),
        ("simulation.stopCondition.stopTime", |v| v["simulation"]["stopCondition"]["stopTime"] = json!(0)),
        ("simulation.stopCondition.stopTime", |v| v["simulation"]["stopCondition"]["stopTime"] = json!("80")),
        ("simulation.stopCondition", |v| v["simulation"]["stopCondition"]["steadyState"] = json!(true)),
        ("observation.observables.observationAlias", |v| {
            v["observation"]["observables"]["observationAlias"] = json!(["a", "b"])
        }),
        ("observation.observables.observationAlias[1]", |v| {
            v["observation"]["observables"]["observationAlias"] = json!(["a", "a", "c"])
        }),
        ("observation.observables.observationExpression", |v| {
            v["observation"]["observables"]["observationExpression"] = json!([])
        }),
        ("observation.observationTime.observationTime[2]", |v| {
            v["observation"]["observationTime"]["observationTime"] = json!([0, 20, 20, 60, 80])
        }),
        ("observation.observationTime.observationTime[0]", |v| {
            v["observation"]["observationTime"]["observationTime"] = json!([-1, 20, 40])
        }),
        ("observation.observationTime.observationTime", |v| {
            v["observation"]["observationTime"]["observationTime"] = json!([])
        }),
        ("parameterScan.factorMinimum", |v| v["parameterScan"]["factorMinimum"] = json!([0.5])),
        ("parameterScan.factorMaximum", |v| v["parameterScan"]["factorMaximum"] = json!([2.0, 2.0, 1.0])),
        ("parameterScan.interval", |v| v["parameterScan"]["interval"] = json!([0.1])),
        ("parameterScan.interval[0]", |v| v["parameterScan"]["interval"] = json!([0, 0.1])),
        ("parameterScan.interval[1]", |v| v["parameterScan"]["interval"] = json!([0.1, -0.1])),
        ("parameterScan.factorMaximum[0]", |v| v["parameterScan"]["factorMaximum"] = json!([0.1, 2.0])),
        ("parameterScan.factorName[1]", |v| v["parameterScan"]["factorName"] = json!(["k1", "k1"])),
        ("parameterScan.factorName[0]", |v| v["parameterScan"]["factorName"] = json!(["", "k2"])),
        ("parameterScan.factorName", |v| v["parameterScan"]["factorName"] = json!("k1")),
        ("parameterScan.factorMinimum[1]", |v| v["parameterScan"]["factorMinimum"] = json!([0.5, "x"])),
    ];
    for (want, mutate) in cases {
        let got = path_of(with(mutate));
        assert_eq!(got, want);
    }
}

#[test]
fn other_sections_validate() {
    let base = |section: &str| {
        format!(
            r#"{{"model":{{"modelPath":"m"}},"simulation":{{"simulator":"SSA","replications":2,"stopCondition":{{"stopTime":10}}}},
            "observation":{{"observables":{{"observationExpression":["a"],"observationAlias":["a"]}},"observationTime":{{"observationTime":[10]}}}},
            {section}}}"#
        )
    };
    let sa = base(
        r#""sensitivityAnalysis":{"factorName":["k"],"parameterDistribution":[{"kind":"uniform","params":{"min":0,"max":1}}],"sampleSize":64,"method":"saltelli"}"#,
    );
    let e = parse_canonical(&sa).unwrap();
    assert_eq!(parse_canonical(&serialize_canonical(&e)).unwrap(), e);

    let bad = sa.replace(r#""max":1"#, r#""max":0"#);
    assert_eq!(path_of(parse_canonical(&bad)), "sensitivityAnalysis.parameterDistribution[0].params");
    let bad = sa.replace("uniform", "cauchy");
    assert_eq!(path_of(parse_canonical(&bad)), "sensitivityAnalysis.parameterDistribution[0].kind");

    let smc = base(r#""statisticalModelChecking":{"propertyExpression":"F[<=10](a > 3)","checkingParameters":{"probabilityThreshold":0.9}}"#);
    let e = parse_canonical(&smc).unwrap();
    assert_eq!(parse_canonical(&serialize_canonical(&e)).unwrap(), e);
    let bad = smc.replace("F[<=10](a > 3)", " ");
    assert_eq!(path_of(parse_canonical(&bad)), "statisticalModelChecking.propertyExpression");

    let opt = base(r#""optimization":{"objectiveExpression":"minimize(a)","factorName":["k"],"factorMinimum":[0],"factorMaximum":[1],"budget":5,"targetData":"WD1"}"#);
    let e = parse_canonical(&opt).unwrap();
    assert_eq!(parse_canonical(&serialize_canonical(&e)).unwrap(), e);
    let bad = opt.replace(r#""budget":5"#, r#""budget":0"#);
    assert_eq!(path_of(parse_canonical(&bad)), "optimization.budget");

    let tc = base(r#""timeCourse":{"x":1}"#);
    assert_eq!(path_of(parse_canonical(&tc)), "timeCourse.x");
}

#[test]
fn sir_grid_has_256_points() {
    let pts = design_points(scan(&sir()));
    assert_eq!(pts.len(), 256);
    assert_eq!(design_point_count(scan(&sir())), 256);
    assert_eq!(pts[0], vec![0.5, 0.5]);
    assert_eq!(pts[1][0], 0.5);
    assert!((pts[1][1] - 0.6).abs() < 1e-12);
    assert_eq!(pts[255], vec![2.0, 2.0]);
}

#[test]
fn small_grids() {
    let single = ParameterScan {
        factor_name: vec!["k".into()],
        factor_minimum: vec![1.0],
        factor_maximum: vec![1.0],
        interval: vec![0.3],
    };
    assert_eq!(design_points(&single), vec![vec![1.0]]);
    let two = ParameterScan {
        factor_name: vec!["k1".into(), "k2".into()],
        factor_minimum: vec![0.0, 0.0],
        factor_maximum: vec![1.0, 1.0],
        interval: vec![0.5, 1.0],
    };
    let pts = design_points(&two);
    let expected: Vec<Vec<f64>> =
        vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.0], vec![0.5, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
    assert_eq!(pts, expected);
}

fn finite_f64() -> impl Strategy<Value = f64> {
    prop_oneof![(-1000i32..1000).prop_map(|x| x as f64), -1e6f64..1e6, 1e-9f64..1e-3]
}

fn ident() -> impl Strategy<Value = String> {
    "[a-zA-Z][a-zA-Z0-9_]{0,8}"
}

fn arb_experiment() -> impl Strategy<Value = CanonicalExperiment> {
    let model = (
        "[a-z./]{1,12}",
        proptest::option::of("[a-z]{1,6}"),
        proptest::collection::btree_map(ident(), finite_f64(), 0..4),
    )
        .prop_map(|(path, format, params)| ModelSection {
            model_path: path,
            model_format: format,
            parameters: params.into_iter().map(|(name, value)| Parameter { name, value }).collect(),
        });
    let times = proptest::collection::btree_set(0u32..10_000, 1..6)
        .prop_map(|s| s.into_iter().map(|t| t as f64 / 8.0).collect::<Vec<f64>>());
    let obs = (proptest::collection::btree_set(ident(), 1..4), times);
    let experiment = prop_oneof![
        proptest::collection::btree_map(ident(), (finite_f64(), 0.0f64..100.0, 1e-3f64..10.0), 1..4).prop_map(|m| {
            let (names, rest): (Vec<String>, Vec<(f64, f64, f64)>) = m.into_iter().unzip();
            ExperimentType::ParameterScan(ParameterScan {
                factor_name: names,
                factor_minimum: rest.iter().map(|r| r.0).collect(),
                factor_maximum: rest.iter().map(|r| r.0 + r.1).collect(),
                interval: rest.iter().map(|r| r.2).collect(),
            })
        }),
        (proptest::collection::btree_set(ident(), 1..4), 1u64..5000).prop_map(|(names, n)| {
            let distributions = names
                .iter()
                .enumerate()
                .map(|(i, _)| match i % 3 {
                    0 => Distribution::Uniform { min: 0.0, max: 1.5 },
                    1 => Distribution::Normal { mean: 2.0, sd: 0.25 },
                    _ => Distribution::LogUniform { min: 0.1, max: 10.0 },
                })
                .collect();
            ExperimentType::SensitivityAnalysis(SensitivityAnalysis {
                factor_name: names.into_iter().collect(),
                distributions,
                sample_size: n,
                method: "saltelli".into(),
            })
        }),
        ("[a-z ]{0,5}[a-z]", proptest::collection::btree_map(ident(), finite_f64(), 0..3)).prop_map(|(p, params)| {
            ExperimentType::StatisticalModelChecking(StatisticalModelChecking {
                property_expression: p,
                checking_parameters: params,
            })
        }),
        Just(ExperimentType::TimeCourse),
    ];
    (model, "[A-Z]{1,4}", 1u64..1000, any::<bool>(), obs, experiment).prop_map(
        |(model, simulator, replications, steady, (aliases, times), experiment)| {
            let stop = if steady {
                StopCondition::SteadyState
            } else {
                StopCondition::StopTime(times.last().copied().unwrap() + 1.0)
            };
            let aliases: Vec<String> = aliases.into_iter().collect();
            CanonicalExperiment {
                model,
                simulation: SimulationSection { simulator, replications, stop },
                observation: ObservationSection {
                    expressions: aliases.iter().map(|a| format!("count(\"{a}\")")).collect(),
                    aliases,
                    times,
                },
                experiment,
            }
        },
    )
}

proptest! {
    #[test]
    fn parse_serialize_identity(e in arb_experiment()) {
        prop_assert!(e.validate().is_ok());
        let text = serialize_canonical(&e);
        prop_assert_eq!(parse_canonical(&text).unwrap(), e.clone());
        prop_assert_eq!(serialize_canonical(&e), text);
    }

    /// Grid oracle over exact rationals: with all inputs multiples of 1/1000
    /// the count is floor((max - min) / step) + 1 in integer arithmetic.
    #[test]
    fn grid_matches_rational_oracle(
        axes in proptest::collection::vec((-2000i64..2000, 0i64..3000, 1i64..700), 1..4)
    ) {
        let s = ParameterScan {
            factor_name: (0..axes.len()).map(|i| format!("k{i}")).collect(),
            factor_minimum: axes.iter().map(|a| a.0 as f64 / 1000.0).collect(),
            factor_maximum: axes.iter().map(|a| (a.0 + a.1) as f64 / 1000.0).collect(),
            interval: axes.iter().map(|a| a.2 as f64 / 1000.0).collect(),
        };
        let per_axis: Vec<i64> = axes.iter().map(|a| a.1 / a.2 + 1).collect();
        let pts = design_points(&s);
        prop_assert_eq!(pts.len() as i64, per_axis.iter().product::<i64>());
        prop_assert_eq!(design_point_count(&s) as i64, per_axis.iter().product::<i64>());
        // the odometer index of a point recovers each axis value exactly
        for (idx, p) in pts.iter().enumerate() {
            let mut rem = idx as i64;
            for d in (0..axes.len()).rev() {
                let k = rem % per_axis[d];
                rem /= per_axis[d];
                let exact = (axes[d].0 + k * axes[d].2) as f64 / 1000.0;
                prop_assert!((p[d] - exact).abs() < 1e-9, "{} vs {}", p[d], exact);
                prop_assert!(p[d] <= s.factor_maximum[d] + 1e-12);
            }
        }
    }
}
