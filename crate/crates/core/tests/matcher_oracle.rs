mod common;

use common::oracle::{oracle_match, oracle_match_all};
use common::random_graph::random_graph;
use expreuse::patterns::{classify_activity, is_based_on, match_all, match_anchored, BuiltinPattern, PatternRole};
use expreuse::prov_graph::EntityKind;
use proptest::prelude::*;

fn roles() -> [PatternRole; 2] {
    [PatternRole::Trigger, PatternRole::Experiment]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn anchored_matcher_agrees_with_oracle(seed in any::<u64>(), size in 4usize..=20) {
        let g = random_graph(seed, size);
        for p in BuiltinPattern::ALL {
            for role in roles() {
                let pat = p.pattern(role);
                for a in g.event_log() {
                    let got = match_anchored(&g, pat, a.as_str()).unwrap();
                    prop_assert_eq!(got, oracle_match(&g, pat, a.as_str()), "{} at {}", pat.name(), a);
                }
                prop_assert_eq!(match_all(&g, pat, |_| true), oracle_match_all(&g, pat));
            }
        }
    }

    #[test]
    fn multi_binding_is_maximal(seed in any::<u64>(), size in 4usize..=20) {
        let g = random_graph(seed, size);
        for p in BuiltinPattern::ALL {
            let pat = p.pattern(PatternRole::Experiment);
            for a in g.event_log() {
                if let Some(b) = match_anchored(&g, pat, a.as_str()).unwrap() {
                    // every used entity ends up in the binding
                    let bound = b.node_ids();
                    for u in g.used_by(a.as_str()) {
                        prop_assert!(bound.contains(u));
                    }
                    for o in g.generated_by(a.as_str()) {
                        prop_assert!(bound.contains(o));
                    }
                }
            }
        }
    }

    #[test]
    fn sensitivity_refines_analysis(seed in any::<u64>(), size in 4usize..=20) {
        let g = random_graph(seed, size);
        for a in g.event_log() {
            let c = classify_activity(&g, a.as_str()).unwrap();
            if c.contains("SensitivityAnalysis") {
                prop_assert!(c.contains("AnalyzingSM"));
            }
        }
    }

    #[test]
    fn based_on_is_reflexive_and_transitive(seed in any::<u64>(), size in 4usize..=20) {
        let g = random_graph(seed, size);
        let models: Vec<&str> = g
            .entities()
            .iter()
            .filter(|e| e.kind == EntityKind::SimulationModel)
            .map(|e| e.id.as_str())
            .collect();
        for &a in &models {
            prop_assert!(is_based_on(&g, a, a).unwrap());
            for &b in &models {
                for &c in &models {
                    if is_based_on(&g, b, a).unwrap() && is_based_on(&g, c, b).unwrap() {
                        prop_assert!(is_based_on(&g, c, a).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn random_graphs_exercise_every_pattern() {
    let mut hits = std::collections::BTreeMap::new();
    for seed in 0..200 {
        let g = random_graph(seed, 20);
        for a in g.event_log() {
            for name in classify_activity(&g, a.as_str()).unwrap() {
                *hits.entry(name).or_insert(0) += 1;
            }
        }
    }
    for p in BuiltinPattern::ALL {
        assert!(hits.get(p.name()).copied().unwrap_or(0) > 0, "{} never matched: {hits:?}", p.name());
    }
}
