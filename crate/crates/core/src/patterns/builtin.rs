use std::sync::OnceLock;

use serde_json::Value;

use super::{AttrPredicate, Pattern, PatternEdge, PatternNode};
use crate::prov_graph::{attr, DepKind, EntityKind};

use EntityKind::{Data, Requirement, SimulationData, SimulationExperiment, SimulationModel};

/// The eight structural activity signatures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinPattern {
    RefiningSM,
    CreatingSM,
    ReimplementingSM,
    ComposingSM,
    CalibratingSM,
    ValidatingSM,
    AnalyzingSM,
    SensitivityAnalysis,
}

/// Trigger patterns name their variables with primes (`SM'`, `SM''`, `X`)
/// so that they never clash with the experiment side (`SM`, `Y`, `SE`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternRole {
    Trigger,
    Experiment,
}

impl BuiltinPattern {
    pub const ALL: [BuiltinPattern; 8] = [
        BuiltinPattern::RefiningSM,
        BuiltinPattern::CreatingSM,
        BuiltinPattern::ReimplementingSM,
        BuiltinPattern::ComposingSM,
        BuiltinPattern::CalibratingSM,
        BuiltinPattern::ValidatingSM,
        BuiltinPattern::AnalyzingSM,
        BuiltinPattern::SensitivityAnalysis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinPattern::RefiningSM => "RefiningSM",
            BuiltinPattern::CreatingSM => "CreatingSM",
            BuiltinPattern::ReimplementingSM => "ReimplementingSM",
            BuiltinPattern::ComposingSM => "ComposingSM",
            BuiltinPattern::CalibratingSM => "CalibratingSM",
            BuiltinPattern::ValidatingSM => "ValidatingSM",
            BuiltinPattern::AnalyzingSM => "AnalyzingSM",
            BuiltinPattern::SensitivityAnalysis => "SensitivityAnalysis",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Whether the activity signature produces a simulation model.
    pub fn generates_model(self) -> bool {
        matches!(
            self,
            BuiltinPattern::RefiningSM
                | BuiltinPattern::CreatingSM
                | BuiltinPattern::ReimplementingSM
                | BuiltinPattern::ComposingSM
                | BuiltinPattern::CalibratingSM
        )
    }

    pub fn pattern(self, role: PatternRole) -> &'static Pattern {
        cached(self, role)
    }

    fn build(self, role: PatternRole) -> Pattern {
        let trig = role == PatternRole::Trigger;
        let v = |exp: &str, t: &str| if trig { t.to_string() } else { exp.to_string() };
        let act = if trig { "t" } else { "e" };
        let sm = v("SM", "SM'");
        let rest = v("Y", "X");
        let new_sm = v("SMnew", "SM''");
        let se = v("SE", "SE'");
        let sd = v("SD", "SD'");

        let mut b = Builder::new(act);
        match self {
            BuiltinPattern::RefiningSM => {
                b.uses(PatternNode::entity(&sm, &[SimulationModel]));
                b.uses(PatternNode::multi(&rest, &[SimulationModel]).at_least(1));
                b.generates(PatternNode::entity(&new_sm, &[SimulationModel]));
            }
            BuiltinPattern::CreatingSM => {
                b.uses(PatternNode::multi(&rest, &[SimulationModel]));
                b.generates(PatternNode::entity(&new_sm, &[SimulationModel]));
            }
            BuiltinPattern::ReimplementingSM => {
                b.uses(PatternNode::entity(&sm, &[SimulationModel]));
                b.generates(PatternNode::entity(&new_sm, &[SimulationModel]));
            }
            BuiltinPattern::ComposingSM => {
                b.uses(PatternNode::entity(format!("{sm}1"), &[SimulationModel]));
                b.uses(PatternNode::entity(format!("{sm}2"), &[SimulationModel]));
                b.uses(PatternNode::multi(&rest, &[SimulationModel]));
                b.generates(PatternNode::entity(&new_sm, &[SimulationModel]));
            }
            BuiltinPattern::CalibratingSM => {
                b.uses(PatternNode::entity(&sm, &[SimulationModel]));
                b.uses(PatternNode::entity("D", &[Data, Requirement]).renamed(trig));
                b.uses(PatternNode::multi(&rest, &[SimulationModel]));
                b.generates(PatternNode::entity(&se, &[SimulationExperiment]));
                b.generates(PatternNode::entity(&sd, &[SimulationData]));
                b.generates(PatternNode::entity(if trig { "SM''" } else { "SMcal" }, &[SimulationModel]));
            }
            BuiltinPattern::ValidatingSM => {
                b.uses(PatternNode::entity(&sm, &[SimulationModel]));
                b.uses(PatternNode::entity("D", &[Data, Requirement, SimulationData]).renamed(trig));
                b.uses(PatternNode::multi(&rest, &[SimulationModel]));
                b.generates(PatternNode::entity(&se, &[SimulationExperiment]));
                b.generates(
                    PatternNode::entity(&sd, &[SimulationData]).with_attr(attr::STATUS, AttrPredicate::Present),
                );
            }
            BuiltinPattern::AnalyzingSM | BuiltinPattern::SensitivityAnalysis => {
                b.uses(PatternNode::entity(&sm, &[SimulationModel]));
                b.uses(PatternNode::multi(&rest, &[SimulationModel]));
                let mut se_node = PatternNode::entity(&se, &[SimulationExperiment]);
                if self == BuiltinPattern::SensitivityAnalysis {
                    se_node = se_node.with_attr(
                        attr::EXPERIMENT_TYPE,
                        AttrPredicate::Equals(Value::from("sensitivityAnalysis")),
                    );
                }
                b.generates(se_node);
                b.generates(
                    PatternNode::entity(&sd, &[SimulationData]).with_attr(attr::STATUS, AttrPredicate::Absent),
                );
            }
        }
        b.finish(self.name())
    }
}

impl PatternNode {
    fn renamed(mut self, trigger: bool) -> Self {
        if trigger {
            self.var.push('\'');
        }
        self
    }
}

struct Builder {
    act: String,
    nodes: Vec<PatternNode>,
    edges: Vec<PatternEdge>,
}

impl Builder {
    fn new(act: &str) -> Self {
        Builder { act: act.to_string(), nodes: vec![PatternNode::activity(act)], edges: Vec::new() }
    }

    fn uses(&mut self, node: PatternNode) {
        self.edges.push(PatternEdge { kind: DepKind::Used, from: self.act.clone(), to: node.var.clone() });
        self.nodes.push(node);
    }

    fn generates(&mut self, node: PatternNode) {
        self.edges.push(PatternEdge { kind: DepKind::WasGeneratedBy, from: node.var.clone(), to: self.act.clone() });
        self.nodes.push(node);
    }

    fn finish(self, name: &str) -> Pattern {
        Pattern::new(name, self.nodes, self.edges, Some(self.act)).expect("built-in pattern is well formed")
    }
}

pub(super) fn cached(p: BuiltinPattern, role: PatternRole) -> &'static Pattern {
    static TRIGGER: OnceLock<Vec<Pattern>> = OnceLock::new();
    static EXPERIMENT: OnceLock<Vec<Pattern>> = OnceLock::new();
    let (cell, role) = match role {
        PatternRole::Trigger => (&TRIGGER, PatternRole::Trigger),
        PatternRole::Experiment => (&EXPERIMENT, PatternRole::Experiment),
    };
    let all = cell.get_or_init(|| BuiltinPattern::ALL.iter().map(|p| p.build(role)).collect());
    &all[p as usize]
}
