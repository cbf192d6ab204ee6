//! The `rnet` reaction-network model format.
//!
//! ```json
//! {"species": [{"name": "s", "init": 990}, {"name": "i", "init": 10}],
//!  "reactions": [{"reactants": ["s", "i"], "products": ["i", "i"], "rate": 0.001, "parameter": "k1"}],
//!  "parameters": {"k1": 1.0}}
//! ```
//!
//! A reaction's rate constant is `rate * parameters[parameter]`, with `rate`
//! defaulting to 1 and the parameter factor to 1 when absent. Reactant lists
//! are multisets; kinetics are stochastic mass action.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::BackendError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Species {
    pub name: String,
    pub init: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reaction {
    #[serde(default)]
    pub reactants: Vec<String>,
    #[serde(default)]
    pub products: Vec<String>,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
}

fn one() -> f64 {
    1.0
}

fn is_one(v: &f64) -> bool {
    *v == 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionModel {
    pub species: Vec<Species>,
    #[serde(default)]
    pub reactions: Vec<Reaction>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

/// Reaction with species resolved to indices, ready for simulation.
#[derive(Debug, Clone)]
pub(crate) struct CompiledReaction {
    pub k: f64,
    /// (species index, multiplicity)
    pub reactants: Vec<(usize, u64)>,
    /// net change per species index
    pub delta: Vec<(usize, i64)>,
}

fn exec(msg: impl Into<String>) -> BackendError {
    BackendError::ExecError(msg.into())
}

impl ReactionModel {
    pub fn parse(text: &str) -> Result<Self, BackendError> {
        let m: ReactionModel = serde_json::from_str(text).map_err(|e| exec(format!("invalid rnet model: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species.iter().position(|s| s.name == name)
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        for (i, s) in self.species.iter().enumerate() {
            if s.name.is_empty() || self.species[..i].iter().any(|o| o.name == s.name) {
                return Err(exec(format!("species name `{}` is empty or duplicated", s.name)));
            }
        }
        for (name, v) in &self.parameters {
            if !v.is_finite() || *v < 0.0 {
                return Err(exec(format!("parameter `{name}` must be a non-negative number")));
            }
        }
        for (j, r) in self.reactions.iter().enumerate() {
            if !r.rate.is_finite() || r.rate < 0.0 {
                return Err(exec(format!("reaction {j} has a negative or non-finite rate")));
            }
            for s in r.reactants.iter().chain(&r.products) {
                if self.species_index(s).is_none() {
                    return Err(exec(format!("reaction {j} references unknown species `{s}`")));
                }
            }
            if let Some(p) = &r.parameter {
                if !self.parameters.contains_key(p) {
                    return Err(exec(format!("reaction {j} references unknown parameter `{p}`")));
                }
            }
        }
        Ok(())
    }

    /// Sets a parameter value or, for a species name, its initial count.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), BackendError> {
        if !value.is_finite() || value < 0.0 {
            return Err(exec(format!("value {value} for `{name}` must be non-negative")));
        }
        if let Some(p) = self.parameters.get_mut(name) {
            *p = value;
            return Ok(());
        }
        if let Some(i) = self.species_index(name) {
            self.species[i].init = value.round() as u64;
            return Ok(());
        }
        Err(exec(format!("model has no parameter or species named `{name}`")))
    }

    pub(crate) fn compile(&self) -> Vec<CompiledReaction> {
        self.reactions
            .iter()
            .map(|r| {
                let k = r.rate * r.parameter.as_ref().map_or(1.0, |p| self.parameters[p]);
                let mut reactants: BTreeMap<usize, u64> = BTreeMap::new();
                let mut delta: BTreeMap<usize, i64> = BTreeMap::new();
                for s in &r.reactants {
                    let i = self.species_index(s).expect("validated");
                    *reactants.entry(i).or_default() += 1;
                    *delta.entry(i).or_default() -= 1;
                }
                for s in &r.products {
                    *delta.entry(self.species_index(s).expect("validated")).or_default() += 1;
                }
                CompiledReaction {
                    k,
                    reactants: reactants.into_iter().collect(),
                    delta: delta.into_iter().filter(|(_, d)| *d != 0).collect(),
                }
            })
            .collect()
    }

    pub fn initial_state(&self) -> Vec<u64> {
        self.species.iter().map(|s| s.init).collect()
    }
}
