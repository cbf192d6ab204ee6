//! Observation expressions: `count("x")`, bare species names and `+` sums
//! of those, optionally scaled by a numeric factor (`2*count("x")`).

use super::rnet::ReactionModel;
use super::BackendError;

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    terms: Vec<(f64, usize)>,
}

impl Observable {
    pub fn compile(expr: &str, model: &ReactionModel) -> Result<Self, BackendError> {
        let mut terms = Vec::new();
        for raw in expr.split('+') {
            let term = raw.trim();
            let (coef, body) = match term.split_once('*') {
                Some((c, b)) => {
                    let c: f64 = c.trim().parse().map_err(|_| bad(expr, "coefficient is not a number"))?;
                    (c, b.trim())
                }
                None => (1.0, term),
            };
            let name = species_name(body).ok_or_else(|| bad(expr, "expected count(\"name\") or a species name"))?;
            let idx = model
                .species_index(name)
                .ok_or_else(|| BackendError::ExecError(format!("observable `{expr}` refers to unknown species `{name}`")))?;
            terms.push((coef, idx));
        }
        Ok(Observable { terms })
    }

    pub fn eval(&self, state: &[u64]) -> f64 {
        self.terms.iter().map(|&(c, i)| c * state[i] as f64).sum()
    }
}

fn bad(expr: &str, why: &str) -> BackendError {
    BackendError::ExecError(format!("cannot read observable `{expr}`: {why}"))
}

/// Species named by `count("x")` or a bare identifier.
pub fn species_name(term: &str) -> Option<&str> {
    let term = term.trim();
    if let Some(inner) = term.strip_prefix("count(").and_then(|r| r.strip_suffix(')')) {
        let inner = inner.trim();
        let unquoted = inner.strip_prefix('"').and_then(|r| r.strip_suffix('"'))?;
        return (!unquoted.is_empty()).then_some(unquoted);
    }
    is_identifier(term).then_some(term)
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-')
}
