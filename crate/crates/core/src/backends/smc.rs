//! Bounded temporal properties for statistical model checking.
//!
//! `F[<=t](lhs op c)` holds if the comparison is true at some observation
//! time up to t; `G[<=t](lhs op c)` if it is true at all of them. `lhs` is an
//! observation alias or an observable expression, `op` one of
//! `<`, `<=`, `>`, `>=`, `==`, `!=`.

use super::BackendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Temporal {
    Eventually,
    Globally,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub temporal: Temporal,
    pub bound: f64,
    pub lhs: String,
    pub op: CmpOp,
    pub rhs: f64,
}

fn bad(text: &str, why: &str) -> BackendError {
    BackendError::ExecError(format!("cannot read property `{text}`: {why}"))
}

impl Property {
    pub fn parse(text: &str) -> Result<Self, BackendError> {
        let s = text.trim();
        let temporal = match s.chars().next() {
            Some('F') => Temporal::Eventually,
            Some('G') => Temporal::Globally,
            _ => return Err(bad(text, "expected F[<=t](...) or G[<=t](...)")),
        };
        let rest = s[1..].trim_start();
        let rest = rest.strip_prefix('[').ok_or_else(|| bad(text, "missing time bound"))?;
        let (bound, rest) = rest.split_once(']').ok_or_else(|| bad(text, "unclosed time bound"))?;
        let bound = bound.trim().strip_prefix("<=").ok_or_else(|| bad(text, "bound must read <=t"))?;
        let bound: f64 = bound.trim().parse().map_err(|_| bad(text, "time bound is not a number"))?;
        let body = rest
            .trim()
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| bad(text, "body must be parenthesised"))?;
        const OPS: [(&str, CmpOp); 6] = [
            ("<=", CmpOp::Le),
            (">=", CmpOp::Ge),
            ("==", CmpOp::Eq),
            ("!=", CmpOp::Ne),
            ("<", CmpOp::Lt),
            (">", CmpOp::Gt),
        ];
        for (sym, op) in OPS {
            if let Some((lhs, rhs)) = body.split_once(sym) {
                let rhs: f64 = rhs.trim().parse().map_err(|_| bad(text, "threshold is not a number"))?;
                let lhs = lhs.trim();
                if lhs.is_empty() {
                    return Err(bad(text, "missing left-hand side"));
                }
                return Ok(Property { temporal, bound, lhs: lhs.to_string(), op, rhs });
            }
        }
        Err(bad(text, "no comparison operator"))
    }

    /// Evaluates on a sampled trajectory of (time, value) pairs.
    pub fn holds(&self, samples: impl IntoIterator<Item = (f64, f64)>) -> bool {
        let mut within = samples.into_iter().filter(|(t, _)| *t <= self.bound).map(|(_, v)| self.op.apply(v, self.rhs));
        match self.temporal {
            Temporal::Eventually => within.any(|b| b),
            Temporal::Globally => within.all(|b| b),
        }
    }
}
