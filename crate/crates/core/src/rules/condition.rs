//! Rule conditions: boolean combinations of graph predicates over pattern
//! variables.
//!
//! Text form, as used in rule documents:
//!
//! ```text
//! isBasedOn(SM', SM) && differentStudy(SM'', SM) && isValidated(SM)
//! isBasedOn(SM'1, SM) or isBasedOn(SM'2, SM)
//! !hasExperimentType(SE, "sensitivityAnalysis")
//! ```

use std::collections::BTreeSet;
use std::fmt;

use crate::patterns::{self, Binding, PatternError};
use crate::prov_graph::{attr, NodeId, ProvenanceGraph};

use super::RuleError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    IsBasedOn(String, String),
    IsValidated(String),
    DifferentStudy(String, String),
    SameStudy(String, String),
    HasExperimentType(String, String),
    HasStatus(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    True,
    Atom(Atom),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
}

impl Condition {
    pub fn and(parts: Vec<Condition>) -> Self {
        Condition::And(parts)
    }

    pub fn atom(a: Atom) -> Self {
        Condition::Atom(a)
    }

    pub fn negate(c: Condition) -> Self {
        Condition::Not(Box::new(c))
    }

    /// Every pattern variable the condition mentions.
    pub fn vars(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Condition::True => {}
            Condition::Atom(a) => match a {
                Atom::IsBasedOn(x, y) | Atom::DifferentStudy(x, y) | Atom::SameStudy(x, y) => {
                    out.insert(x);
                    out.insert(y);
                }
                Atom::IsValidated(x) | Atom::HasExperimentType(x, _) | Atom::HasStatus(x, _) => {
                    out.insert(x);
                }
            },
            Condition::Not(c) => c.collect_vars(out),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
        }
    }
}

fn lookup<'b>(var: &str, trigger: &'b Binding, experiment: &'b Binding) -> Result<&'b NodeId, RuleError> {
    trigger
        .one(var)
        .or_else(|| experiment.one(var))
        .ok_or_else(|| RuleError::UnboundVariable(var.to_string()))
}

fn pattern_err(e: PatternError) -> RuleError {
    RuleError::Predicate(e.to_string())
}

/// Evaluates `cond` with variables resolved first in the trigger binding,
/// then in the experiment binding.
pub fn evaluate_condition(
    cond: &Condition,
    graph: &ProvenanceGraph,
    trigger: &Binding,
    experiment: &Binding,
) -> Result<bool, RuleError> {
    let id = |v: &str| lookup(v, trigger, experiment).map(NodeId::as_str);
    Ok(match cond {
        Condition::True => true,
        Condition::Not(c) => !evaluate_condition(c, graph, trigger, experiment)?,
        Condition::And(cs) => {
            for c in cs {
                if !evaluate_condition(c, graph, trigger, experiment)? {
                    return Ok(false);
                }
            }
            true
        }
        Condition::Or(cs) => {
            for c in cs {
                if evaluate_condition(c, graph, trigger, experiment)? {
                    return Ok(true);
                }
            }
            false
        }
        Condition::Atom(a) => match a {
            Atom::IsBasedOn(x, y) => patterns::is_based_on(graph, id(x)?, id(y)?).map_err(pattern_err)?,
            Atom::IsValidated(x) => patterns::is_validated(graph, id(x)?).map_err(pattern_err)?,
            Atom::DifferentStudy(x, y) => patterns::different_study(graph, id(x)?, id(y)?).map_err(pattern_err)?,
            Atom::SameStudy(x, y) => patterns::same_study(graph, id(x)?, id(y)?).map_err(pattern_err)?,
            Atom::HasExperimentType(x, t) => {
                let n = id(x)?;
                let e = graph.entity(n).ok_or_else(|| RuleError::UnknownNodeId(NodeId::from(n)))?;
                e.attr_str(attr::EXPERIMENT_TYPE) == Some(t.as_str())
            }
            Atom::HasStatus(x, s) => {
                let n = id(x)?;
                let e = graph.entity(n).ok_or_else(|| RuleError::UnknownNodeId(NodeId::from(n)))?;
                e.attr_str(attr::STATUS) == Some(s.as_str())
            }
        },
    })
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::IsBasedOn(a, b) => write!(f, "isBasedOn({a}, {b})"),
            Atom::IsValidated(a) => write!(f, "isValidated({a})"),
            Atom::DifferentStudy(a, b) => write!(f, "differentStudy({a}, {b})"),
            Atom::SameStudy(a, b) => write!(f, "sameStudy({a}, {b})"),
            Atom::HasExperimentType(a, t) => write!(f, "hasExperimentType({a}, {t:?})"),
            Atom::HasStatus(a, s) => write!(f, "hasStatus({a}, {s:?})"),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, cs: &[Condition], op: &str| -> fmt::Result {
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                match c {
                    Condition::And(_) | Condition::Or(_) => write!(f, "({c})")?,
                    _ => write!(f, "{c}")?,
                }
            }
            Ok(())
        };
        match self {
            Condition::True => f.write_str("true"),
            Condition::Atom(a) => write!(f, "{a}"),
            Condition::Not(c) => match **c {
                Condition::And(_) | Condition::Or(_) => write!(f, "!({c})"),
                _ => write!(f, "!{c}"),
            },
            Condition::And(cs) => join(f, cs, "&&"),
            Condition::Or(cs) => join(f, cs, "||"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    LParen,
    RParen,
    Comma,
    And,
    Or,
    Not,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, RuleError> {
    let err = |m: String| RuleError::ConditionParse(m);
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            '!' | '¬' => {
                out.push(Tok::Not);
                i += 1;
            }
            '∧' => {
                out.push(Tok::And);
                i += 1;
            }
            '∨' => {
                out.push(Tok::Or);
                i += 1;
            }
            '&' | '|' => {
                if chars.get(i + 1) != Some(&c) {
                    return Err(err(format!("expected `{c}{c}` at {i}")));
                }
                out.push(if c == '&' { Tok::And } else { Tok::Or });
                i += 2;
            }
            '"' => {
                let start = i + 1;
                let end = chars[start..].iter().position(|&c| c == '"').map(|p| start + p);
                let Some(end) = end else {
                    return Err(err("unterminated string".into()));
                };
                out.push(Tok::Str(chars[start..end].iter().collect()));
                i = end + 1;
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut s = String::new();
                while i < chars.len() && (chars[i].is_alphanumeric() || "_'′″".contains(chars[i])) {
                    match chars[i] {
                        '′' => s.push('\''),
                        '″' => s.push_str("''"),
                        ch => s.push(ch),
                    }
                    i += 1;
                }
                out.push(match s.as_str() {
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    _ => Tok::Ident(s),
                });
            }
            other => return Err(err(format!("unexpected `{other}` at {i}"))),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<(), RuleError> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(RuleError::ConditionParse(format!("expected {t:?}, found {got:?}"))),
        }
    }

    fn or(&mut self) -> Result<Condition, RuleError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Condition::Or(parts) })
    }

    fn and(&mut self) -> Result<Condition, RuleError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Condition::And(parts) })
    }

    fn unary(&mut self) -> Result<Condition, RuleError> {
        match self.next() {
            Some(Tok::Not) => Ok(Condition::negate(self.unary()?)),
            Some(Tok::LParen) => {
                let c = self.or()?;
                self.expect(Tok::RParen)?;
                Ok(c)
            }
            Some(Tok::Ident(name)) if name == "true" => Ok(Condition::True),
            Some(Tok::Ident(name)) => self.atom(name),
            got => Err(RuleError::ConditionParse(format!("unexpected {got:?}"))),
        }
    }

    fn atom(&mut self, name: String) -> Result<Condition, RuleError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        loop {
            match self.next() {
                Some(Tok::Ident(s)) | Some(Tok::Str(s)) => args.push(s),
                got => return Err(RuleError::ConditionParse(format!("bad argument {got:?} to {name}"))),
            }
            match self.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::RParen) => break,
                got => return Err(RuleError::ConditionParse(format!("expected `,` or `)`, found {got:?}"))),
            }
        }
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(RuleError::ConditionParse(format!("{name} takes {n} arguments, got {}", args.len())))
            }
        };
        let a = |i: usize| args[i].clone();
        let atom = match name.as_str() {
            "isBasedOn" => arity(2).map(|_| Atom::IsBasedOn(a(0), a(1))),
            "isValidated" => arity(1).map(|_| Atom::IsValidated(a(0))),
            "differentStudy" => arity(2).map(|_| Atom::DifferentStudy(a(0), a(1))),
            "sameStudy" => arity(2).map(|_| Atom::SameStudy(a(0), a(1))),
            "hasExperimentType" => arity(2).map(|_| Atom::HasExperimentType(a(0), a(1))),
            "hasStatus" => arity(2).map(|_| Atom::HasStatus(a(0), a(1))),
            other => Err(RuleError::ConditionParse(format!("unknown predicate `{other}`"))),
        }?;
        Ok(Condition::Atom(atom))
    }
}

pub fn parse_condition(text: &str) -> Result<Condition, RuleError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Ok(Condition::True);
    }
    let mut p = Parser { toks, pos: 0 };
    let c = p.or()?;
    if p.pos < p.toks.len() {
        return Err(RuleError::ConditionParse(format!("trailing input at token {}", p.pos)));
    }
    Ok(c)
}
