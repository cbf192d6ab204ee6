use std::collections::BTreeSet;

use serde_json::{Map, Value};

use super::{violation, CanonError};

/// Strict field access on one JSON object, remembering where it sits in the
/// document and which keys were consumed.
pub(super) struct Reader<'a> {
    path: String,
    map: &'a Map<String, Value>,
    seen: BTreeSet<&'a str>,
}

type R<T> = Result<T, CanonError>;

impl<'a> Reader<'a> {
    pub fn new(path: impl Into<String>, map: &'a Map<String, Value>) -> Self {
        Reader { path: path.into(), map, seen: BTreeSet::new() }
    }

    pub fn path(&self) -> String {
        if self.path.is_empty() {
            "$".to_string()
        } else {
            self.path.clone()
        }
    }

    pub fn path_of(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn get(&mut self, key: &str) -> Option<&'a Value> {
        let (k, v) = self.map.get_key_value(key)?;
        self.seen.insert(k.as_str());
        Some(v)
    }

    fn required(&mut self, key: &str) -> R<&'a Value> {
        self.get(key).ok_or_else(|| violation(self.path_of(key), "required field missing"))
    }

    pub fn object(&mut self, key: &str) -> R<Reader<'a>> {
        let path = self.path_of(key);
        match self.required(key)? {
            Value::Object(m) => Ok(Reader::new(path, m)),
            _ => Err(violation(path, "expected an object")),
        }
    }

    pub fn opt_object(&mut self, key: &str) -> R<Option<Reader<'a>>> {
        let path = self.path_of(key);
        match self.get(key) {
            None => Ok(None),
            Some(Value::Object(m)) => Ok(Some(Reader::new(path, m))),
            Some(_) => Err(violation(path, "expected an object")),
        }
    }

    pub fn keys(&self) -> Vec<String> {
        self.map.keys().cloned().collect()
    }

    pub fn objects(&mut self, key: &str) -> R<Vec<Reader<'a>>> {
        let path = self.path_of(key);
        let v = self.required(key)?;
        Self::object_list(path, v)
    }

    pub fn opt_objects(&mut self, key: &str) -> R<Option<Vec<Reader<'a>>>> {
        let path = self.path_of(key);
        match self.get(key) {
            None => Ok(None),
            Some(v) => Self::object_list(path, v).map(Some),
        }
    }

    fn object_list(path: String, v: &'a Value) -> R<Vec<Reader<'a>>> {
        let Value::Array(items) = v else {
            return Err(violation(path, "expected a list"));
        };
        items
            .iter()
            .enumerate()
            .map(|(i, item)| match item {
                Value::Object(m) => Ok(Reader::new(format!("{path}[{i}]"), m)),
                _ => Err(violation(format!("{path}[{i}]"), "expected an object")),
            })
            .collect()
    }

    pub fn string(&mut self, key: &str) -> R<String> {
        match self.required(key)? {
            Value::String(s) => Ok(s.clone()),
            _ => Err(violation(self.path_of(key), "expected a string")),
        }
    }

    pub fn opt_string(&mut self, key: &str) -> R<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(violation(self.path_of(key), "expected a string")),
        }
    }

    pub fn number(&mut self, key: &str) -> R<f64> {
        match self.required(key)? {
            Value::Number(n) => Ok(n.as_f64().unwrap_or(f64::NAN)),
            _ => Err(violation(self.path_of(key), "expected a number")),
        }
    }

    pub fn boolean(&mut self, key: &str) -> R<bool> {
        match self.required(key)? {
            Value::Bool(b) => Ok(*b),
            _ => Err(violation(self.path_of(key), "expected a boolean")),
        }
    }

    pub fn positive_int(&mut self, key: &str) -> R<u64> {
        let path = self.path_of(key);
        match self.required(key)? {
            Value::Number(n) => match n.as_u64() {
                Some(0) => Err(violation(path, "must be positive")),
                Some(v) => Ok(v),
                None => match n.as_f64() {
                    Some(f) if f >= 1.0 && f.fract() == 0.0 && f < 9.0e15 => Ok(f as u64),
                    _ => Err(violation(path, "must be a positive integer")),
                },
            },
            _ => Err(violation(path, "expected a positive integer")),
        }
    }

    pub fn strings(&mut self, key: &str) -> R<Vec<String>> {
        let path = self.path_of(key);
        let Value::Array(items) = self.required(key)? else {
            return Err(violation(path, "expected a list of strings"));
        };
        items
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::String(s) => Ok(s.clone()),
                _ => Err(violation(format!("{path}[{i}]"), "expected a string")),
            })
            .collect()
    }

    pub fn numbers(&mut self, key: &str) -> R<Vec<f64>> {
        let path = self.path_of(key);
        let Value::Array(items) = self.required(key)? else {
            return Err(violation(path, "expected a list of numbers"));
        };
        items
            .iter()
            .enumerate()
            .map(|(i, v)| match v {
                Value::Number(n) => Ok(n.as_f64().unwrap_or(f64::NAN)),
                _ => Err(violation(format!("{path}[{i}]"), "expected a number")),
            })
            .collect()
    }

    /// Rejects keys that were never read.
    pub fn finish(self) -> R<()> {
        for k in self.map.keys() {
            if !self.seen.contains(k.as_str()) {
                return Err(violation(self.path_of(k), "unknown field"));
            }
        }
        Ok(())
    }
}
