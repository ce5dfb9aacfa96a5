use std::cell::RefCell;
use std::collections::BTreeSet;

use serde_json::{Map, Value};

use crate::error::CliError;

/// One experiment: a flat JSON object whose keys are consumed by a command.
pub struct Config {
    text: String,
    map: Map<String, Value>,
    used: RefCell<BTreeSet<String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config {
            key: None,
            line: Some(e.line()),
            message: format!("invalid JSON: {e}"),
        })?;
        let Value::Object(map) = value else {
            return Err(CliError::Config { key: None, line: Some(1), message: "config must be a JSON object".into() });
        };
        Ok(Config { text: text.to_string(), map, used: RefCell::new(BTreeSet::new()) })
    }

    fn line_of(&self, key: &str) -> Option<usize> {
        let needle = format!("\"{key}\"");
        self.text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
    }

    pub fn error(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Config { key: Some(key.to_string()), line: self.line_of(key), message: message.into() }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.used.borrow_mut().insert(key.to_string());
        self.map.get(key)
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn required(&self, key: &str) -> Result<&Value, CliError> {
        self.get(key).ok_or_else(|| self.error(key, "missing required key"))
    }

    fn as_f64(&self, key: &str, v: &Value) -> Result<f64, CliError> {
        v.as_f64().ok_or_else(|| self.error(key, format!("expected a number, got {v}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v = self.required(key)?;
        self.as_f64(key, v)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.get(key) {
            Some(v) => self.as_f64(key, v),
            None => Ok(default),
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.get(key) {
            Some(Value::Null) | None => Ok(None),
            Some(v) => self.as_f64(key, v).map(Some),
        }
    }

    pub fn positive(&self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        let v = match default {
            Some(d) => self.f64_or(key, d)?,
            None => self.f64(key)?,
        };
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.error(key, format!("must be positive and finite, got {v}")));
        }
        Ok(v)
    }

    pub fn int_or(&self, key: &str, default: i64) -> Result<i64, CliError> {
        match self.get(key) {
            Some(v) => v.as_i64().ok_or_else(|| self.error(key, format!("expected an integer, got {v}"))),
            None => Ok(default),
        }
    }

    pub fn usize(&self, key: &str, default: Option<usize>) -> Result<usize, CliError> {
        match (self.get(key), default) {
            (Some(v), _) => v
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| self.error(key, format!("expected a non-negative integer, got {v}"))),
            (None, Some(d)) => Ok(d),
            (None, None) => Err(self.error(key, "missing required key")),
        }
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> Result<&'a str, CliError> {
        match self.get(key) {
            Some(v) => v.as_str().ok_or_else(|| self.error(key, format!("expected a string, got {v}"))),
            None => Ok(default),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.required(key)?;
        self.list_of(key, v)
    }

    pub fn f64_list_or(&self, key: &str, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
        match self.get(key) {
            Some(v) => self.list_of(key, v),
            None => Ok(default),
        }
    }

    fn list_of(&self, key: &str, v: &Value) -> Result<Vec<f64>, CliError> {
        let arr = v.as_array().ok_or_else(|| self.error(key, "expected an array of numbers"))?;
        arr.iter().map(|x| self.as_f64(key, x)).collect()
    }

    pub fn matrix(&self, key: &str) -> Result<Vec<Vec<f64>>, CliError> {
        let v = self.required(key)?;
        let rows = v.as_array().ok_or_else(|| self.error(key, "expected an array of rows"))?;
        rows.iter().map(|r| self.list_of(key, r)).collect()
    }

    pub fn raw(&self, key: &str) -> Option<&Value> {
        self.get(key)
    }

    /// Rejects keys no command consumed.
    pub fn finish(&self) -> Result<(), CliError> {
        let used = self.used.borrow();
        match self.map.keys().find(|k| !used.contains(*k) && k.as_str() != "command") {
            Some(k) => Err(self.error(k, "unknown key")),
            None => Ok(()),
        }
    }

    pub fn command(&self) -> Option<&str> {
        self.map.get("command").and_then(Value::as_str)
    }
}
