//! Structured reports and their JSON rendering.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u64 = 1;

/// How a measured value is compared with its threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Relation {
    /// `value ≤ threshold`.
    AtMost(f64),
    /// `value ≥ threshold`.
    AtLeast(f64),
    /// `lo ≤ value ≤ hi`.
    Within(f64, f64),
    /// `value = threshold` exactly (dimensions).
    Equals(f64),
}

impl Relation {
    fn holds(self, v: f64) -> bool {
        match self {
            Relation::AtMost(t) => v <= t,
            Relation::AtLeast(t) => v >= t,
            Relation::Within(lo, hi) => (lo..=hi).contains(&v),
            Relation::Equals(t) => v == t,
        }
    }

    fn to_json(self) -> Value {
        match self {
            Relation::AtMost(t) => json!({"relation": "at_most", "threshold": num(t)}),
            Relation::AtLeast(t) => json!({"relation": "at_least", "threshold": num(t)}),
            Relation::Within(lo, hi) => json!({"relation": "within", "threshold": [num(lo), num(hi)]}),
            Relation::Equals(t) => json!({"relation": "equals", "threshold": num(t)}),
        }
    }
}

/// One named check. A check without a value was skipped and does not gate.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: Option<f64>,
    pub relation: Relation,
    pub note: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, relation: Relation) -> Self {
        Self {
            name: name.into(),
            value: Some(value),
            relation,
            note: None,
        }
    }

    pub fn skipped(name: impl Into<String>, relation: Relation, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            value: None,
            relation,
            note: Some(note.into()),
        }
    }

    pub fn passed(&self) -> bool {
        self.value.is_none_or(|v| self.relation.holds(v))
    }

    fn to_json(&self) -> Value {
        let mut m = match self.relation.to_json() {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        m.insert("name".into(), json!(self.name));
        m.insert("value".into(), self.value.map_or(Value::Null, num));
        m.insert("passed".into(), json!(self.passed()));
        if let Some(n) = &self.note {
            m.insert("note".into(), json!(n));
        }
        Value::Object(m)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorInfo {
    pub stage: String,
    pub kind: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub stages: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub error: Option<ErrorInfo>,
    pub timings: BTreeMap<String, f64>,
    pub exit_code: i32,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn status(&self) -> &'static str {
        match (&self.error, self.all_passed()) {
            (Some(_), _) => "error",
            (None, true) => "ok",
            (None, false) => "checks_failed",
        }
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema_version".into(), json!(SCHEMA_VERSION));
        m.insert("command".into(), json!(self.command));
        m.insert("status".into(), json!(self.status()));
        m.insert("exit_code".into(), json!(self.exit_code));
        m.insert("config".into(), self.config.clone());
        m.insert("stages".into(), Value::Object(self.stages.clone().into_iter().collect()));
        m.insert("checks".into(), Value::Array(self.checks.iter().map(Check::to_json).collect()));
        m.insert("all_checks_passed".into(), json!(self.error.is_none() && self.all_passed()));
        m.insert(
            "error".into(),
            self.error
                .as_ref()
                .map_or(Value::Null, |e| json!({"stage": e.stage, "kind": e.kind, "message": e.message})),
        );
        m.insert(
            "timings".into(),
            Value::Object(self.timings.iter().map(|(k, v)| (k.clone(), num(*v))).collect()),
        );
        Value::Object(m)
    }

    /// The report without its `timings` key, for reproducibility checks.
    pub fn to_json_without_timings(&self) -> Value {
        let mut v = self.to_json();
        if let Value::Object(m) = &mut v {
            m.remove("timings");
        }
        v
    }
}

/// A finite float as a JSON number, anything else as `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn nums<'a>(xs: impl IntoIterator<Item = &'a f64>) -> Value {
    Value::Array(xs.into_iter().map(|&x| num(x)).collect())
}

/// Pretty JSON with every float written with 17 significant digits.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn write_value(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize, out: &mut String| out.extend(std::iter::repeat_n("  ", d));
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) if !n.is_f64() => {
                let _ = write!(out, "{i}");
            }
            (_, Some(u), _) if !n.is_f64() => {
                let _ = write!(out, "{u}");
            }
            (_, _, Some(f)) => {
                let _ = write!(out, "{f:.16e}");
            }
            _ => out.push_str("null"),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_value(x, depth, out);
            }
            out.push(']');
        }
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(depth + 1, out);
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                pad(depth + 1, out);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, depth + 1, out);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            pad(depth, out);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let s = render(&json!({"a": num(0.1), "b": 3, "c": [num(-2.5e-7)]}));
        assert!(s.contains("\"a\": 1.0000000000000001e-1"));
        assert!(s.contains("\"b\": 3"));
        assert!(s.contains("-2.5000000000000001e-7") || s.contains("-2.4999999999999999e-7"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64().unwrap(), 0.1);
    }

    #[test]
    fn skipped_checks_do_not_gate() {
        let mut r = Report::default();
        r.checks.push(Check::skipped("x", Relation::AtMost(1.0), "flat"));
        r.checks.push(Check::new("y", 0.5, Relation::Within(0.0, 1.0)));
        assert!(r.all_passed());
        r.checks.push(Check::new("z", 2.0, Relation::AtMost(1.0)));
        assert_eq!(r.status(), "checks_failed");
    }
}
