use std::fmt;

use crate::semantics::ValueType;

/// Maximum string length in Unicode scalar values. Longer strings are
/// truncated silently.
pub const STRING_CAP: usize = 4096;

/// A runtime value. Always an owned copy; the language has no references.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
}

impl Value {
    /// Build a string value, enforcing [`STRING_CAP`].
    pub fn string(s: impl Into<String>) -> Self {
        Value::Str(truncate(s.into()))
    }

    pub fn value_type(&self) -> ValueType {
        match self {
            Value::Int(_) => ValueType::Int,
            Value::Float(_) => ValueType::Float,
            Value::Bool(_) => ValueType::Bool,
            Value::Str(_) => ValueType::String,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(v) => Some(v),
            _ => None,
        }
    }

    /// Text produced by the `string` builtin.
    pub fn render(&self) -> String {
        match self {
            Value::Int(v) => render_int(*v),
            Value::Float(v) => render_float(*v),
            Value::Bool(v) => render_bool(*v),
            Value::Str(s) => s.clone(),
        }
    }

    /// Unambiguous rendering for variable dumps: strings are quoted.
    pub fn dump_repr(&self) -> String {
        match self {
            Value::Str(s) => format!("{s:?}"),
            other => other.render(),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn render_int(v: i64) -> String {
    v.to_string()
}

/// Shortest representation that round-trips, always marked as a float
/// (`1.0`, `1e300`, `NaN`, `inf`).
pub fn render_float(v: f64) -> String {
    format!("{v:?}")
}

pub fn render_bool(v: bool) -> String {
    if v { "true" } else { "false" }.to_string()
}

/// Cut `s` to at most [`STRING_CAP`] characters.
pub fn truncate(mut s: String) -> String {
    // Fast path: byte length bounds char count from above.
    if s.len() <= STRING_CAP {
        return s;
    }
    if let Some((idx, _)) = s.char_indices().nth(STRING_CAP) {
        s.truncate(idx);
    }
    s
}
