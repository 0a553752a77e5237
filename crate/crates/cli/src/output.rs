//! JSON emission and the exit-code contract.

use std::fmt::Write as _;

use serde_json::Value;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// A failed job, classified by exit code.
#[derive(Debug)]
pub enum JobError {
    /// Infeasible input or unmet hypotheses; carries a machine-readable report.
    Infeasible { message: String, report: Value },
    /// Malformed input files or arguments the parser could not catch.
    Usage(String),
    /// Anything else.
    Internal(anyhow::Error),
}

impl JobError {
    pub fn infeasible(message: impl ToString) -> Self {
        JobError::Infeasible { message: message.to_string(), report: Value::Null }
    }

    pub fn infeasible_with(message: impl ToString, report: Value) -> Self {
        JobError::Infeasible { message: message.to_string(), report }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            JobError::Infeasible { .. } => EXIT_INFEASIBLE,
            JobError::Usage(_) => EXIT_USAGE,
            JobError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<anyhow::Error> for JobError {
    fn from(e: anyhow::Error) -> Self {
        JobError::Internal(e)
    }
}

impl From<std::io::Error> for JobError {
    fn from(e: std::io::Error) -> Self {
        JobError::Internal(e.into())
    }
}

/// Serializes `value` as JSON. With `exact`, every floating-point number is
/// written with 17 significant digits; otherwise the shortest round-trip
/// form is used.
pub fn to_json_string(value: &Value, exact: bool) -> String {
    if !exact {
        return serde_json::to_string_pretty(value).expect("JSON values always serialize");
    }
    let mut out = String::new();
    write_exact(value, 0, &mut out);
    out
}

fn indent(out: &mut String, level: usize) {
    out.push('\n');
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_exact(value: &Value, level: usize, out: &mut String) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            write!(out, "{x:.16e}").unwrap();
        }
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(out, level + 1);
                write_exact(item, level + 1, out);
            }
            indent(out, level);
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(out, level + 1);
                out.push_str(&serde_json::to_string(k).expect("keys serialize"));
                out.push_str(": ");
                write_exact(v, level + 1, out);
            }
            indent(out, level);
            out.push('}');
        }
        other => out.push_str(&serde_json::to_string(other).expect("JSON values always serialize")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn exact_print_uses_seventeen_digits() {
        let v = json!({"x": 0.1, "n": 3, "list": [1.5, "a"]});
        let s = to_json_string(&v, true);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"n\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
        assert_eq!(back["list"][0].as_f64(), Some(1.5));
    }
}
