use std::fmt::Write as _;

use ifsproj_core::{Tolerances, VERSION};
use serde::Serialize;
use serde_json::Value;

/// Envelope shared by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub fixture: Option<String>,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub tolerance_profile: String,
    pub tolerances: Tolerances,
    pub result: Value,
}

impl Report {
    pub fn new(command: &str, ctx: &crate::Context, fixture: Option<String>, seed: Option<u64>, result: Value) -> Self {
        Self {
            command: command.into(),
            fixture,
            seed,
            version: VERSION,
            tolerance_profile: ctx.profile.clone(),
            tolerances: ctx.tol,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        if let Some(f) = &self.fixture {
            let _ = writeln!(out, "fixture: {f}");
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed: {s}");
        }
        let _ = writeln!(out, "version: {}", self.version);
        let t = &self.tolerances;
        let _ = writeln!(
            out,
            "tolerances: {} (num {:e}, orth {:e}, dim {:e})",
            self.tolerance_profile, t.num, t.orth, t.dim
        );
        render(&mut out, &self.result, 0);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(xs) if xs.iter().all(|x| !x.is_array() && !x.is_object()) => {
            let inner: Vec<String> = xs.iter().filter_map(scalar).collect();
            Some(format!("[{}]", inner.join(", ")))
        }
        _ => None,
    }
}

fn render(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(out, x, indent + 1);
                    }
                }
            }
        }
        Value::Array(xs) => {
            for x in xs {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        render(out, x, indent + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}
