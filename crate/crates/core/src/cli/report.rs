use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Text,
    Structured,
}

/// Tolerances and knobs a run used, echoed in every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub tol_rank: f64,
    pub tol_feas: f64,
    pub gap: f64,
    pub max_iter: usize,
    pub grid_h: f64,
    pub seed: u64,
    pub samples: usize,
    pub ratio_tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub settings: Settings,
    pub result: Value,
}

impl Report {
    pub fn render(&self, format: ReportFormat) -> String {
        let value = plain_vectors(serde_json::to_value(self).expect("reports serialise"));
        match format {
            ReportFormat::Structured => {
                let mut s = serde_json::to_string_pretty(&value).expect("reports serialise");
                s.push('\n');
                s
            }
            ReportFormat::Text => {
                let mut out = String::new();
                flatten("", &value, &mut out);
                out
            }
        }
    }
}

/// nalgebra serialises a column vector as `[data, rows, null]`; reports show
/// just `data`.
pub fn plain_vectors(v: Value) -> Value {
    match v {
        Value::Array(items) => {
            let is_vector = items.len() == 3
                && items[2].is_null()
                && matches!((&items[0], items[1].as_u64()),
                    (Value::Array(data), Some(rows)) if data.len() as u64 == rows && data.iter().all(Value::is_number));
            if is_vector {
                items.into_iter().next().expect("three items")
            } else {
                Value::Array(items.into_iter().map(plain_vectors).collect())
            }
        }
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, x)| (k, plain_vectors(x))).collect()),
        other => other,
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|x| x.is_number() || x.is_string() || x.is_boolean()) => {
            let parts: Vec<String> = items.iter().filter_map(scalar).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        _ => None,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    if let Some(s) = scalar(v) {
        out.push_str(&format!("{prefix}: {s}\n"));
        return;
    }
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                flatten(&join(k), item, out);
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), item, out);
            }
        }
        _ => unreachable!("scalars handled above"),
    }
}
