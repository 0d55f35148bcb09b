//! Report bodies and their JSON / CSV renderings.
//!
//! The body holds everything that must be reproducible. Wall time sits
//! beside it, never inside it.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::Format;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    BoundViolated,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => crate::EXIT_OK,
            Status::BoundViolated => crate::EXIT_BOUND,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub results: Value,
    pub status: Status,
    /// Golden-vector reports carry no wall time so their files are
    /// byte-stable.
    pub timed: bool,
}

impl Report {
    pub fn new(experiment: &str, config: &impl Serialize, seed: Option<u64>, results: Value, violated: bool) -> Result<Self, CliError> {
        Ok(Self {
            experiment: experiment.to_string(),
            config: serde_json::to_value(config).map_err(|e| CliError::Run(e.to_string()))?,
            seed,
            results,
            status: if violated { Status::BoundViolated } else { Status::Pass },
            timed: true,
        })
    }

    pub fn untimed(mut self) -> Self {
        self.timed = false;
        self
    }

    pub fn body(&self) -> Value {
        json!({
            "artifact_version": ARTIFACT_VERSION,
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "config": self.config,
            "seed": self.seed,
            "results": self.results,
            "status": self.status,
        })
    }

    pub fn render(&self, format: Format, wall_time_s: f64) -> Result<String, CliError> {
        let mut top = Map::new();
        top.insert("body".into(), self.body());
        if self.timed {
            top.insert("wall_time_s".into(), json!(wall_time_s));
        }
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&Value::Object(top)).map_err(|e| CliError::Run(e.to_string()))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => to_csv(&Value::Object(top)),
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Two columns, one row per scalar leaf, keys as dotted paths.
fn to_csv(v: &Value) -> Result<String, CliError> {
    let mut rows = Vec::new();
    flatten("", v, &mut rows);
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Run(e.to_string());
    w.write_record(["key", "value"]).map_err(err)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Run(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Run(e.to_string()))
}

/// The reproducible part of a rendered JSON report.
pub fn json_body(rendered: &str) -> Option<Value> {
    serde_json::from_str::<Value>(rendered).ok()?.get("body").cloned()
}
