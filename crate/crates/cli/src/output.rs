use std::io::Write;

use serde_json::{json, Value};

use crate::campaign::Outcome;
use crate::config::{ExperimentConfig, Format};

pub const SCHEMA_VERSION: u32 = 1;

/// JSON-lines: a header with the schema version and resolved config, one
/// line per trial in trial order, and a final line with `"summary": true`.
pub fn write_jsonl(w: &mut dyn Write, config: &ExperimentConfig, outcome: &Outcome) -> anyhow::Result<()> {
    let header = json!({
        "schema_version": SCHEMA_VERSION,
        "command": config.command.name(),
        "config": config,
    });
    writeln!(w, "{header}")?;
    for r in &outcome.records {
        writeln!(w, "{}", r.to_json())?;
    }
    let mut summary = outcome.summary.clone();
    summary.insert("summary".into(), true.into());
    summary.insert("trials".into(), outcome.records.len().into());
    summary.insert("failed_assertions".into(), outcome.failed_assertions().into());
    summary.insert("errors".into(), outcome.errors().into());
    writeln!(w, "{}", Value::Object(summary))?;
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Long-format CSV, `schema_version,kind,trial,key,value`, so trials of any
/// shape and the summary share one header. Nested values are JSON strings.
pub fn write_csv(w: &mut dyn Write, config: &ExperimentConfig, outcome: &Outcome) -> anyhow::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["schema_version", "kind", "trial", "key", "value"])?;
    let version = SCHEMA_VERSION.to_string();
    if let Value::Object(cfg) = json!(config) {
        for (k, v) in &cfg {
            out.write_record([version.as_str(), "config", "", k, &cell(v)])?;
        }
    }
    for r in &outcome.records {
        let trial = r.trial.to_string();
        if let Value::Object(map) = r.to_json() {
            for (k, v) in map.iter().filter(|(k, _)| k.as_str() != "trial") {
                out.write_record([version.as_str(), "trial", &trial, k, &cell(v)])?;
            }
        }
    }
    let counts = [
        ("trials", outcome.records.len()),
        ("failed_assertions", outcome.failed_assertions()),
        ("errors", outcome.errors()),
    ];
    for (k, v) in counts {
        out.write_record([version.as_str(), "summary", "", k, &v.to_string()])?;
    }
    for (k, v) in &outcome.summary {
        out.write_record([version.as_str(), "summary", "", k, &cell(v)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write(w: &mut dyn Write, config: &ExperimentConfig, outcome: &Outcome) -> anyhow::Result<()> {
    match config.format {
        Format::Jsonl => write_jsonl(w, config, outcome),
        Format::Csv => write_csv(w, config, outcome),
    }
}
