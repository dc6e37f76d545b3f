use std::fs;
use std::path::Path;

use katetov::{Error, Result};
use serde_json::{json, Map, Value};

use crate::config::{Format, OutArgs};

/// Line-oriented summary of one command, with a JSON twin.
pub struct Report {
    command: &'static str,
    pub passed: bool,
    lines: Vec<String>,
    data: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str) -> Self {
        Report {
            command,
            passed: true,
            lines: Vec::new(),
            data: Map::new(),
        }
    }

    pub fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    pub fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.data.insert(key.into(), v.into());
    }

    pub fn fail(&mut self, s: impl Into<String>) {
        self.passed = false;
        self.lines.push(format!("FAIL {}", s.into()));
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            out.push_str(l);
            out.push('\n');
        }
        out.push_str(&format!("result: {}\n", if self.passed { "pass" } else { "counterexample" }));
        out
    }

    pub fn to_json(&self) -> Value {
        let mut m = self.data.clone();
        m.insert("command".into(), json!(self.command));
        m.insert("passed".into(), json!(self.passed));
        m.insert("lines".into(), json!(self.lines));
        Value::Object(m)
    }
}

/// What a command can write to `--out`.
#[derive(Default)]
pub struct Artifact {
    pub json: Option<Value>,
    pub dot: Option<String>,
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::Format(format!("cannot write {}: {e}", path.display())))
}

/// Prints the report, then writes the artifact and sidecar if asked.
pub fn emit(report: &Report, artifact: Artifact, out: &OutArgs) -> Result<()> {
    if let Some(path) = &out.out {
        let body = match out.format {
            Format::Json => artifact
                .json
                .as_ref()
                .map(pretty)
                .ok_or_else(|| Error::Contract(format!("{} has no JSON artifact", report.command)))?,
            Format::Dot => artifact
                .dot
                .ok_or_else(|| Error::Contract(format!("--format dot is not available for {}", report.command)))?,
            Format::ReportText => report.text(),
        };
        write(path, &body)?;
    }
    if let Some(path) = &out.report {
        write(path, &pretty(&report.to_json()))?;
    }
    print!("{}", report.text());
    Ok(())
}
