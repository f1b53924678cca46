use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use varadhan_core::Result;

/// One labelled outcome of a run.
#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub value: String,
    /// Window or sample range the verdict is exact on.
    pub scope: String,
    pub exact: bool,
}

impl Verdict {
    pub fn new(name: impl Into<String>, value: impl ToString, scope: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            value: value.to_string(),
            scope: scope.into(),
            exact: true,
        }
    }
}

/// The machine-readable record of a command; byte-stable for identical inputs.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub version: String,
    /// Input name to `sha256:` digest of file contents or `builtin:` name.
    pub inputs: BTreeMap<String, String>,
    pub verdicts: Vec<Verdict>,
    pub result: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: BTreeMap::new(),
            verdicts: Vec::new(),
            result: serde_json::Value::Null,
        }
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn input(&mut self, name: &str, origin: String) {
        self.inputs.insert(name.to_string(), origin);
    }

    /// Prints the JSON report or the human-readable verdict lines.
    pub fn emit(&self, json: bool) -> Result<()> {
        if json {
            println!("{}", serde_json::to_string_pretty(self)?);
        } else {
            for v in &self.verdicts {
                if v.scope.is_empty() {
                    println!("{}: {}", v.name, v.value);
                } else {
                    println!("{}: {} [{}]", v.name, v.value, v.scope);
                }
            }
        }
        Ok(())
    }
}

pub fn digest(bytes: &[u8]) -> String {
    format!("sha256:{:x}", Sha256::digest(bytes))
}

pub fn write_artifact(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    if let Some(p) = path {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(p, text)?;
    }
    Ok(())
}
