//! `--config job.json`: a saved job expanded into the equivalent flags.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::Value;

use crate::args::Format;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, Value>,
    #[serde(default)]
    pub rng_seed: u64,
    pub output_path: Option<String>,
    pub format: Option<Format>,
}

impl JobConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Arguments as they would be typed, program name first.
    pub fn to_argv(&self) -> Result<Vec<String>> {
        let mut argv = vec!["ebm".to_string(), self.command.clone()];
        argv.push("--seed".into());
        argv.push(self.rng_seed.to_string());
        if let Some(p) = &self.output_path {
            argv.push("--output".into());
            argv.push(p.clone());
        }
        if let Some(f) = self.format {
            argv.push("--format".into());
            argv.push(match f {
                Format::Csv => "csv".into(),
                Format::Json => "json".into(),
            });
        }
        for (key, value) in &self.parameters {
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                Value::Bool(true) => argv.push(flag),
                Value::Bool(false) | Value::Null => {}
                Value::Number(n) => {
                    argv.push(flag);
                    argv.push(n.to_string());
                }
                Value::String(s) => {
                    argv.push(flag);
                    argv.push(s.clone());
                }
                Value::Array(items) => {
                    let parts: Vec<String> = items
                        .iter()
                        .map(|v| match v {
                            Value::Number(n) => Ok(n.to_string()),
                            Value::String(s) => Ok(s.clone()),
                            _ => bail!("parameter `{key}` holds a non-scalar list item"),
                        })
                        .collect::<Result<_>>()?;
                    argv.push(flag);
                    argv.push(parts.join(","));
                }
                Value::Object(_) => bail!("parameter `{key}` must be a scalar or a list"),
            }
        }
        Ok(argv)
    }
}
