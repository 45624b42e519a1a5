//! Loading scenarios from flat TOML config files.
//!
//! Keys are the `Scenario` field names; nested fields use dotted keys
//! (`secret_domain.n1 = 1`) or sections. Unknown keys are rejected.
//! Overrides use the same dotted syntax: `("noise_sigma", "0.05")`.

use std::path::Path;

use serde::Deserialize;
use toml::{Table, Value};

use super::Scenario;
use crate::error::{Error, Result};

pub fn load_scenario(path: &Path, overrides: &[(String, String)]) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_scenario(&text, overrides).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_scenario(text: &str, overrides: &[(String, String)]) -> Result<Scenario> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string().trim_end().to_string()))?;
    for (key, raw) in overrides {
        apply_override(&mut table, key, raw)?;
    }
    let scenario =
        Scenario::deserialize(Value::Table(table)).map_err(|e| Error::Config(e.to_string()))?;
    scenario.validate()?;
    Ok(scenario)
}

/// Split `KEY=VALUE` as given on the command line.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("expected KEY=VALUE, got `{s}`")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(Error::Config(format!("empty key in `{s}`")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

fn parse_value(raw: &str) -> Value {
    // Bare words such as `vessels` fall back to strings.
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn apply_override(table: &mut Table, key: &str, raw: &str) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().expect("split yields at least one part");
    let mut cur = table;
    for p in path {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}`: `{p}` is not a section")))?;
    }
    cur.insert(last.to_string(), parse_value(raw));
    Ok(())
}
