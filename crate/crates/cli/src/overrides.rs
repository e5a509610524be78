use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use coopsir::SimConfig;
use serde_json::Value;

/// Sets `key` (dotted path, e.g. `rates.beta2`) in a JSON tree. The value is
/// read as JSON when possible and as a bare string otherwise, so `inf` and
/// `OnlyA` need no quoting.
pub fn apply(tree: &mut Value, key: &str, raw: &str) -> Result<()> {
    let parsed = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = tree;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| anyhow!("override {key}: {} is not an object", parts[..i].join(".")))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = obj
            .get_mut(*part)
            .ok_or_else(|| anyhow!("override {key}: no field {part}"))?;
    }
    bail!("empty override key")
}

/// Splits `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("override {s:?} is not key=value"))?;
    if k.trim().is_empty() {
        bail!("override {s:?} has an empty key");
    }
    Ok((k.trim().to_string(), v.trim().to_string()))
}

pub fn load_config(path: &Path, overrides: &[(String, String)]) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut tree: Value =
        serde_json::from_str(&text).with_context(|| format!("config file {} is not valid JSON", path.display()))?;
    for (k, v) in overrides {
        apply(&mut tree, k, v)?;
    }
    let config: SimConfig =
        serde_json::from_value(tree).with_context(|| format!("bad config in {}", path.display()))?;
    config
        .validate()
        .with_context(|| format!("invalid config in {}", path.display()))
}
