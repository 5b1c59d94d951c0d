//! Config files (flat `key=value` or JSON) merged with command-line
//! overrides.

use std::fs;
use std::path::Path;

use junctionmap::PipelineConfig;
use serde_json::{Map, Value};

fn scalar(raw: &str) -> Value {
    let raw = raw.trim();
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Parse `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_key_values(text: &str) -> Result<Map<String, Value>, String> {
    let mut map = Map::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
        map.insert(k.trim().to_string(), scalar(v));
    }
    Ok(map)
}

pub fn parse_config_text(text: &str) -> Result<Map<String, Value>, String> {
    if text.trim_start().starts_with('{') {
        match serde_json::from_str(text) {
            Ok(Value::Object(m)) => Ok(m),
            Ok(_) => Err("config JSON must be an object".into()),
            Err(e) => Err(format!("config JSON: {e}")),
        }
    } else {
        parse_key_values(text)
    }
}

/// Defaults, then the file, then `overrides` in order.
pub fn build_config(file: Option<&Path>, overrides: &[(String, Value)]) -> Result<PipelineConfig, String> {
    let mut map = match serde_json::to_value(PipelineConfig::default()) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("config serializes to an object"),
    };
    if let Some(path) = file {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        map.extend(parse_config_text(&text)?);
    }
    for (k, v) in overrides {
        map.insert(k.clone(), v.clone());
    }
    let config: PipelineConfig = serde_json::from_value(Value::Object(map)).map_err(|e| format!("config: {e}"))?;
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

/// `key=value` from a `--set` flag.
pub fn parse_set(raw: &str) -> Result<(String, Value), String> {
    let (k, v) = raw.split_once('=').ok_or_else(|| format!("--set {raw:?}: expected key=value"))?;
    Ok((k.trim().to_string(), scalar(v)))
}
