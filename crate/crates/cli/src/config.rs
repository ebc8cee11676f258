//! Merging a JSON config over the values parsed from flags.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

/// Reads `source` as inline JSON when it starts with `{` or `[`, otherwise as a path.
fn load(source: &str) -> Result<Map<String, Value>> {
    let text = if source.trim_start().starts_with(['{', '[']) {
        source.to_string()
    } else {
        let path = Path::new(source);
        std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?
    };
    match serde_json::from_str(&text) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(CliError::Validation("config must be a JSON object".into())),
        Err(e) => Err(CliError::Validation(format!("config: {e}"))),
    }
}

/// Every key in the config replaces the flag of the same name. Unknown keys
/// are rejected.
pub fn apply<T: Serialize + DeserializeOwned>(args: T, config: Option<&str>) -> Result<T> {
    let Some(source) = config else {
        return Ok(args);
    };
    let overrides = load(source)?;
    let Value::Object(mut merged) = serde_json::to_value(&args).expect("options serialize") else {
        unreachable!("options are structs");
    };
    for (key, value) in overrides {
        if !merged.contains_key(&key) {
            return Err(CliError::Validation(format!("config: unknown option {key:?}")));
        }
        merged.insert(key, value);
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Validation(format!("config: {e}")))
}

/// clap value parser for enums that already carry serde names.
pub fn serde_enum<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|e| e.to_string())
}
