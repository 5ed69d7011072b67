//! Parameter blocks: a JSON object from `--config`, flags written over it,
//! then strict deserialisation into the subcommand's config type.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Environment variable overriding the default work cap.
pub const WORK_CAP_ENV: &str = "GAUSSMAX_WORK_CAP";

pub fn load(path: Option<&Path>) -> Result<Value, CliError> {
    let Some(path) = path else {
        return Ok(Value::Object(Map::new()));
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !value.is_object() {
        return Err(CliError::Usage(format!("config {} must hold a JSON object", path.display())));
    }
    Ok(value)
}

/// Writes `v` at `path`, creating intermediate objects. `None` leaves the
/// existing value alone.
pub fn set<T: Serialize>(root: &mut Value, path: &[&str], v: Option<T>) {
    let Some(v) = v else { return };
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut node = root;
    for key in parents {
        if !node.get(*key).is_some_and(Value::is_object) {
            node[*key] = Value::Object(Map::new());
        }
        node = node.get_mut(*key).expect("just inserted");
    }
    node[*last] = serde_json::to_value(v).expect("serialisable flag");
}

/// Removes and returns a top-level key.
pub fn take(root: &mut Value, key: &str) -> Option<Value> {
    root.as_object_mut().and_then(|m| m.remove(key))
}

/// Fills `work_cap` from the environment unless the config already has one.
pub fn default_work_cap_from_env(root: &mut Value) -> Result<(), CliError> {
    if root.get("work_cap").is_some() {
        return Ok(());
    }
    if let Ok(raw) = std::env::var(WORK_CAP_ENV) {
        let cap: u128 = raw
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{WORK_CAP_ENV}={raw:?} is not a non-negative integer")))?;
        set(root, &["work_cap"], Some(cap));
    }
    Ok(())
}

pub fn parse<T: DeserializeOwned>(root: Value, schema: &str) -> Result<T, CliError> {
    serde_json::from_value(root).map_err(|e| CliError::Usage(format!("invalid parameters: {e}\nexpected:\n{schema}")))
}
