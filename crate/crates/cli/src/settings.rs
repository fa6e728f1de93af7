//! Parameter resolution: command-line flags override the config file, which
//! overrides the built-in defaults.
//!
//! A config file is TOML (or JSON when named `*.json`) with flat keys named
//! like the long flags in snake_case, e.g. `noise_fwhm = 0`. A table named
//! after a subcommand (`[hbt]`) applies to that subcommand only. A run
//! manifest is accepted too: its `params` object is used as the config.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

pub const COMMANDS: [&str; 7] = [
    "hbt",
    "scan-angle",
    "scan-wavelength",
    "histogram",
    "calibrate",
    "gain-fit",
    "modes",
];

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameter values.
    Usage(String),
    Sim(bsv_sim::Error),
    /// A numerical failure reported by a scenario after its outputs were written.
    Numerical(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Sim(e) if e.is_numerical() => 3,
            CliError::Sim(e) if e.is_invalid_input() => 2,
            CliError::Sim(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => f.write_str(m),
            CliError::Sim(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<bsv_sim::Error> for CliError {
    fn from(e: bsv_sim::Error) -> Self {
        CliError::Sim(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn parse_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let bad = |e: &dyn fmt::Display| CliError::Usage(format!("cannot parse config {}: {e}", path.display()));
    let value = if path.extension().is_some_and(|x| x == "json") {
        serde_json::from_str::<Value>(&text).map_err(|e| bad(&e))?
    } else {
        let table: toml::Table = toml::from_str(&text).map_err(|e| bad(&e))?;
        serde_json::to_value(table).map_err(|e| bad(&e))?
    };
    match value {
        Value::Object(obj) => Ok(obj),
        _ => Err(bad(&"expected a table of keys")),
    }
}

/// Keys the config file sets for `command`.
pub fn load_config(path: &Path, command: &str) -> Result<Map<String, Value>, CliError> {
    let mut obj = parse_config(path)?;
    if let Some(params) = obj.remove("params") {
        if let Some(Value::String(written_by)) = obj.get("command") {
            if written_by != command {
                return Err(CliError::Usage(format!(
                    "manifest {} was written by `{written_by}`, not `{command}`",
                    path.display()
                )));
            }
        }
        return match params {
            Value::Object(p) => Ok(p),
            _ => Err(CliError::Usage(format!(
                "manifest {} has malformed params",
                path.display()
            ))),
        };
    }
    let section = obj.remove(command);
    obj.retain(|k, _| !COMMANDS.contains(&k.as_str()));
    match section {
        Some(Value::Object(s)) => obj.extend(s),
        Some(_) => return Err(CliError::Usage(format!("config section `{command}` must be a table"))),
        None => {}
    }
    Ok(obj)
}

/// Merges `defaults`, then the config file, then the non-empty `flags`.
/// Config keys unknown to the command are rejected.
pub fn resolve<P, F>(command: &str, flags: &F, config: Option<&Path>, defaults: &P) -> Result<P, CliError>
where
    P: Serialize + DeserializeOwned,
    F: Serialize,
{
    let internal = |e: serde_json::Error| CliError::Usage(format!("invalid parameters: {e}"));
    let Value::Object(mut merged) = serde_json::to_value(defaults).map_err(internal)? else {
        unreachable!("parameter sets serialize to maps")
    };
    if let Some(path) = config {
        for (k, v) in load_config(path, command)? {
            if !merged.contains_key(&k) {
                return Err(CliError::Usage(format!(
                    "unknown key `{k}` for `{command}` in {}",
                    path.display()
                )));
            }
            merged.insert(k, v);
        }
    }
    if let Value::Object(f) = serde_json::to_value(flags).map_err(internal)? {
        merged.extend(f.into_iter().filter(|(_, v)| !v.is_null()));
    }
    serde_json::from_value(Value::Object(merged)).map_err(internal)
}
