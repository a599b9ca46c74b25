//! `--config` files: a flat JSON object keyed by flag name (dashes or
//! underscores). Explicit flags win; every override is logged.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    values: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| CliError::Ingest(format!("{}: {e}", path.display())))?;
        let Value::Object(raw) = value else {
            return Err(CliError::Ingest(format!("{}: config must be a JSON object", path.display())));
        };
        let values = raw.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect();
        Ok(ConfigFile { values })
    }

    /// Resolves one setting: the flag if given, else the config entry.
    pub fn pick<T>(&self, name: &str, flag: Option<T>) -> CliResult<Option<T>>
    where
        T: DeserializeOwned + PartialEq + std::fmt::Debug,
    {
        let key = name.replace('-', "_");
        let from_file = match self.values.get(&key) {
            Some(v) => Some(
                serde_json::from_value::<T>(v.clone())
                    .map_err(|e| CliError::Ingest(format!("config entry '{key}': {e}")))?,
            ),
            None => None,
        };
        match (flag, from_file) {
            (Some(f), Some(c)) => {
                if f != c {
                    log::warn!("--{} {:?} overrides config value {:?}", name.replace('_', "-"), f, c);
                }
                Ok(Some(f))
            }
            (Some(f), None) => Ok(Some(f)),
            (None, c) => Ok(c),
        }
    }

    /// A boolean switch: set by the flag or by a `true` config entry.
    pub fn switch(&self, name: &str, flag: bool) -> CliResult<bool> {
        Ok(self.pick(name, flag.then_some(true))?.unwrap_or(false))
    }

    pub fn require<T>(&self, name: &str, flag: Option<T>) -> CliResult<T>
    where
        T: DeserializeOwned + PartialEq + std::fmt::Debug,
    {
        self.pick(name, flag)?
            .ok_or_else(|| CliError::Usage(format!("--{} is required", name.replace('_', "-"))))
    }
}
