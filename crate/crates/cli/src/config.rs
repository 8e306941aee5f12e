//! Settings file support.
//!
//! The file is TOML holding flat `key = value` pairs. Keys are long flag
//! names (`concurrency`, `rate-limit`, ...). A key may be placed in a table
//! named after a subcommand, which then wins over the top-level key:
//!
//! ```toml
//! retries = 5
//!
//! [translate]
//! endpoint = "http://localhost:8080/v1/chat/completions"
//! model = "my-model"
//! concurrency = 8
//! ```
//!
//! Flags beat environment variables, which beat the file.

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use toml::{Table, Value};

#[derive(Debug, Clone, Default)]
pub struct Settings {
    table: Table,
    section: String,
}

impl Settings {
    pub fn load(path: Option<&Path>, section: &str) -> Result<Settings> {
        let table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                text.parse::<Table>()
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Table::new(),
        };
        Ok(Settings {
            table,
            section: section.to_owned(),
        })
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.table
            .get(&self.section)
            .and_then(Value::as_table)
            .and_then(|t| t.get(key))
            .or_else(|| self.table.get(key).filter(|v| !v.is_table()))
    }

    /// The flag/env value if present, else the file value parsed as `T`.
    pub fn pick<T>(&self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        if cli.is_some() {
            return Ok(cli);
        }
        let Some(v) = self.raw(key) else { return Ok(None) };
        let text = match v {
            Value::String(s) => s.clone(),
            Value::Integer(i) => i.to_string(),
            Value::Float(f) => f.to_string(),
            Value::Boolean(b) => b.to_string(),
            other => bail!("config key `{key}`: unsupported value {other}"),
        };
        text.parse::<T>()
            .map(Some)
            .map_err(|e| anyhow!("config key `{key}`: {e}"))
    }

    pub fn pick_or<T>(&self, cli: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(cli, key)?.unwrap_or(default))
    }

    /// A boolean switch: set by the flag, else by the file, else false.
    pub fn flag(&self, cli: bool, key: &str) -> Result<bool> {
        Ok(cli || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}
