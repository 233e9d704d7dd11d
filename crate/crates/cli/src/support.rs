//! Config loading, config echo, CSV output and error classification.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Name of the resolved-config file written into every output directory.
pub const CONFIG_ECHO: &str = "config.toml";

/// A problem with the invocation itself rather than with input data.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Reads a TOML config file, or returns defaults when no path is given.
pub fn load_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
}

/// Overwrites config fields with the flags that were given.
macro_rules! overlay {
    ($cfg:expr, $args:expr, $($field:ident),+ $(,)?) => {
        $(if let Some(v) = $args.$field.clone() { $cfg.$field = v; })+
    };
}
pub(crate) use overlay;

/// Creates the output directory and writes the resolved config into it.
pub fn prepare_out<T: Serialize>(out: &Path, cfg: &T) -> Result<()> {
    if out.as_os_str().is_empty() {
        return Err(usage("an output directory is required (--out)"));
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let text = toml::to_string(cfg).context("serializing config")?;
    fs::write(out.join(CONFIG_ECHO), text).context("writing config echo")?;
    Ok(())
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

/// Full-precision (shortest round-trip) rendering of a float.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Splits a `label=path` argument.
pub fn labeled_path(arg: &str) -> Result<(String, PathBuf)> {
    match arg.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => Ok((label.to_string(), PathBuf::from(path))),
        _ => Err(usage(format!("expected label=path, got {arg:?}"))),
    }
}

/// Process exit code for an error: 1 usage, 2 data, 3 numeric failure.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<tactile_core::Error>() {
            return match e {
                e if e.is_numeric() => 3,
                tactile_core::Error::InvalidArgument(_) => 1,
                _ => 2,
            };
        }
    }
    2
}
