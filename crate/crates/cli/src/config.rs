//! Flat `key = value` configuration files and thread-count resolution.
//!
//! Every key names a long flag without its leading dashes. File values are
//! spliced into the argument list directly after the subcommand, so flags
//! given on the command line take precedence.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{config, CliError, CliResult};

/// Parses a configuration file into `--key value` pairs.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return config(format!("config line {}: expected `key = value`, got `{raw}`", lineno + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.starts_with('-') || key.contains(char::is_whitespace) {
            return config(format!("config line {}: bad key `{key}`", lineno + 1));
        }
        if matches!(key, "config" | "threads") {
            return config(format!("config line {}: `{key}` cannot be set from a config file", lineno + 1));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

/// Value of `--config` in the raw argument list, if any.
fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

/// Expands `--config FILE` by inserting the file's flags after the
/// subcommand name.
pub fn expand_args(args: Vec<OsString>, subcommands: &[&str]) -> CliResult<Vec<OsString>> {
    let Some(path) = config_path(&args) else { return Ok(args) };
    let path = Path::new(&path);
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let pairs = parse_config(&text)?;
    let Some(pos) = args.iter().position(|a| subcommands.contains(&a.to_string_lossy().as_ref())) else {
        return Ok(args);
    };
    let mut out: Vec<OsString> = args[..=pos].to_vec();
    for (k, v) in pairs {
        out.push(format!("--{k}").into());
        out.push(v.into());
    }
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}

/// Thread cap from `--threads`, else `DPTOM_THREADS`.
pub fn thread_count(flag: Option<usize>, env: Option<String>) -> CliResult<Option<usize>> {
    let n = match (flag, env) {
        (Some(n), _) => Some(n),
        (None, Some(s)) if !s.trim().is_empty() => match s.trim().parse::<usize>() {
            Ok(n) => Some(n),
            Err(_) => return config(format!("DPTOM_THREADS must be a positive integer, got `{s}`")),
        },
        _ => None,
    };
    if n == Some(0) {
        return config("thread count must be positive");
    }
    Ok(n)
}
