//! `key = value` config files, folded into the argument list.
//!
//! Each key names a long flag (`mini_n` and `mini-n` both mean `--mini-n`).
//! Flags given on the command line win over the file.

use std::fs;
use std::path::Path;

use crate::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-') {
            return Err(CliError::Usage(format!("config line {}: bad key {key:?}", lineno + 1)));
        }
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        pairs.push((key, value.trim().to_string()));
    }
    Ok(pairs)
}

fn config_path(args: &[String]) -> Result<Option<String>, CliError> {
    let mut found = None;
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let path = if a == "--config" {
            it.next().cloned().ok_or_else(|| CliError::Usage("--config needs a path".into()))?
        } else if let Some(p) = a.strip_prefix("--config=") {
            p.to_string()
        } else {
            continue;
        };
        if found.replace(path).is_some() {
            return Err(CliError::Usage("--config given twice".into()));
        }
    }
    Ok(found)
}

fn has_flag(args: &[String], flag: &str) -> bool {
    args.iter().any(|a| a == flag || a.strip_prefix(flag).is_some_and(|rest| rest.starts_with('=')))
}

/// Append config-file flags that the command line does not already set.
pub fn expand(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&args)? else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| CliError::Usage(format!("reading {path}: {e}")))?;
    let mut out = args;
    for (key, value) in parse(&text)? {
        let flag = format!("--{key}");
        if !has_flag(&out, &flag) {
            out.push(format!("{flag}={value}"));
        }
    }
    Ok(out)
}
