//! Key-value config files and run manifests.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment
//! command = power
//! d = 3
//! h-grid = 0:3:20
//! ```
//!
//! Keys are long flag names without the leading `--`. `command` selects the
//! subcommand when none is given on the command line. Flags given on the
//! command line take precedence over the file. Boolean flags take `true` or
//! `false`; an empty value leaves the option unset.

use std::path::Path;

pub const COMMANDS: [&str; 6] = ["test", "constants", "power", "clt", "dissim", "tails"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| format!("config line {}: expected `key = value`", i + 1))?;
        let key = k.trim();
        if key.is_empty() || key.starts_with('-') {
            return Err(format!("config line {}: bad key {key:?}", i + 1));
        }
        out.push(Entry { key: key.to_string(), value: v.trim().to_string() });
    }
    Ok(out)
}

/// Splices the entries of any `--config FILE` into `args`.
pub fn expand_args(mut args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = if let Some(p) = args[pos].strip_prefix("--config=") {
        let p = p.to_string();
        args.remove(pos);
        p
    } else {
        let p = args.get(pos + 1).cloned().ok_or("--config: missing file name")?;
        args.drain(pos..pos + 2);
        p
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| format!("--config: cannot read {path}: {e}"))?;
    let entries = parse(&text).map_err(|e| format!("--config: {e}"))?;

    let has_command = args.iter().skip(1).any(|a| COMMANDS.contains(&a.as_str()));
    let given = |key: &str, args: &[String]| {
        let flag = format!("--{key}");
        args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    for e in entries {
        if e.key == "command" {
            if !has_command {
                args.insert(1, e.value);
            }
            continue;
        }
        if e.value.is_empty() || given(&e.key, &args) {
            continue;
        }
        match e.value.as_str() {
            "true" => extra.push(format!("--{}", e.key)),
            "false" => {}
            _ => extra.push(format!("--{}={}", e.key, e.value)),
        }
    }
    args.extend(extra);
    Ok(args)
}

/// Renders a manifest that [`expand_args`] reads back.
pub fn render_manifest(command: &str, entries: &[(&str, String)]) -> String {
    let mut s = format!("# crossedge {}\ncommand = {command}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in entries {
        s.push_str(&format!("{k} = {v}\n"));
    }
    s
}
