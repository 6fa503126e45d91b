//! `key = value` defaults files.
//!
//! Keys are long flag names (`burnin`, `lambda`, `time-limit` or
//! `time_limit`). Values for list flags are comma separated. Lines starting
//! with `#` are comments. A key is injected after the subcommand unless the
//! same flag already appears on the command line.

use clap::{ArgAction, Command};

pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected `key = value`", no + 1))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", no + 1));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Path given by `--config PATH` or `--config=PATH`, with the index of the
/// token holding the path.
fn config_path(argv: &[String]) -> Option<(String, usize)> {
    for (i, a) in argv.iter().enumerate() {
        if a == "--config" {
            return argv.get(i + 1).map(|p| (p.clone(), i + 1));
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some((p.to_string(), i));
        }
    }
    None
}

fn mentions(tokens: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    let with_eq = format!("--{key}=");
    tokens.iter().any(|t| *t == flag || t.starts_with(&with_eq))
}

/// Returns `argv` with defaults from the config file spliced in after the
/// subcommand token.
pub fn expand(argv: Vec<String>, cmd: &Command) -> Result<Vec<String>, String> {
    let Some((path, path_idx)) = config_path(&argv) else {
        return Ok(argv);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let entries = parse(&text)?;
    let Some(sub_idx) = argv
        .iter()
        .enumerate()
        .skip(1)
        .position(|(i, a)| i != path_idx && cmd.find_subcommand(a).is_some())
        .map(|p| p + 1)
    else {
        return Ok(argv);
    };
    let sub = cmd.find_subcommand(&argv[sub_idx]).expect("found above");
    let known_anywhere = |key: &str| {
        cmd.get_subcommands()
            .any(|s| s.get_arguments().any(|a| a.get_long() == Some(key)))
    };
    let mut injected = Vec::new();
    for (key, value) in entries {
        let Some(arg) = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
        else {
            if known_anywhere(&key) || key == "config" {
                continue;
            }
            return Err(format!("config key `{key}` is not a known option"));
        };
        if mentions(&argv[sub_idx + 1..], &key) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match value.as_str() {
                "true" | "1" | "yes" => injected.push(format!("--{key}")),
                "false" | "0" | "no" => {}
                _ => return Err(format!("config key `{key}` expects true or false")),
            }
        } else {
            let value: Vec<&str> = value.split(',').map(str::trim).collect();
            injected.push(format!("--{key}={}", value.join(",")));
        }
    }
    let mut out = argv;
    out.splice(sub_idx + 1..sub_idx + 1, injected);
    Ok(out)
}
