//! Flat `key = value` config files with `[section]` headers.
//!
//! Keys are flag names without the leading dashes. Keys before the first
//! section, or under `[common]`, apply to every subcommand that has the
//! flag; keys under `[<subcommand>]` apply to that subcommand only and
//! must name one of its flags. Flags given on the command line win.

use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;
use exitspec::{Error, Result};

use crate::args::Cli;

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub section: Option<String>,
    pub key: String,
    pub value: String,
    pub line: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub entries: Vec<Entry>,
}

/// Flags that select the same thing; one given on the command line hides
/// all of them from the config.
const EXCLUSIVE: &[&[&str]] = &[
    &["b", "w"],
    &["N-b", "N-w"],
    &["bound-b", "bound-w"],
    &["mesh", "generate"],
    &["pole-index", "pole-point"],
];

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut section = None;
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split(['#', ';']).next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            if let Some(name) = l.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse {
                        position: line,
                        message: format!("unterminated section header '{l}'"),
                    })?
                    .trim();
                section = if name == "common" { None } else { Some(name.to_string()) };
                continue;
            }
            let (key, value) = l.split_once('=').ok_or_else(|| Error::Parse {
                position: line,
                message: format!("expected key = value, got '{l}'"),
            })?;
            let key = key.trim().trim_start_matches('-').to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    position: line,
                    message: "empty key".into(),
                });
            }
            entries.push(Entry {
                section: section.clone(),
                key,
                value: value.trim().trim_matches('"').to_string(),
                line,
            });
        }
        Ok(Config { entries })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Config::parse(&text).map_err(|e| match e {
            Error::Parse { position, message } => Error::Parse {
                position,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }

    /// Command-line arguments for `subcommand` contributed by this config,
    /// skipping keys whose flag (or an exclusive partner) is in `given`.
    pub fn arguments_for(&self, subcommand: &str, given: &[String]) -> Result<Vec<OsString>> {
        let cmd = Cli::command();
        let Some(sub) = cmd.find_subcommand(subcommand) else {
            return Ok(Vec::new());
        };
        let hidden = |key: &str| {
            given.iter().any(|g| g == key)
                || EXCLUSIVE
                    .iter()
                    .any(|group| group.contains(&key) && group.iter().any(|k| given.iter().any(|g| g == k)))
        };
        let mut out: Vec<OsString> = Vec::new();
        let mut seen: Vec<String> = Vec::new();
        // section entries override common ones
        let ordered = self
            .entries
            .iter()
            .filter(|e| e.section.as_deref() == Some(subcommand))
            .chain(self.entries.iter().filter(|e| e.section.is_none()));
        for e in ordered {
            if e.key == "config" || seen.contains(&e.key) {
                continue;
            }
            let arg = sub.get_arguments().find(|a| a.get_long() == Some(e.key.as_str()));
            let Some(arg) = arg else {
                if e.section.is_some() {
                    return Err(Error::Usage(format!(
                        "config line {}: '{subcommand}' has no option '{}'",
                        e.line, e.key
                    )));
                }
                continue;
            };
            seen.push(e.key.clone());
            if hidden(&e.key) {
                continue;
            }
            if arg.get_action().takes_values() {
                out.push(format!("--{}", e.key).into());
                out.push(e.value.clone().into());
            } else {
                match e.value.to_ascii_lowercase().as_str() {
                    "true" | "yes" | "1" | "" => out.push(format!("--{}", e.key).into()),
                    "false" | "no" | "0" => {}
                    other => {
                        return Err(Error::Usage(format!(
                            "config line {}: '{}' is a switch, expected true or false, got '{other}'",
                            e.line, e.key
                        )))
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Long flag names present in `args`.
fn given_flags(args: &[OsString]) -> Vec<String> {
    args.iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect()
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Insert config-file arguments between the subcommand and the user's own
/// flags.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let Some(sub_pos) = argv.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(argv);
    };
    let sub_pos = sub_pos + 1;
    let subcommand = argv[sub_pos].to_string_lossy().to_string();
    let config = Config::load(Path::new(&path))?;
    let user = &argv[sub_pos + 1..];
    let extra = config.arguments_for(&subcommand, &given_flags(user))?;
    let mut out = argv[..=sub_pos].to_vec();
    out.extend(extra);
    out.extend(user.iter().cloned());
    Ok(out)
}
