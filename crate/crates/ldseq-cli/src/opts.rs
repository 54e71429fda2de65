//! Option handling: a flat `key = value` config file, the LDSEQ_SEED
//! environment variable, and command-line flags, merged in that order so a
//! flag beats the environment and the environment beats the file. Unknown
//! keys are rejected wherever they appear.

use std::collections::BTreeMap;

use crate::CmdError;

#[derive(Clone, Copy)]
pub struct OptDef {
    pub key: &'static str,
    /// false: a boolean switch (present means true, `--key=false` allowed)
    pub takes_value: bool,
    pub help: &'static str,
}

pub const fn opt(key: &'static str, help: &'static str) -> OptDef {
    OptDef {
        key,
        takes_value: true,
        help,
    }
}

pub const fn flag(key: &'static str, help: &'static str) -> OptDef {
    OptDef {
        key,
        takes_value: false,
        help,
    }
}

pub struct Opts {
    values: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-")
}

impl Opts {
    /// Parses command arguments against the definitions, loading `--config`
    /// first and applying LDSEQ_SEED in between.
    pub fn parse(args: &[String], defs: &[OptDef]) -> Result<Opts, CmdError> {
        let find = |key: &str| defs.iter().find(|d| d.key == key);
        let mut values = BTreeMap::new();

        // config file first (lowest precedence)
        let mut i = 0;
        let mut config_path = None;
        while i < args.len() {
            let arg = normalize(&args[i]);
            if arg == "config" {
                let v = args
                    .get(i + 1)
                    .ok_or_else(|| CmdError::usage("--config needs a path"))?;
                config_path = Some(v.clone());
                i += 2;
            } else {
                i += 1;
            }
        }
        if let Some(path) = &config_path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CmdError::usage(format!("cannot read config file {path}: {e}"))
            })?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CmdError::usage(format!(
                        "{path}:{}: expected 'key = value', got '{line}'",
                        lineno + 1
                    ))
                })?;
                let key = normalize(key);
                let def = find(&key).ok_or_else(|| {
                    CmdError::usage(format!("{path}:{}: unknown key '{key}'", lineno + 1))
                })?;
                values.insert(def.key.to_string(), value.trim().to_string());
            }
        }

        // environment: seed only
        if let Ok(seed) = std::env::var("LDSEQ_SEED") {
            if find("seed").is_some() {
                values.insert("seed".to_string(), seed);
            }
        }

        // flags win
        let mut i = 0;
        while i < args.len() {
            let raw = &args[i];
            if !raw.starts_with("--") {
                return Err(CmdError::usage(format!("unexpected argument '{raw}'")));
            }
            let (key_part, inline_value) = match raw.split_once('=') {
                Some((k, v)) => (k.to_string(), Some(v.to_string())),
                None => (raw.clone(), None),
            };
            let key = normalize(&key_part);
            if key == "config" {
                i += if inline_value.is_some() { 1 } else { 2 };
                continue;
            }
            let def = find(&key)
                .ok_or_else(|| CmdError::usage(format!("unknown option '--{key}'")))?;
            let value = if def.takes_value {
                match inline_value {
                    Some(v) => v,
                    None => {
                        i += 1;
                        args.get(i)
                            .ok_or_else(|| {
                                CmdError::usage(format!("option '--{key}' needs a value"))
                            })?
                            .clone()
                    }
                }
            } else {
                inline_value.unwrap_or_else(|| "true".to_string())
            };
            values.insert(def.key.to_string(), value);
            i += 1;
        }
        Ok(Opts { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn required(&self, key: &str) -> Result<&str, CmdError> {
        self.get(key)
            .ok_or_else(|| CmdError::usage(format!("missing required option '--{key}'")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, CmdError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CmdError::usage(format!("option '--{key}': bad count '{v}'"))),
        }
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, CmdError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CmdError::usage(format!("option '--{key}': bad number '{v}'"))),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64, CmdError> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| CmdError::usage(format!("option '--{key}': bad seed '{v}'"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool, CmdError> {
        match self.get(key) {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(v) => Err(CmdError::usage(format!(
                "option '--{key}': bad boolean '{v}'"
            ))),
        }
    }
}

pub fn render_help(command: &str, summary: &str, defs: &[OptDef]) -> String {
    let mut out = format!("usage: ldseq {command} [options]\n  {summary}\n\noptions:\n");
    out.push_str("  --config PATH  flat 'key = value' file; flags override it\n");
    for d in defs {
        let value = if d.takes_value { " VALUE" } else { "" };
        out.push_str(&format!("  --{}{}  {}\n", d.key, value, d.help));
    }
    out
}
