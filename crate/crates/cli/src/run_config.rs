//! Run configuration: an INI file with `[kernel]`, `[data]` and `[run]`
//! sections, overridden by `--key value` flags on the command line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use ini::Ini;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Section {
    Kernel,
    Data,
    Run,
}

impl Section {
    fn parse(name: &str) -> Option<Self> {
        match name {
            "kernel" => Some(Section::Kernel),
            "data" => Some(Section::Data),
            "run" => Some(Section::Run),
            _ => None,
        }
    }
}

/// Keys a subcommand reads outside the kernel section.
pub struct Keys {
    pub data: &'static [&'static str],
    pub run: &'static [&'static str],
}

const COMMON_DATA: &[&str] = &["alphabet"];
const COMMON_RUN: &[&str] = &["seed", "threads", "output"];

#[derive(Debug, Default, Clone)]
pub struct RunConfig {
    pub kernel: BTreeMap<String, String>,
    pub data: BTreeMap<String, String>,
    pub run: BTreeMap<String, String>,
    /// Directory of the configuration file; relative paths read from the
    /// file are resolved against it.
    pub base_dir: Option<PathBuf>,
    from_file: BTreeSet<(Section, String)>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let ini = Ini::load_from_file(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        let mut cfg = RunConfig {
            base_dir: path.parent().map(Path::to_path_buf),
            ..RunConfig::default()
        };
        for (name, props) in ini.iter() {
            let section = match name {
                Some(n) => Section::parse(n).ok_or_else(|| Failure::config(format!("unknown section [{n}]")))?,
                None if props.is_empty() => continue,
                None => return Err(Failure::config("keys must appear inside a [kernel], [data] or [run] section")),
            };
            for (k, v) in props.iter() {
                cfg.map_mut(section).insert(k.to_string(), v.trim().to_string());
                cfg.from_file.insert((section, k.to_string()));
            }
        }
        Ok(cfg)
    }

    fn map_mut(&mut self, section: Section) -> &mut BTreeMap<String, String> {
        match section {
            Section::Kernel => &mut self.kernel,
            Section::Data => &mut self.data,
            Section::Run => &mut self.run,
        }
    }

    /// Sets a value given on the command line.
    pub fn set(&mut self, section: Section, key: &str, value: &str) {
        let mut value = value.to_string();
        if section == Section::Kernel {
            value = match (key, value.strip_prefix("table:")) {
                ("k_s", _) => absolutize(&value),
                ("base", Some(table)) => format!("table:{}", absolutize(table)),
                _ => value,
            };
        }
        self.from_file.remove(&(section, key.to_string()));
        self.map_mut(section).insert(key.to_string(), value);
    }

    /// Applies `--key value`, `--key=value` and `--section.key value`
    /// overrides. A bare key goes to the data or run section when the
    /// subcommand reads it there and to the kernel section otherwise. A flag
    /// followed by another flag, or by nothing, is set to `true`.
    pub fn apply_overrides(&mut self, args: &[String], keys: &Keys) -> Result<(), Failure> {
        let mut i = 0;
        while i < args.len() {
            let flag = args[i]
                .strip_prefix("--")
                .filter(|f| !f.is_empty())
                .ok_or_else(|| Failure::config(format!("expected `--key value`, found `{}`", args[i])))?;
            let (name, value) = match flag.split_once('=') {
                Some((n, v)) => (n, v.to_string()),
                None => match args.get(i + 1) {
                    Some(v) if !v.starts_with("--") => {
                        i += 1;
                        (flag, v.clone())
                    }
                    _ => (flag, "true".to_string()),
                },
            };
            let (section, key) = match name.split_once('.') {
                Some((s, k)) => (
                    Section::parse(s).ok_or_else(|| Failure::config(format!("unknown section in `--{name}`")))?,
                    k,
                ),
                None => (Self::section_of(name, keys), name),
            };
            self.set(section, key, &value);
            i += 1;
        }
        Ok(())
    }

    fn section_of(key: &str, keys: &Keys) -> Section {
        if COMMON_DATA.contains(&key) || keys.data.contains(&key) {
            Section::Data
        } else if COMMON_RUN.contains(&key) || keys.run.contains(&key) {
            Section::Run
        } else {
            Section::Kernel
        }
    }

    /// Rejects data and run keys the subcommand does not read.
    pub fn check_keys(&self, keys: &Keys) -> Result<(), Failure> {
        for (section, map, allowed, common) in [
            ("data", &self.data, keys.data, COMMON_DATA),
            ("run", &self.run, keys.run, COMMON_RUN),
        ] {
            let unknown: Vec<&str> = map
                .keys()
                .map(String::as_str)
                .filter(|k| !allowed.contains(k) && !common.contains(k))
                .collect();
            if !unknown.is_empty() {
                return Err(Failure::config(format!("unknown key(s) in [{section}]: {}", unknown.join(", "))));
            }
        }
        Ok(())
    }

    /// A data-section path, resolved against the config directory when it
    /// came from the file.
    pub fn data_path(&self, key: &str) -> Option<PathBuf> {
        self.data.get(key).map(|v| self.resolve(Section::Data, key, v))
    }

    /// Comma-separated data-section paths.
    pub fn data_paths(&self, key: &str) -> Option<Vec<PathBuf>> {
        self.data.get(key).map(|v| {
            v.split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| self.resolve(Section::Data, key, p))
                .collect()
        })
    }

    pub fn output_path(&self) -> Option<PathBuf> {
        self.run.get("output").map(|v| self.resolve(Section::Run, "output", v))
    }

    fn resolve(&self, section: Section, key: &str, value: &str) -> PathBuf {
        let p = PathBuf::from(value);
        match &self.base_dir {
            Some(dir) if p.is_relative() && self.from_file.contains(&(section, key.to_string())) => dir.join(p),
            _ => p,
        }
    }
}

/// Command-line kernel paths are relative to the working directory, while
/// the kernel builder resolves relative paths against the config directory.
fn absolutize(path: &str) -> String {
    let p = Path::new(path);
    match std::env::current_dir() {
        Ok(cwd) if p.is_relative() => cwd.join(p).display().to_string(),
        _ => path.to_string(),
    }
}
