//! Flat `key = value` configuration files, flag overrides and run manifests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::fs::{self, File};
use std::io::{BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Parse `key = value` lines. `#` starts a comment line; blank lines are
/// ignored; later keys override earlier ones.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse {
                kind: "config",
                line: i + 1,
                reason: format!("expected key = value, got {line:?}"),
            });
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Parse {
                kind: "config",
                line: i + 1,
                reason: "empty key".into(),
            });
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    parse_config(&fs::read_to_string(path)?)
}

/// Resolves settings from flags, then the config file, then defaults, and
/// records both the effective values and every problem found.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    used: BTreeSet<String>,
    echo: BTreeMap<String, String>,
    violations: Vec<String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            ..Self::default()
        }
    }

    /// Flag value if given, else the config value, else `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> T
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        let value = match flag {
            Some(v) => v,
            None => match self.file.get(key) {
                Some(raw) => match raw.parse::<T>() {
                    Ok(v) => v,
                    Err(e) => {
                        self.violations
                            .push(format!("config key {key}: cannot parse {raw:?}: {e}"));
                        default
                    }
                },
                None => default,
            },
        };
        self.echo.insert(key.to_string(), value.to_string());
        value
    }

    /// Like [`Resolver::get`] for values without a default.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Option<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        let value = flag.or_else(|| {
            let raw = self.file.get(key)?;
            match raw.parse::<T>() {
                Ok(v) => Some(v),
                Err(e) => {
                    self.violations
                        .push(format!("config key {key}: cannot parse {raw:?}: {e}"));
                    None
                }
            }
        });
        if let Some(v) = &value {
            self.echo.insert(key.to_string(), v.to_string());
        }
        value
    }

    /// Record a violation unless `ok`.
    pub fn require(&mut self, ok: bool, message: impl FnOnce() -> String) {
        if !ok {
            self.violations.push(message());
        }
    }

    pub fn violate(&mut self, message: impl Into<String>) {
        self.violations.push(message.into());
    }

    /// Record a module validation result as a violation.
    pub fn check(&mut self, result: Result<()>) {
        if let Err(e) = result {
            self.violations.push(e.to_string());
        }
    }

    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.echo
    }

    /// All violations, including config keys that no setting consumed.
    pub fn finish(mut self) -> (BTreeMap<String, String>, Vec<String>) {
        for key in self.file.keys() {
            if !self.used.contains(key) {
                self.violations.push(format!("unknown config key {key}"));
            }
        }
        (self.echo, self.violations)
    }
}

/// Hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut r = BufReader::new(File::open(path)?);
    let mut h = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = r.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Hex SHA-256 over every file under `dir`, in sorted relative-path order,
/// hashing each path and content.
pub fn sha256_tree(dir: &Path) -> Result<String> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, std::path::PathBuf)>) -> Result<()> {
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else {
                let rel = path
                    .strip_prefix(root)
                    .unwrap_or(&path)
                    .to_string_lossy()
                    .replace('\\', "/");
                out.push((rel, path));
            }
        }
        Ok(())
    }
    let mut files = Vec::new();
    walk(dir, dir, &mut files)?;
    files.sort();
    let mut h = Sha256::new();
    for (rel, path) in files {
        h.update(rel.as_bytes());
        h.update([0u8]);
        h.update(fs::read(path)?);
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// What a run consumed and how it was configured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub notes: BTreeMap<String, String>,
}

impl Manifest {
    pub fn new(command: &str, config: BTreeMap<String, String>, seed: Option<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            notes: BTreeMap::new(),
        }
    }

    /// Digest a file or directory input.
    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        let sha256 = if path.is_dir() {
            sha256_tree(path)?
        } else {
            sha256_file(path)?
        };
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.insert(key.to_string(), value.to_string());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        s.push('\n');
        fs::write(path, s)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_config() {
        let cfg = parse_config("# comment\n\ndim = 64\nmin_count=5\n  seed = 7  \ndim=32\n").unwrap();
        assert_eq!(cfg.get("dim").map(String::as_str), Some("32"));
        assert_eq!(cfg.get("min-count").map(String::as_str), Some("5"));
        assert_eq!(cfg.get("seed").map(String::as_str), Some("7"));
        assert!(matches!(parse_config("oops\n"), Err(Error::Parse { line: 1, .. })));
        assert!(parse_config(" = 3\n").is_err());
    }

    #[test]
    fn flags_override_file_then_default() {
        let mut r = Resolver::new(parse_config("dim = 64\norder = 3\nbogus = 1\nepochs = x\n").unwrap());
        assert_eq!(r.get("dim", Some(16usize), 300), 16);
        assert_eq!(r.get("order", None, 5usize), 3);
        assert_eq!(r.get("window", None, 15usize), 15);
        assert_eq!(r.get("epochs", None, 20usize), 20);
        assert_eq!(r.get_opt::<u64>("seed", None), None);
        let (echo, violations) = r.finish();
        assert_eq!(echo.get("dim").map(String::as_str), Some("16"));
        assert_eq!(echo.get("window").map(String::as_str), Some("15"));
        assert_eq!(violations.len(), 2, "{violations:?}");
        assert!(violations.iter().any(|v| v.contains("bogus")));
        assert!(violations.iter().any(|v| v.contains("epochs")));
    }

    #[test]
    fn digests_are_stable() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.txt"), "abc").unwrap();
        assert_eq!(
            sha256_file(&dir.path().join("a.txt")).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        let t1 = sha256_tree(dir.path()).unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("sub/b.txt"), "x").unwrap();
        let t2 = sha256_tree(dir.path()).unwrap();
        assert_ne!(t1, t2);
        assert_eq!(t2, sha256_tree(dir.path()).unwrap());
    }
}
