//! `key=value` sidecar written next to every decomposed file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use textprep::{DecompConfig, DecompositionDb, Granularity};

use crate::error::{CliError, Result};
use crate::io::{is_stdio, read_text, sibling, write_text};

pub const FORMAT: &str = "textprep-decomposition/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sidecar {
    pub config: DecompConfig,
    pub db_sha256: String,
    pub marker: char,
    pub boundary: char,
    pub version: String,
}

impl Sidecar {
    pub fn new(db: &DecompositionDb, config: DecompConfig) -> Self {
        Sidecar {
            config: normalize(config),
            db_sha256: db.content_hash().to_string(),
            marker: db.marker(),
            boundary: db.boundary(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn path_for(data: &Path) -> PathBuf {
        sibling(data, ".meta")
    }

    pub fn render(&self) -> String {
        format!(
            "# textprep decomposition sidecar\nformat={FORMAT}\ngranularity={}\nidcs={}\ndb_sha256={}\nmarker=U+{:04X}\nboundary=U+{:04X}\nversion={}\n",
            self.config.granularity,
            self.config.idcs,
            self.db_sha256,
            self.marker as u32,
            self.boundary as u32,
            self.version
        )
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            kv.insert(k.trim(), v.trim());
        }
        let get = |k: &str| kv.get(k).copied().ok_or_else(|| format!("missing key {k}"));
        if get("format")? != FORMAT {
            return Err(format!("unsupported format {:?}", get("format")?));
        }
        let granularity: Granularity = get("granularity")?.parse()?;
        let idcs = get("idcs")?
            .parse::<bool>()
            .map_err(|_| "idcs must be true or false".to_string())?;
        Ok(Sidecar {
            config: normalize(DecompConfig::new(granularity, idcs)),
            db_sha256: get("db_sha256")?.to_string(),
            marker: parse_codepoint(get("marker")?)?,
            boundary: parse_codepoint(get("boundary")?)?,
            version: get("version")?.to_string(),
        })
    }

    /// The sidecar of `data`, if one exists.
    pub fn read(data: &Path) -> Result<Option<Self>> {
        if is_stdio(data) {
            return Ok(None);
        }
        let path = Self::path_for(data);
        if !path.exists() {
            return Ok(None);
        }
        let text = read_text(&path)?;
        Self::parse(&text)
            .map(Some)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }

    /// Writes the sidecar of `data` and returns its path.
    pub fn write(&self, data: &Path) -> Result<Option<PathBuf>> {
        if is_stdio(data) {
            return Ok(None);
        }
        let path = Self::path_for(data);
        write_text(&path, &self.render())?;
        Ok(Some(path))
    }

    /// Fails when the sidecar was produced under a different database.
    pub fn check_db(&self, db: &DecompositionDb) -> Result<()> {
        if self.db_sha256 != db.content_hash() {
            return Err(CliError::contract(format!(
                "decomposed with database {} but the loaded database is {}",
                self.db_sha256,
                db.content_hash()
            )));
        }
        if (self.marker, self.boundary) != (db.marker(), db.boundary()) {
            return Err(CliError::contract("reserved symbols differ from the loaded database"));
        }
        Ok(())
    }
}

/// Copies the sidecar of `from` to `to` when there is one.
pub fn carry(from: &Path, to: &Path) -> Result<Option<PathBuf>> {
    match Sidecar::read(from)? {
        Some(meta) => meta.write(to),
        None => Ok(None),
    }
}

fn normalize(cfg: DecompConfig) -> DecompConfig {
    if cfg.is_identity() {
        DecompConfig::IDENTITY
    } else {
        cfg
    }
}

fn parse_codepoint(s: &str) -> Result<char, String> {
    let hex = s
        .strip_prefix("U+")
        .ok_or_else(|| format!("codepoint {s:?} must be written U+XXXX"))?;
    u32::from_str_radix(hex, 16)
        .ok()
        .and_then(char::from_u32)
        .ok_or_else(|| format!("invalid codepoint {s:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_parse_round_trip() {
        let db = textprep::fixture::db().unwrap();
        for cfg in DecompConfig::SUBCHARACTER.into_iter().chain([DecompConfig::IDENTITY]) {
            let meta = Sidecar::new(&db, cfg);
            assert_eq!(Sidecar::parse(&meta.render()).unwrap(), meta);
        }
    }

    #[test]
    fn rejects_missing_keys_and_other_formats() {
        assert!(Sidecar::parse("format=textprep-decomposition/1\n").is_err());
        assert!(Sidecar::parse("format=other\n").is_err());
        assert!(Sidecar::parse("granularity\n").is_err());
    }
}
