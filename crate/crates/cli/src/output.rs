//! Output files: metadata headers, atomic writes and binary matrix caches.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use nalgebra::DMatrix;
use serde::{de::DeserializeOwned, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Build,
    Communities,
    Decompose,
    Metrics,
    Integrate,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Build => "build",
            Stage::Communities => "communities",
            Stage::Decompose => "decompose",
            Stage::Metrics => "metrics",
            Stage::Integrate => "integrate",
        }
    }

    /// Bumped whenever a stage's output format or algorithm changes.
    pub fn version(self) -> u32 {
        1
    }
}

/// Provenance common to every file a stage writes.
#[derive(Clone, Debug)]
pub struct Metadata {
    pub stage: Stage,
    pub config_hash: String,
    pub config_echo: String,
    /// Extra per-file facts, written in key order.
    pub notes: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(stage: Stage, config: &RunConfig) -> Self {
        Metadata {
            stage,
            config_hash: config.hash(),
            config_echo: config.echo(),
            notes: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.insert(key.to_string(), value.to_string());
        self
    }

    fn lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("valnet {TOOL_VERSION}"),
            format!("stage: {} (version {})", self.stage.name(), self.stage.version()),
            format!("config_sha256: {}", self.config_hash),
            format!("config: {}", self.config_echo),
        ];
        lines.extend(self.notes.iter().map(|(k, v)| format!("{k}: {v}")));
        lines
    }

    pub fn json(&self) -> Value {
        let config: Value = serde_json::from_str(&self.config_echo).expect("echo is JSON");
        serde_json::json!({
            "tool": format!("valnet {TOOL_VERSION}"),
            "stage": self.stage.name(),
            "stage_version": self.stage.version(),
            "config_sha256": self.config_hash,
            "config": config,
            "notes": self.notes,
        })
    }

    /// `# `-prefixed header lines followed by the CSV body.
    pub fn csv(&self, body: &str) -> String {
        let mut s: String = self.lines().iter().map(|l| format!("# {l}\n")).collect();
        s.push_str(body);
        s
    }

    pub fn gexf(&self, document: &str) -> String {
        let comment: String = self
            .lines()
            .iter()
            .map(|l| format!("  {}\n", l.replace("--", "- -")))
            .collect();
        match document.split_once('\n') {
            Some((decl, rest)) => format!("{decl}\n<!--\n{comment}-->\n{rest}"),
            None => document.to_string(),
        }
    }

    pub fn dot(&self, document: &str) -> String {
        let mut s: String = self.lines().iter().map(|l| format!("// {l}\n")).collect();
        s.push_str(document);
        s
    }

    /// `{"metadata": ..., "data": ...}`, pretty-printed with a final newline.
    pub fn wrap_json(&self, data: &impl Serialize) -> String {
        let doc = serde_json::json!({
            "metadata": self.json(),
            "data": data,
        });
        serde_json::to_string_pretty(&doc).expect("output serializes") + "\n"
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn read_json_data<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut doc: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let data = doc
        .get_mut("data")
        .map(Value::take)
        .with_context(|| format!("{} has no data section", path.display()))?;
    serde_json::from_value(data).with_context(|| format!("decoding {}", path.display()))
}

const CACHE_MAGIC: &[u8] = b"VALNET-CACHE 1\n";

/// Binary cache: a magic line, one JSON header line (metadata, caller data
/// and the matrix directory), then every matrix as little-endian `f64` in
/// column-major order.
pub fn write_cache(
    path: &Path,
    meta: &Metadata,
    data: &impl Serialize,
    matrices: &[(&str, &DMatrix<f64>)],
) -> Result<()> {
    let directory: Vec<Value> = matrices
        .iter()
        .map(|(name, m)| serde_json::json!({"name": name, "rows": m.nrows(), "cols": m.ncols()}))
        .collect();
    let header = serde_json::json!({
        "metadata": meta.json(),
        "data": data,
        "matrices": directory,
    });
    let mut bytes = CACHE_MAGIC.to_vec();
    bytes.extend(serde_json::to_string(&header)?.as_bytes());
    bytes.push(b'\n');
    for (_, m) in matrices {
        for v in m.iter() {
            bytes.extend(v.to_le_bytes());
        }
    }
    write_atomic(path, &bytes)
}

pub struct Cache<T> {
    pub config_hash: String,
    pub data: T,
    pub matrices: BTreeMap<String, DMatrix<f64>>,
}

pub fn read_cache<T: DeserializeOwned>(path: &Path) -> Result<Cache<T>> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .with_context(|| format!("missing cache {}", path.display()))?
        .read_to_end(&mut bytes)?;
    let Some(rest) = bytes.strip_prefix(CACHE_MAGIC) else {
        bail!("{} is not a valnet cache", path.display());
    };
    let newline = rest
        .iter()
        .position(|b| *b == b'\n')
        .with_context(|| format!("{}: truncated header", path.display()))?;
    let mut header: Value = serde_json::from_slice(&rest[..newline])?;
    let config_hash = header["metadata"]["config_sha256"]
        .as_str()
        .unwrap_or_default()
        .to_string();
    let data: T = serde_json::from_value(header["data"].take())?;
    let mut body = &rest[newline + 1..];
    let mut matrices = BTreeMap::new();
    for entry in header["matrices"].as_array().cloned().unwrap_or_default() {
        let name = entry["name"].as_str().unwrap_or_default().to_string();
        let rows = entry["rows"].as_u64().unwrap_or(0) as usize;
        let cols = entry["cols"].as_u64().unwrap_or(0) as usize;
        let len = rows * cols * 8;
        if body.len() < len {
            bail!("{}: truncated matrix {name}", path.display());
        }
        let values = body[..len]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        matrices.insert(name, DMatrix::from_iterator(rows, cols, values));
        body = &body[len..];
    }
    Ok(Cache {
        config_hash,
        data,
        matrices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.bin");
        let config = RunConfig {
            manifests: vec!["m.json".into()],
            ..Default::default()
        };
        let meta = Metadata::new(Stage::Build, &config);
        let m = DMatrix::from_row_slice(2, 3, &[0.1, 1.0 / 3.0, -0.0, 1e300, f64::MIN_POSITIVE, 7.0]);
        write_cache(&path, &meta, &vec!["a", "b"], &[("w", &m)]).unwrap();
        let back: Cache<Vec<String>> = read_cache(&path).unwrap();
        assert_eq!(back.data, vec!["a", "b"]);
        assert_eq!(back.config_hash, config.hash());
        let w = &back.matrices["w"];
        assert!(w.iter().zip(m.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn gexf_comment_follows_declaration() {
        let config = RunConfig::default();
        let meta = Metadata::new(Stage::Decompose, &config);
        let doc = meta.gexf("<?xml version=\"1.0\"?>\n<gexf/>\n");
        assert!(doc.starts_with("<?xml version=\"1.0\"?>\n<!--\n"));
        assert!(doc.ends_with("-->\n<gexf/>\n"));
    }
}
