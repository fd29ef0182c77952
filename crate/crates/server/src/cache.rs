//! On-disk artifact cache. Each dataset lives under a directory named by the
//! SHA-256 of the source file bytes followed by the column-role JSON, so a
//! restart over the same inputs reuses every stored artifact.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use atlas_core::data::{export, ingest, DType, ExportFormat, Format, IngestOptions};
use atlas_core::query::Bitmask;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{DatasetSpec, Prepared};
use crate::pipeline::Artifacts;

pub const DEFAULT_CACHE_DIR: &str = ".atlas-cache";
const CURRENT: &str = "current.json";
const MANIFEST: &str = "manifest.json";
const TABLE: &str = "table.parquet";
const ARTIFACTS: &str = "artifacts.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub key: String,
    pub source: String,
    pub source_sha256: String,
    pub row_count: usize,
    pub spec: DatasetSpec,
    /// Column names and dtypes in table order, used as type hints on reload.
    pub columns: Vec<(String, DType)>,
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn dataset_key(source: &[u8], spec: &DatasetSpec) -> String {
    let mut h = Sha256::new();
    h.update(source);
    h.update(serde_json::to_vec(spec).expect("spec serializes"));
    hex::encode(h.finalize())
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, key: &str) -> PathBuf {
        self.root.join(key)
    }

    /// Stores a prepared table and makes it the current dataset.
    pub fn store(&self, source: &Path, source_bytes: &[u8], requested: &DatasetSpec, prepared: &Prepared) -> anyhow::Result<Manifest> {
        let key = dataset_key(source_bytes, requested);
        let dir = self.dir(&key);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let table = &prepared.table;
        let bytes = export(table, &Bitmask::ones(table.row_count()), ExportFormat::Parquet)?;
        fs::write(dir.join(TABLE), bytes)?;
        let manifest = Manifest {
            key: key.clone(),
            source: source.display().to_string(),
            source_sha256: sha256_hex(source_bytes),
            row_count: table.row_count(),
            spec: prepared.spec.clone(),
            columns: table.columns().iter().map(|c| (c.name().to_string(), c.dtype())).collect(),
        };
        fs::write(dir.join(MANIFEST), serde_json::to_vec_pretty(&manifest)?)?;
        // a stale artifact file from an older build of the same key is dropped
        let _ = fs::remove_file(dir.join(ARTIFACTS));
        fs::write(self.root.join(CURRENT), serde_json::to_vec(&serde_json::json!({ "key": key }))?)?;
        Ok(manifest)
    }

    pub fn current_key(&self) -> anyhow::Result<String> {
        let path = self.root.join(CURRENT);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("no ingested dataset in {} (run `atlas ingest` first)", self.root.display()))?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        v["key"].as_str().map(str::to_string).ok_or_else(|| anyhow!("malformed {}", path.display()))
    }

    pub fn load(&self, key: &str) -> anyhow::Result<(Manifest, Prepared)> {
        let dir = self.dir(key);
        let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join(MANIFEST))?)?;
        let mut options = IngestOptions::default();
        options.type_hints.extend(manifest.columns.iter().cloned());
        let table = ingest(&fs::read(dir.join(TABLE))?, Format::Parquet, &options)?;
        let (x, y) = match (&manifest.spec.x, &manifest.spec.y) {
            (Some(x), Some(y)) => (x.clone(), y.clone()),
            _ => return Err(anyhow!("cached dataset {key} has no coordinates")),
        };
        let prepared = Prepared {
            table,
            spec: manifest.spec.clone(),
            x,
            y,
        };
        Ok((manifest, prepared))
    }

    pub fn load_artifacts(&self, key: &str) -> anyhow::Result<Option<Artifacts>> {
        let path = self.dir(key).join(ARTIFACTS);
        if !path.exists() {
            return Ok(None);
        }
        let a: Artifacts = serde_json::from_slice(&fs::read(&path)?)?;
        Ok(Some(a.into_restored()))
    }

    pub fn store_artifacts(&self, key: &str, artifacts: &Artifacts) -> anyhow::Result<()> {
        let path = self.dir(key).join(ARTIFACTS);
        fs::write(&path, serde_json::to_vec(artifacts)?).with_context(|| format!("writing {}", path.display()))
    }
}
