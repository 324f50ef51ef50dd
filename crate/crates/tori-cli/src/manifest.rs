use crate::config::PipelineConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};
use tori::model::ModelSpec;
use tori::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const MODEL_COPY: &str = "model.toml";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerbRecord {
    pub verb: String,
    pub status: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Seeds {
    pub measure: u64,
    pub verify_seeds: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub module_versions: BTreeMap<String, String>,
    pub model_source: String,
    pub model_hash: String,
    pub parameters: PipelineConfig,
    pub seeds: Seeds,
    pub threads: usize,
    pub created_unix: u64,
    pub verbs: Vec<VerbRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// A run directory: the manifest, a copy of the model, and the files each
/// verb adds. Files are never rewritten, apart from the manifest.
pub struct RunDir {
    pub root: PathBuf,
    pub manifest: RunManifest,
}

impl RunDir {
    /// Opens `root`, creating it when it has no manifest yet. With an
    /// existing manifest, `cfg` (when given) must match the stored parameters.
    pub fn open(root: &Path, cfg: Option<PipelineConfig>) -> Result<RunDir> {
        let path = root.join(MANIFEST);
        if path.exists() {
            let manifest: RunManifest = serde_json::from_slice(&fs::read(&path)?)?;
            if let Some(cfg) = cfg {
                let (text, _) = cfg.model_source()?;
                if cfg != manifest.parameters || sha256_hex(text.as_bytes()) != manifest.model_hash {
                    return Err(Error::Config(format!("{} was created with different parameters or model; use a new run directory", root.display())));
                }
            }
            return Ok(RunDir { root: root.to_path_buf(), manifest });
        }
        let cfg = cfg.unwrap_or_default();
        cfg.validate()?;
        let (text, source) = cfg.model_source()?;
        ModelSpec::from_toml(&text)?;
        fs::create_dir_all(root)?;
        write_atomic(&root.join(MODEL_COPY), text.as_bytes())?;
        let manifest = RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            module_versions: tori::MODULE_VERSIONS.iter().map(|(m, v)| (m.to_string(), v.to_string())).collect(),
            model_source: source,
            model_hash: sha256_hex(text.as_bytes()),
            seeds: Seeds { measure: cfg.measure.seed, verify_seeds: cfg.verify.seeds },
            parameters: cfg,
            threads: rayon::current_num_threads(),
            created_unix: unix_now(),
            verbs: vec![],
        };
        let dir = RunDir { root: root.to_path_buf(), manifest };
        dir.save()?;
        Ok(dir)
    }

    pub fn params(&self) -> &PipelineConfig {
        &self.manifest.parameters
    }

    pub fn spec(&self) -> Result<ModelSpec> {
        ModelSpec::load(&self.root.join(MODEL_COPY))
    }

    pub fn save(&self) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(&self.manifest)?;
        text.push(b'\n');
        write_atomic(&self.root.join(MANIFEST), &text)
    }

    pub fn record(&mut self, rec: VerbRecord) -> Result<()> {
        self.manifest.verbs.push(rec);
        self.save()
    }

    pub fn has(&self, name: &str) -> bool {
        self.root.join(name).exists()
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<OutputFile> {
        let path = self.root.join(name);
        if path.exists() {
            return Err(Error::Config(format!("{} already exists; run directories are append-only", path.display())));
        }
        write_atomic(&path, bytes)?;
        Ok(OutputFile { path: name.into(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 })
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<OutputFile> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    pub fn write_csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<OutputFile> {
        let mut w = csv::Writer::from_writer(vec![]);
        let csv_err = |e: csv::Error| Error::Config(format!("{name}: {e}"));
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(format!("{name}: {e}")))?;
        self.write(name, &bytes)
    }

    pub fn read_json<T: DeserializeOwned>(&self, name: &str) -> Result<T> {
        let path = self.root.join(name);
        let bytes = fs::read(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}
