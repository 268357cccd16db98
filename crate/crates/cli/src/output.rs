use crate::config::{sha256_hex, RunConfig};
use crate::error::CliError;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> Result<Self, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self { path: path.display().to_string(), sha256: sha256_hex(&bytes) })
    }
}

/// Everything needed to repeat a run: the effective configuration, its
/// digest, the seed and the digests of every input file.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub library_version: &'static str,
    pub model_format_version: u32,
    pub command: &'a str,
    pub seed: u64,
    pub rng_algorithm: &'static str,
    pub config_digest: String,
    pub config: &'a RunConfig,
    pub inputs: &'a [FileDigest],
    pub outputs: Vec<String>,
    pub details: serde_json::Value,
}

/// Output directory that remembers what was written to it.
pub struct OutDir {
    dir: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
        self.write(name, text.as_bytes())
    }

    /// Write `<command>_manifest.json` listing every file written so far.
    pub fn finish(
        mut self,
        command: &str,
        cfg: &RunConfig,
        inputs: &[FileDigest],
        details: serde_json::Value,
    ) -> Result<PathBuf, CliError> {
        let manifest = Manifest {
            tool: "coinn",
            tool_version: env!("CARGO_PKG_VERSION"),
            library_version: coinn::VERSION,
            model_format_version: coinn::ann::MODEL_FORMAT_VERSION,
            command,
            seed: cfg.seed,
            rng_algorithm: coinn::rng::RNG_ALGORITHM,
            config_digest: cfg.digest(),
            config: cfg,
            inputs,
            outputs: std::mem::take(&mut self.written),
            details,
        };
        self.write_json(&format!("{command}_manifest.json"), &manifest)
    }
}
