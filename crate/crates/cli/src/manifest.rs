use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub model_file: Option<String>,
    pub model_sha256: Option<String>,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub duration_secs: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects output files for one command run; `finish` writes the manifest
/// after everything else so its presence marks a complete run.
pub struct Run {
    start: Instant,
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn new(command: &'static str, dir: &Path, config: serde_json::Value) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            start: Instant::now(),
            dir: dir.to_path_buf(),
            manifest: RunManifest { command, model_file: None, model_sha256: None, seed: None, config, outputs: Vec::new(), duration_secs: 0.0 },
        })
    }

    pub fn model(&mut self, path: &Path, bytes: &[u8]) {
        self.manifest.model_file = Some(path.display().to_string());
        self.manifest.model_sha256 = Some(sha256_hex(bytes));
    }

    pub fn seed(&mut self, seed: u64) {
        self.manifest.seed = Some(seed);
    }

    /// Create `name` in the output directory and record it.
    pub fn create(&mut self, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
        let path = self.dir.join(name);
        let f = std::fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        self.manifest.outputs.push(path.display().to_string());
        Ok(std::io::BufWriter::new(f))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        std::io::Write::write_all(&mut w, b"\n")?;
        std::io::Write::flush(&mut w)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        self.manifest.duration_secs = self.start.elapsed().as_secs_f64();
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn manifest_lists_outputs_and_comes_last() {
        let dir = tempfile::tempdir().unwrap();
        let mut run = Run::new("test", dir.path(), serde_json::json!({"k": 1})).unwrap();
        run.write_json("a.json", &[1, 2]).unwrap();
        let m = run.finish().unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
        assert_eq!(v["outputs"].as_array().unwrap().len(), 1);
        assert!(dir.path().join("a.json").exists());
    }
}
