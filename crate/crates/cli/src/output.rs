//! Output directory with a content-hashed manifest.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    config: &'a Value,
    files: &'a [FileEntry],
}

/// Collects files in memory; `finish` writes them in order, then the manifest.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl OutputDir {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        self.add(name, text);
    }

    pub fn finish(self, config: &Value) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(&self.root)?;
        let mut entries = Vec::with_capacity(self.files.len());
        let mut written = Vec::with_capacity(self.files.len() + 1);
        for (name, bytes) in &self.files {
            let path = self.root.join(name);
            fs::write(&path, bytes)?;
            entries.push(FileEntry {
                path: name.clone(),
                sha256: hex::encode(Sha256::digest(bytes)),
                bytes: bytes.len(),
            });
            written.push(path);
        }
        let manifest = Manifest {
            version: env!("CARGO_PKG_VERSION"),
            config,
            files: &entries,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.root.join("manifest.json");
        fs::write(&path, text)?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_every_file_with_its_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::new(dir.path());
        out.add("a.txt", "abc");
        out.add_json("b.json", &serde_json::json!({"x": 1}));
        out.finish(&serde_json::json!({"command": "test"})).unwrap();
        let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        let files = manifest["files"].as_array().unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(
            files[0]["sha256"],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert_eq!(manifest["config"]["command"], "test");
    }
}
