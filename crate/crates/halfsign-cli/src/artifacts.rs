//! Artifact collection: every run writes its files through this sink so the
//! manifest always lists exactly what was produced, with content hashes.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub struct Artifacts {
    dir: PathBuf,
    entries: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Artifacts {
        Artifacts {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.entries.push((name.to_string(), bytes));
    }

    pub fn add_text(&mut self, name: &str, text: String) {
        self.add(name, text.into_bytes());
    }

    pub fn add_json(&mut self, name: &str, value: &serde_json::Value) -> Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.add_text(name, body);
        Ok(())
    }

    /// Writes every entry plus `MANIFEST.txt` (`sha256  name` per file, in
    /// write order) and reports each path on stdout.
    pub fn finish(self) -> Result<()> {
        std::fs::create_dir_all(&self.dir)
            .with_context(|| format!("creating {}", self.dir.display()))?;
        let mut manifest = String::new();
        for (name, bytes) in &self.entries {
            let path = self.dir.join(name);
            std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
            let digest = Sha256::digest(bytes);
            manifest.push_str(&format!("{digest:x}  {name}\n"));
            println!("wrote {} ({} bytes)", path.display(), bytes.len());
        }
        let manifest_path = self.dir.join("MANIFEST.txt");
        std::fs::write(&manifest_path, manifest.as_bytes())
            .with_context(|| format!("writing {}", manifest_path.display()))?;
        println!("wrote {}", manifest_path.display());
        Ok(())
    }
}
