//! Output directories: every file written through [`OutputDir`] is listed with
//! its SHA-256 in `manifest.sha256`, next to the resolved config and a version stamp.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub struct OutputDir {
    root: PathBuf,
    files: Vec<(String, String)>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(OutputDir { root: root.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.root.join(name), bytes)?;
        let digest = Sha256::digest(bytes);
        let hex = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        self.files.retain(|(n, _)| n != name);
        self.files.push((name.to_string(), hex));
        Ok(())
    }

    /// Renders with `f` into a buffer and writes it.
    pub fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    /// Writes the resolved config, the version stamp and the manifest. The
    /// output directory itself is left out so that reruns elsewhere hash equal.
    pub fn finish(mut self, cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
        let resolved: String = cfg
            .to_text()
            .lines()
            .filter(|l| !l.starts_with("output.dir ="))
            .map(|l| format!("{l}\n"))
            .collect();
        self.write("config.resolved", resolved.as_bytes())?;
        let stamp = format!(
            "ymh-cli {}\nymh-core {}\n",
            env!("CARGO_PKG_VERSION"),
            ymh_core::VERSION
        );
        self.write("version.txt", stamp.as_bytes())?;
        self.files.sort();
        let mut manifest = String::new();
        for (name, hex) in &self.files {
            let _ = writeln!(manifest, "{hex}  {name}");
        }
        fs::write(self.root.join("manifest.sha256"), manifest)?;
        Ok(self.root)
    }
}
