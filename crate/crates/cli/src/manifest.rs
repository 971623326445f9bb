use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub seconds: f64,
}

/// Run record written next to every output: enough to rerun the
/// command and check that the outputs match byte for byte.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub argv: Vec<String>,
    pub seed: u64,
    pub threads: usize,
    pub config: Value,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub stages: Vec<Stage>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Collects inputs, outputs and stage timings while a command runs.
pub struct Recorder {
    manifest: Manifest,
    prefix: PathBuf,
}

impl Recorder {
    pub fn new(command: &str, seed: u64, prefix: PathBuf) -> Self {
        Recorder {
            manifest: Manifest {
                tool: "kdsum",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                argv: std::env::args().collect(),
                seed,
                threads: rayon::current_num_threads(),
                config: Value::Null,
                inputs: Vec::new(),
                outputs: Vec::new(),
                stages: Vec::new(),
            },
            prefix,
        }
    }

    pub fn set_config(&mut self, config: Value) {
        self.manifest.config = config;
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let sha256 = sha256_file(path)?;
        self.manifest.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256,
        });
        Ok(())
    }

    /// Runs `f` and records its wall clock under `name`.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        self.manifest.stages.push(Stage {
            name: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        Ok(out)
    }

    /// Path `<prefix>.<suffix>`, recorded as an output.
    pub fn output(&mut self, suffix: &str) -> PathBuf {
        let mut name = self.prefix.clone().into_os_string();
        name.push(".");
        name.push(suffix);
        let path = PathBuf::from(name);
        self.manifest.outputs.push(path.display().to_string());
        path
    }

    /// Lines for the `#` header of CSV outputs. Only reproducible fields go
    /// here, so reruns produce identical files.
    pub fn header(&self) -> Vec<String> {
        vec![
            format!("{} {}", self.manifest.tool, self.manifest.version),
            format!("command: {}", self.manifest.command),
            format!("seed: {}", self.manifest.seed),
            format!("config: {}", self.manifest.config),
        ]
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        let path = self.output("manifest.json");
        let mut file =
            fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        serde_json::to_writer_pretty(&mut file, &self.manifest)?;
        writeln!(file)?;
        Ok(path)
    }
}

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    Ok(())
}
