use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use liqopt_core::{GridSpec, ModelParams};
use serde::Serialize;

use crate::error::{Classify, Failure};

/// Six significant digits for tables.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    rounded.to_string()
}

pub fn opt6(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridInfo {
    pub n_s: usize,
    pub n_l: usize,
    pub n_t: usize,
    pub s_max_mult: f64,
    pub l_max: f64,
}

impl GridInfo {
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            s_max_mult: self.s_max_mult,
            l_max: self.l_max,
        }
    }
}

/// Everything needed to repeat a run. Floats are written in shortest
/// round-trip form, so they parse back to the same bits.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub argv: Vec<String>,
    pub version: &'static str,
    pub jobs: usize,
    pub params: Option<ModelParams>,
    pub grid: Option<GridInfo>,
    pub seed: Option<u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub settings: serde_json::Value,
    pub wall_time_secs: f64,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            argv: std::env::args().collect(),
            version: env!("CARGO_PKG_VERSION"),
            jobs: rayon::current_num_threads(),
            params: None,
            grid: None,
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            settings: serde_json::Value::Null,
            wall_time_secs: 0.0,
        }
    }
}

pub struct OutDir {
    pub root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(root)
            .with_context(|| format!("cannot create output directory {}", root.display()))
            .input()?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write(
        &self,
        name: &str,
        contents: &[u8],
        manifest: &mut Manifest,
    ) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        fs::write(&path, contents)
            .with_context(|| format!("cannot write {}", path.display()))
            .input()?;
        manifest.outputs.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(
        &self,
        name: &str,
        value: &T,
        manifest: &mut Manifest,
    ) -> Result<PathBuf, Failure> {
        let text = serde_json::to_string_pretty(value).numerical()?;
        self.write(name, text.as_bytes(), manifest)
    }

    pub fn finish(&self, manifest: &Manifest) -> Result<(), Failure> {
        let text = serde_json::to_string_pretty(manifest).numerical()?;
        let path = self.path("manifest.json");
        fs::write(&path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .input()
    }
}

/// Small CSV builder; every row is joined with commas.
#[derive(Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Self::default();
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let fields: Vec<String> = fields.into_iter().collect();
        self.buf.push_str(&fields.join(","));
        self.buf.push('\n');
    }

    pub fn as_bytes(&self) -> &[u8] {
        self.buf.as_bytes()
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }
}
