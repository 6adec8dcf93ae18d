//! CSV emission with a reproducibility header block. All floats are printed
//! with a fixed format so identical runs produce identical bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

pub struct Csv {
    lines: Vec<String>,
}

impl Csv {
    pub fn new(tool: &str, seed: u64, config: &[(&str, String)], columns: &[&str]) -> Self {
        let mut lines = Vec::new();
        lines.push(format!("# tool: frameflow {tool}"));
        lines.push(format!("# version: {}", env!("CARGO_PKG_VERSION")));
        lines.push(format!("# seed: {seed}"));
        lines.push("# rng: SplitMix64".to_string());
        for (k, v) in config {
            lines.push(format!("# {k}: {v}"));
        }
        lines.push(columns.join(","));
        Csv { lines }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.lines.push(fields.join(","));
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut f = fs::File::create(path)?;
        for line in &self.lines {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

pub fn f(x: f64) -> String {
    format!("{x:.15e}")
}

pub fn b(x: bool) -> String {
    if x { "pass".into() } else { "fail".into() }
}
