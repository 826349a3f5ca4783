// Copyright 2026 nlbath Contributors
// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON sidecar writers. Numbers go out in full double
//! precision scientific notation so identical configurations reproduce
//! identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::ResolvedConfig;

/// Full-precision scientific formatting (17 fractional digits round-trips
/// any f64).
pub fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

pub struct CsvWriter {
    inner: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str) -> anyhow::Result<Self> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut inner = BufWriter::new(File::create(path)?);
        writeln!(inner, "{header}")?;
        Ok(Self { inner })
    }

    pub fn row(&mut self, values: &[f64]) -> anyhow::Result<()> {
        let line: Vec<String> = values.iter().map(|&v| fmt(v)).collect();
        writeln!(self.inner, "{}", line.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> anyhow::Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Write the sidecar: the exact resolved config plus per-point derived
/// scalars.
pub fn write_sidecar(
    config: &ResolvedConfig,
    derived: Vec<serde_json::Value>,
) -> anyhow::Result<()> {
    let sidecar = serde_json::json!({
        "config": config,
        "derived": derived,
    });
    let path = config.sidecar_path();
    std::fs::write(&path, serde_json::to_string_pretty(&sidecar)? + "\n")
        .map_err(|e| anyhow::anyhow!("cannot write sidecar {}: {e}", path.display()))?;
    Ok(())
}
