use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Result;
use crate::mesh::{write_snapshot_binary, write_snapshot_csv, Field};

use super::config::{SimConfig, SnapshotFormat};

pub const DIAGNOSTICS_HEADER: &str = "t,dt,mass,entropy,dissipation,rho_min,rho_max";

/// Fixed keys written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub status: String,
    pub t_final: f64,
    pub mass_initial: f64,
    pub mass_final: f64,
    pub entropy_final: f64,
    pub n_steps: u64,
}

/// Files under one run directory.
pub struct OutputSink {
    dir: PathBuf,
    diagnostics: BufWriter<File>,
    format: SnapshotFormat,
    snapshots: usize,
}

impl OutputSink {
    pub fn create(dir: &Path, config: &SimConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let resolved = serde_json::to_string_pretty(config)?;
        fs::write(dir.join("config.resolved.json"), resolved + "\n")?;
        let mut diagnostics = BufWriter::new(File::create(dir.join("diagnostics.csv"))?);
        writeln!(diagnostics, "{DIAGNOSTICS_HEADER}")?;
        Ok(OutputSink {
            dir: dir.to_path_buf(),
            diagnostics,
            format: config.snapshot_format,
            snapshots: 0,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn record(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        writeln!(
            self.diagnostics,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.t, r.dt, r.mass, r.entropy, r.dissipation, r.rho_min, r.rho_max
        )?;
        Ok(())
    }

    fn write_field(&self, stem: &str, field: &Field) -> Result<()> {
        if matches!(self.format, SnapshotFormat::Csv | SnapshotFormat::Both) {
            let mut w = BufWriter::new(File::create(self.dir.join(format!("{stem}.csv")))?);
            write_snapshot_csv(field, &mut w)?;
            w.flush()?;
        }
        if matches!(self.format, SnapshotFormat::Binary | SnapshotFormat::Both) {
            let mut w = BufWriter::new(File::create(self.dir.join(format!("{stem}.bin")))?);
            write_snapshot_binary(field, &mut w)?;
            w.flush()?;
        }
        Ok(())
    }

    /// Writes `snapshot_NNNNN` and returns its index.
    pub fn snapshot(&mut self, field: &Field) -> Result<usize> {
        let i = self.snapshots;
        self.write_field(&format!("snapshot_{i:05}"), field)?;
        self.snapshots += 1;
        Ok(i)
    }

    pub fn finish(mut self, field: &Field, summary: &Summary) -> Result<()> {
        self.diagnostics.flush()?;
        self.write_field("final", field)?;
        let text = serde_json::to_string_pretty(summary)?;
        fs::write(self.dir.join("summary.json"), text + "\n")?;
        Ok(())
    }

    pub fn write_text(&self, name: &str, contents: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        Ok(())
    }
}
