//! Deterministic artifact emission: CSV files in full double precision plus a
//! JSON manifest sibling for every CSV. The manifest is the only place a
//! wall-clock value appears; the CSV bytes depend on the config alone.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::EffectiveConfig;

/// One CSV cell. Floats are written as `{:.16e}` (17 significant digits) so a
/// round trip through text is exact; ±∞ renders as `inf`/`-inf` (the
/// anti-squeezing sentinel relies on this).
#[derive(Debug, Clone)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Str(&'static str),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&'static str> for Cell {
    fn from(v: &'static str) -> Self {
        Cell::Str(v)
    }
}

fn push_cell(out: &mut String, cell: &Cell) {
    match cell {
        Cell::Float(v) => {
            let _ = write!(out, "{v:.16e}");
        }
        Cell::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Cell::Str(s) => out.push_str(s),
    }
}

/// Render header + rows; every row must match the header width. The header
/// is passed pre-joined because some commands build it dynamically (the P_ij
/// column block scales with the basis dimension).
pub fn render_csv(header: &str, rows: &[Vec<Cell>]) -> String {
    let width = header.split(',').count();
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        assert_eq!(row.len(), width, "csv row width mismatch");
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            push_cell(&mut out, cell);
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    output: String,
    config: &'a EffectiveConfig<'a>,
    config_sha256: &'a str,
    workers: usize,
    wall_time_s: f64,
}

/// Shared context for everything a single run writes.
pub struct Emitter<'a> {
    out_dir: PathBuf,
    command: &'a str,
    config: &'a EffectiveConfig<'a>,
    config_sha256: String,
    workers: usize,
    started: std::time::Instant,
    written: Vec<PathBuf>,
}

impl<'a> Emitter<'a> {
    pub fn new(out_dir: &Path, command: &'a str, config: &'a EffectiveConfig<'a>) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        let bytes = serde_json::to_vec(config).expect("config echo serializes");
        let config_sha256 = hex(&Sha256::digest(&bytes));
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            command,
            config,
            config_sha256,
            workers: rayon::current_num_threads(),
            started: std::time::Instant::now(),
            written: Vec::new(),
        })
    }

    /// Write `<stem>.csv` plus its `<stem>.manifest.json` sibling.
    pub fn emit(&mut self, stem: &str, header: &str, rows: &[Vec<Cell>]) -> std::io::Result<()> {
        let csv_name = format!("{stem}.csv");
        let csv_path = self.out_dir.join(&csv_name);
        fs::write(&csv_path, render_csv(header, rows))?;

        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            output: csv_name,
            config: self.config,
            config_sha256: &self.config_sha256,
            workers: self.workers,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        let manifest_path = self.out_dir.join(format!("{stem}.manifest.json"));
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(&manifest_path, text)?;

        self.written.push(csv_path);
        self.written.push(manifest_path);
        Ok(())
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        let _ = write!(s, "{b:02x}");
    }
    s
}
