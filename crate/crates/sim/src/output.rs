//! File writers: RFC 4180 CSV, JSON summaries and 16-bit PGM frames.
//!
//! Every writer is deterministic: floats use Rust's shortest round-trip
//! formatting and no timestamps or host information are emitted.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use opo_core::interference::IntensityMap;
use serde::Serialize;

use crate::error::{SimError, SimResult};

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> SimError + '_ {
    move |source| SimError::Write { path: path.to_path_buf(), source }
}

/// Column-oriented table built row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Shortest representation that parses back to the same value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> SimResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(write_err(dir))?;
    }
    let mut f = fs::File::create(path).map_err(write_err(path))?;
    f.write_all(bytes).map_err(write_err(path))
}

pub fn write_csv(path: &Path, table: &Table) -> SimResult<()> {
    write_bytes(path, &table.to_csv())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> SimResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("summary serializes");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

/// Binary P5 PGM with maxval 65535, big-endian samples, scaled linearly so the
/// frame maximum maps to 65535. The first image row is the top of the frame
/// (largest `y`).
pub fn encode_pgm(map: &IntensityMap) -> Vec<u8> {
    let n = map.grid.n;
    let peak = map.max();
    let scale = if peak > 0.0 { 65535.0 / peak } else { 0.0 };
    let mut out = format!("P5\n{n} {n}\n65535\n").into_bytes();
    out.reserve(2 * n * n);
    for iy in (0..n).rev() {
        for ix in 0..n {
            let v = (map.get(ix, iy) * scale).round().clamp(0.0, 65535.0) as u16;
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out
}

pub fn write_pgm(path: &Path, map: &IntensityMap) -> SimResult<()> {
    write_bytes(path, &encode_pgm(map))
}

/// Intensity map as `x,y,intensity` rows.
pub fn map_table(map: &IntensityMap) -> Table {
    let mut t = Table::new(&["x", "y", "intensity"]);
    let g = &map.grid;
    for iy in 0..g.n {
        for ix in 0..g.n {
            t.push(vec![num(g.coord(ix)), num(g.coord(iy)), num(map.get(ix, iy))]);
        }
    }
    t
}

/// `{dir}/{stem}{suffix}`.
pub fn output_path(dir: &Path, stem: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{stem}{suffix}"))
}
