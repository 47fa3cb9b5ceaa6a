//! Output files. Every file starts with the SHA-256 of the canonical scenario
//! and an echo of it: `#` comment lines for CSV and PGM, `config_sha256` and
//! `config` keys for JSON.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use holobeam::optimizer::TraceEntry;
use holobeam::propagation::export::{decimate, write_pgm, write_slice_csv};
use holobeam::{FieldSlice, GridSpec};
use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{CliError, Result};

/// Widest heatmap written, in pixels.
pub const MAX_HEATMAP_WIDTH: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    digest: String,
    config: ScenarioConfig,
}

impl Provenance {
    pub fn of(config: &ScenarioConfig) -> Self {
        Self {
            digest: config.digest(),
            config: config.clone(),
        }
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn comment_lines(&self) -> Vec<String> {
        let mut lines = vec![format!("config_sha256 = {}", self.digest)];
        lines.extend(
            self.config
                .to_toml()
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(|l| format!("config: {l}")),
        );
        lines
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn finish(path: &Path, mut out: BufWriter<File>) -> Result<()> {
    out.flush().map_err(|e| CliError::io(path, e))
}

fn write_comments<W: Write>(out: &mut W, prov: &Provenance, path: &Path) -> Result<()> {
    for line in prov.comment_lines() {
        writeln!(out, "# {line}").map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

/// CSV with one row per element of `rows`; `None` fields are left empty.
pub fn write_table<T: Serialize>(path: &Path, prov: &Provenance, rows: &[T]) -> Result<()> {
    let mut out = create(path)?;
    write_comments(&mut out, prov, path)?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    finish(path, out)
}

/// Complex field of one plane.
pub fn write_field(path: &Path, prov: &Provenance, slice: &FieldSlice) -> Result<()> {
    let mut out = create(path)?;
    write_comments(&mut out, prov, path)?;
    writeln!(out, "# z = {}", slice.z()).map_err(|e| CliError::io(path, e))?;
    write_slice_csv(&mut out, slice).map_err(|e| CliError::io(path, e))?;
    finish(path, out)
}

/// `|E|^2` of every plane as a peak-normalized grayscale image, z downward.
pub fn write_heatmap(path: &Path, prov: &Provenance, rows: &[Vec<f64>], grid: &GridSpec, plane_spacing: f64) -> Result<()> {
    let stride = grid.count().div_ceil(MAX_HEATMAP_WIDTH);
    let image: Vec<Vec<f64>> = rows.iter().map(|r| decimate(r, stride)).collect();
    let mut comments = vec![format!("config_sha256 = {}", prov.digest())];
    comments.push(format!(
        "columns: x from {} step {} m; rows: z from 0 step {} m; normalized to peak |E|^2",
        grid.start(),
        grid.dx() * stride as f64,
        plane_spacing
    ));
    comments.extend(prov.comment_lines().into_iter().skip(1));
    let mut out = create(path)?;
    write_pgm(&mut out, &image, &comments).map_err(|e| CliError::io(path, e))?;
    finish(path, out)
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    config_sha256: &'a str,
    config: &'a ScenarioConfig,
    summary: &'a T,
}

pub fn write_summary<T: Serialize>(path: &Path, prov: &Provenance, summary: &T) -> Result<()> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(
        &mut out,
        &Envelope {
            config_sha256: prov.digest(),
            config: &prov.config,
            summary,
        },
    )?;
    writeln!(out).map_err(|e| CliError::io(path, e))?;
    finish(path, out)
}

/// Row of an optimizer search trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub c: f64,
    pub a: f64,
    pub b: f64,
    pub z_max: Option<f64>,
    pub d_r: Option<f64>,
    pub theta_r: Option<f64>,
    pub score: Option<f64>,
    pub power: f64,
}

impl From<&TraceEntry> for TraceRow {
    fn from(e: &TraceEntry) -> Self {
        Self {
            c: e.c,
            a: e.a,
            b: e.b,
            z_max: e.estimate.map(|s| s.z_max),
            d_r: e.estimate.map(|s| s.d_r),
            theta_r: e.estimate.map(|s| s.theta_r),
            score: e.estimate.map(|s| s.score),
            power: e.power,
        }
    }
}
