//! File formats: cluster CSV, trace/stats JSON, and run manifests.
//!
//! Positions are written with 17 significant digits so CSV round-trips are
//! exact, and every JSON document carries a format-version string. A cluster
//! CSV has no room for a version line (the header is fixed), so its version
//! travels in the manifest written next to it.

use crate::error::{GfaError, Result};
use crate::geometry::Cluster;
use crate::growth::GrowthTrace;
use crate::vec::Point;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;

pub const CLUSTER_FORMAT: &str = "gfa-cluster/1";
pub const TRACE_FORMAT: &str = "gfa-trace/1";
pub const STATS_FORMAT: &str = "gfa-stats/1";
pub const MANIFEST_FORMAT: &str = "gfa-manifest/1";
pub const TABLE_FORMAT: &str = "gfa-table/1";

/// Write a measurement's tabular core as CSV: a documented header line,
/// then one pre-rendered row per line.
pub fn write_table_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut out = String::with_capacity(
        header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>(),
    );
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(row);
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Cluster CSV: header `id,x,y[,z],parent,order`, parent -1 for a root.

pub fn cluster_to_csv<const D: usize>(cluster: &Cluster<D>) -> String {
    let mut out = String::new();
    out.push_str(if D == 2 { "id,x,y,parent,order\n" } else { "id,x,y,z,parent,order\n" });
    for (i, p) in cluster.positions().iter().enumerate() {
        let _ = write!(out, "{i}");
        for v in p {
            let _ = write!(out, ",{v:.16e}");
        }
        let parent = cluster.parent(i as u32).map_or(-1, |q| q as i64);
        let _ = writeln!(out, ",{parent},{i}");
    }
    out
}

pub fn write_cluster_csv<const D: usize>(path: &Path, cluster: &Cluster<D>) -> Result<()> {
    std::fs::write(path, cluster_to_csv(cluster))?;
    Ok(())
}

/// Number of coordinate columns in a cluster CSV (2 or 3), from the header.
pub fn cluster_csv_dim(path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(path)?;
    let header = text.lines().next().unwrap_or("");
    match header.trim_end() {
        "id,x,y,parent,order" => Ok(2),
        "id,x,y,z,parent,order" => Ok(3),
        other => Err(parse_err(path.display(), 1, format!("unrecognized header {other:?}"))),
    }
}

pub fn read_cluster_csv<const D: usize>(path: &Path) -> Result<Cluster<D>> {
    let text = std::fs::read_to_string(path)?;
    parse_cluster_csv(&text, &path.display().to_string())
}

fn parse_err(path: impl std::fmt::Display, line: usize, msg: String) -> GfaError {
    GfaError::Parse { path: path.to_string(), line, msg }
}

/// Parse cluster CSV text. `path` is used only for error messages.
pub fn parse_cluster_csv<const D: usize>(text: &str, path: &str) -> Result<Cluster<D>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file".into()))?;
    let expected = if D == 2 { "id,x,y,parent,order" } else { "id,x,y,z,parent,order" };
    if header.trim_end() != expected {
        return Err(parse_err(
            path,
            1,
            format!("expected header {expected:?}, got {header:?}"),
        ));
    }

    let mut positions: Vec<Point<D>> = Vec::new();
    let mut parents: Vec<Option<u32>> = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != D + 3 {
            return Err(parse_err(
                path,
                lineno,
                format!("expected {} fields, got {}", D + 3, fields.len()),
            ));
        }
        let row = positions.len();
        let id: usize = fields[0]
            .trim()
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad id: {e}")))?;
        if id != row {
            return Err(parse_err(
                path,
                lineno,
                format!("id {id} out of sequence (expected {row})"),
            ));
        }
        let mut p = [0.0; D];
        for (k, slot) in p.iter_mut().enumerate() {
            *slot = fields[1 + k]
                .trim()
                .parse()
                .map_err(|e| parse_err(path, lineno, format!("bad coordinate: {e}")))?;
        }
        let parent: i64 = fields[D + 1]
            .trim()
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad parent: {e}")))?;
        let parent = match parent {
            -1 => None,
            q if q >= 0 && (q as usize) < row => Some(q as u32),
            q => {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("parent {q} must be -1 or an earlier id"),
                ))
            }
        };
        let order: usize = fields[D + 2]
            .trim()
            .parse()
            .map_err(|e| parse_err(path, lineno, format!("bad order: {e}")))?;
        if order != row {
            return Err(parse_err(
                path,
                lineno,
                format!("order {order} out of sequence (rows must be in attachment order)"),
            ));
        }
        positions.push(p);
        parents.push(parent);
    }
    Cluster::from_parts(positions, parents)
}

// ---------------------------------------------------------------------------
// Trace JSON.

#[derive(Serialize)]
struct TraceFileRef<'a> {
    format: &'static str,
    #[serde(flatten)]
    trace: &'a GrowthTrace,
}

#[derive(Deserialize)]
struct TraceFile {
    format: String,
    #[serde(flatten)]
    trace: GrowthTrace,
}

pub fn trace_to_json(trace: &GrowthTrace) -> String {
    // In-memory serialization of plain data cannot fail.
    serde_json::to_string_pretty(&TraceFileRef { format: TRACE_FORMAT, trace }).unwrap()
}

pub fn write_trace_json(path: &Path, trace: &GrowthTrace) -> Result<()> {
    std::fs::write(path, trace_to_json(trace))?;
    Ok(())
}

pub fn read_trace_json(path: &Path) -> Result<GrowthTrace> {
    let text = std::fs::read_to_string(path)?;
    let file: TraceFile = serde_json::from_str(&text)?;
    if file.format != TRACE_FORMAT {
        return Err(GfaError::InvalidInput(format!(
            "{}: unsupported trace format {:?} (expected {TRACE_FORMAT:?})",
            path.display(),
            file.format
        )));
    }
    Ok(file.trace)
}

/// Write any stats value as a versioned JSON document:
/// `{"format": "gfa-stats/1", "kind": <kind>, "data": <value>}`.
pub fn write_stats_json<T: Serialize>(path: &Path, tag: &str, value: &T) -> Result<()> {
    let doc = serde_json::json!({
        "format": STATS_FORMAT,
        "kind": tag,
        "data": value,
    });
    std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap())?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Run manifests.

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    /// File name, relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    /// Format-version string of the file's contents.
    pub format: String,
}

/// Everything needed to reproduce a run bit-for-bit: the exact command,
/// the merged configuration with every default materialized, and digests
/// of all files read and written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool_version: String,
    pub command: String,
    pub argv: Vec<String>,
    pub seed: u64,
    /// Fully materialized configuration (flags > config file > defaults).
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, argv: Vec<String>, seed: u64, config: serde_json::Value) -> Self {
        RunManifest {
            format: MANIFEST_FORMAT.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            argv,
            seed,
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: &Path, format: &str) -> Result<()> {
        self.inputs.push(digest_entry(path, format)?);
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path, format: &str) -> Result<()> {
        self.outputs.push(digest_entry(path, format)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).unwrap())?;
        Ok(())
    }
}

fn digest_entry(path: &Path, format: &str) -> Result<FileDigest> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(FileDigest { path: name, sha256: sha256_file(path)?, format: format.into() })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}
