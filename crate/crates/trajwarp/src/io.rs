//! Reading per-minute vital-sign CSVs and persisting analysis artifacts:
//! distance matrices (binary, digest-protected), dendrograms, cluster
//! assignments, embeddings, and epoch exports (all CSV).
//!
//! Every writer is deterministic: identical inputs produce byte-identical
//! files. Floats are written as the shortest decimal that round-trips, so
//! CSV artifacts are lossless.
//!
//! The corpus CSV contract: a header row with `patient_id`, `timestamp`
//! (ISO-8601 or integer minutes) and one column per channel out of `hr`,
//! `rr`, `temp` (values real, or empty for missing). Unknown columns are
//! ignored with a warning; a missing required column is fatal.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};

use crate::cluster::{ClusterAssignment, Dendrogram, MergeStep};
use crate::error::{Error, Result};
use crate::mds::{Embedding, EmbeddingPoint};
use crate::signal::{condensed_len, DistanceMatrix, Epoch, PatientRecord, SampleRecord};

/// Channel columns the reader recognizes, in canonical order.
pub const KNOWN_CHANNELS: [&str; 3] = ["hr", "rr", "temp"];

/// Shortest decimal representation that parses back to the same f64.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn parse_f64(s: &str, line: u64) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Malformed {
        line,
        message: format!("'{s}' is not a number"),
    })
}

fn parse_usize(s: &str, line: u64) -> Result<usize> {
    s.trim().parse::<usize>().map_err(|_| Error::Malformed {
        line,
        message: format!("'{s}' is not a non-negative integer"),
    })
}

/// Accepts integer minutes or an ISO-8601 timestamp; datetimes are truncated
/// to whole minutes.
fn parse_timestamp(s: &str, line: u64) -> Result<i64> {
    let s = s.trim();
    if let Ok(minutes) = s.parse::<i64>() {
        return Ok(minutes);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Ok(dt.timestamp().div_euclid(60));
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(dt.and_utc().timestamp().div_euclid(60));
        }
    }
    Err(Error::Malformed {
        line,
        message: format!("'{s}' is neither integer minutes nor an ISO-8601 timestamp"),
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    file.write_all(bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish_csv(writer: csv::Writer<Vec<u8>>, path: &Path) -> Result<()> {
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Data(format!("csv flush failed: {e}")))?;
    write_bytes(path, &bytes)
}

/// Reads a corpus CSV into per-patient records: rows are grouped by
/// `patient_id` and sorted by timestamp, timestamps are rebased to minutes
/// since each patient's first sample, and duplicate (patient, timestamp)
/// rows are an error. Returns the records (sorted by patient id) along with
/// any warnings.
pub fn read_patients(path: &Path) -> Result<(Vec<PatientRecord>, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                Error::io(path.display().to_string(), std::io::Error::other(e.to_string()))
            }
            _ => Error::Csv(e),
        })?;

    let headers = reader.headers()?.clone();
    let mut warnings = Vec::new();

    let mut patient_col = None;
    let mut timestamp_col = None;
    let mut channel_cols: Vec<(usize, String)> = Vec::new();
    for (idx, name) in headers.iter().enumerate() {
        match name {
            "patient_id" => patient_col = Some(idx),
            "timestamp" => timestamp_col = Some(idx),
            c if KNOWN_CHANNELS.contains(&c) => channel_cols.push((idx, c.to_string())),
            other => warnings.push(format!("ignoring unknown column '{other}'")),
        }
    }
    let patient_col =
        patient_col.ok_or_else(|| Error::Config("missing required column 'patient_id'".into()))?;
    let timestamp_col =
        timestamp_col.ok_or_else(|| Error::Config("missing required column 'timestamp'".into()))?;
    if channel_cols.is_empty() {
        return Err(Error::Config(format!(
            "no channel column found (expected one of: {})",
            KNOWN_CHANNELS.join(", ")
        )));
    }

    let mut by_patient: BTreeMap<String, Vec<(i64, Vec<Option<f64>>)>> = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let patient = row
            .get(patient_col)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Malformed {
                line,
                message: "empty patient_id".into(),
            })?;
        let ts_field = row.get(timestamp_col).unwrap_or("");
        let minute = parse_timestamp(ts_field, line)?;
        let mut values = Vec::with_capacity(channel_cols.len());
        for (col, _) in &channel_cols {
            let field = row.get(*col).unwrap_or("");
            if field.is_empty() {
                values.push(None);
            } else {
                values.push(Some(parse_f64(field, line)?));
            }
        }
        by_patient
            .entry(patient.to_string())
            .or_default()
            .push((minute, values));
    }

    let channels: Vec<String> = channel_cols.iter().map(|(_, c)| c.clone()).collect();
    let mut records = Vec::with_capacity(by_patient.len());
    for (patient_id, mut rows) in by_patient {
        rows.sort_by_key(|(t, _)| *t);
        for pair in rows.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::Data(format!(
                    "duplicate timestamp {} for patient '{patient_id}'",
                    pair[0].0
                )));
            }
        }
        let first = rows[0].0;
        let samples: Vec<SampleRecord> = rows
            .into_iter()
            .map(|(t, values)| SampleRecord::new(t - first, values))
            .collect();
        records.push(PatientRecord::new(patient_id, channels.clone(), samples)?);
    }
    Ok((records, warnings))
}

/// Writes records in the same CSV format `read_patients` accepts, with
/// integer-minute timestamps. All records must share one channel set.
pub fn write_corpus_csv(records: &[PatientRecord], path: &Path) -> Result<()> {
    let mut writer = csv_writer();
    let channels: Vec<String> = records
        .first()
        .map(|r| r.channels().to_vec())
        .unwrap_or_default();
    for r in records {
        if r.channels() != channels.as_slice() {
            return Err(Error::Data(format!(
                "record '{}' has a different channel set",
                r.patient_id()
            )));
        }
    }
    let mut header = vec!["patient_id".to_string(), "timestamp".to_string()];
    header.extend(channels.iter().cloned());
    writer.write_record(&header)?;
    for r in records {
        for s in r.samples() {
            let mut row = vec![r.patient_id().to_string(), s.timestamp.to_string()];
            for v in &s.values {
                row.push(v.map(fmt_f64).unwrap_or_default());
            }
            writer.write_record(&row)?;
        }
    }
    finish_csv(writer, path)
}

const MATRIX_MAGIC: &[u8; 4] = b"TWDM";
const MATRIX_VERSION: u16 = 1;

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Binary distance-matrix container: magic, version, epoch ids, the upper
/// triangle, and an integrity digest over everything before it. Matrices
/// are the expensive artifact, so corruption must be loud, not silent.
pub fn write_matrix(matrix: &DistanceMatrix, path: &Path) -> Result<()> {
    let n = matrix.n_epochs();
    let mut bytes = Vec::with_capacity(14 + n * 8 + matrix.condensed().len() * 8 + 8);
    bytes.extend_from_slice(MATRIX_MAGIC);
    bytes.extend_from_slice(&MATRIX_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    for &id in matrix.epoch_ids() {
        bytes.extend_from_slice(&(id as u64).to_le_bytes());
    }
    for &d in matrix.condensed() {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    let digest = fnv1a64(&bytes);
    bytes.extend_from_slice(&digest.to_le_bytes());
    write_bytes(path, &bytes)
}

pub fn read_matrix(path: &Path) -> Result<DistanceMatrix> {
    let corrupt = |reason: &str| Error::Corrupt {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if bytes.len() < 14 + 8 || &bytes[0..4] != MATRIX_MAGIC {
        return Err(corrupt("not a distance-matrix file"));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
    if version != MATRIX_VERSION {
        return Err(corrupt(&format!("unsupported version {version}")));
    }
    let n = u64::from_le_bytes(bytes[6..14].try_into().unwrap()) as usize;
    let expected = 14 + n * 8 + condensed_len(n) * 8 + 8;
    if bytes.len() != expected {
        return Err(corrupt(&format!(
            "expected {expected} bytes for {n} epochs, found {}",
            bytes.len()
        )));
    }
    let body_end = expected - 8;
    let stored = u64::from_le_bytes(bytes[body_end..].try_into().unwrap());
    if fnv1a64(&bytes[..body_end]) != stored {
        return Err(corrupt("integrity digest mismatch"));
    }
    let mut offset = 14;
    let mut epoch_ids = Vec::with_capacity(n);
    for _ in 0..n {
        epoch_ids.push(u64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap()) as usize);
        offset += 8;
    }
    let mut condensed = Vec::with_capacity(condensed_len(n));
    for _ in 0..condensed_len(n) {
        condensed.push(f64::from_le_bytes(bytes[offset..offset + 8].try_into().unwrap()));
        offset += 8;
    }
    DistanceMatrix::from_condensed(epoch_ids, condensed)
}

/// Dendrogram CSV: `leaf` rows map leaf index to epoch id, `merge` rows list
/// the merge sequence.
pub fn write_dendrogram(dendrogram: &Dendrogram, path: &Path) -> Result<()> {
    let mut writer = csv_writer();
    writer.write_record(["row_type", "index", "left", "right", "distance", "new_cluster"])?;
    for (i, id) in dendrogram.epoch_ids().iter().enumerate() {
        writer.write_record(["leaf", &i.to_string(), &id.to_string(), "", "", ""])?;
    }
    for m in dendrogram.merges() {
        writer.write_record([
            "merge",
            &m.step_index.to_string(),
            &m.left.to_string(),
            &m.right.to_string(),
            &fmt_f64(m.linkage_distance),
            &m.new_cluster_id.to_string(),
        ])?;
    }
    finish_csv(writer, path)
}

pub fn read_dendrogram(path: &Path) -> Result<Dendrogram> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(Error::Csv)?;
    let mut leaves: Vec<(usize, usize)> = Vec::new();
    let mut merges: Vec<MergeStep> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        match row.get(0) {
            Some("leaf") => {
                let idx = parse_usize(row.get(1).unwrap_or(""), line)?;
                let id = parse_usize(row.get(2).unwrap_or(""), line)?;
                leaves.push((idx, id));
            }
            Some("merge") => {
                merges.push(MergeStep {
                    step_index: parse_usize(row.get(1).unwrap_or(""), line)?,
                    left: parse_usize(row.get(2).unwrap_or(""), line)?,
                    right: parse_usize(row.get(3).unwrap_or(""), line)?,
                    linkage_distance: parse_f64(row.get(4).unwrap_or(""), line)?,
                    new_cluster_id: parse_usize(row.get(5).unwrap_or(""), line)?,
                });
            }
            other => {
                return Err(Error::Malformed {
                    line,
                    message: format!("unknown row type {other:?}"),
                })
            }
        }
    }
    leaves.sort_by_key(|(idx, _)| *idx);
    for (want, (got, _)) in leaves.iter().enumerate() {
        if *got != want {
            return Err(Error::Data(format!("leaf indices are not contiguous at {got}")));
        }
    }
    merges.sort_by_key(|m| m.step_index);
    Dendrogram::new(leaves.into_iter().map(|(_, id)| id).collect(), merges)
}

/// Per-epoch metadata carried by the human-facing artifacts.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMeta {
    pub epoch_id: usize,
    pub patient_id: String,
    pub start_time: i64,
    pub n_samples: usize,
}

pub fn epoch_meta(epochs: &[Epoch]) -> Vec<EpochMeta> {
    epochs
        .iter()
        .map(|e| EpochMeta {
            epoch_id: e.epoch_id(),
            patient_id: e.patient_id().to_string(),
            start_time: e.start_time(),
            n_samples: e.n_samples(),
        })
        .collect()
}

/// Assignment CSV: one row per epoch with its metadata and cluster label;
/// `k` and `cut_gap` are carried on every row so the file stands alone.
pub fn write_assignment(
    assignment: &ClusterAssignment,
    meta: &[EpochMeta],
    path: &Path,
) -> Result<()> {
    let lookup: BTreeMap<usize, &EpochMeta> = meta.iter().map(|m| (m.epoch_id, m)).collect();
    let mut writer = csv_writer();
    writer.write_record([
        "epoch_id",
        "patient_id",
        "start_minute",
        "n_minutes",
        "cluster",
        "k",
        "cut_gap",
    ])?;
    for &(epoch_id, label) in assignment.assignments() {
        let m = lookup.get(&epoch_id).ok_or_else(|| {
            Error::Data(format!("no metadata for epoch {epoch_id}"))
        })?;
        writer.write_record([
            epoch_id.to_string(),
            m.patient_id.clone(),
            m.start_time.to_string(),
            m.n_samples.to_string(),
            label.to_string(),
            assignment.k().to_string(),
            fmt_f64(assignment.cut_gap()),
        ])?;
    }
    finish_csv(writer, path)
}

pub fn read_assignment(path: &Path) -> Result<(ClusterAssignment, Vec<EpochMeta>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(Error::Csv)?;
    let mut assignments = Vec::new();
    let mut meta = Vec::new();
    let mut k = None;
    let mut cut_gap = None;
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let epoch_id = parse_usize(row.get(0).unwrap_or(""), line)?;
        let patient_id = row.get(1).unwrap_or("").to_string();
        let start = row.get(2).unwrap_or("").parse::<i64>().map_err(|_| Error::Malformed {
            line,
            message: "bad start_minute".into(),
        })?;
        let n_samples = parse_usize(row.get(3).unwrap_or(""), line)?;
        let label = parse_usize(row.get(4).unwrap_or(""), line)?;
        let row_k = parse_usize(row.get(5).unwrap_or(""), line)?;
        let row_gap = parse_f64(row.get(6).unwrap_or(""), line)?;
        if *k.get_or_insert(row_k) != row_k || *cut_gap.get_or_insert(row_gap) != row_gap {
            return Err(Error::Malformed {
                line,
                message: "inconsistent k or cut_gap across rows".into(),
            });
        }
        assignments.push((epoch_id, label));
        meta.push(EpochMeta {
            epoch_id,
            patient_id,
            start_time: start,
            n_samples,
        });
    }
    let assignment = ClusterAssignment::new(
        assignments,
        k.ok_or_else(|| Error::Data("empty assignment file".into()))?,
        cut_gap.unwrap_or(0.0),
    )?;
    Ok((assignment, meta))
}

/// Embedding coordinates as `epoch_id,x,y`. Only 2-D embeddings are written,
/// matching the map format the plots consume.
pub fn write_embedding(embedding: &Embedding, path: &Path) -> Result<()> {
    if embedding.dims() != 2 {
        return Err(Error::Config(format!(
            "embedding CSV is 2-D, got {} dims",
            embedding.dims()
        )));
    }
    let mut writer = csv_writer();
    writer.write_record(["epoch_id", "x", "y"])?;
    for p in embedding.points() {
        writer.write_record([p.epoch_id.to_string(), fmt_f64(p.x()), fmt_f64(p.y())])?;
    }
    finish_csv(writer, path)
}

/// Stress, clamped eigenvalue mass, and the full spectrum as key/value rows.
pub fn write_embedding_diagnostics(embedding: &Embedding, path: &Path) -> Result<()> {
    let mut writer = csv_writer();
    writer.write_record(["key", "index", "value"])?;
    writer.write_record(["stress", "0", &fmt_f64(embedding.stress())])?;
    writer.write_record([
        "negative_mass_fraction",
        "0",
        &fmt_f64(embedding.negative_mass_fraction()),
    ])?;
    for (i, l) in embedding.eigenvalues().iter().enumerate() {
        writer.write_record(["eigenvalue", &i.to_string(), &fmt_f64(*l)])?;
    }
    finish_csv(writer, path)
}

pub fn read_embedding(points_path: &Path, diagnostics_path: &Path) -> Result<Embedding> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(points_path)
        .map_err(Error::Csv)?;
    let mut points = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        points.push(EmbeddingPoint {
            epoch_id: parse_usize(row.get(0).unwrap_or(""), line)?,
            coords: vec![
                parse_f64(row.get(1).unwrap_or(""), line)?,
                parse_f64(row.get(2).unwrap_or(""), line)?,
            ],
        });
    }

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(diagnostics_path)
        .map_err(Error::Csv)?;
    let mut stress = 0.0;
    let mut negative = 0.0;
    let mut eigenvalues: Vec<(usize, f64)> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let value = parse_f64(row.get(2).unwrap_or(""), line)?;
        match row.get(0) {
            Some("stress") => stress = value,
            Some("negative_mass_fraction") => negative = value,
            Some("eigenvalue") => {
                eigenvalues.push((parse_usize(row.get(1).unwrap_or(""), line)?, value))
            }
            other => {
                return Err(Error::Malformed {
                    line,
                    message: format!("unknown diagnostics key {other:?}"),
                })
            }
        }
    }
    eigenvalues.sort_by_key(|(i, _)| *i);
    Embedding::new(
        points,
        2,
        stress,
        eigenvalues.into_iter().map(|(_, v)| v).collect(),
        negative,
    )
}

/// Epoch metadata summary (`epochs.csv` in analysis output).
pub fn write_epoch_meta(meta: &[EpochMeta], path: &Path) -> Result<()> {
    let mut writer = csv_writer();
    writer.write_record(["epoch_id", "patient_id", "start_minute", "n_minutes"])?;
    for m in meta {
        writer.write_record([
            m.epoch_id.to_string(),
            m.patient_id.clone(),
            m.start_time.to_string(),
            m.n_samples.to_string(),
        ])?;
    }
    finish_csv(writer, path)
}

/// Full epoch export, one row per (epoch, minute), lossless.
pub fn write_epoch_data(epochs: &[Epoch], path: &Path) -> Result<()> {
    let ch = epochs.first().map(|e| e.n_channels()).unwrap_or(0);
    let mut writer = csv_writer();
    let mut header = vec![
        "epoch_id".to_string(),
        "patient_id".to_string(),
        "start_minute".to_string(),
        "offset".to_string(),
    ];
    for c in 0..ch {
        header.push(format!("v{c}"));
    }
    writer.write_record(&header)?;
    for e in epochs {
        for i in 0..e.n_samples() {
            let mut row = vec![
                e.epoch_id().to_string(),
                e.patient_id().to_string(),
                e.start_time().to_string(),
                i.to_string(),
            ];
            row.extend(e.row(i).iter().map(|v| fmt_f64(*v)));
            writer.write_record(&row)?;
        }
    }
    finish_csv(writer, path)
}

pub fn read_epoch_data(path: &Path) -> Result<Vec<Epoch>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(Error::Csv)?;
    let ch = reader.headers()?.len().saturating_sub(4);
    if ch == 0 {
        return Err(Error::Data("epoch data file has no value columns".into()));
    }

    struct Partial {
        epoch_id: usize,
        patient_id: String,
        start_time: i64,
        data: Vec<f64>,
    }
    let mut epochs: Vec<Epoch> = Vec::new();
    let mut current: Option<Partial> = None;
    let flush = |p: Partial, out: &mut Vec<Epoch>| -> Result<()> {
        let m = p.data.len() / ch;
        out.push(Epoch::new(p.epoch_id, p.patient_id, p.start_time, m, ch, p.data)?);
        Ok(())
    };
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let epoch_id = parse_usize(row.get(0).unwrap_or(""), line)?;
        let patient_id = row.get(1).unwrap_or("").to_string();
        let start = row.get(2).unwrap_or("").parse::<i64>().map_err(|_| Error::Malformed {
            line,
            message: "bad start_minute".into(),
        })?;
        let offset = parse_usize(row.get(3).unwrap_or(""), line)?;
        let starts_new = current.as_ref().map_or(true, |p| p.epoch_id != epoch_id);
        if starts_new {
            if offset != 0 {
                return Err(Error::Malformed {
                    line,
                    message: "epoch rows must start at offset 0".into(),
                });
            }
            if let Some(p) = current.take() {
                flush(p, &mut epochs)?;
            }
            current = Some(Partial {
                epoch_id,
                patient_id,
                start_time: start,
                data: Vec::new(),
            });
        }
        let p = current.as_mut().unwrap();
        if offset * ch != p.data.len() {
            return Err(Error::Malformed {
                line,
                message: "epoch rows out of order".into(),
            });
        }
        for c in 0..ch {
            p.data.push(parse_f64(row.get(4 + c).unwrap_or(""), line)?);
        }
    }
    if let Some(p) = current.take() {
        flush(p, &mut epochs)?;
    }
    Ok(epochs)
}
