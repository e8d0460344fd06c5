//! Raw streams to analysis-ready epochs: plausibility screening, per-patient
//! z-normalization, median filtering, and gap-aware segmentation.
//!
//! The pipeline order is fixed: screen -> normalize -> filter -> segment.
//! Gaps at most `gap_tolerance_minutes` long are bridged by per-channel
//! linear interpolation; anything longer splits the stream into independent
//! segments, and trailing pieces shorter than the epoch length are dropped.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::signal::{Epoch, PatientRecord, SampleRecord};

/// Preprocessing parameters. Defaults follow the reference experiment:
/// 180-minute epochs, 25-point median filter, 5-minute gap tolerance, and a
/// 34-43 C plausibility band on the temperature channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessConfig {
    pub epoch_minutes: usize,
    pub median_window: usize,
    pub gap_tolerance_minutes: i64,
    /// Per-channel plausible (min, max) in native units. Channels without an
    /// entry are not screened.
    pub plausibility_bounds: BTreeMap<String, (f64, f64)>,
    pub zero_variance_epsilon: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        let mut bounds = BTreeMap::new();
        bounds.insert("temp".to_string(), (34.0, 43.0));
        PreprocessConfig {
            epoch_minutes: 180,
            median_window: 25,
            gap_tolerance_minutes: 5,
            plausibility_bounds: bounds,
            zero_variance_epsilon: 1e-9,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.median_window == 0 || self.median_window % 2 == 0 {
            return Err(Error::EvenWindow {
                window: self.median_window,
            });
        }
        if self.epoch_minutes <= self.median_window {
            return Err(Error::Config(format!(
                "epoch_minutes ({}) must exceed median_window ({})",
                self.epoch_minutes, self.median_window
            )));
        }
        if self.gap_tolerance_minutes < 0 {
            return Err(Error::Config("gap_tolerance_minutes must be >= 0".into()));
        }
        if self.zero_variance_epsilon <= 0.0 {
            return Err(Error::Config("zero_variance_epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// What happened to one record on its way through the pipeline.
#[derive(Debug, Clone, Default)]
pub struct PreprocessReport {
    pub patient_id: String,
    /// (channel, implausible fraction) for every screened channel.
    pub implausible: Vec<(String, f64)>,
    pub warnings: Vec<String>,
    pub n_epochs: usize,
    /// Complete minutes that did not fit into any epoch.
    pub discarded_minutes: usize,
}

/// Marks readings outside their channel's plausible range as missing and
/// reports the implausible fraction per screened channel (relative to the
/// channel's present readings).
pub fn screen_plausibility(
    record: &PatientRecord,
    bounds: &BTreeMap<String, (f64, f64)>,
) -> Result<(PatientRecord, Vec<(String, f64)>)> {
    if bounds.is_empty() {
        return Err(Error::Config(
            "plausibility screening needs bounds for at least one channel".into(),
        ));
    }
    let mut indexed: Vec<(usize, f64, f64)> = Vec::new();
    for (channel, &(lo, hi)) in bounds {
        let idx = record.channel_index(channel).ok_or_else(|| Error::MissingChannel {
            channel: channel.clone(),
            patient_id: record.patient_id().to_string(),
        })?;
        indexed.push((idx, lo, hi));
    }

    let mut present = vec![0usize; record.n_channels()];
    let mut marked = vec![0usize; record.n_channels()];
    let samples: Vec<SampleRecord> = record
        .samples()
        .iter()
        .map(|s| {
            let mut values = s.values.clone();
            for &(idx, lo, hi) in &indexed {
                if let Some(v) = values[idx] {
                    present[idx] += 1;
                    if v < lo || v > hi {
                        values[idx] = None;
                        marked[idx] += 1;
                    }
                }
            }
            SampleRecord::new(s.timestamp, values)
        })
        .collect();

    let fractions = indexed
        .iter()
        .map(|&(idx, _, _)| {
            let fraction = if present[idx] == 0 {
                0.0
            } else {
                marked[idx] as f64 / present[idx] as f64
            };
            (record.channels()[idx].clone(), fraction)
        })
        .collect();

    let screened = PatientRecord::new(
        record.patient_id(),
        record.channels().to_vec(),
        samples,
    )?;
    Ok((screened, fractions))
}

/// Normalizes every channel to zero mean and unit variance over the
/// patient's present readings, using the population standard deviation.
pub fn normalize_per_patient(record: &PatientRecord, epsilon: f64) -> Result<PatientRecord> {
    let mut stats = Vec::with_capacity(record.n_channels());
    for (idx, channel) in record.channels().iter().enumerate() {
        let values: Vec<f64> = record.channel_values(idx).collect();
        if values.len() < 2 {
            return Err(Error::TooFewReadings {
                channel: channel.clone(),
            });
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
        if std < epsilon {
            return Err(Error::DegenerateChannel {
                channel: channel.clone(),
            });
        }
        stats.push((mean, std));
    }

    let samples: Vec<SampleRecord> = record
        .samples()
        .iter()
        .map(|s| {
            let values = s
                .values
                .iter()
                .enumerate()
                .map(|(c, v)| v.map(|v| (v - stats[c].0) / stats[c].1))
                .collect();
            SampleRecord::new(s.timestamp, values)
        })
        .collect();
    PatientRecord::new(record.patient_id(), record.channels().to_vec(), samples)
}

/// Median filter with nearest-edge replication padding; the output has the
/// same length as the input. The window must be odd and no longer than the
/// series.
pub fn median_filter(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::EvenWindow { window });
    }
    if window > series.len() {
        return Err(Error::WindowExceedsLength {
            window,
            length: series.len(),
        });
    }
    if window == 1 {
        return Ok(series.to_vec());
    }
    let radius = (window / 2) as isize;
    let len = series.len() as isize;
    let mut out = Vec::with_capacity(series.len());
    let mut buffer = vec![0.0; window];
    for i in 0..len {
        for (slot, off) in (-radius..=radius).enumerate() {
            let idx = (i + off).clamp(0, len - 1) as usize;
            buffer[slot] = series[idx];
        }
        let mid = window / 2;
        buffer.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("finite inputs"));
        out.push(buffer[mid]);
    }
    Ok(out)
}

/// A maximal run of consecutive complete minutes after gap bridging.
#[derive(Debug, Clone)]
struct Segment {
    start_time: i64,
    /// Row-major, one row of n_channels values per minute.
    rows: Vec<f64>,
    n_channels: usize,
}

impl Segment {
    fn n_samples(&self) -> usize {
        self.rows.len() / self.n_channels
    }
}

/// Splits a record into contiguous complete runs. Minutes lacking a complete
/// sample form gaps; gaps of at most `tolerance` missing minutes between two
/// complete samples are filled by per-channel linear interpolation, longer
/// ones split the stream.
fn contiguous_segments(record: &PatientRecord, tolerance: i64) -> Vec<Segment> {
    let ch = record.n_channels();
    let complete: Vec<(i64, Vec<f64>)> = record
        .samples()
        .iter()
        .filter(|s| s.is_complete())
        .map(|s| (s.timestamp, s.values.iter().map(|v| v.unwrap()).collect()))
        .collect();

    let mut segments = Vec::new();
    let mut current: Option<Segment> = None;
    let mut prev: Option<(i64, Vec<f64>)> = None;
    for (t, values) in complete {
        match (&mut current, &prev) {
            (Some(seg), Some((pt, pv))) => {
                let missing = t - pt - 1;
                if missing == 0 {
                    seg.rows.extend_from_slice(&values);
                } else if missing <= tolerance {
                    // Bridge the hole by linear interpolation between the
                    // flanking complete samples.
                    for step in 1..=missing {
                        let w = step as f64 / (missing + 1) as f64;
                        for c in 0..ch {
                            seg.rows.push(pv[c] + w * (values[c] - pv[c]));
                        }
                    }
                    seg.rows.extend_from_slice(&values);
                } else {
                    segments.push(current.take().unwrap());
                    current = Some(Segment {
                        start_time: t,
                        rows: values.clone(),
                        n_channels: ch,
                    });
                }
            }
            _ => {
                current = Some(Segment {
                    start_time: t,
                    rows: values.clone(),
                    n_channels: ch,
                });
            }
        }
        prev = Some((t, values));
    }
    if let Some(seg) = current {
        segments.push(seg);
    }
    segments
}

/// Splits at gaps, bridges small ones, and tiles each contiguous run with
/// non-overlapping epochs of exactly `epoch_minutes` samples; trailing
/// remainders are discarded. Epoch ids run sequentially from 0 within the
/// record and are reassigned corpus-wide by [`preprocess_corpus`].
pub fn segment_epochs(record: &PatientRecord, config: &PreprocessConfig) -> Result<Vec<Epoch>> {
    config.validate()?;
    let mut epochs = Vec::new();
    let ch = record.n_channels();
    for segment in contiguous_segments(record, config.gap_tolerance_minutes) {
        let m = config.epoch_minutes;
        let count = segment.n_samples() / m;
        for e in 0..count {
            let rows = segment.rows[e * m * ch..(e + 1) * m * ch].to_vec();
            epochs.push(Epoch::new(
                epochs.len(),
                record.patient_id(),
                segment.start_time + (e * m) as i64,
                m,
                ch,
                rows,
            )?);
        }
    }
    Ok(epochs)
}

/// Runs the full per-record pipeline: screen -> normalize -> filter ->
/// segment. Only bounds whose channel exists in the record are applied, so
/// the default temperature band does not reject HR/RR-only data; screening
/// is skipped entirely when no bound matches.
pub fn preprocess_record(
    record: &PatientRecord,
    config: &PreprocessConfig,
) -> Result<(Vec<Epoch>, PreprocessReport)> {
    config.validate()?;
    let mut report = PreprocessReport {
        patient_id: record.patient_id().to_string(),
        ..PreprocessReport::default()
    };

    let applicable: BTreeMap<String, (f64, f64)> = config
        .plausibility_bounds
        .iter()
        .filter(|(channel, _)| record.channel_index(channel).is_some())
        .map(|(c, b)| (c.clone(), *b))
        .collect();
    let screened = if applicable.is_empty() {
        record.clone()
    } else {
        let (screened, fractions) = screen_plausibility(record, &applicable)?;
        report.implausible = fractions;
        screened
    };

    let normalized = normalize_per_patient(&screened, config.zero_variance_epsilon)?;

    // Filter each contiguous run per channel; runs too short for the window
    // are passed through unfiltered with a warning (they cannot reach the
    // epoch length anyway, since epoch_minutes > median_window).
    let ch = normalized.n_channels();
    let mut filtered_samples: Vec<SampleRecord> = Vec::new();
    let mut total_minutes = 0usize;
    for segment in contiguous_segments(&normalized, config.gap_tolerance_minutes) {
        let m = segment.n_samples();
        total_minutes += m;
        let mut planes: Vec<Vec<f64>> = Vec::with_capacity(ch);
        for c in 0..ch {
            let series: Vec<f64> = (0..m).map(|i| segment.rows[i * ch + c]).collect();
            match median_filter(&series, config.median_window) {
                Ok(f) => planes.push(f),
                Err(Error::WindowExceedsLength { window, length }) => {
                    report.warnings.push(format!(
                        "{}: segment at minute {} is too short to filter ({length} < window {window}), left unfiltered",
                        record.patient_id(),
                        segment.start_time
                    ));
                    planes.push(series);
                }
                Err(e) => return Err(e),
            }
        }
        for i in 0..m {
            let values = (0..ch).map(|c| Some(planes[c][i])).collect();
            filtered_samples.push(SampleRecord::new(segment.start_time + i as i64, values));
        }
    }
    let filtered = PatientRecord::new(
        normalized.patient_id(),
        normalized.channels().to_vec(),
        filtered_samples,
    )?;

    let epochs = segment_epochs(&filtered, config)?;
    report.n_epochs = epochs.len();
    report.discarded_minutes = total_minutes - epochs.len() * config.epoch_minutes;
    Ok((epochs, report))
}

/// Pipelines every record and assigns corpus-wide sequential epoch ids in
/// record order.
pub fn preprocess_corpus(
    records: &[PatientRecord],
    config: &PreprocessConfig,
) -> Result<(Vec<Epoch>, Vec<PreprocessReport>)> {
    let mut epochs = Vec::new();
    let mut reports = Vec::new();
    for record in records {
        let (mut record_epochs, report) = preprocess_record(record, config)?;
        for epoch in &mut record_epochs {
            epoch.set_epoch_id(epochs.len() + epoch.epoch_id());
        }
        epochs.append(&mut record_epochs);
        reports.push(report);
    }
    // Reassigned above relative to the running offset; renumber strictly to
    // keep ids equal to row indices.
    for (i, epoch) in epochs.iter_mut().enumerate() {
        epoch.set_epoch_id(i);
    }
    Ok((epochs, reports))
}
