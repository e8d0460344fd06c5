//! Core data model: raw patient streams, preprocessed epochs, and the
//! pairwise distance matrix. No algorithms live here.
//!
//! All types are immutable after construction and validated on the way in,
//! so downstream code can rely on their invariants without rechecking.

use crate::error::{Error, Result};

/// One time point of a multichannel stream. `timestamp` is in minutes since
/// the start of the patient's recording; a `None` value is an explicitly
/// missing reading (never a sentinel number).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub timestamp: i64,
    pub values: Vec<Option<f64>>,
}

impl SampleRecord {
    pub fn new(timestamp: i64, values: Vec<Option<f64>>) -> Self {
        SampleRecord { timestamp, values }
    }

    /// True when every channel has a present reading.
    pub fn is_complete(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }
}

/// A patient's raw per-minute multichannel stream.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientRecord {
    patient_id: String,
    channels: Vec<String>,
    samples: Vec<SampleRecord>,
}

impl PatientRecord {
    /// Validates that channel names are unique, every sample has one value
    /// slot per channel, timestamps strictly increase and all present
    /// readings are finite.
    pub fn new(
        patient_id: impl Into<String>,
        channels: Vec<String>,
        samples: Vec<SampleRecord>,
    ) -> Result<Self> {
        let patient_id = patient_id.into();
        if channels.is_empty() {
            return Err(Error::Config(format!(
                "record '{patient_id}' declares no channels"
            )));
        }
        for (i, name) in channels.iter().enumerate() {
            if channels[..i].contains(name) {
                return Err(Error::Config(format!(
                    "record '{patient_id}' declares channel '{name}' twice"
                )));
            }
        }
        let mut prev: Option<i64> = None;
        for sample in &samples {
            if sample.values.len() != channels.len() {
                return Err(Error::Data(format!(
                    "record '{patient_id}' at minute {}: {} values for {} channels",
                    sample.timestamp,
                    sample.values.len(),
                    channels.len()
                )));
            }
            if let Some(p) = prev {
                if sample.timestamp <= p {
                    return Err(Error::Data(format!(
                        "record '{patient_id}': timestamps not strictly increasing at minute {}",
                        sample.timestamp
                    )));
                }
            }
            prev = Some(sample.timestamp);
            for (c, value) in sample.values.iter().enumerate() {
                if let Some(v) = value {
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            context: format!(
                                "record '{patient_id}', channel '{}', minute {}",
                                channels[c], sample.timestamp
                            ),
                        });
                    }
                }
            }
        }
        Ok(PatientRecord {
            patient_id,
            channels,
            samples,
        })
    }

    pub fn patient_id(&self) -> &str {
        &self.patient_id
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn samples(&self) -> &[SampleRecord] {
        &self.samples
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channels.iter().position(|c| c == name)
    }

    /// Present readings of one channel, in time order.
    pub fn channel_values(&self, channel: usize) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().filter_map(move |s| s.values[channel])
    }
}

/// One fixed-length, gap-free, preprocessed segment: the atomic unit compared
/// by DTW. `data` is row-major, one row of `n_channels` readings per minute.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    epoch_id: usize,
    patient_id: String,
    start_time: i64,
    n_samples: usize,
    n_channels: usize,
    data: Vec<f64>,
}

impl Epoch {
    pub fn new(
        epoch_id: usize,
        patient_id: impl Into<String>,
        start_time: i64,
        n_samples: usize,
        n_channels: usize,
        data: Vec<f64>,
    ) -> Result<Self> {
        let patient_id = patient_id.into();
        if data.len() != n_samples * n_channels {
            return Err(Error::Data(format!(
                "epoch {epoch_id}: {} values for shape {n_samples}x{n_channels}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("epoch {epoch_id} of '{patient_id}'"),
            });
        }
        Ok(Epoch {
            epoch_id,
            patient_id,
            start_time,
            n_samples,
            n_channels,
            data,
        })
    }

    pub fn epoch_id(&self) -> usize {
        self.epoch_id
    }

    pub(crate) fn set_epoch_id(&mut self, id: usize) {
        self.epoch_id = id;
    }

    pub fn patient_id(&self) -> &str {
        &self.patient_id
    }

    /// First minute covered by this epoch, relative to the stream start.
    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    /// Last minute covered, inclusive.
    pub fn end_time(&self) -> i64 {
        self.start_time + self.n_samples as i64 - 1
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    /// Row-major data, one row per minute.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_channels..(i + 1) * self.n_channels]
    }
}

/// Symmetric matrix of pairwise distances between epochs, stored as the
/// strict upper triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    epoch_ids: Vec<usize>,
    condensed: Vec<f64>,
}

/// Number of strict-upper-triangle entries for an `n`-point matrix.
pub fn condensed_len(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

impl DistanceMatrix {
    /// Builds from the strict upper triangle (pairs in row-major order:
    /// (0,1), (0,2), ..., (n-2,n-1)). Rejects negative or non-finite entries.
    pub fn from_condensed(epoch_ids: Vec<usize>, condensed: Vec<f64>) -> Result<Self> {
        let n = epoch_ids.len();
        if condensed.len() != condensed_len(n) {
            return Err(Error::Data(format!(
                "condensed length {} does not match {} epochs",
                condensed.len(),
                n
            )));
        }
        for (idx, &d) in condensed.iter().enumerate() {
            if !d.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("distance matrix entry {idx}"),
                });
            }
            if d < 0.0 {
                let (i, j) = pair_from_condensed(n, idx);
                return Err(Error::NegativeDistance { row: i, col: j });
            }
        }
        Ok(DistanceMatrix {
            n,
            epoch_ids,
            condensed,
        })
    }

    /// Builds from a full square matrix, rejecting asymmetric input or a
    /// nonzero diagonal.
    pub fn from_square(epoch_ids: Vec<usize>, square: &[Vec<f64>]) -> Result<Self> {
        let n = epoch_ids.len();
        if square.len() != n || square.iter().any(|row| row.len() != n) {
            return Err(Error::Data(format!("square matrix is not {n}x{n}")));
        }
        for i in 0..n {
            if square[i][i] != 0.0 {
                return Err(Error::NonzeroDiagonal { index: i });
            }
            for j in (i + 1)..n {
                if square[i][j] != square[j][i] {
                    return Err(Error::Asymmetric { row: i, col: j });
                }
            }
        }
        let mut condensed = Vec::with_capacity(condensed_len(n));
        for i in 0..n {
            for j in (i + 1)..n {
                condensed.push(square[i][j]);
            }
        }
        Self::from_condensed(epoch_ids, condensed)
    }

    pub fn n_epochs(&self) -> usize {
        self.n
    }

    /// Row index -> epoch_id mapping.
    pub fn epoch_ids(&self) -> &[usize] {
        &self.epoch_ids
    }

    pub fn condensed(&self) -> &[f64] {
        &self.condensed
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.n && j < self.n, "index out of bounds");
        if i == j {
            return 0.0;
        }
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        self.condensed[condensed_index(self.n, lo, hi)]
    }

    /// Mean distance from row `i` to every other row.
    pub fn row_mean(&self, i: usize) -> f64 {
        let mut sum = 0.0;
        for j in 0..self.n {
            if j != i {
                sum += self.get(i, j);
            }
        }
        sum / (self.n - 1) as f64
    }
}

/// Index of pair (i, j) with i < j in the condensed upper triangle.
pub fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Inverse of `condensed_index`.
pub fn pair_from_condensed(n: usize, idx: usize) -> (usize, usize) {
    let mut i = 0;
    let mut base = 0;
    loop {
        let row = n - i - 1;
        if idx < base + row {
            return (i, i + 1 + idx - base);
        }
        base += row;
        i += 1;
    }
}
