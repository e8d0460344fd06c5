//! Python bindings for the trajectory-outlier pipeline: DTW distances,
//! average-linkage clustering with the max-gap cut, outlier scores, MDS
//! embedding, and the synthetic corpus generator.
//!
//! Sequences cross the boundary as plain lists: a multichannel series is a
//! list of per-minute rows, each row one float per channel. Distance
//! matrices are full square lists of lists.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use trajwarp::cluster;
use trajwarp::dtw::{self, DtwConfig, SeriesView};
use trajwarp::error::Error;
use trajwarp::io;
use trajwarp::mds;
use trajwarp::preprocess::{preprocess_corpus, PreprocessConfig};
use trajwarp::signal::{DistanceMatrix, Epoch};
use trajwarp::synth::{generate_corpus, PerturbationType, SynthConfig};

fn to_py_err(err: Error) -> PyErr {
    match err {
        Error::Io { .. } | Error::Csv(_) | Error::Corrupt { .. } => {
            PyIOError::new_err(err.to_string())
        }
        other => PyValueError::new_err(other.to_string()),
    }
}

fn flatten_series(rows: &[Vec<f64>]) -> PyResult<(Vec<f64>, usize, usize)> {
    if rows.is_empty() {
        return Err(PyValueError::new_err("series must not be empty"));
    }
    let channels = rows[0].len();
    if channels == 0 {
        return Err(PyValueError::new_err("series rows must not be empty"));
    }
    let mut flat = Vec::with_capacity(rows.len() * channels);
    for row in rows {
        if row.len() != channels {
            return Err(PyValueError::new_err("ragged series rows"));
        }
        flat.extend_from_slice(row);
    }
    Ok((flat, rows.len(), channels))
}

fn matrix_from_square(square: Vec<Vec<f64>>) -> PyResult<DistanceMatrix> {
    let ids: Vec<usize> = (0..square.len()).collect();
    DistanceMatrix::from_square(ids, &square).map_err(to_py_err)
}

/// DTW distance and optimal alignment path between two equal-length
/// multichannel series.
#[pyfunction]
#[pyo3(signature = (a, b, band_radius=None))]
fn dtw_distance(
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    band_radius: Option<usize>,
) -> PyResult<(f64, Vec<(usize, usize)>)> {
    let (fa, ma, ca) = flatten_series(&a)?;
    let (fb, mb, cb) = flatten_series(&b)?;
    let va = SeriesView::new(&fa, ma, ca).map_err(to_py_err)?;
    let vb = SeriesView::new(&fb, mb, cb).map_err(to_py_err)?;
    let config = DtwConfig { band_radius };
    let (d, path) = dtw::dtw_distance(va, vb, &config).map_err(to_py_err)?;
    Ok((d, path.steps().to_vec()))
}

/// Full square matrix of pairwise DTW distances between series.
#[pyfunction]
#[pyo3(signature = (series, band_radius=None))]
fn dtw_pairwise(
    series: Vec<Vec<Vec<f64>>>,
    band_radius: Option<usize>,
) -> PyResult<Vec<Vec<f64>>> {
    let mut epochs = Vec::with_capacity(series.len());
    for (i, s) in series.iter().enumerate() {
        let (flat, m, ch) = flatten_series(s)?;
        epochs.push(Epoch::new(i, "py", 0, m, ch, flat).map_err(to_py_err)?);
    }
    let config = DtwConfig { band_radius };
    let matrix = dtw::pairwise_matrix(&epochs, &config).map_err(to_py_err)?;
    let n = matrix.n_epochs();
    Ok((0..n)
        .map(|i| (0..n).map(|j| matrix.get(i, j)).collect())
        .collect())
}

/// Average-linkage merge sequence over a square distance matrix, as
/// (left, right, distance, new_cluster) tuples.
#[pyfunction]
fn linkage_average(matrix: Vec<Vec<f64>>) -> PyResult<Vec<(usize, usize, f64, usize)>> {
    let m = matrix_from_square(matrix)?;
    let dendrogram = cluster::agglomerate(&m).map_err(to_py_err)?;
    Ok(dendrogram
        .merges()
        .iter()
        .map(|s| (s.left, s.right, s.linkage_distance, s.new_cluster_id))
        .collect())
}

/// Flat cluster labels from the max-gap cut: (labels, k, cut_gap).
#[pyfunction]
fn cluster_by_max_gap(matrix: Vec<Vec<f64>>) -> PyResult<(Vec<usize>, usize, f64)> {
    let m = matrix_from_square(matrix)?;
    let dendrogram = cluster::agglomerate(&m).map_err(to_py_err)?;
    let cut = cluster::cut_by_max_gap(&dendrogram);
    let labels = cut.assignments().iter().map(|&(_, l)| l).collect();
    Ok((labels, cut.k(), cut.cut_gap()))
}

/// Mean pairwise distance per row, sorted most-outlying first, as
/// (index, score) pairs.
#[pyfunction]
fn outlier_scores(matrix: Vec<Vec<f64>>) -> PyResult<Vec<(usize, f64)>> {
    let m = matrix_from_square(matrix)?;
    cluster::outlier_scores(&m).map_err(to_py_err)
}

/// Classical MDS of a square distance matrix:
/// (coordinates, stress, eigenvalues, negative_mass_fraction).
#[pyfunction]
#[pyo3(signature = (matrix, dims=2))]
fn classical_mds(
    matrix: Vec<Vec<f64>>,
    dims: usize,
) -> PyResult<(Vec<Vec<f64>>, f64, Vec<f64>, f64)> {
    let m = matrix_from_square(matrix)?;
    let e = mds::classical_mds(&m, dims).map_err(to_py_err)?;
    let coords = e.points().iter().map(|p| p.coords.clone()).collect();
    Ok((
        coords,
        e.stress(),
        e.eigenvalues().to_vec(),
        e.negative_mass_fraction(),
    ))
}

/// Generates the synthetic HR/RR corpus in memory: patient id -> channel
/// name -> per-minute values.
#[pyfunction]
#[pyo3(signature = (seed=1, n_patients=20, duration_days=8, perturbed_files=None))]
fn generate_synthetic_corpus(
    seed: u64,
    n_patients: usize,
    duration_days: u32,
    perturbed_files: Option<Vec<(usize, u8)>>,
) -> PyResult<BTreeMap<String, BTreeMap<String, Vec<f64>>>> {
    let config = synth_config(seed, n_patients, duration_days, perturbed_files)?;
    let records = generate_corpus(&config).map_err(to_py_err)?;
    let mut out = BTreeMap::new();
    for r in records {
        let mut channels = BTreeMap::new();
        for (c, name) in r.channels().iter().enumerate() {
            channels.insert(name.clone(), r.channel_values(c).collect());
        }
        out.insert(r.patient_id().to_string(), channels);
    }
    Ok(out)
}

/// Writes a synthetic corpus CSV compatible with `load_epochs` and the CLI.
#[pyfunction]
#[pyo3(signature = (path, seed=1, n_patients=20, duration_days=8, perturbed_files=None))]
fn write_synthetic_corpus(
    path: PathBuf,
    seed: u64,
    n_patients: usize,
    duration_days: u32,
    perturbed_files: Option<Vec<(usize, u8)>>,
) -> PyResult<()> {
    let config = synth_config(seed, n_patients, duration_days, perturbed_files)?;
    let records = generate_corpus(&config).map_err(to_py_err)?;
    io::write_corpus_csv(&records, &path).map_err(to_py_err)
}

fn synth_config(
    seed: u64,
    n_patients: usize,
    duration_days: u32,
    perturbed_files: Option<Vec<(usize, u8)>>,
) -> PyResult<SynthConfig> {
    let mut config = SynthConfig {
        seed,
        n_patients,
        duration_days,
        ..SynthConfig::default()
    };
    if let Some(files) = perturbed_files {
        config.perturbed_files = files
            .into_iter()
            .map(|(idx, kind)| {
                PerturbationType::parse(&kind.to_string())
                    .map(|k| (idx, k))
                    .map_err(to_py_err)
            })
            .collect::<PyResult<Vec<_>>>()?;
    } else if n_patients < 6 {
        config.perturbed_files.clear();
    }
    config.validate().map_err(to_py_err)?;
    Ok(config)
}

/// Reads a corpus CSV and runs the preprocessing pipeline (screen,
/// normalize, median filter, segment). Returns one dict per epoch with id,
/// patient, start minute, and the row-major data.
#[pyfunction]
#[pyo3(signature = (path, epoch_minutes=180, median_window=25, gap_tolerance=5))]
fn load_epochs(
    py: Python<'_>,
    path: PathBuf,
    epoch_minutes: usize,
    median_window: usize,
    gap_tolerance: i64,
) -> PyResult<Vec<Py<PyAny>>> {
    let (records, _warnings) = io::read_patients(&path).map_err(to_py_err)?;
    let config = PreprocessConfig {
        epoch_minutes,
        median_window,
        gap_tolerance_minutes: gap_tolerance,
        ..PreprocessConfig::default()
    };
    config.validate().map_err(to_py_err)?;
    let (epochs, _reports) = preprocess_corpus(&records, &config).map_err(to_py_err)?;
    epochs
        .iter()
        .map(|e| {
            let dict = pyo3::types::PyDict::new(py);
            dict.set_item("epoch_id", e.epoch_id())?;
            dict.set_item("patient_id", e.patient_id())?;
            dict.set_item("start_minute", e.start_time())?;
            let rows: Vec<Vec<f64>> = (0..e.n_samples()).map(|i| e.row(i).to_vec()).collect();
            dict.set_item("data", rows)?;
            Ok(dict.into())
        })
        .collect()
}

#[pymodule]
fn trajwarp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(dtw_distance, m)?)?;
    m.add_function(wrap_pyfunction!(dtw_pairwise, m)?)?;
    m.add_function(wrap_pyfunction!(linkage_average, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_by_max_gap, m)?)?;
    m.add_function(wrap_pyfunction!(outlier_scores, m)?)?;
    m.add_function(wrap_pyfunction!(classical_mds, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic_corpus, m)?)?;
    m.add_function(wrap_pyfunction!(load_epochs, m)?)?;
    Ok(())
}
