//! Classical (Torgerson) multidimensional scaling of a distance matrix into
//! a low-dimensional map, used to visualize epoch similarity.
//!
//! Squared distances are double-centered, eigendecomposed, and coordinates
//! taken from the top eigenpairs. Negative eigenvalues (DTW matrices are
//! generally non-Euclidean) are clamped to zero and the clamped mass is
//! reported instead of hidden.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::signal::DistanceMatrix;

/// One embedded epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPoint {
    pub epoch_id: usize,
    pub coords: Vec<f64>,
}

impl EmbeddingPoint {
    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    pub fn y(&self) -> f64 {
        self.coords.get(1).copied().unwrap_or(0.0)
    }
}

/// MDS result: coordinates, normalized Kruskal stress-1 against the input
/// distances, and the eigenvalue spectrum as a diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    points: Vec<EmbeddingPoint>,
    dims: usize,
    stress: f64,
    eigenvalues: Vec<f64>,
    negative_mass_fraction: f64,
}

impl Embedding {
    pub fn new(
        points: Vec<EmbeddingPoint>,
        dims: usize,
        stress: f64,
        eigenvalues: Vec<f64>,
        negative_mass_fraction: f64,
    ) -> Result<Self> {
        if points.iter().any(|p| p.coords.len() != dims) {
            return Err(Error::Data("embedding point dimensionality mismatch".into()));
        }
        Ok(Embedding {
            points,
            dims,
            stress,
            eigenvalues,
            negative_mass_fraction,
        })
    }

    pub fn points(&self) -> &[EmbeddingPoint] {
        &self.points
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn stress(&self) -> f64 {
        self.stress
    }

    /// Full eigenvalue spectrum of the double-centered matrix, descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Fraction of total absolute eigenvalue mass that was negative and
    /// therefore clamped.
    pub fn negative_mass_fraction(&self) -> f64 {
        self.negative_mass_fraction
    }

    fn embedded_distance(&self, i: usize, j: usize) -> f64 {
        self.points[i]
            .coords
            .iter()
            .zip(&self.points[j].coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Torgerson MDS of a distance matrix into `dims` coordinates.
///
/// The sign of each axis is fixed so its largest-magnitude entry is
/// positive, which makes maps reproducible across runs.
pub fn classical_mds(matrix: &DistanceMatrix, dims: usize) -> Result<Embedding> {
    let n = matrix.n_epochs();
    if dims == 0 {
        return Err(Error::Config("embedding dimensionality must be >= 1".into()));
    }
    if n <= dims {
        return Err(Error::Dimensionality {
            required: dims + 1,
            actual: n,
            dims,
        });
    }

    // Double-centering of squared distances:
    // b_ij = -1/2 (d²_ij - rowmean_i - colmean_j + grandmean).
    let mut sq = DMatrix::from_fn(n, n, |i, j| {
        let d = matrix.get(i, j);
        d * d
    });
    let row_means: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            sq[(i, j)] = -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand);
        }
    }

    let eigen = SymmetricEigen::new(sq);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .expect("eigenvalues are finite")
            .then(a.cmp(&b))
    });
    let spectrum: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();

    let total_mass: f64 = spectrum.iter().map(|l| l.abs()).sum();
    let negative_mass: f64 = spectrum.iter().filter(|l| **l < 0.0).map(|l| -*l).sum();
    let negative_mass_fraction = if total_mass > 0.0 {
        negative_mass / total_mass
    } else {
        0.0
    };

    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(dims);
    for d in 0..dims {
        let lambda = spectrum[d];
        if lambda > 0.0 {
            let col = eigen.eigenvectors.column(order[d]);
            let scale = lambda.sqrt();
            let mut axis: Vec<f64> = col.iter().map(|v| v * scale).collect();
            // Remove any residual drift so the centroid sits at the origin.
            let mean = axis.iter().sum::<f64>() / n as f64;
            for v in &mut axis {
                *v -= mean;
            }
            // Deterministic sign: largest-magnitude entry positive.
            let mut arg = 0;
            for (i, v) in axis.iter().enumerate() {
                if v.abs() > axis[arg].abs() {
                    arg = i;
                }
            }
            if axis[arg] < 0.0 {
                for v in &mut axis {
                    *v = -*v;
                }
            }
            axes.push(axis);
        } else {
            axes.push(vec![0.0; n]);
        }
    }

    let points: Vec<EmbeddingPoint> = (0..n)
        .map(|i| EmbeddingPoint {
            epoch_id: matrix.epoch_ids()[i],
            coords: axes.iter().map(|axis| axis[i]).collect(),
        })
        .collect();

    let mut embedding = Embedding {
        points,
        dims,
        stress: 0.0,
        eigenvalues: spectrum,
        negative_mass_fraction,
    };
    embedding.stress = stress_against(&embedding, matrix);
    Ok(embedding)
}

/// Kruskal stress-1 of an embedding against the original distances; zero
/// means the distances are reproduced exactly.
fn stress_against(embedding: &Embedding, matrix: &DistanceMatrix) -> f64 {
    let n = matrix.n_epochs();
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = matrix.get(i, j);
            let e = embedding.embedded_distance(i, j);
            num += (e - d) * (e - d);
            den += d * d;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}
