//! Diffusion-map baseline with α-normalization.

use faer::Mat;

use crate::error::{LleError, Result};
use crate::geometry::PointCloud;
use crate::neighbors::{build_eps_neighbors, eps_for_neighbor_count};
use crate::sparse::SparseOperator;
use crate::spectral::{smallest_eigs_sym, SolverOptions};

/// Gaussian affinities below this value are dropped.
pub const AFFINITY_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmConfig {
    pub sigma: f64,
    pub alpha: f64,
    pub dim: usize,
}

impl DmConfig {
    pub fn new(sigma: f64, alpha: f64, dim: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(LleError::invalid("σ must be positive"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(LleError::invalid("α must lie in [0, 1]"));
        }
        if dim == 0 {
            return Err(LleError::invalid("target dimension must be >= 1"));
        }
        Ok(Self { sigma, alpha, dim })
    }
}

/// Median distance to the 10th neighbor.
pub fn default_sigma(cloud: &PointCloud) -> Result<f64> {
    eps_for_neighbor_count(cloud, 10.min(cloud.len() - 1))
}

/// Normalized affinity operators sharing one sparsity pattern.
#[derive(Debug, Clone)]
pub struct DmOperators {
    /// Row-stochastic `A = D⁻¹K̃`.
    pub markov: SparseOperator,
    /// `D^{-1/2} K̃ D^{-1/2}`, similar to `A`.
    pub symmetric: SparseOperator,
    /// Row sums `D` of `K̃`.
    pub degree: Vec<f64>,
}

pub fn dm_operators(cloud: &PointCloud, config: &DmConfig) -> Result<DmOperators> {
    let n = cloud.len();
    let reach = config.sigma * (-AFFINITY_CUTOFF.ln()).sqrt();
    let nb = build_eps_neighbors(cloud, reach)?;
    let s2 = config.sigma * config.sigma;
    let mut rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = nb
                .neighbors(i)
                .iter()
                .zip(nb.distances(i))
                .map(|(&j, &d)| (j, (-d * d / s2).exp()))
                .filter(|&(_, v)| v >= AFFINITY_CUTOFF)
                .collect();
            row.push((i, 1.0));
            row
        })
        .collect();
    let q: Vec<f64> = rows.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
    for (i, row) in rows.iter_mut().enumerate() {
        for (j, v) in row.iter_mut() {
            *v /= (q[i] * q[*j]).powf(config.alpha);
        }
    }
    let degree: Vec<f64> = rows.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
    let sym_rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().map(|&(j, v)| (j, v / (degree[i] * degree[j]).sqrt())).collect())
        .collect();
    let markov_rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| r.iter().map(|&(j, v)| (j, v / degree[i])).collect())
        .collect();
    let mut symmetric = SparseOperator::from_rows(sym_rows)?.symmetrized();
    symmetric.symmetric = true;
    Ok(DmOperators {
        markov: SparseOperator::from_rows(markov_rows)?,
        symmetric,
        degree,
    })
}

#[derive(Debug, Clone)]
pub struct DmEmbedding {
    /// `n × ℓ` eigenvectors `φ₂..φ_{ℓ+1}` of `A`, unit norm.
    pub coords: Mat<f64>,
    /// Corresponding eigenvalues of `A`, descending.
    pub eigenvalues: Vec<f64>,
}

pub fn dm_embed(cloud: &PointCloud, config: &DmConfig, opts: &SolverOptions) -> Result<DmEmbedding> {
    let n = cloud.len();
    if n < config.dim + 2 {
        return Err(LleError::invalid("need n >= ℓ + 2"));
    }
    let ops = dm_operators(cloud, config)?;
    // Eigenvectors of I − S; the top one, ∝ D^{1/2}1, is deflated.
    let lap = ops.symmetric.scale_shift(-1.0, 1.0);
    let root: Vec<f64> = ops.degree.iter().map(|d| d.sqrt()).collect();
    let norm = root.iter().map(|v| v * v).sum::<f64>().sqrt();
    let opts = SolverOptions {
        want_vectors: true,
        deflate: vec![root.iter().map(|v| v / norm).collect()],
        ..opts.clone()
    };
    let spec = smallest_eigs_sym(&lap, config.dim, &opts)?;
    let psi = spec.eigenvectors.expect("vectors requested");
    let mut coords = Mat::from_fn(n, config.dim, |i, j| psi[(i, j)] / root[i]);
    for j in 0..config.dim {
        let s = (0..n).map(|i| coords[(i, j)].powi(2)).sum::<f64>().sqrt();
        let first = (0..n).map(|i| coords[(i, j)]).find(|v| v.abs() > 1e-12 * s).unwrap_or(1.0);
        let sign = if first < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            coords[(i, j)] *= sign / s;
        }
    }
    Ok(DmEmbedding {
        coords,
        eigenvalues: spec.eigenvalues.iter().map(|mu| 1.0 - mu).collect(),
    })
}
