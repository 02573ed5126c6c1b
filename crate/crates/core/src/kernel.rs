//! Empirical LLE kernel, local covariance spectra and pointwise operator values.

use faer::{Mat, Side};

use crate::barycentric::{
    barycentric_weights, correction_from_spectrum, local_data, local_data_from_indices, local_spectrum,
    raw_kernel_from_spectrum, LocalData,
};
use crate::error::{LleError, Result};
use crate::geometry::PointCloud;
use crate::lle_matrix::LleConfig;
use crate::neighbors::{eps_neighbors_of, NeighborList};

/// Kernel values `1 − Tᵀ(z_j − z_k)` over the neighborhood of one point.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSlice {
    pub center: usize,
    pub neighbors: Vec<usize>,
    pub distances: Vec<f64>,
    pub raw: Vec<f64>,
    /// `raw / Σ raw`; equal to the barycentric weights.
    pub normalized: Vec<f64>,
    pub eps: f64,
    pub rho: f64,
}

fn slice_from_local(cloud: &PointCloud, local: &LocalData, eps: f64, config: LleConfig) -> Result<KernelSlice> {
    let c = config.regularizer(cloud.len(), eps);
    let spec = local_spectrum(local)?;
    // Rejects zero-rank data at c = 0.
    correction_from_spectrum(local, &spec, c)?;
    let raw = raw_kernel_from_spectrum(local, &spec, c);
    let total: f64 = raw.iter().sum();
    if !(total.abs() > 1e-12 * raw.len() as f64) {
        return Err(LleError::IllConditioned {
            point: local.center,
            denominator: total,
        });
    }
    Ok(KernelSlice {
        center: local.center,
        neighbors: local.neighbors.clone(),
        distances: local.neighbors.iter().map(|&j| cloud.distance(local.center, j)).collect(),
        normalized: raw.iter().map(|r| r / total).collect(),
        raw,
        eps,
        rho: config.rho,
    })
}

pub fn kernel_slice(cloud: &PointCloud, k: usize, nbrs: &NeighborList, config: LleConfig) -> Result<KernelSlice> {
    let local = local_data(cloud, k, nbrs)?;
    slice_from_local(cloud, &local, nbrs.radius(k), config)
}

/// Kernel slice at point `k` with a closed ε-ball found by exhaustive scan.
pub fn kernel_slice_at(cloud: &PointCloud, k: usize, eps: f64, config: LleConfig) -> Result<KernelSlice> {
    let (idx, _) = eps_neighbors_of(cloud, k, eps)?;
    let local = local_data_from_indices(cloud, k, idx)?;
    slice_from_local(cloud, &local, eps, config)
}

/// Eigenvalues of `(1/n)GGᵀ` over the closed ε-ball, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSpectrum {
    pub center: usize,
    pub eps: f64,
    pub neighbor_count: usize,
    pub eigenvalues: Vec<f64>,
}

pub fn covariance_spectrum(cloud: &PointCloud, k: usize, eps: f64) -> Result<CovarianceSpectrum> {
    let (idx, _) = eps_neighbors_of(cloud, k, eps)?;
    let d = cloud.intrinsic_dim();
    if idx.len() < d + 1 {
        return Err(LleError::invalid(format!(
            "point {k} has {} neighbors within ε, need at least d + 1 = {}",
            idx.len(),
            d + 1
        )));
    }
    let count = idx.len();
    let local = local_data_from_indices(cloud, k, idx)?;
    let n = cloud.len() as f64;
    let g = &local.g;
    let cov = Mat::from_fn(g.nrows(), g.nrows(), |a, b| {
        (0..g.ncols()).map(|j| g[(a, j)] * g[(b, j)]).sum::<f64>() / n
    });
    let eig = cov
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LleError::Linalg(format!("covariance eigensolve: {e:?}")))?;
    let s = eig.S().column_vector();
    let mut eigenvalues: Vec<f64> = (0..s.nrows()).map(|i| s[i].max(0.0)).collect();
    eigenvalues.reverse();
    Ok(CovarianceSpectrum {
        center: k,
        eps,
        neighbor_count: count,
        eigenvalues,
    })
}

fn apply_weights(local: &LocalData, c: f64, f: &[f64]) -> Result<f64> {
    let w = barycentric_weights(local, c)?;
    let fk = f[local.center];
    Ok(w.neighbors.iter().zip(&w.w).map(|(&j, &wj)| wj * (f[j] - fk)).sum())
}

/// `Σ_j w_k(j) f(x_{k,j}) − f(x_k)`.
pub fn pointwise_apply(cloud: &PointCloud, k: usize, nbrs: &NeighborList, config: LleConfig, f: &[f64]) -> Result<f64> {
    if f.len() != cloud.len() {
        return Err(LleError::invalid("function must have one value per point"));
    }
    let local = local_data(cloud, k, nbrs)?;
    apply_weights(&local, config.regularizer(cloud.len(), nbrs.radius(k)), f)
}

/// [`pointwise_apply`] with a closed ε-ball found by exhaustive scan.
pub fn pointwise_apply_at(cloud: &PointCloud, k: usize, eps: f64, config: LleConfig, f: &[f64]) -> Result<f64> {
    if f.len() != cloud.len() {
        return Err(LleError::invalid("function must have one value per point"));
    }
    let (idx, _) = eps_neighbors_of(cloud, k, eps)?;
    let local = local_data_from_indices(cloud, k, idx)?;
    apply_weights(&local, config.regularizer(cloud.len(), eps), f)
}
