//! Assembly of the LLE matrix `W` and the operators derived from it.

use rayon::prelude::*;

use crate::barycentric::{barycentric_weights, local_data};
use crate::error::{LleError, Result};
use crate::geometry::PointCloud;
use crate::neighbors::{NeighborList, NeighborRule};
use crate::sparse::SparseOperator;

/// Regularization settings: `c_k = n·ε_k^{d+ρ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LleConfig {
    /// Regularization order; `f64::INFINITY` means `c = 0`.
    pub rho: f64,
    pub d: usize,
}

impl LleConfig {
    pub fn new(rho: f64, d: usize) -> Result<Self> {
        if rho.is_nan() || rho == f64::NEG_INFINITY {
            return Err(LleError::invalid("ρ must be a real number or +∞"));
        }
        if d == 0 {
            return Err(LleError::invalid("intrinsic dimension must be >= 1"));
        }
        Ok(Self { rho, d })
    }

    /// `n·ε^{d+ρ}`, or 0 when `ρ = +∞`.
    pub fn regularizer(&self, n: usize, eps: f64) -> f64 {
        if self.rho == f64::INFINITY {
            0.0
        } else {
            n as f64 * eps.powf(self.d as f64 + self.rho)
        }
    }
}

/// Assembled LLE matrix with the bookkeeping needed downstream.
#[derive(Debug, Clone)]
pub struct LleMatrix {
    pub w: SparseOperator,
    pub config: LleConfig,
    pub rule: NeighborRule,
    /// Per-point radius `ε_k` used in `c_k`.
    pub radii: Vec<f64>,
    /// Points given identity rows, with the reason.
    pub skipped: Vec<(usize, String)>,
    /// Points with a single neighbor (trivial weights).
    pub single_neighbor: Vec<usize>,
}

impl LleMatrix {
    pub fn skipped_indices(&self) -> Vec<usize> {
        self.skipped.iter().map(|(i, _)| *i).collect()
    }
}

/// Fills row `k` of `W` with the barycentric weights of point `k`.
pub fn assemble_w(cloud: &PointCloud, nbrs: &NeighborList, config: LleConfig) -> Result<LleMatrix> {
    let n = cloud.len();
    if nbrs.len() != n {
        return Err(LleError::invalid("neighbor list does not match the cloud"));
    }
    let rows: Vec<std::result::Result<Vec<(usize, f64)>, String>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let c = config.regularizer(n, nbrs.radius(k));
            let local = local_data(cloud, k, nbrs).map_err(|e| e.to_string())?;
            let w = barycentric_weights(&local, c).map_err(|e| e.to_string())?;
            Ok(w.neighbors.into_iter().zip(w.w).collect())
        })
        .collect();
    let mut skipped = Vec::new();
    let mut single_neighbor = Vec::new();
    let rows: Vec<Vec<(usize, f64)>> = rows
        .into_iter()
        .enumerate()
        .map(|(k, r)| match r {
            Ok(row) => {
                if row.len() == 1 {
                    single_neighbor.push(k);
                }
                row
            }
            Err(reason) => {
                skipped.push((k, reason));
                vec![(k, 1.0)]
            }
        })
        .collect();
    if skipped.len() * 100 > n {
        return Err(LleError::TooManyDegenerate {
            count: skipped.len(),
            total: n,
        });
    }
    Ok(LleMatrix {
        w: SparseOperator::from_rows(rows)?,
        config,
        rule: nbrs.rule,
        radii: nbrs.radii().to_vec(),
        skipped,
        single_neighbor,
    })
}

/// `M = (I − W)ᵀ(I − W)`, symmetrized exactly.
pub fn embedding_matrix(w: &SparseOperator) -> SparseOperator {
    let a = w.scale_shift(-1.0, 1.0);
    a.transpose().matmul(&a).symmetrized()
}

/// `factor·(W − I)`.
pub fn generator(w: &SparseOperator, factor: f64) -> SparseOperator {
    let mut g = w.scale_shift(factor, -factor);
    g.symmetric = false;
    g
}

/// `L = (2(d+2)/ε²)(W − I)`, whose action approximates `Δ` at ρ = 3.
pub fn scaled_generator(w: &SparseOperator, eps: f64, d: usize) -> SparseOperator {
    generator(w, 2.0 * (d as f64 + 2.0) / (eps * eps))
}

/// `E⁻¹(W − I)` with `E_ii = ε(x_i)²`.
pub fn normalized_knn_generator(w: &SparseOperator, radii: &[f64]) -> Result<SparseOperator> {
    if radii.len() != w.dim() {
        return Err(LleError::invalid("one radius per row required"));
    }
    if let Some(i) = radii.iter().position(|&r| !(r > 0.0)) {
        return Err(LleError::ZeroRadius { point: i });
    }
    let e: Vec<f64> = radii.iter().map(|r| r * r).collect();
    Ok(generator(w, 1.0).scale_rows(&e))
}
