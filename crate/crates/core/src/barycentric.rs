//! Local data matrices, the regularized pseudo-inverse and barycentric weights.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::error::{LleError, Result};
use crate::geometry::PointCloud;
use crate::neighbors::NeighborList;

/// Centered neighbor matrix `G` (p×N) of one point.
#[derive(Debug, Clone)]
pub struct LocalData {
    pub center: usize,
    /// Cloud indices of the columns of `g`, ascending.
    pub neighbors: Vec<usize>,
    pub g: Mat<f64>,
}

impl LocalData {
    /// Wraps an explicit local data matrix (center and neighbor labels are
    /// placeholders).
    pub fn from_matrix(g: Mat<f64>) -> Result<Self> {
        if g.ncols() == 0 || g.nrows() == 0 {
            return Err(LleError::EmptyNeighborhood { point: 0 });
        }
        if !(0..g.ncols()).all(|j| (0..g.nrows()).all(|i| g[(i, j)].is_finite())) {
            return Err(LleError::invalid("local data matrix has non-finite entries"));
        }
        Ok(Self {
            center: 0,
            neighbors: (0..g.ncols()).collect(),
            g,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn neighbor_count(&self) -> usize {
        self.g.ncols()
    }

    /// `G·1_N`.
    pub fn column_sum(&self) -> Vec<f64> {
        (0..self.g.nrows())
            .map(|i| (0..self.g.ncols()).map(|j| self.g[(i, j)]).sum())
            .collect()
    }
}

/// Builds `G` for point `k` from its neighbor list.
pub fn local_data(cloud: &PointCloud, k: usize, nbrs: &NeighborList) -> Result<LocalData> {
    let mut neighbors = nbrs.neighbors(k).to_vec();
    if neighbors.is_empty() {
        return Err(LleError::EmptyNeighborhood { point: k });
    }
    neighbors.sort_unstable();
    local_data_from_indices(cloud, k, neighbors)
}

/// Builds `G` for point `k` from an explicit neighbor index set.
pub fn local_data_from_indices(cloud: &PointCloud, k: usize, neighbors: Vec<usize>) -> Result<LocalData> {
    if neighbors.is_empty() {
        return Err(LleError::EmptyNeighborhood { point: k });
    }
    let p = cloud.ambient_dim();
    let mut g = Mat::<f64>::zeros(p, neighbors.len());
    let mut col = vec![0.0; p];
    for (j, &nb) in neighbors.iter().enumerate() {
        cloud.displacement_into(k, nb, &mut col);
        for (i, v) in col.iter().enumerate() {
            g[(i, j)] = *v;
        }
    }
    Ok(LocalData { center: k, neighbors, g })
}

/// Eigen-structure of `GGᵀ` restricted to its numerical range.
#[derive(Debug, Clone)]
pub struct LocalSpectrum {
    /// All `p` eigenvalues of `GGᵀ`, descending and clamped at zero.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors for the leading `rank` eigenvalues (p×rank).
    pub vectors: Mat<f64>,
    pub rank: usize,
}

/// Eigen-decomposes `GGᵀ`, working on the smaller of `GGᵀ` and `GᵀG`.
pub fn local_spectrum(local: &LocalData) -> Result<LocalSpectrum> {
    let g = &local.g;
    let (p, n) = (g.nrows(), g.ncols());
    let gram = if p <= n { g * g.transpose() } else { g.transpose() * g };
    let eig = gram
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| LleError::Linalg(format!("local eigensolve at point {}: {e:?}", local.center)))?;
    let q = gram.nrows();
    let s = eig.S().column_vector();
    let u = eig.U();
    let order: Vec<usize> = (0..q).rev().collect();
    let mut eigenvalues: Vec<f64> = order.iter().map(|&i| s[i].max(0.0)).collect();
    eigenvalues.resize(p, 0.0);
    let top = eigenvalues[0];
    let cutoff = p.max(n) as f64 * f64::EPSILON * top;
    let rank = eigenvalues.iter().take_while(|&&l| l > cutoff && l > 0.0).count();
    let vectors = if p <= n {
        Mat::from_fn(p, rank, |i, j| u[(i, order[j])])
    } else {
        // u_i = G v_i / √λ_i
        let v = Mat::from_fn(n, rank, |i, j| u[(i, order[j])]);
        let mut gv = g * &v;
        for j in 0..rank {
            let scale = 1.0 / eigenvalues[j].sqrt();
            for i in 0..p {
                gv[(i, j)] *= scale;
            }
        }
        gv
    };
    Ok(LocalSpectrum {
        eigenvalues,
        vectors,
        rank,
    })
}

fn check_c(c: f64) -> Result<()> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(LleError::invalid(format!("regularizer c must be finite and >= 0, got {c}")));
    }
    Ok(())
}

/// `I_c(GGᵀ) = Σ_{i ≤ r} u_i u_iᵀ / (λ_i + c)`.
pub fn regularized_pinv(spec: &LocalSpectrum, c: f64) -> Result<Mat<f64>> {
    check_c(c)?;
    if spec.rank == 0 && c == 0.0 {
        return Err(LleError::DegenerateLocalGeometry { point: 0 });
    }
    let p = spec.vectors.nrows();
    let u = &spec.vectors;
    Ok(Mat::from_fn(p, p, |a, b| {
        (0..spec.rank)
            .map(|i| u[(a, i)] * u[(b, i)] / (spec.eigenvalues[i] + c))
            .sum()
    }))
}

/// `T = I_c(GGᵀ)·G·1_N`, applied through the spectrum without forming `I_c`.
pub fn correction_from_spectrum(local: &LocalData, spec: &LocalSpectrum, c: f64) -> Result<Vec<f64>> {
    check_c(c)?;
    if spec.rank == 0 && c == 0.0 {
        return Err(LleError::DegenerateLocalGeometry { point: local.center });
    }
    let g1 = local.column_sum();
    let p = g1.len();
    let u = &spec.vectors;
    let mut t = vec![0.0; p];
    for i in 0..spec.rank {
        let proj: f64 = (0..p).map(|a| u[(a, i)] * g1[a]).sum();
        let coef = proj / (spec.eigenvalues[i] + c);
        for (a, ta) in t.iter_mut().enumerate() {
            *ta += coef * u[(a, i)];
        }
    }
    Ok(t)
}

pub fn correction_vector(local: &LocalData, c: f64) -> Result<Vec<f64>> {
    let spec = local_spectrum(local)?;
    correction_from_spectrum(local, &spec, c)
}

/// Barycentric weights of one point together with the correction vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub neighbors: Vec<usize>,
    pub w: Vec<f64>,
    pub t: Vec<f64>,
}

/// Unnormalized kernel values `1 − Tᵀg_j`.
pub fn raw_kernel(local: &LocalData, t: &[f64]) -> Vec<f64> {
    let g = &local.g;
    (0..g.ncols())
        .map(|j| 1.0 - (0..g.nrows()).map(|a| t[a] * g[(a, j)]).sum::<f64>())
        .collect()
}

/// `1 − GᵀT` in the right singular basis `v_i = Gᵀu_i/√λ_i`:
/// `(I − VVᵀ)1 + Σ v_i·c/(λ_i + c)·v_iᵀ1`. The first term vanishes
/// identically when `G` has full column rank, so small `c` keeps its digits.
pub fn raw_kernel_from_spectrum(local: &LocalData, spec: &LocalSpectrum, c: f64) -> Vec<f64> {
    let g = &local.g;
    let (p, n) = (g.nrows(), g.ncols());
    let mut out = if spec.rank == n { vec![0.0; n] } else { vec![1.0; n] };
    for i in 0..spec.rank {
        let scale = 1.0 / spec.eigenvalues[i].sqrt();
        let v: Vec<f64> = (0..n)
            .map(|j| scale * (0..p).map(|a| spec.vectors[(a, i)] * g[(a, j)]).sum::<f64>())
            .collect();
        let dot: f64 = v.iter().sum();
        let keep = c / (spec.eigenvalues[i] + c);
        let coef = if spec.rank == n { keep * dot } else { (keep - 1.0) * dot };
        for (o, vj) in out.iter_mut().zip(&v) {
            *o += coef * vj;
        }
    }
    out
}

/// `w = (1ᵀ − TᵀG) / (N − TᵀG1)`.
pub fn barycentric_weights(local: &LocalData, c: f64) -> Result<Weights> {
    let n = local.neighbor_count();
    let spec = local_spectrum(local)?;
    let t = correction_from_spectrum(local, &spec, c)?;
    if n == 1 {
        return Ok(Weights {
            neighbors: local.neighbors.clone(),
            w: vec![1.0],
            t,
        });
    }
    let raw = raw_kernel_from_spectrum(local, &spec, c);
    let denom: f64 = raw.iter().sum();
    if !(denom.abs() > 1e-12 * n as f64) {
        return Err(LleError::IllConditioned {
            point: local.center,
            denominator: denom,
        });
    }
    let mut w: Vec<f64> = raw.iter().map(|r| r / denom).collect();
    let s: f64 = w.iter().sum();
    for v in &mut w {
        *v /= s;
    }
    Ok(Weights {
        neighbors: local.neighbors.clone(),
        w,
        t,
    })
}

/// Reference weights from the ridge system `(GᵀG + cI)y = 1`, `w = y / 1ᵀy`.
pub fn direct_weights_oracle(local: &LocalData, c: f64) -> Result<Weights> {
    check_c(c)?;
    let g = &local.g;
    let n = g.ncols();
    let mut a = g.transpose() * g;
    for i in 0..n {
        a[(i, i)] += c;
    }
    let llt = a
        .llt(Side::Lower)
        .map_err(|_| LleError::SingularSystem { point: Some(local.center) })?;
    let l = llt.L();
    let diag_max = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(0.0, f64::max);
    let diag_min = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    if diag_min <= n as f64 * f64::EPSILON * diag_max {
        return Err(LleError::SingularSystem { point: Some(local.center) });
    }
    let y = llt.solve(Mat::<f64>::from_fn(n, 1, |_, _| 1.0));
    let total: f64 = (0..n).map(|i| y[(i, 0)]).sum();
    if total == 0.0 || !total.is_finite() {
        return Err(LleError::SingularSystem { point: Some(local.center) });
    }
    let w = (0..n).map(|i| y[(i, 0)] / total).collect();
    Ok(Weights {
        neighbors: local.neighbors.clone(),
        w,
        t: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64]) -> LocalData {
        LocalData::from_matrix(Mat::from_fn(1, values.len(), |_, j| values[j])).unwrap()
    }

    #[test]
    fn identity_local_matrix() {
        let cloud = PointCloud::new(
            vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0],
            2,
            2,
            crate::geometry::Metric::AmbientEuclidean,
        )
        .unwrap();
        let ld = local_data_from_indices(&cloud, 0, vec![1, 2]).unwrap();
        assert_eq!(ld.g, Mat::<f64>::identity(2, 2));
    }

    #[test]
    fn pinv_diag() {
        let ld = LocalData::from_matrix(Mat::from_fn(2, 1, |i, _| if i == 0 { 2f64.sqrt() } else { 0.0 })).unwrap();
        let spec = local_spectrum(&ld).unwrap();
        assert_eq!(spec.rank, 1);
        let ic = regularized_pinv(&spec, 1.0).unwrap();
        assert!((ic[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
        assert!(ic[(1, 1)].abs() < 1e-15 && ic[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn symmetric_line_neighbors() {
        let ld = line(&[-1.0, 1.0]);
        for c in [0.0, 0.1, 5.0] {
            let w = barycentric_weights(&ld, c).unwrap();
            assert!(w.t[0].abs() < 1e-15);
            assert!((w.w[0] - 0.5).abs() < 1e-15 && (w.w[1] - 0.5).abs() < 1e-15);
        }
        let o = direct_weights_oracle(&ld, 0.1).unwrap();
        assert!((o.w[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_line_neighbors() {
        let ld = line(&[-1.0, 2.0]);
        let t = correction_vector(&ld, 0.0).unwrap();
        assert!((t[0] - 0.2).abs() < 1e-15);
        let w = barycentric_weights(&ld, 0.0).unwrap();
        assert!((w.w[0] - 2.0 / 3.0).abs() < 1e-14 && (w.w[1] - 1.0 / 3.0).abs() < 1e-14);
        assert!((-w.w[0] + 2.0 * w.w[1]).abs() < 1e-14);
    }

    #[test]
    fn degenerate_zero_rank() {
        let ld = LocalData::from_matrix(Mat::zeros(2, 3)).unwrap();
        assert!(matches!(correction_vector(&ld, 0.0), Err(LleError::DegenerateLocalGeometry { .. })));
        let w = barycentric_weights(&ld, 1.0).unwrap();
        assert!(w.w.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn single_neighbor() {
        let w = barycentric_weights(&line(&[0.3]), 0.0).unwrap();
        assert_eq!(w.w, vec![1.0]);
    }

    #[test]
    fn huge_ridge_gives_uniform() {
        let ld = LocalData::from_matrix(Mat::from_fn(3, 6, |i, j| ((i * 5 + j * 3) % 7) as f64 / 7.0 - 0.4)).unwrap();
        let w = barycentric_weights(&ld, 1e6).unwrap();
        assert!(w.w.iter().all(|v| (v - 1.0 / 6.0).abs() < 1e-4));
    }

    #[test]
    fn flat_grid_patch_has_zero_correction() {
        let mut cols = Vec::new();
        for a in -2i32..=2 {
            for b in -2i32..=2 {
                if (a, b) != (0, 0) {
                    cols.push((a as f64 * 0.1, b as f64 * 0.1));
                }
            }
        }
        let ld = LocalData::from_matrix(Mat::from_fn(2, cols.len(), |i, j| if i == 0 { cols[j].0 } else { cols[j].1 })).unwrap();
        let t = correction_vector(&ld, 1e-3).unwrap();
        assert!(t.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-10);
    }

    #[test]
    fn oracle_rejects_singular_system() {
        // N > p, c = 0: GᵀG is rank-deficient.
        let ld = line(&[-1.0, 0.5, 2.0]);
        assert!(matches!(direct_weights_oracle(&ld, 0.0), Err(LleError::SingularSystem { .. })));
    }

    #[test]
    fn wide_and_tall_spectra_agree() {
        // N < p takes the GᵀG path.
        let g = Mat::from_fn(6, 3, |i, j| ((i * 3 + j * 7) % 11) as f64 / 11.0 - 0.5);
        let ld = LocalData::from_matrix(g.clone()).unwrap();
        let spec = local_spectrum(&ld).unwrap();
        assert_eq!(spec.rank, 3);
        let ggt = &g * g.transpose();
        let mut recon = Mat::<f64>::zeros(6, 6);
        for i in 0..spec.rank {
            for a in 0..6 {
                for b in 0..6 {
                    recon[(a, b)] += spec.eigenvalues[i] * spec.vectors[(a, i)] * spec.vectors[(b, i)];
                }
            }
        }
        assert!((&recon - &ggt).norm_l2() <= 1e-12 * ggt.norm_l2());
        let utu = spec.vectors.transpose() * &spec.vectors;
        assert!((&utu - Mat::<f64>::identity(3, 3)).norm_l2() < 1e-10);
    }
}
