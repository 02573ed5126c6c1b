//! Exact ε-radius and K-nearest-neighbor search.
//!
//! Euclidean clouds with `p ≤ 3` use a uniform hash grid; everything else
//! (high ambient dimension, the periodic metric) is searched exhaustively in
//! parallel. Both paths return identical lists.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{LleError, Result};
use crate::geometry::{Metric, PointCloud};

/// Neighborhood rule used to build a [`NeighborList`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeighborRule {
    EpsRadius(f64),
    Knn(usize),
}

/// Per-point neighbor sets in compressed-row layout.
///
/// ε-radius lists are sorted by index; KNN lists by `(distance, index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub rule: NeighborRule,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    distances: Vec<f64>,
    /// Distance to the K-th neighbor (KNN) or ε (radius rule).
    radii: Vec<f64>,
}

impl NeighborList {
    fn from_rows(rule: NeighborRule, rows: Vec<Vec<(usize, f64)>>, radii: Vec<f64>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let total = rows.iter().map(Vec::len).sum();
        let mut indices = Vec::with_capacity(total);
        let mut distances = Vec::with_capacity(total);
        for row in rows {
            for (j, d) in row {
                indices.push(j);
                distances.push(d);
            }
            offsets.push(indices.len());
        }
        Self {
            rule,
            offsets,
            indices,
            distances,
            radii,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn count(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn radius(&self, i: usize) -> f64 {
        self.radii[i]
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn total_entries(&self) -> usize {
        self.indices.len()
    }

    /// Points whose neighbor list is empty.
    pub fn empty_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.count(i) == 0).collect()
    }
}

/// Uniform hash grid over a Euclidean cloud with `p ≤ 3`.
struct Grid {
    cell: f64,
    p: usize,
    order: Vec<usize>,
    buckets: HashMap<[i64; 3], (usize, usize)>,
    lo: [i64; 3],
    hi: [i64; 3],
}

impl Grid {
    fn new(cloud: &PointCloud, cell: f64) -> Self {
        let p = cloud.ambient_dim();
        let keys: Vec<[i64; 3]> = (0..cloud.len()).map(|i| key_of(cloud.point(i), cell, p)).collect();
        let mut order: Vec<usize> = (0..cloud.len()).collect();
        order.sort_unstable_by_key(|&i| (keys[i], i));
        let mut buckets = HashMap::new();
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        let mut start = 0;
        while start < order.len() {
            let key = keys[order[start]];
            let mut end = start + 1;
            while end < order.len() && keys[order[end]] == key {
                end += 1;
            }
            buckets.insert(key, (start, end));
            for a in 0..3 {
                lo[a] = lo[a].min(key[a]);
                hi[a] = hi[a].max(key[a]);
            }
            start = end;
        }
        Self {
            cell,
            p,
            order,
            buckets,
            lo,
            hi,
        }
    }

    /// Calls `visit` for every point in cells at Chebyshev ring `r` around `center`.
    fn visit_ring(&self, center: [i64; 3], r: i64, mut visit: impl FnMut(usize)) {
        let span = |a: usize| if a < self.p { -r..=r } else { 0..=0 };
        for dx in span(0) {
            for dy in span(1) {
                for dz in span(2) {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                        continue;
                    }
                    let key = [center[0] + dx, center[1] + dy, center[2] + dz];
                    if let Some(&(s, e)) = self.buckets.get(&key) {
                        for &j in &self.order[s..e] {
                            visit(j);
                        }
                    }
                }
            }
        }
    }

    /// Ring index beyond which no occupied cell exists.
    fn max_ring(&self, center: [i64; 3]) -> i64 {
        (0..self.p)
            .map(|a| (center[a] - self.lo[a]).abs().max((self.hi[a] - center[a]).abs()))
            .max()
            .unwrap_or(0)
    }
}

fn key_of(x: &[f64], cell: f64, p: usize) -> [i64; 3] {
    let mut k = [0i64; 3];
    for a in 0..p {
        k[a] = (x[a] / cell).floor() as i64;
    }
    k
}

fn uses_grid(cloud: &PointCloud) -> bool {
    cloud.metric() == Metric::AmbientEuclidean && cloud.ambient_dim() <= 3
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(LleError::invalid(format!("ε must be positive and finite, got {eps}")));
    }
    Ok(())
}

/// Closed-ball neighbors `{j ≠ i : ‖z_j − z_i‖ ≤ ε}` for every point.
pub fn build_eps_neighbors(cloud: &PointCloud, eps: f64) -> Result<NeighborList> {
    check_eps(eps)?;
    if !uses_grid(cloud) {
        return build_eps_neighbors_exhaustive(cloud, eps);
    }
    let grid = Grid::new(cloud, eps);
    let eps2 = eps * eps;
    let rows: Vec<Vec<(usize, f64)>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let center = key_of(cloud.point(i), grid.cell, grid.p);
            let mut row = Vec::new();
            for r in 0..=1 {
                grid.visit_ring(center, r, |j| {
                    if j != i {
                        let d2 = cloud.distance_sq(i, j);
                        if d2 <= eps2 {
                            row.push((j, d2.sqrt()));
                        }
                    }
                });
            }
            row.sort_unstable_by_key(|&(j, _)| j);
            row
        })
        .collect();
    Ok(NeighborList::from_rows(NeighborRule::EpsRadius(eps), rows, vec![eps; cloud.len()]))
}

/// Reference O(n²) ε-radius search.
pub fn build_eps_neighbors_exhaustive(cloud: &PointCloud, eps: f64) -> Result<NeighborList> {
    check_eps(eps)?;
    let rows = (0..cloud.len())
        .into_par_iter()
        .map(|i| eps_row(cloud, i, eps))
        .collect();
    Ok(NeighborList::from_rows(NeighborRule::EpsRadius(eps), rows, vec![eps; cloud.len()]))
}

fn eps_row(cloud: &PointCloud, i: usize, eps: f64) -> Vec<(usize, f64)> {
    let eps2 = eps * eps;
    (0..cloud.len())
        .filter(|&j| j != i)
        .filter_map(|j| {
            let d2 = cloud.distance_sq(i, j);
            (d2 <= eps2).then(|| (j, d2.sqrt()))
        })
        .collect()
}

/// ε-radius neighbors of a single point, by exhaustive scan.
pub fn eps_neighbors_of(cloud: &PointCloud, i: usize, eps: f64) -> Result<(Vec<usize>, Vec<f64>)> {
    check_eps(eps)?;
    if i >= cloud.len() {
        return Err(LleError::invalid(format!("point index {i} out of range")));
    }
    Ok(eps_row(cloud, i, eps).into_iter().unzip())
}

/// Indices of the `count` cloud points closest to an arbitrary location,
/// sorted by `(distance, index)`.
pub fn nearest_points(cloud: &PointCloud, target: &[f64], count: usize) -> Vec<usize> {
    let mut all: Vec<(f64, usize)> = (0..cloud.len()).map(|i| (cloud.distance_sq_to(i, target), i)).collect();
    let count = count.min(all.len());
    if count == 0 {
        return Vec::new();
    }
    all.select_nth_unstable_by(count - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(count);
    all.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.into_iter().map(|(_, i)| i).collect()
}

fn check_k(cloud: &PointCloud, k: usize) -> Result<()> {
    if k == 0 || k >= cloud.len() {
        return Err(LleError::invalid(format!(
            "K must satisfy 1 <= K <= n - 1 = {}, got {k}",
            cloud.len().saturating_sub(1)
        )));
    }
    Ok(())
}

fn knn_order(a: &(f64, usize), b: &(f64, usize)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

fn finish_knn_rows(rows: Vec<Vec<(f64, usize)>>) -> (Vec<Vec<(usize, f64)>>, Vec<f64>) {
    let radii = rows.iter().map(|r| r.last().map_or(0.0, |x| x.0.sqrt())).collect();
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|(d2, j)| (j, d2.sqrt())).collect())
        .collect();
    (rows, radii)
}

fn knn_row_exhaustive(cloud: &PointCloud, i: usize, k: usize) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = (0..cloud.len())
        .filter(|&j| j != i)
        .map(|j| (cloud.distance_sq(i, j), j))
        .collect();
    all.select_nth_unstable_by(k - 1, knn_order);
    all.truncate(k);
    all.sort_unstable_by(knn_order);
    all
}

/// Exact K nearest neighbors, ties broken by smaller index.
pub fn build_knn(cloud: &PointCloud, k: usize) -> Result<NeighborList> {
    check_k(cloud, k)?;
    if !uses_grid(cloud) {
        return build_knn_exhaustive(cloud, k);
    }
    let cell = knn_cell_size(cloud, k);
    if !(cell > 0.0) {
        return build_knn_exhaustive(cloud, k);
    }
    let grid = Grid::new(cloud, cell);
    let rows: Vec<Vec<(f64, usize)>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let center = key_of(cloud.point(i), grid.cell, grid.p);
            let last = grid.max_ring(center);
            let mut cand: Vec<(f64, usize)> = Vec::new();
            let mut r = 0;
            loop {
                grid.visit_ring(center, r, |j| {
                    if j != i {
                        cand.push((cloud.distance_sq(i, j), j));
                    }
                });
                if cand.len() >= k {
                    cand.select_nth_unstable_by(k - 1, knn_order);
                    cand.truncate(k);
                    // Unvisited cells are at least r full cells away.
                    let reach = r as f64 * grid.cell;
                    if cand[k - 1].0 < reach * reach || r >= last {
                        break;
                    }
                }
                if r >= last {
                    break;
                }
                r += 1;
            }
            cand.sort_unstable_by(knn_order);
            cand
        })
        .collect();
    let (rows, radii) = finish_knn_rows(rows);
    Ok(NeighborList::from_rows(NeighborRule::Knn(k), rows, radii))
}

/// Reference O(n²) KNN search.
pub fn build_knn_exhaustive(cloud: &PointCloud, k: usize) -> Result<NeighborList> {
    check_k(cloud, k)?;
    let rows = (0..cloud.len())
        .into_par_iter()
        .map(|i| knn_row_exhaustive(cloud, i, k))
        .collect();
    let (rows, radii) = finish_knn_rows(rows);
    Ok(NeighborList::from_rows(NeighborRule::Knn(k), rows, radii))
}

/// Evenly spaced probe indices used by the bandwidth heuristics.
fn probe_indices(n: usize, count: usize) -> Vec<usize> {
    let count = count.min(n);
    (0..count).map(|t| t * n / count).collect()
}

fn knn_cell_size(cloud: &PointCloud, k: usize) -> f64 {
    let probes = probe_indices(cloud.len(), 32);
    let mut r: Vec<f64> = probes
        .par_iter()
        .map(|&i| knn_row_exhaustive(cloud, i, k)[k - 1].0.sqrt())
        .collect();
    r.sort_by(f64::total_cmp);
    r[r.len() / 2]
}

/// Median, over up to 256 evenly spaced probe points, of the radius midway
/// between the `target`-th and `(target+1)`-th neighbor distances. Using it
/// as ε gives roughly `target` neighbors per point.
pub fn eps_for_neighbor_count(cloud: &PointCloud, target: usize) -> Result<f64> {
    check_k(cloud, target)?;
    let probes = probe_indices(cloud.len(), 256);
    let take = (target + 1).min(cloud.len() - 1);
    let mut r: Vec<f64> = probes
        .par_iter()
        .map(|&i| {
            let row = knn_row_exhaustive(cloud, i, take);
            0.5 * (row[target - 1].0.sqrt() + row[take - 1].0.sqrt())
        })
        .collect();
    r.sort_by(f64::total_cmp);
    let m = r.len();
    let median = if m % 2 == 1 { r[m / 2] } else { 0.5 * (r[m / 2 - 1] + r[m / 2]) };
    if median > 0.0 {
        Ok(median)
    } else {
        Err(LleError::ZeroRadius { point: probes[0] })
    }
}

/// `ε = cal · (log n / n)^{1/(d+4)}`.
pub fn suggest_bandwidth(n: usize, d: usize, cal: f64) -> Result<f64> {
    if n < 10 || d == 0 || !(cal > 0.0) {
        return Err(LleError::invalid("suggest_bandwidth needs n >= 10, d >= 1, cal > 0"));
    }
    let n = n as f64;
    Ok(cal * (n.ln() / n).powf(1.0 / (d as f64 + 4.0)))
}
