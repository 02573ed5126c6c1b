//! Smallest-magnitude eigenpairs of sparse operators.
//!
//! The iterative solver is shift-invert block subspace iteration: the shifted
//! operator `A + τI` is factored once by sparse LU, a block of `b > m`
//! vectors is repeatedly multiplied by `(A + τI)⁻¹` and re-orthonormalized,
//! and Rayleigh–Ritz on `QᵀAQ` extracts eigenpairs. Nonsymmetric inputs use a
//! complex dense eigensolve of the projected matrix; real parts are reported,
//! imaginary parts kept as diagnostics.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::error::{LleError, Result};
use crate::geometry::PointCloud;
use crate::lle_matrix::{assemble_w, embedding_matrix, LleConfig, LleMatrix};
use crate::neighbors::NeighborList;
use crate::rng::SampleRng;
use crate::sparse::SparseOperator;

/// Eigenvalues (ascending real parts) and optional eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub imag_parts: Vec<f64>,
    /// `n × m`, unit columns, first nonzero entry positive.
    pub eigenvectors: Option<Mat<f64>>,
    /// `‖Av − λv‖ / ‖v‖` per pair.
    pub residuals: Vec<f64>,
    pub converged: Vec<bool>,
    /// Factor applied by [`SpectrumResult::rescaled`].
    pub scale: f64,
    pub iterations: usize,
    /// `‖A‖_∞` of the operator the spectrum was taken from.
    pub norm_estimate: f64,
}

impl SpectrumResult {
    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn rescaled(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|v| v * self.scale).collect()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Residual tolerance relative to `‖A‖_∞`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub want_vectors: bool,
    /// Orthonormal vectors spanning an invariant subspace to exclude.
    pub deflate: Vec<Vec<f64>>,
    /// Use the dense solver when `n` is at most this.
    pub dense_below: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            seed: 0x5eed,
            want_vectors: false,
            deflate: Vec::new(),
            dense_below: 0,
        }
    }
}

/// `m` smallest eigenpairs of a symmetric matrix.
pub fn smallest_eigs_sym(a: &SparseOperator, m: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    solve(a, m, opts, true)
}

/// `m` eigenvalues of `−L` of smallest magnitude.
///
/// When the rows of `L` sum to zero the constant vector is an exact null
/// vector; it is deflated from the iteration and reported as the first pair.
pub fn generator_spectrum(l: &SparseOperator, m: usize, opts: &SolverOptions) -> Result<SpectrumResult> {
    let a = l.scale_shift(-1.0, 0.0);
    let n = a.dim();
    let norm = a.inf_norm().max(f64::MIN_POSITIVE);
    let conserves = a.row_sums().iter().all(|s| s.abs() <= 1e-10 * norm);
    if !conserves || !opts.deflate.is_empty() || m == 0 || m > n {
        return solve(&a, m, opts, false);
    }
    let u = vec![1.0 / (n as f64).sqrt(); n];
    let au = a.matvec(&u);
    let mu: f64 = u.iter().zip(&au).map(|(x, y)| x * y).sum();
    let res = au.iter().zip(&u).map(|(y, x)| (y - mu * x).powi(2)).sum::<f64>().sqrt();
    let null = SpectrumResult {
        eigenvalues: vec![mu],
        imag_parts: vec![0.0],
        eigenvectors: opts.want_vectors.then(|| Mat::from_fn(n, 1, |i, _| u[i])),
        residuals: vec![res],
        converged: vec![res <= opts.tol * norm],
        scale: 1.0,
        iterations: 0,
        norm_estimate: a.inf_norm(),
    };
    if m == 1 {
        return Ok(null);
    }
    let inner = SolverOptions {
        deflate: vec![u],
        ..opts.clone()
    };
    match solve(&a, m - 1, &inner, false) {
        Ok(rest) => Ok(merge(null, rest)),
        Err(LleError::NotConverged { partial }) => Err(LleError::NotConverged {
            partial: Box::new(merge(null, *partial)),
        }),
        Err(e) => Err(e),
    }
}

/// Concatenates two spectra and re-sorts by real part.
fn merge(a: SpectrumResult, b: SpectrumResult) -> SpectrumResult {
    let total = a.len() + b.len();
    let re: Vec<f64> = a.eigenvalues.iter().chain(&b.eigenvalues).copied().collect();
    let mut idx: Vec<usize> = (0..total).collect();
    idx.sort_by(|&x, &y| re[x].total_cmp(&re[y]).then(x.cmp(&y)));
    let pick = |va: &[f64], vb: &[f64]| -> Vec<f64> {
        let all: Vec<f64> = va.iter().chain(vb).copied().collect();
        idx.iter().map(|&k| all[k]).collect()
    };
    let conv: Vec<bool> = a.converged.iter().chain(&b.converged).copied().collect();
    let eigenvectors = match (&a.eigenvectors, &b.eigenvectors) {
        (Some(x), Some(y)) => Some(Mat::from_fn(x.nrows(), total, |i, j| {
            let k = idx[j];
            if k < a.len() {
                x[(i, k)]
            } else {
                y[(i, k - a.len())]
            }
        })),
        _ => None,
    };
    SpectrumResult {
        eigenvalues: pick(&a.eigenvalues, &b.eigenvalues),
        imag_parts: pick(&a.imag_parts, &b.imag_parts),
        eigenvectors,
        residuals: pick(&a.residuals, &b.residuals),
        converged: idx.iter().map(|&k| conv[k]).collect(),
        scale: 1.0,
        iterations: a.iterations.max(b.iterations),
        norm_estimate: a.norm_estimate.max(b.norm_estimate),
    }
}

/// Smallest-magnitude eigenpairs of a general sparse matrix.
pub fn smallest_eigs(a: &SparseOperator, m: usize, opts: &SolverOptions, symmetric: bool) -> Result<SpectrumResult> {
    solve(a, m, opts, symmetric)
}

fn solve(a: &SparseOperator, m: usize, opts: &SolverOptions, symmetric: bool) -> Result<SpectrumResult> {
    let n = a.dim();
    let free = n.saturating_sub(opts.deflate.len());
    if m == 0 || m > free {
        return Err(LleError::invalid(format!("requested {m} eigenpairs of a {n}×{n} operator")));
    }
    for v in &opts.deflate {
        if v.len() != n {
            return Err(LleError::invalid("deflation vector has the wrong length"));
        }
    }
    let block = (m + 10).max(2 * m).min(free);
    if n <= opts.dense_below || 2 * block >= free {
        return dense_smallest(&a.to_dense(), m, opts, symmetric);
    }
    SubspaceIteration::new(a, m, block, opts, symmetric)?.run()
}

fn dense_from_cols(n: usize, cols: &[Vec<f64>]) -> Mat<f64> {
    Mat::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// Projects the deflation vectors out of every column.
fn project_out(x: &mut Mat<f64>, deflate: &[Vec<f64>]) {
    for u in deflate {
        for j in 0..x.ncols() {
            let dot: f64 = (0..x.nrows()).map(|i| u[i] * x[(i, j)]).sum();
            for i in 0..x.nrows() {
                x[(i, j)] -= dot * u[i];
            }
        }
    }
}

fn apply(a: &SparseOperator, x: &Mat<f64>) -> Mat<f64> {
    let cols: Vec<Vec<f64>> = (0..x.ncols())
        .map(|j| a.matvec(&(0..x.nrows()).map(|i| x[(i, j)]).collect::<Vec<_>>()))
        .collect();
    dense_from_cols(x.nrows(), &cols)
}

fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12 * max) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// One Ritz pair in real form (`vec_re + i·vec_im`).
struct Ritz {
    re: f64,
    im: f64,
    coef_re: Vec<f64>,
    coef_im: Vec<f64>,
}

/// Ritz pairs of `h`, ordered by distance of the eigenvalue to `target`.
fn ritz_pairs(h: &Mat<f64>, symmetric: bool, target: f64) -> Result<Vec<Ritz>> {
    let b = h.nrows();
    let mut out = Vec::with_capacity(b);
    if symmetric {
        let hs = Mat::from_fn(b, b, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
        let e = hs
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| LleError::Linalg(format!("projected eigensolve: {e:?}")))?;
        let s = e.S().column_vector();
        let u = e.U();
        for k in 0..b {
            out.push(Ritz {
                re: s[k],
                im: 0.0,
                coef_re: (0..b).map(|i| u[(i, k)]).collect(),
                coef_im: vec![0.0; b],
            });
        }
    } else {
        let e = h.eigen().map_err(|e| LleError::Linalg(format!("projected eigensolve: {e:?}")))?;
        let s = e.S().column_vector();
        let u = e.U();
        for k in 0..b {
            out.push(Ritz {
                re: s[k].re,
                im: s[k].im,
                coef_re: (0..b).map(|i| u[(i, k)].re).collect(),
                coef_im: (0..b).map(|i| u[(i, k)].im).collect(),
            });
        }
    }
    out.sort_by(|x, y| {
        let dx = (x.re - target).hypot(x.im);
        let dy = (y.re - target).hypot(y.im);
        dx.total_cmp(&dy).then(x.re.total_cmp(&y.re)).then(x.im.total_cmp(&y.im))
    });
    Ok(out)
}

fn combine(q: &Mat<f64>, coef: &[f64]) -> Vec<f64> {
    (0..q.nrows())
        .map(|i| (0..q.ncols()).map(|k| q[(i, k)] * coef[k]).sum())
        .collect()
}

/// Residual norms and real eigenvectors for the leading `m` Ritz pairs.
///
/// `aq` holds the compressed operator applied to `q`. When deflated vectors
/// are present, `raw` holds `A·q`, used to lift Ritz vectors of the
/// compression back to eigenvectors of `A`.
fn finalize(
    q: &Mat<f64>,
    aq: &Mat<f64>,
    pairs: &[Ritz],
    m: usize,
    raw: Option<(&Mat<f64>, &[Vec<f64>])>,
) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut residuals = Vec::with_capacity(m);
    let mut vectors = Vec::with_capacity(m);
    for r in pairs.iter().take(m) {
        let mut vr = combine(q, &r.coef_re);
        let mut vi = combine(q, &r.coef_im);
        let avr = combine(aq, &r.coef_re);
        let avi = combine(aq, &r.coef_im);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..q.nrows() {
            let rr = avr[i] - (r.re * vr[i] - r.im * vi[i]);
            let ri = avi[i] - (r.re * vi[i] + r.im * vr[i]);
            num += rr * rr + ri * ri;
            den += vr[i] * vr[i] + vi[i] * vi[i];
        }
        residuals.push((num / den.max(f64::MIN_POSITIVE)).sqrt());
        if let Some((raw, deflate)) = raw {
            let mag = r.re.hypot(r.im);
            if mag > 0.0 {
                let zr = combine(raw, &r.coef_re);
                let zi = combine(raw, &r.coef_im);
                for u in deflate {
                    let a: f64 = u.iter().zip(&zr).map(|(x, y)| x * y).sum();
                    let b: f64 = u.iter().zip(&zi).map(|(x, y)| x * y).sum();
                    // (a + ib) / (re + i·im)
                    let ar = (a * r.re + b * r.im) / (mag * mag);
                    let ai = (b * r.re - a * r.im) / (mag * mag);
                    for i in 0..vr.len() {
                        vr[i] += ar * u[i];
                        vi[i] += ai * u[i];
                    }
                }
            }
        }
        // Rotate the phase so the largest entry is real, then keep the real part.
        let (mut best, mut arg) = (0.0, 0.0);
        for i in 0..vr.len() {
            let mag = vr[i].hypot(vi[i]);
            if mag > best {
                best = mag;
                arg = vi[i].atan2(vr[i]);
            }
        }
        let (c, s) = (arg.cos(), arg.sin());
        let mut v: Vec<f64> = vr.iter().zip(&vi).map(|(x, y)| c * x + s * y).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        fix_sign(&mut v);
        vectors.push(v);
    }
    (residuals, vectors)
}

fn assemble_result(
    pairs: &[Ritz],
    residuals: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    m: usize,
    tol_abs: f64,
    norm: f64,
    iterations: usize,
    want_vectors: bool,
) -> SpectrumResult {
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&x, &y| pairs[x].re.total_cmp(&pairs[y].re).then(x.cmp(&y)));
    let n = vectors.first().map_or(0, Vec::len);
    let eigenvectors = want_vectors.then(|| Mat::from_fn(n, m, |i, j| vectors[idx[j]][i]));
    SpectrumResult {
        eigenvalues: idx.iter().map(|&k| pairs[k].re).collect(),
        imag_parts: idx.iter().map(|&k| pairs[k].im).collect(),
        eigenvectors,
        residuals: idx.iter().map(|&k| residuals[k]).collect(),
        converged: idx.iter().map(|&k| residuals[k] <= tol_abs).collect(),
        scale: 1.0,
        iterations,
        norm_estimate: norm,
    }
}

fn dense_inf_norm(a: &Mat<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense reference solver: full eigendecomposition, then the `m` eigenvalues
/// of smallest magnitude.
pub fn dense_smallest(a: &Mat<f64>, m: usize, opts: &SolverOptions, symmetric: bool) -> Result<SpectrumResult> {
    let n = a.nrows();
    let norm = dense_inf_norm(a);
    let mut work = a.clone();
    let raw = a.clone();
    if !opts.deflate.is_empty() {
        // Compress onto the complement of the deflated subspace, then push
        // that subspace far up the spectrum.
        let mut p = Mat::<f64>::identity(n, n);
        for u in &opts.deflate {
            for i in 0..n {
                for j in 0..n {
                    p[(i, j)] -= u[i] * u[j];
                }
            }
        }
        work = &p * a * &p;
        let lift = 10.0 * norm + 1.0;
        for u in &opts.deflate {
            for i in 0..n {
                for j in 0..n {
                    work[(i, j)] += lift * u[i] * u[j];
                }
            }
        }
    }
    let q = Mat::<f64>::identity(n, n);
    let pairs = ritz_pairs(&work, symmetric, 0.0)?;
    let lifted = (!opts.deflate.is_empty() && !symmetric).then_some((&raw, opts.deflate.as_slice()));
    let (residuals, vectors) = finalize(&q, &work, &pairs, m, lifted);
    Ok(assemble_result(
        &pairs,
        residuals,
        vectors,
        m,
        opts.tol * norm.max(f64::MIN_POSITIVE),
        norm,
        1,
        opts.want_vectors,
    ))
}

/// Iterations before the shift is moved towards the wanted spectrum.
const RESHIFT_AFTER: usize = 8;

struct SubspaceIteration<'a> {
    a: &'a SparseOperator,
    m: usize,
    block: usize,
    opts: &'a SolverOptions,
    symmetric: bool,
    norm: f64,
}

impl<'a> SubspaceIteration<'a> {
    fn new(a: &'a SparseOperator, m: usize, block: usize, opts: &'a SolverOptions, symmetric: bool) -> Result<Self> {
        Ok(Self {
            a,
            m,
            block,
            opts,
            symmetric,
            norm: a.inf_norm(),
        })
    }

    fn factor(&self, tau: f64) -> Result<faer::sparse::linalg::solvers::Lu<usize, f64>> {
        self.a
            .scale_shift(1.0, tau)
            .to_faer()?
            .sp_lu()
            .map_err(|e| LleError::Linalg(format!("sparse LU: {e:?}")))
    }

    fn run(self) -> Result<SpectrumResult> {
        let n = self.a.dim();
        let norm = self.norm.max(f64::MIN_POSITIVE);
        let tol_abs = self.opts.tol * norm;
        let mut tau = 1e-12 * norm;
        let mut lu = loop {
            match self.factor(tau) {
                Ok(lu) => break lu,
                Err(_) if tau < 1e-3 * norm => tau *= 100.0,
                Err(e) => return Err(e),
            }
        };
        let mut reshifted = false;
        let mut rng = SampleRng::new(self.opts.seed);
        let mut x = Mat::from_fn(n, self.block, |_, _| rng.normal());
        project_out(&mut x, &self.opts.deflate);
        let mut q = x.qr().compute_thin_Q();
        let mut last = None;
        for it in 1..=self.opts.max_iter {
            let mut y = q.clone();
            lu.solve_in_place(&mut y);
            project_out(&mut y, &self.opts.deflate);
            if !(0..y.ncols()).all(|j| (0..n).all(|i| y[(i, j)].is_finite())) {
                return Err(LleError::Linalg("non-finite iterate in shift-invert solve".into()));
            }
            q = y.qr().compute_thin_Q();
            // A second pass keeps Q orthonormal to working precision.
            q = q.qr().compute_thin_Q();
            let raw = apply(self.a, &q);
            let mut aq = raw.clone();
            project_out(&mut aq, &self.opts.deflate);
            let h = q.transpose() * &aq;
            let pairs = ritz_pairs(&h, self.symmetric, -tau)?;
            let lifted = (!self.opts.deflate.is_empty() && !self.symmetric)
                .then_some((&raw, self.opts.deflate.as_slice()));
            let (residuals, vectors) = finalize(&q, &aq, &pairs, self.m, lifted);
            let done = residuals.iter().all(|&r| r <= tol_abs);
            let result = assemble_result(
                &pairs,
                residuals,
                vectors,
                self.m,
                tol_abs,
                self.norm,
                it,
                self.opts.want_vectors,
            );
            if done {
                return Ok(result);
            }
            // A near-singular factorization limits attainable accuracy; once the
            // wanted Ritz values are located, move the shift to half the
            // smallest of them.
            if !reshifted && it >= RESHIFT_AFTER {
                reshifted = true;
                let smallest = pairs[..self.m].iter().map(|r| r.re.hypot(r.im)).fold(f64::INFINITY, f64::min);
                if 0.5 * smallest > 10.0 * tau {
                    if let Ok(f) = self.factor(0.5 * smallest) {
                        lu = f;
                        tau = 0.5 * smallest;
                    }
                }
            }
            last = Some(result);
        }
        Err(LleError::NotConverged {
            partial: Box::new(last.expect("at least one iteration")),
        })
    }
}

/// LLE embedding: eigenvectors `v₂..v_{ℓ+1}` of `(I − W)ᵀ(I − W)`.
#[derive(Debug, Clone)]
pub struct Embedding {
    /// `n × ℓ`, unit columns.
    pub coords: Mat<f64>,
    pub eigenvalues: Vec<f64>,
    pub lle: LleMatrix,
}

pub fn embed(
    cloud: &PointCloud,
    nbrs: &NeighborList,
    config: LleConfig,
    ell: usize,
    opts: &SolverOptions,
) -> Result<Embedding> {
    if ell == 0 {
        return Err(LleError::invalid("target dimension must be >= 1"));
    }
    let lle = assemble_w(cloud, nbrs, config)?;
    let m = embedding_matrix(&lle.w);
    let n = cloud.len();
    let opts = SolverOptions {
        want_vectors: true,
        deflate: vec![vec![1.0 / (n as f64).sqrt(); n]],
        ..opts.clone()
    };
    let spec = smallest_eigs_sym(&m, ell, &opts)?;
    Ok(Embedding {
        coords: spec.eigenvectors.expect("vectors requested"),
        eigenvalues: spec.eigenvalues,
        lle,
    })
}

/// `atan2` of the second and first embedding coordinates.
pub fn recovered_angles(coords: &Mat<f64>) -> Vec<f64> {
    (0..coords.nrows()).map(|i| coords[(i, 1)].atan2(coords[(i, 0)])).collect()
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut s = 0;
    while s < idx.len() {
        let mut e = s + 1;
        while e < idx.len() && x[idx[e]] == x[idx[s]] {
            e += 1;
        }
        let avg = 0.5 * (s + e - 1) as f64 + 1.0;
        for &i in &idx[s..e] {
            r[i] = avg;
        }
        s = e;
    }
    r
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Rank agreement between true angles and recovered circular angles.
///
/// The recovered angles are unwrapped starting at the point with the
/// smallest true angle, in both orientations; the better Spearman
/// correlation is returned.
pub fn circular_spearman(truth: &[f64], recovered: &[f64]) -> f64 {
    let tau = std::f64::consts::TAU;
    let truth: Vec<f64> = truth.iter().map(|t| t.rem_euclid(tau)).collect();
    let anchor = (0..truth.len())
        .min_by(|&a, &b| truth[a].total_cmp(&truth[b]))
        .unwrap_or(0);
    [1.0, -1.0]
        .iter()
        .map(|&s| {
            let unwrapped: Vec<f64> = recovered
                .iter()
                .map(|&phi| (s * (phi - recovered[anchor])).rem_euclid(tau))
                .collect();
            spearman(&truth, &unwrapped)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> SparseOperator {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            t.push((i, (i + 1) % n, -1.0));
            t.push(((i + 1) % n, i, -1.0));
        }
        let mut a = SparseOperator::from_triplets(n, t).unwrap();
        a.symmetric = true;
        a
    }

    #[test]
    fn cycle_laplacian_spectrum() {
        let n = 400;
        let a = path_laplacian(n);
        let opts = SolverOptions {
            want_vectors: true,
            ..Default::default()
        };
        let r = smallest_eigs_sym(&a, 7, &opts).unwrap();
        for (k, &v) in r.eigenvalues.iter().enumerate() {
            let j = (k + 1) / 2;
            let want = 2.0 - 2.0 * (std::f64::consts::TAU * j as f64 / n as f64).cos();
            assert!((v - want).abs() < 1e-9, "k={k}: {v} vs {want}");
        }
        assert!(r.all_converged());
        let v0 = r.eigenvectors.unwrap();
        let c = 1.0 / (n as f64).sqrt();
        assert!((0..n).all(|i| (v0[(i, 0)] - c).abs() < 1e-8));
    }

    #[test]
    fn deflation_removes_constant() {
        let n = 300;
        let a = path_laplacian(n);
        let one = vec![1.0 / (n as f64).sqrt(); n];
        let opts = SolverOptions {
            deflate: vec![one.clone()],
            want_vectors: true,
            ..Default::default()
        };
        let r = smallest_eigs_sym(&a, 2, &opts).unwrap();
        let want = 2.0 - 2.0 * (std::f64::consts::TAU / n as f64).cos();
        assert!((r.eigenvalues[0] - want).abs() < 1e-10);
        let v = r.eigenvectors.unwrap();
        let dot: f64 = (0..n).map(|i| v[(i, 0)] * one[i]).sum();
        assert!(dot.abs() < 1e-10);
    }

    #[test]
    fn nonsymmetric_matches_dense() {
        let n = 200;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0 + 0.01 * i as f64));
            t.push((i, (i + 1) % n, -1.2));
            t.push(((i + 1) % n, i, -0.8));
        }
        let a = SparseOperator::from_triplets(n, t).unwrap();
        let opts = SolverOptions::default();
        let it = smallest_eigs(&a, 6, &opts, false).unwrap();
        let de = dense_smallest(&a.to_dense(), 6, &opts, false).unwrap();
        for (x, y) in it.eigenvalues.iter().zip(&de.eigenvalues) {
            assert!((x - y).abs() < 1e-8 * y.abs().max(1.0), "{x} vs {y}");
        }
    }

    #[test]
    fn generator_null_pair_and_lifted_vectors() {
        // Nonsymmetric random-walk generator with rows summing to zero.
        let n = 300;
        let mut t = Vec::new();
        for i in 0..n {
            let (fwd, back) = (0.6 + 0.2 * (i as f64 * 0.37).sin(), 0.4);
            t.push((i, (i + 1) % n, fwd));
            t.push((i, (i + n - 1) % n, back));
            t.push((i, i, -(fwd + back)));
        }
        let l = SparseOperator::from_triplets(n, t).unwrap();
        let opts = SolverOptions {
            want_vectors: true,
            tol: 1e-13,
            ..Default::default()
        };
        let r = generator_spectrum(&l, 5, &opts).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-12);
        let de = dense_smallest(&l.scale_shift(-1.0, 0.0).to_dense(), 5, &opts, false).unwrap();
        for (x, y) in r.eigenvalues.iter().zip(&de.eigenvalues) {
            assert!((x - y).abs() < 1e-9 * y.abs().max(1e-3), "{x} vs {y}");
        }
        // Vectors of real pairs satisfy −L v = λ v, not only the deflated compression.
        let v = r.eigenvectors.unwrap();
        for k in (0..5).filter(|&k| r.imag_parts[k] == 0.0) {
            let col: Vec<f64> = (0..n).map(|i| v[(i, k)]).collect();
            let lv = l.matvec(&col);
            let res = (0..n).map(|i| (-lv[i] - r.eigenvalues[k] * col[i]).powi(2)).sum::<f64>().sqrt();
            assert!(res < 1e-8, "k={k}: residual {res}");
        }
    }

    #[test]
    fn rejects_too_many() {
        let a = path_laplacian(5);
        assert!(smallest_eigs_sym(&a, 6, &SolverOptions::default()).is_err());
        assert!(smallest_eigs_sym(&a, 0, &SolverOptions::default()).is_err());
    }

    #[test]
    fn not_converged_carries_partial() {
        let a = path_laplacian(2000);
        let opts = SolverOptions {
            max_iter: 1,
            tol: 1e-15,
            ..Default::default()
        };
        match smallest_eigs_sym(&a, 30, &opts) {
            Err(LleError::NotConverged { partial }) => {
                assert_eq!(partial.eigenvalues.len(), 30);
                assert_eq!(partial.iterations, 1);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }
}
