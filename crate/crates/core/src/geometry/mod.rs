//! Benchmark point clouds: circles, spheres, tori, the flat 1-torus and the
//! random-projection tomography curve.

mod phantom;

use std::f64::consts::TAU;

pub use phantom::{radon_ellipse, shepp_logan, Ellipse, PhantomSpec, SHEPP_LOGAN_TABLE_VERSION};

use crate::error::{LleError, Result};
use crate::rng::SampleRng;

/// Distance model for a cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    AmbientEuclidean,
    /// One coordinate on a circle of the given circumference.
    Periodic1d { period: f64 },
}

/// Which generator produced a cloud.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    Circle,
    Sphere,
    Torus,
    FlatTorus,
    SheppLogan,
    External,
}

impl Sampler {
    pub fn name(self) -> &'static str {
        match self {
            Sampler::Circle => "circle",
            Sampler::Sphere => "sphere",
            Sampler::Torus => "torus",
            Sampler::FlatTorus => "flat-torus",
            Sampler::SheppLogan => "shepp-logan",
            Sampler::External => "external",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircleMode {
    /// `θ_i = 2πi/n`.
    Uniform,
    /// `θ_i = 2πU_i + 0.3 sin(2πi/n)`.
    Nonuniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereMode {
    Uniform,
    /// One tenth of the points get `z ← z + 1 − cos(2πU)` and are projected back.
    Perturbed,
}

/// `n` samples in `R^p` together with how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<f64>,
    n: usize,
    p: usize,
    intrinsic_dim: usize,
    metric: Metric,
    /// Row-major `n × param_dim` intrinsic coordinates (empty when unknown).
    params: Vec<f64>,
    param_dim: usize,
    pub sampler: Sampler,
    pub seed: Option<u64>,
}

impl PointCloud {
    /// Wraps a row-major `n × p` buffer.
    pub fn new(points: Vec<f64>, p: usize, intrinsic_dim: usize, metric: Metric) -> Result<Self> {
        if p == 0 || points.is_empty() || points.len() % p != 0 {
            return Err(LleError::invalid("point buffer must be a nonempty n×p matrix"));
        }
        if intrinsic_dim == 0 || intrinsic_dim > p {
            return Err(LleError::invalid(format!(
                "intrinsic dimension {intrinsic_dim} must lie in 1..={p}"
            )));
        }
        if let Some(bad) = points.iter().position(|v| !v.is_finite()) {
            return Err(LleError::invalid(format!("non-finite coordinate in row {}", bad / p)));
        }
        if let Metric::Periodic1d { period } = metric {
            if p != 1 || !(period > 0.0) {
                return Err(LleError::invalid("periodic metric needs p = 1 and a positive period"));
            }
        }
        let n = points.len() / p;
        Ok(Self {
            points,
            n,
            p,
            intrinsic_dim,
            metric,
            params: Vec::new(),
            param_dim: 0,
            sampler: Sampler::External,
            seed: None,
        })
    }

    pub fn with_params(mut self, params: Vec<f64>, param_dim: usize) -> Result<Self> {
        if param_dim == 0 || params.len() != self.n * param_dim {
            return Err(LleError::invalid("parameter buffer must be n × param_dim"));
        }
        self.params = params;
        self.param_dim = param_dim;
        Ok(self)
    }

    fn tagged(mut self, sampler: Sampler, seed: Option<u64>) -> Self {
        self.sampler = sampler;
        self.seed = seed;
        self
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn ambient_dim(&self) -> usize {
        self.p
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    /// Intrinsic coordinates of point `i`, if the sampler recorded them.
    pub fn params(&self, i: usize) -> Option<&[f64]> {
        (self.param_dim > 0).then(|| &self.params[i * self.param_dim..(i + 1) * self.param_dim])
    }

    /// `out ← z_j − z_i` under the cloud metric.
    pub fn displacement_into(&self, i: usize, j: usize, out: &mut [f64]) {
        let (a, b) = (self.point(i), self.point(j));
        for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
            *o = y - x;
        }
        if let Metric::Periodic1d { period } = self.metric {
            out[0] = wrap_difference(out[0], period);
        }
    }

    pub fn distance_sq(&self, i: usize, j: usize) -> f64 {
        self.distance_sq_to(i, self.point(j))
    }

    /// Squared distance between point `i` and an arbitrary location.
    pub fn distance_sq_to(&self, i: usize, target: &[f64]) -> f64 {
        match self.metric {
            Metric::AmbientEuclidean => self
                .point(i)
                .iter()
                .zip(target)
                .map(|(a, b)| (a - b) * (a - b))
                .sum(),
            Metric::Periodic1d { period } => wrap_difference(target[0] - self.point(i)[0], period).powi(2),
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.distance_sq(i, j).sqrt()
    }

    /// Uniformly scales every coordinate (e.g. unit sphere to radius `r`).
    pub fn scaled(mut self, factor: f64) -> Self {
        for v in &mut self.points {
            *v *= factor;
        }
        if let Metric::Periodic1d { period } = &mut self.metric {
            *period *= factor;
        }
        self
    }
}

/// Representative of `delta` in `[-period/2, period/2)`.
pub fn wrap_difference(delta: f64, period: f64) -> f64 {
    delta - period * (delta / period + 0.5).floor()
}

pub fn sample_circle(n: usize, mode: CircleMode, seed: u64) -> Result<PointCloud> {
    if n < 3 {
        return Err(LleError::invalid("circle sampler needs n >= 3"));
    }
    let mut rng = SampleRng::new(seed);
    let thetas: Vec<f64> = (1..=n)
        .map(|i| {
            let grid = TAU * i as f64 / n as f64;
            match mode {
                CircleMode::Uniform => grid,
                CircleMode::Nonuniform => TAU * rng.uniform() + 0.3 * grid.sin(),
            }
        })
        .collect();
    let points = thetas.iter().flat_map(|t| [t.cos(), t.sin()]).collect();
    let seed = (mode == CircleMode::Nonuniform).then_some(seed);
    Ok(PointCloud::new(points, 2, 1, Metric::AmbientEuclidean)?
        .with_params(thetas, 1)?
        .tagged(Sampler::Circle, seed))
}

pub fn sample_sphere(n: usize, radius: f64, mode: SphereMode, seed: u64) -> Result<PointCloud> {
    if n < 4 {
        return Err(LleError::invalid("sphere sampler needs n >= 4"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(LleError::invalid("sphere radius must be positive"));
    }
    let mut rng = SampleRng::new(seed);
    // Archimedes: z uniform in [-1, 1], longitude uniform.
    let mut unit: Vec<[f64; 3]> = (0..n)
        .map(|_| {
            let z = 2.0 * rng.uniform() - 1.0;
            let phi = TAU * rng.uniform();
            let rho = (1.0 - z * z).max(0.0).sqrt();
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect();
    if mode == SphereMode::Perturbed {
        for i in rng.choose_distinct(n, n / 10) {
            let bump = 1.0 - (TAU * rng.uniform()).cos();
            let [x, y, z] = unit[i];
            let z = z + bump;
            let norm = (x * x + y * y + z * z).sqrt();
            unit[i] = [x / norm, y / norm, z / norm];
        }
    }
    let mut params = Vec::with_capacity(2 * n);
    let mut points = Vec::with_capacity(3 * n);
    for [x, y, z] in unit {
        let norm = (x * x + y * y + z * z).sqrt();
        let (x, y, z) = (x / norm, y / norm, z / norm);
        params.push(z.clamp(-1.0, 1.0).acos());
        params.push(y.atan2(x));
        points.extend([radius * x, radius * y, radius * z]);
    }
    Ok(PointCloud::new(points, 3, 2, Metric::AmbientEuclidean)?
        .with_params(params, 2)?
        .tagged(Sampler::Sphere, Some(seed)))
}

/// Torus `(1 − √(y² + z²))² + x² = 1/4`: tube of radius 1/2 around the unit
/// circle in the `yz`-plane. Angles are drawn uniformly, so the area density
/// is not uniform (denser on the inner side).
pub fn sample_torus(n: usize, seed: u64) -> Result<PointCloud> {
    if n < 4 {
        return Err(LleError::invalid("torus sampler needs n >= 4"));
    }
    let mut rng = SampleRng::new(seed);
    let mut points = Vec::with_capacity(3 * n);
    let mut params = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let around = TAU * rng.uniform();
        let tube = TAU * rng.uniform();
        let ring = 1.0 + 0.5 * tube.cos();
        points.extend([0.5 * tube.sin(), ring * around.cos(), ring * around.sin()]);
        params.extend([around, tube]);
    }
    Ok(PointCloud::new(points, 3, 2, Metric::AmbientEuclidean)?
        .with_params(params, 2)?
        .tagged(Sampler::Torus, Some(seed)))
}

/// Level-set residual `(1 − √(y² + z²))² + x² − 1/4` of a torus point.
pub fn torus_residual(point: &[f64]) -> f64 {
    let (x, y, z) = (point[0], point[1], point[2]);
    (1.0 - (z * z + y * y).sqrt()).powi(2) + x * x - 0.25
}

/// Grid `θ_i = 2πi/n` on the flat 1-torus, stored intrinsically with a
/// wrap-around metric of period 2π.
pub fn sample_flat_torus(n: usize) -> Result<PointCloud> {
    if n < 3 {
        return Err(LleError::invalid("flat torus needs n >= 3"));
    }
    let thetas: Vec<f64> = (1..=n).map(|i| TAU * i as f64 / n as f64).collect();
    Ok(PointCloud::new(thetas.clone(), 1, 1, Metric::Periodic1d { period: TAU })?
        .with_params(thetas, 1)?
        .tagged(Sampler::FlatTorus, None))
}

/// Detector offsets `s_j = −1 + 2(j − 1)/(p − 1)`, `j = 1..p`.
pub fn detector_grid(p: usize) -> Vec<f64> {
    (0..p).map(|j| -1.0 + 2.0 * j as f64 / (p - 1) as f64).collect()
}

/// Projection vector `(R_θ f(s_1), …, R_θ f(s_p))`.
pub fn projection(spec: &PhantomSpec, theta: f64, offsets: &[f64]) -> Vec<f64> {
    offsets.iter().map(|&s| radon_ellipse(spec, theta, s)).collect()
}

/// Random-projection tomography curve: rows are discretized Radon
/// projections of the Shepp–Logan phantom at `θ_i = 2πi/n`.
pub fn shepp_logan_dataset(n: usize, p: usize) -> Result<PointCloud> {
    if n < 8 || p < 2 {
        return Err(LleError::invalid("tomography dataset needs n >= 8 and p >= 2"));
    }
    let spec = shepp_logan();
    let offsets = detector_grid(p);
    let thetas: Vec<f64> = (1..=n).map(|i| TAU * i as f64 / n as f64).collect();
    let points = thetas.iter().flat_map(|&t| projection(&spec, t, &offsets)).collect();
    Ok(PointCloud::new(points, p, 1, Metric::AmbientEuclidean)?
        .with_params(thetas, 1)?
        .tagged(Sampler::SheppLogan, None))
}

/// Intrinsic angle of each point for circle-like clouds (circle, flat torus,
/// tomography curve).
pub fn circle_angles(cloud: &PointCloud) -> Option<Vec<f64>> {
    (cloud.param_dim() == 1).then(|| (0..cloud.len()).map(|i| cloud.params(i).unwrap()[0]).collect())
}
