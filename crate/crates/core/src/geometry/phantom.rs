//! Ellipse phantoms and their exact parallel-beam Radon transform.

/// One ellipse of an additive phantom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: (f64, f64),
    /// Semi-axes `(a, b)`; `a` lies along the rotated x-axis.
    pub semi_axes: (f64, f64),
    /// Counter-clockwise rotation in radians.
    pub rotation: f64,
    /// Additive intensity inside the ellipse.
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub ellipses: Vec<Ellipse>,
}

/// Version tag of [`shepp_logan`]. Bump whenever the table changes.
pub const SHEPP_LOGAN_TABLE_VERSION: &str = "shepp-logan-modified/v2";

/// Shepp–Logan head phantom, 10 ellipses, with the contrast-enhanced
/// intensities of the modified variant (the default of common toolkits).
///
/// Columns: center x, center y, semi-axis a, semi-axis b, rotation (degrees),
/// intensity.
const SHEPP_LOGAN_TABLE: [[f64; 6]; 10] = [
    [0.0, 0.0, 0.69, 0.92, 0.0, 1.0],
    [0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8],
    [0.22, 0.0, 0.11, 0.31, -18.0, -0.2],
    [-0.22, 0.0, 0.16, 0.41, 18.0, -0.2],
    [0.0, 0.35, 0.21, 0.25, 0.0, 0.1],
    [0.0, 0.1, 0.046, 0.046, 0.0, 0.1],
    [0.0, -0.1, 0.046, 0.046, 0.0, 0.1],
    [-0.08, -0.605, 0.046, 0.023, 0.0, 0.1],
    [0.0, -0.606, 0.023, 0.023, 0.0, 0.1],
    [0.06, -0.605, 0.023, 0.046, 0.0, 0.1],
];

pub fn shepp_logan() -> PhantomSpec {
    PhantomSpec {
        ellipses: SHEPP_LOGAN_TABLE
            .iter()
            .map(|r| Ellipse {
                center: (r[0], r[1]),
                semi_axes: (r[2], r[3]),
                rotation: r[4].to_radians(),
                intensity: r[5],
            })
            .collect(),
    }
}

impl Ellipse {
    /// Whether the ellipse lies inside the closed unit disk.
    pub fn inside_unit_disk(&self) -> bool {
        // Support function in every direction bounds the farthest point.
        (0..3600).all(|i| {
            let t = i as f64 * std::f64::consts::TAU / 3600.0;
            let (c, s) = (t.cos(), t.sin());
            let along = c * self.center.0 + s * self.center.1;
            along + self.support_half_width(t) <= 1.0 + 1e-12
        })
    }

    /// Half-width `a'` of the ellipse's projection onto direction `theta`.
    fn support_half_width(&self, theta: f64) -> f64 {
        let (a, b) = self.semi_axes;
        let d = theta - self.rotation;
        (a * a * d.cos().powi(2) + b * b * d.sin().powi(2)).sqrt()
    }

    /// Line integral over `{x : x·(cos θ, sin θ) = s}`.
    pub fn radon(&self, theta: f64, s: f64) -> f64 {
        let (a, b) = self.semi_axes;
        let shifted = s - (self.center.0 * theta.cos() + self.center.1 * theta.sin());
        let half = self.support_half_width(theta);
        let a2 = half * half;
        let gap = a2 - shifted * shifted;
        if gap <= 0.0 {
            return 0.0;
        }
        2.0 * self.intensity * a * b * gap.sqrt() / a2
    }

    /// Point evaluation of the indicator times intensity.
    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let (c, s) = (self.rotation.cos(), self.rotation.sin());
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        let (a, b) = self.semi_axes;
        if (u / a).powi(2) + (v / b).powi(2) <= 1.0 {
            self.intensity
        } else {
            0.0
        }
    }
}

impl PhantomSpec {
    pub fn inside_unit_disk(&self) -> bool {
        self.ellipses.iter().all(Ellipse::inside_unit_disk)
    }

    pub fn value_at(&self, x: f64, y: f64) -> f64 {
        self.ellipses.iter().map(|e| e.value_at(x, y)).sum()
    }
}

/// Exact Radon transform `R_θ f(s)` of an ellipse phantom.
pub fn radon_ellipse(spec: &PhantomSpec, theta: f64, s: f64) -> f64 {
    spec.ellipses.iter().map(|e| e.radon(theta, s)).sum()
}
