//! Closed-form predictions used as test oracles.

use std::f64::consts::PI;

use crate::error::{LleError, Result};

/// `Γ(k/2)` for a positive integer `k`, exact up to rounding.
pub fn gamma_half(k: usize) -> f64 {
    assert!(k > 0);
    if k % 2 == 0 {
        (1..k / 2).map(|i| i as f64).product()
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x + 1.0 <= k as f64 / 2.0 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Surface measure `|S^{d−1}| = 2π^{d/2} / Γ(d/2)`; `d = 1` gives 2.
pub fn sphere_surface_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

fn half_ceil(k: usize) -> f64 {
    (k / 2) as f64
}

/// `L_k = ⌈(k−1)/2⌉²`, `k = 1..m`.
pub fn circle_lb_spectrum(m: usize) -> Vec<f64> {
    (0..m).map(|k| half_ceil(k + 1).powi(2)).collect()
}

/// `L̄_k = ⌈(k−1)/2⌉⁴ − ⌈(k−1)/2⌉²`, `k = 1..m`.
pub fn circle_fourth_order_spectrum(m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let j = half_ceil(k + 1);
            j.powi(4) - j.powi(2)
        })
        .collect()
}

/// `i(i+1)/r²` with multiplicity `2i+1`, first `m` values.
pub fn sphere2_spectrum(m: usize, radius: f64) -> Result<Vec<f64>> {
    if !(radius > 0.0) {
        return Err(LleError::invalid("radius must be positive"));
    }
    let mut out = Vec::with_capacity(m);
    let mut i = 0usize;
    while out.len() < m {
        let v = (i * (i + 1)) as f64 / (radius * radius);
        for _ in 0..(2 * i + 1) {
            if out.len() < m {
                out.push(v);
            }
        }
        i += 1;
    }
    Ok(out)
}

/// ε⁴ coefficients of `Σ∂⁴_i f`, `Σ_{i≠j}∂²_i∂²_j f` and `Σ∂²_i f` for a unit
/// sphere in `R^p` at large regularization order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rho8Coeffs {
    pub a4: f64,
    pub a22: f64,
    pub a2: f64,
}

pub fn p_sphere_rho8_coeffs(p: usize) -> Result<Rho8Coeffs> {
    if p < 2 {
        return Err(LleError::invalid("ambient dimension must be >= 2"));
    }
    let p = p as f64;
    let den = (p + 3.0) * (p + 5.0);
    Ok(Rho8Coeffs {
        a4: -(p - 1.0) / (8.0 * den),
        a22: -(p - 1.0) / (24.0 * den),
        a2: -(p + 1.0) / (24.0 * den),
    })
}

/// `1 / (|a4|·ε⁴)`: rescales `W − I` to the fourth-order operator on the circle.
pub fn circle_fourth_order_scale(eps: f64) -> f64 {
    let c = p_sphere_rho8_coeffs(2).expect("p = 2 is valid");
    1.0 / (c.a4.abs() * eps.powi(4))
}

/// Case-0 ε² bias coefficient
/// `(1/(d+2))[Δf/2 + ∇f·∇P/P − ∇f·∇P/(P + d(d+2)ε^{ρ−2}/|S^{d−1}|)]`.
pub fn bias_coeff_case0(rho: f64, eps: f64, d: usize, density: f64, grad_p_dot_grad_f: f64, laplacian_f: f64) -> Result<f64> {
    if !(density > 0.0) || !(eps > 0.0) || d == 0 {
        return Err(LleError::invalid("need P > 0, ε > 0, d >= 1"));
    }
    let df = d as f64;
    let damped = density + df * (df + 2.0) * eps.powf(rho - 2.0) / sphere_surface_area(d);
    Ok((0.5 * laplacian_f + grad_p_dot_grad_f / density - grad_p_dot_grad_f / damped) / (df + 2.0))
}

/// One normal direction `e_i` in the case-1 expansion: `𝔑₀·e_i`, `𝔥_f·e_i`
/// and the normal covariance eigenvalue `λ^{(2)}_i`.
#[derive(Debug, Clone, Copy)]
struct NormalTerm {
    n0: f64,
    hf: f64,
    lambda2: f64,
}

/// `C₁ + C₂` of the case-1 expansion with `κ = 2(d+2)ε^{ρ−4}/(P|S^{d−1}|)`
/// (`κ = 0` is the ρ > 4 limit). Assumes `∇P = 0` at the point.
fn case1_bias(d: usize, laplacian_f: f64, terms: &[NormalTerm], kappa: f64) -> f64 {
    let df = d as f64;
    let mut s = 0.0;
    let mut sh = 0.0;
    for t in terms {
        let den = 2.0 / df * t.lambda2 + kappa;
        s += t.n0 * t.n0 / den;
        sh += t.n0 * t.hf / den;
    }
    let c1 = laplacian_f / (2.0 * (df + 2.0)) / (1.0 - df / (2.0 * (df + 2.0)) * s);
    let c2 = -(sh / (4.0 * (df + 4.0))) / (1.0 / df - s / (2.0 * (df + 2.0)));
    c1 + c2
}

fn kappa(rho: f64, eps: f64, d: usize, density: f64) -> f64 {
    if rho == f64::INFINITY {
        0.0
    } else {
        2.0 * (d as f64 + 2.0) * eps.powf(rho - 4.0) / (density * sphere_surface_area(d))
    }
}

/// ε² bias coefficient of `Σw f − f` on a radius-`r` sphere `S^d ⊂ R^{d+1}`
/// under uniform sampling, at finite ε.
pub fn sphere_bias_coeff(d: usize, radius: f64, laplacian_f: f64, rho: f64, eps: f64) -> Result<f64> {
    if d == 0 || !(radius > 0.0) || !(eps > 0.0) {
        return Err(LleError::invalid("need d >= 1, r > 0, ε > 0"));
    }
    let df = d as f64;
    let density = 1.0 / (sphere_surface_area(d + 1) * radius.powi(d as i32));
    let term = NormalTerm {
        n0: 1.0 / radius,
        hf: laplacian_f / (df * radius),
        lambda2: df * (df + 2.0) / (4.0 * (df + 4.0) * radius * radius),
    };
    Ok(case1_bias(d, laplacian_f, &[term], kappa(rho, eps, d, density)))
}

/// The two analytic test points on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusPoint {
    /// `(0, 0, −3/2)`, on the outer equator.
    OuterBottom,
    /// `(0, 0, −1/2)`, on the inner equator.
    InnerBottom,
}

impl TorusPoint {
    pub fn location(self) -> [f64; 3] {
        match self {
            TorusPoint::OuterBottom => [0.0, 0.0, -1.5],
            TorusPoint::InnerBottom => [0.0, 0.0, -0.5],
        }
    }

    /// Tube angle `v` of the point (`x = sin(v)/2`, ring radius `1 + cos(v)/2`).
    pub fn tube_angle(self) -> f64 {
        match self {
            TorusPoint::OuterBottom => 0.0,
            TorusPoint::InnerBottom => PI,
        }
    }
}

/// Asymptotic regime of the regularization order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `ρ = 3`: the ε² term is `Δf / (2(d+2))`.
    LaplaceBeltrami,
    /// `ρ > 4` with `ε^{ρ−4} → 0`: curvature controls the ε² term.
    CurvatureDominated,
}

/// ε² coefficients of `∂²_x f` and `∂²_y f` (second derivatives along the
/// tangent directions `e₁`, `e₂`) in `Σw f − f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusCoeffs {
    pub dxx: f64,
    pub dyy: f64,
}

impl TorusCoeffs {
    pub fn apply(&self, fxx: f64, fyy: f64) -> f64 {
        self.dxx * fxx + self.dyy * fyy
    }
}

fn torus_terms(point: TorusPoint, fxx: f64, fyy: f64) -> Vec<NormalTerm> {
    match point {
        // II(θ,θ) = (2x² + 2y²/3)e₃
        TorusPoint::OuterBottom => vec![NormalTerm {
            n0: 4.0 / 3.0,
            hf: 5.0 / 6.0 * fxx + 0.5 * fyy,
            lambda2: 2.0 / 3.0,
        }],
        // II(θ,θ) = (−2x² + 2y²)e₃ averages to zero.
        TorusPoint::InnerBottom => Vec::new(),
    }
}

fn torus_coeffs_with_kappa(point: TorusPoint, kappa: f64) -> TorusCoeffs {
    let eval = |fxx: f64, fyy: f64| case1_bias(2, fxx + fyy, &torus_terms(point, fxx, fyy), kappa);
    TorusCoeffs {
        dxx: eval(1.0, 0.0),
        dyy: eval(0.0, 1.0),
    }
}

pub fn torus_pointwise_coeffs(point: TorusPoint, regime: Regime) -> TorusCoeffs {
    match regime {
        Regime::LaplaceBeltrami => TorusCoeffs { dxx: 0.125, dyy: 0.125 },
        Regime::CurvatureDominated => torus_coeffs_with_kappa(point, 0.0),
    }
}

/// Finite-ε coefficients, for a sampling density `P` at the point.
pub fn torus_pointwise_coeffs_at(point: TorusPoint, rho: f64, eps: f64, density: f64) -> Result<TorusCoeffs> {
    if !(eps > 0.0) || !(density > 0.0) || rho.is_nan() {
        return Err(LleError::invalid("need ε > 0, P > 0 and a real ρ"));
    }
    Ok(torus_coeffs_with_kappa(point, kappa(rho, eps, 2, density)))
}

/// Area density of the uniform-angle torus sampler at tube angle `v`:
/// `1 / (2π² (1 + cos(v)/2))`.
pub fn torus_sampler_density(v: f64) -> f64 {
    1.0 / (2.0 * PI * PI * (1.0 + 0.5 * v.cos()))
}

/// Leading-order KNN radius `(d/|S^{d−1}|)^{1/d} (K/(nP))^{1/d}`.
pub fn knn_radius(k: usize, n: usize, density: f64, d: usize) -> Result<f64> {
    if k == 0 || k >= n || !(density > 0.0) || d == 0 {
        return Err(LleError::invalid("need 1 <= K < n, P > 0, d >= 1"));
    }
    let df = d as f64;
    Ok((df / sphere_surface_area(d)).powf(1.0 / df) * (k as f64 / (n as f64 * density)).powf(1.0 / df))
}

/// Leading-order top eigenvalue of the local covariance `(1/n)GGᵀ` under
/// density `P`: `|S^{d−1}| P ε^{d+2} / (d(d+2))`.
pub fn covariance_leading_eigenvalue(d: usize, density: f64, eps: f64) -> f64 {
    let df = d as f64;
    sphere_surface_area(d) * density * eps.powf(df + 2.0) / (df * (df + 2.0))
}

/// A named list of predicted values.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryPrediction {
    pub label: String,
    pub values: Vec<f64>,
}

/// Spectral predictions by name: `circle-lb`, `circle-fourth-order`, `sphere2`.
pub fn spectrum_prediction(name: &str, m: usize, radius: f64) -> Result<TheoryPrediction> {
    if m == 0 {
        return Err(LleError::invalid("m must be >= 1"));
    }
    let values = match name {
        "circle-lb" => circle_lb_spectrum(m),
        "circle-fourth-order" => circle_fourth_order_spectrum(m),
        "sphere2" => sphere2_spectrum(m, radius)?,
        other => return Err(LleError::invalid(format!("unknown prediction '{other}'"))),
    };
    Ok(TheoryPrediction {
        label: name.to_string(),
        values,
    })
}
