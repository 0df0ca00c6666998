//! Angular quadrature on `S^{N-1}` with normalized surface measure.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use crate::math::{composite_gauss, gauss_legendre, ln_beta};
#[allow(unused_imports)]
use crate::float::Real;

/// A point set on the unit sphere with weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularRule {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl AngularRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Mean of `f` over the sphere.
    pub fn mean<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Product rule on `S^{dim-1}`: `n` Gauss points per polar angle and `2n`
/// equispaced azimuths.
pub fn sphere_rule(dim: usize, n: usize) -> AngularRule {
    assert!(dim >= 1 && n >= 1);
    match dim {
        1 => AngularRule { dim, points: alloc::vec![alloc::vec![1.0], alloc::vec![-1.0]], weights: alloc::vec![0.5, 0.5] },
        2 => {
            let m = 2 * n;
            let points = (0..m)
                .map(|k| {
                    let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
                    alloc::vec![phi.cos(), phi.sin()]
                })
                .collect();
            AngularRule { dim, points, weights: alloc::vec![1.0 / m as f64; m] }
        }
        _ => {
            // x_0 = cos θ, rest = sin θ · ω', density ∝ sin^{dim-2} θ.
            let inner = sphere_rule(dim - 1, n);
            let (th, tw) = composite_gauss(0.0, PI, 2, n);
            let dens: Vec<f64> = th.iter().zip(&tw).map(|(t, w)| w * t.sin().powi(dim as i32 - 2)).collect();
            let total: f64 = dens.iter().sum();
            let mut points = Vec::with_capacity(th.len() * inner.len());
            let mut weights = Vec::with_capacity(th.len() * inner.len());
            for (t, d) in th.iter().zip(&dens) {
                let (s, c) = t.sin_cos();
                for (q, w) in inner.points.iter().zip(&inner.weights) {
                    let mut x = Vec::with_capacity(dim);
                    x.push(c);
                    x.extend(q.iter().map(|v| s * v));
                    points.push(x);
                    weights.push(d / total * w);
                }
            }
            AngularRule { dim, points, weights }
        }
    }
}

/// Rule on `S^{N-1} ⊂ R^k × R^{N-k}` written as `ω = (sin ψ η, cos ψ ζ)`,
/// with the polar variable graded so that integrands carrying the factor
/// `|ω'|^{-beta} = sin^{-beta} ψ` are resolved (`beta < k`).
pub fn split_rule(dim: usize, k: usize, beta: f64, n: usize) -> AngularRule {
    assert!(k >= 1 && k < dim && beta < k as f64);
    let first = sphere_rule(k, n);
    let second = sphere_rule(dim - k, n);
    // ψ = (π/2) x^q with q = 1/(k - beta): sin^{k-1-beta}ψ dψ ~ dx near 0.
    let q = 1.0 / (k as f64 - beta);
    let (xs, xw) = composite_gauss(0.0, 1.0, 4, n);
    let norm = 0.5 * ln_beta(0.5 * k as f64, 0.5 * (dim - k) as f64).exp();
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (x, w) in xs.iter().zip(&xw) {
        let psi = FRAC_PI_2 * x.powf(q);
        let jac = FRAC_PI_2 * q * x.powf(q - 1.0);
        let (s, c) = psi.sin_cos();
        let dens = w * jac * s.powi(k as i32 - 1) * c.powi((dim - k) as i32 - 1) / norm;
        for (a, wa) in first.points.iter().zip(&first.weights) {
            for (b, wb) in second.points.iter().zip(&second.weights) {
                let mut pt = Vec::with_capacity(dim);
                pt.extend(a.iter().map(|v| s * v));
                pt.extend(b.iter().map(|v| c * v));
                points.push(pt);
                weights.push(dens * wa * wb);
            }
        }
    }
    AngularRule { dim, points, weights }
}

/// Nodes and weights for `μ = ω·e` under the normalized surface measure,
/// written as `μ = cos θ` with Gauss points in `θ`.
pub fn axial_rule(dim: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (th, tw) = composite_gauss(0.0, PI, 4, n);
    let dens: Vec<f64> = th.iter().zip(&tw).map(|(t, w)| w * t.sin().powi(dim as i32 - 2)).collect();
    let total: f64 = dens.iter().sum();
    (th.iter().map(|t| t.cos()).collect(), dens.iter().map(|d| d / total).collect())
}

/// Fraction of the sphere `|x| = s` lying inside the ball `B_R(c)`, `|c| = d`.
pub fn cap_fraction(dim: usize, s: f64, d: f64, radius: f64) -> f64 {
    if d == 0.0 {
        return if s < radius { 1.0 } else { 0.0 };
    }
    if s + d <= radius {
        return 1.0;
    }
    if s <= d - radius || s >= d + radius {
        return 0.0;
    }
    let mu0 = ((s * s + d * d - radius * radius) / (2.0 * s * d)).clamp(-1.0, 1.0);
    polar_fraction(dim, mu0.acos())
}

/// `∫_0^θ sin^{N-2} / ∫_0^π sin^{N-2}`.
fn polar_fraction(dim: usize, theta: f64) -> f64 {
    if dim == 3 {
        return 0.5 * (1.0 - theta.cos());
    }
    let (x, w) = gauss_legendre(48);
    let part: f64 = x
        .iter()
        .zip(&w)
        .map(|(x, w)| {
            let t = 0.5 * theta * (x + 1.0);
            0.5 * theta * w * t.sin().powi(dim as i32 - 2)
        })
        .sum();
    let total = ln_beta(0.5 * (dim - 1) as f64, 0.5).exp();
    part / total
}
