//! Weights `g` as symbolic families.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{param_err, Result};
use crate::grid::{GridFunction, RadialGrid, WeightProfile};
use crate::math::{composite_gauss, ln_beta, unit_ball_volume};
use crate::params::critical_exponent;
use crate::sphere::{split_rule, AngularRule};
#[allow(unused_imports)]
use crate::float::Real;

/// Origin-centered cutoff region.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Region {
    Ball(f64),
    /// The cube `[-h, h]^N`.
    Cube(f64),
}

impl Region {
    pub fn contains(&self, x: &[f64]) -> bool {
        match *self {
            Region::Ball(r) => x.iter().map(|v| v * v).sum::<f64>() < r * r,
            Region::Cube(h) => x.iter().all(|v| v.abs() <= h),
        }
    }

    /// Radius of the largest centered ball inside the region.
    pub fn inradius(&self) -> f64 {
        match *self {
            Region::Ball(r) | Region::Cube(r) => r,
        }
    }

    pub fn circumradius(&self, dim: usize) -> f64 {
        match *self {
            Region::Ball(r) => r,
            Region::Cube(h) => h * (dim as f64).sqrt(),
        }
    }
}

/// A non-negative weight `g` on `R^N`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// `|x|^{-alpha}`.
    Power { alpha: f64 },
    /// `|x'|^{-beta}` for `x = (x', x'') ∈ R^split × R^{N-split}`.
    CylindricalPower { beta: f64, split: usize },
    /// `inner · χ_region`.
    Truncated { inner: Box<WeightSpec>, region: Region },
    /// `factor · inner`.
    Scaled { factor: f64, inner: Box<WeightSpec> },
    /// A radial weight sampled on a grid.
    Tabulated(GridFunction),
}

impl WeightSpec {
    /// `|x|^{-(N - (r/p)(N-p))}`.
    pub fn g1(dim: usize, p: f64, r: f64) -> Self {
        let n = dim as f64;
        WeightSpec::Power { alpha: n - r / p * (n - p) }
    }

    /// `|x'|^{-N(p*-r)/p*}` on `R^2 × R^{N-2}`.
    pub fn g2(dim: usize, p: f64, r: f64) -> Self {
        let ps = critical_exponent(dim, p);
        WeightSpec::CylindricalPower { beta: dim as f64 * (ps - r) / ps, split: 2 }
    }

    /// `g2` restricted to the cube `[-1, 1]^N`.
    pub fn g2_truncated(dim: usize, p: f64, r: f64) -> Self {
        WeightSpec::Truncated { inner: Box::new(Self::g2(dim, p, r)), region: Region::Cube(1.0) }
    }

    pub fn truncated(self, region: Region) -> Self {
        WeightSpec::Truncated { inner: Box::new(self), region }
    }

    pub fn scaled(self, factor: f64) -> Self {
        WeightSpec::Scaled { factor, inner: Box::new(self) }
    }

    pub fn zero() -> Self {
        WeightSpec::Power { alpha: 0.0 }.scaled(0.0)
    }

    pub fn label(&self) -> String {
        match self {
            WeightSpec::Power { alpha } => alloc::format!("|x|^-{alpha}"),
            WeightSpec::CylindricalPower { beta, split } => alloc::format!("|x'|^-{beta} (split {split})"),
            WeightSpec::Truncated { inner, region } => match region {
                Region::Ball(r) => alloc::format!("{} on B_{r}", inner.label()),
                Region::Cube(h) => alloc::format!("{} on [-{h},{h}]^N", inner.label()),
            },
            WeightSpec::Scaled { factor, inner } => alloc::format!("{factor}*{}", inner.label()),
            WeightSpec::Tabulated(_) => String::from("tabulated"),
        }
    }

    /// Checks non-negativity and local integrability in `R^dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let n = dim as f64;
        match self {
            WeightSpec::Power { alpha } => {
                if !(*alpha < n) {
                    return Err(param_err!("|x|^-{alpha} is not locally integrable in R^{dim} (need alpha < {n})"));
                }
            }
            WeightSpec::CylindricalPower { beta, split } => {
                if *split == 0 || *split >= dim {
                    return Err(param_err!("cylindrical split {split} must lie in 1..{dim}"));
                }
                if !(*beta < *split as f64) {
                    return Err(param_err!(
                        "|x'|^-{beta} is not locally integrable for x' in R^{split} (need beta < {split})"
                    ));
                }
            }
            WeightSpec::Truncated { inner, region } => {
                if !(region.inradius() > 0.0) {
                    return Err(param_err!("cutoff region must have positive size"));
                }
                inner.validate(dim)?;
            }
            WeightSpec::Scaled { factor, inner } => {
                if !(*factor >= 0.0 && factor.is_finite()) {
                    return Err(param_err!("weight factor {factor} must be finite and non-negative"));
                }
                inner.validate(dim)?;
            }
            WeightSpec::Tabulated(f) => {
                if f.dim() != dim {
                    return Err(param_err!("tabulated weight lives in R^{}, not R^{dim}", f.dim()));
                }
                if f.values().iter().any(|v| *v < 0.0) {
                    return Err(param_err!("tabulated weight has negative samples"));
                }
            }
        }
        Ok(())
    }

    pub fn is_radial(&self) -> bool {
        match self {
            WeightSpec::Power { .. } | WeightSpec::Tabulated(_) => true,
            WeightSpec::CylindricalPower { .. } => false,
            WeightSpec::Truncated { inner, region } => inner.is_radial() && matches!(region, Region::Ball(_)),
            WeightSpec::Scaled { inner, .. } => inner.is_radial(),
        }
    }

    /// Pointwise value `g(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            WeightSpec::Power { alpha } => {
                if *alpha == 0.0 {
                    1.0
                } else {
                    x.iter().map(|v| v * v).sum::<f64>().powf(-0.5 * alpha)
                }
            }
            WeightSpec::CylindricalPower { beta, split } => {
                x[..*split].iter().map(|v| v * v).sum::<f64>().powf(-0.5 * beta)
            }
            WeightSpec::Truncated { inner, region } => {
                if region.contains(x) {
                    inner.eval(x)
                } else {
                    0.0
                }
            }
            WeightSpec::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * inner.eval(x)
                }
            }
            WeightSpec::Tabulated(f) => f.value_at(x.iter().map(|v| v * v).sum::<f64>().sqrt()),
        }
    }

    /// Mean of `g` over the sphere `|x| = s` in `R^dim`.
    pub fn spherical_average(&self, dim: usize, s: f64) -> f64 {
        self.average_with(dim, s, &mut None)
    }

    fn average_with(&self, dim: usize, s: f64, rule: &mut Option<AngularRule>) -> f64 {
        match self {
            WeightSpec::Power { alpha } => s.powf(-alpha),
            WeightSpec::CylindricalPower { beta, split } => s.powf(-beta) * cylinder_factor(dim, *split, *beta),
            WeightSpec::Truncated { inner, region } => {
                if s < region.inradius() {
                    inner.average_with(dim, s, rule)
                } else if s >= region.circumradius(dim) {
                    0.0
                } else {
                    let rule = rule.get_or_insert_with(|| self.angular_rule(dim));
                    let mut x = alloc::vec![0.0; dim];
                    rule.mean(|w| {
                        x.iter_mut().zip(w).for_each(|(a, b)| *a = s * b);
                        if region.contains(&x) {
                            inner.eval(&x)
                        } else {
                            0.0
                        }
                    })
                }
            }
            WeightSpec::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * inner.average_with(dim, s, rule)
                }
            }
            WeightSpec::Tabulated(f) => f.value_at(s),
        }
    }

    fn angular_rule(&self, dim: usize) -> AngularRule {
        let (split, beta) = self.singular_split(dim);
        split_rule(dim, split, beta, 12)
    }

    fn singular_split(&self, dim: usize) -> (usize, f64) {
        match self {
            WeightSpec::CylindricalPower { beta, split } => (*split, *beta),
            WeightSpec::Truncated { inner, .. } | WeightSpec::Scaled { inner, .. } => inner.singular_split(dim),
            _ => (if dim > 2 { 2 } else { 1 }, 0.0),
        }
    }

    /// `∫_{B_b} g dx` for a ball small enough to lie inside any cutoff region.
    pub fn inner_mass(&self, dim: usize, b: f64) -> f64 {
        let n = dim as f64;
        let area = n * unit_ball_volume(dim);
        match self {
            WeightSpec::Power { alpha } => {
                if *alpha < n {
                    area * b.powf(n - alpha) / (n - alpha)
                } else {
                    f64::INFINITY
                }
            }
            WeightSpec::CylindricalPower { beta, split } => {
                if *beta < *split as f64 {
                    area * b.powf(n - beta) / (n - beta) * cylinder_factor(dim, *split, *beta)
                } else {
                    f64::INFINITY
                }
            }
            WeightSpec::Truncated { inner, .. } => inner.inner_mass(dim, b),
            WeightSpec::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * inner.inner_mass(dim, b)
                }
            }
            WeightSpec::Tabulated(f) => f.values()[0] * unit_ball_volume(dim) * b.powi(dim as i32),
        }
    }

    /// `∫_{B_R(0)} g dx`.
    pub fn ball_mass(&self, dim: usize, radius: f64) -> f64 {
        match self {
            WeightSpec::Power { .. } | WeightSpec::CylindricalPower { .. } => self.inner_mass(dim, radius),
            WeightSpec::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    0.0
                } else {
                    factor * inner.ball_mass(dim, radius)
                }
            }
            WeightSpec::Truncated { inner, region } if radius <= region.inradius() => inner.ball_mass(dim, radius),
            WeightSpec::Truncated { inner, region: Region::Ball(r) } => inner.ball_mass(dim, *r),
            _ => {
                // Inner cap in closed form, the rest by Gauss in ln s.
                let b = 1e-6 * radius;
                let n = dim as f64;
                let area = n * unit_ball_volume(dim);
                let (ts, tw) = composite_gauss(b.ln(), radius.ln(), 64, 8);
                let mut rule = None;
                let shell: f64 = ts
                    .iter()
                    .zip(&tw)
                    .map(|(t, w)| {
                        let s = t.exp();
                        w * area * s.powf(n) * self.average_with(dim, s, &mut rule)
                    })
                    .sum();
                self.inner_mass(dim, b) + shell
            }
        }
    }

    /// Radius where a ball truncation makes the weight jump to zero.
    pub fn cut_radius(&self) -> Option<f64> {
        match self {
            WeightSpec::Truncated { inner, region: Region::Ball(r) } => {
                Some(inner.cut_radius().map_or(*r, |c| c.min(*r)))
            }
            WeightSpec::Truncated { inner, .. } | WeightSpec::Scaled { inner, .. } => inner.cut_radius(),
            _ => None,
        }
    }

    /// Samples the spherical averages on a grid, with the inner cap mass.
    pub fn profile(&self, grid: &Arc<RadialGrid>) -> Result<WeightProfile> {
        let dim = grid.dim();
        self.validate(dim)?;
        let mut rule = None;
        let values = match self {
            WeightSpec::Tabulated(f) if Arc::ptr_eq(f.grid(), grid) || **f.grid() == **grid => f.values().to_vec(),
            _ => grid.nodes().iter().map(|&s| self.average_with(dim, s, &mut rule)).collect::<Vec<_>>(),
        };
        let cap_mass = self.inner_mass(dim, grid.inner_radius());
        Ok(WeightProfile { values, cap_mass, cut: self.cut_radius() })
    }
}

/// `E|ω'|^{-beta}` over the unit sphere of `R^dim`, `ω' ∈ R^split`.
pub fn cylinder_factor(dim: usize, split: usize, beta: f64) -> f64 {
    let k = split as f64;
    let m = (dim - split) as f64;
    (ln_beta(0.5 * (k - beta), 0.5 * m) - ln_beta(0.5 * k, 0.5 * m)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use core::f64::consts::PI;

    #[test]
    fn example_weights() {
        assert_eq!(WeightSpec::g1(3, 2.0, 4.0), WeightSpec::Power { alpha: 1.0 });
        assert_eq!(WeightSpec::g1(3, 2.0, 2.0), WeightSpec::Power { alpha: 2.0 });
        assert_eq!(WeightSpec::g2(3, 2.0, 4.0), WeightSpec::CylindricalPower { beta: 1.0, split: 2 });
        assert!(WeightSpec::g2(3, 2.0, 4.0).validate(3).is_ok());
        // r below p*(1 - 2/N) makes g2 non-integrable.
        assert!(WeightSpec::g2(3, 2.0, 1.9).validate(3).is_err());
        assert!(WeightSpec::Power { alpha: 3.0 }.validate(3).is_err());
    }

    #[test]
    fn cylindrical_ball_mass() {
        let g = WeightSpec::g2(3, 2.0, 4.0);
        let exact = g.ball_mass(3, 1.0);
        let t = WeightSpec::Truncated { inner: Box::new(g.clone()), region: Region::Cube(10.0) };
        // ∫_{B_1} 1/ρ dx = ∫_{-1}^{1} 2π sqrt(1-z²) dz = π².
        assert!((exact - PI * PI).abs() < 1e-12, "{exact}");
        assert!((t.ball_mass(3, 1.0) - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn cube_truncation_averages() {
        let g = WeightSpec::Power { alpha: 0.0 }.truncated(Region::Cube(1.0));
        // Fraction of the sphere of radius s inside the unit cube.
        assert_eq!(g.spherical_average(3, 0.9), 1.0);
        assert_eq!(g.spherical_average(3, 1.8), 0.0);
        let f = g.spherical_average(3, 1.2);
        assert!(f > 0.0 && f < 1.0);
        // Cube volume 8 from the radial integral of the fraction.
        let m = g.ball_mass(3, 2.0);
        assert!((m - 8.0).abs() < 1e-2 * 8.0, "{m}");
        let g2t = WeightSpec::g2_truncated(3, 2.0, 4.0);
        // ∫_{[-1,1]^3} 1/ρ dx = 2 ∫_{[-1,1]^2} 1/ρ = 2 · 8 asinh(1).
        let exact = 16.0 * libm::asinh(1.0);
        let m = g2t.ball_mass(3, 2.0);
        assert!((m - exact).abs() < 2e-2 * exact, "{m} vs {exact}");
    }

    #[test]
    fn profile_on_grid() {
        let grid = Arc::new(RadialGrid::new(3, &GridSpec::default()).unwrap());
        let g = WeightSpec::g1(3, 2.0, 4.0);
        let prof = g.profile(&grid).unwrap();
        assert_eq!(prof.values.len(), grid.len());
        assert!((prof.values[10] - 1.0 / grid.nodes()[10]).abs() < 1e-12);
        assert!(prof.cap_mass > 0.0);
        assert!(WeightSpec::Power { alpha: 3.5 }.profile(&grid).is_err());
        assert_eq!(WeightSpec::zero().profile(&grid).unwrap().values[5], 0.0);
    }

    #[test]
    fn ball_cut_is_integrated_to_second_order() {
        let grid = Arc::new(RadialGrid::new(3, &GridSpec::default()).unwrap());
        for r in [0.7, 1.5, 2.3] {
            let g = WeightSpec::Power { alpha: 1.0 }.truncated(Region::Ball(r)).scaled(2.0);
            let prof = g.profile(&grid).unwrap();
            assert_eq!(prof.cut, Some(r));
            let q = grid.integrate(Some(&prof), |i| (-grid.nodes()[i]).exp());
            // 2 ∫_{B_r} e^{-|x|}/|x| = 8π (1 - (1 + r) e^{-r}).
            let exact = 8.0 * core::f64::consts::PI * (1.0 - (1.0 + r) * (-r).exp());
            assert!((q.value - exact).abs() < 1e-5 * exact, "{r}: {} vs {exact}", q.value);
            assert!(q.error >= (q.value - exact).abs() && q.error < 1e-4 * exact, "{r}: {q:?} vs {exact}");
        }
    }
}
