//! Functions of `(|x'|, |x''|)` on `R^k × R^{N-k}`, sampled on the tensor
//! product of two radial grids.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{param_err, Error, Result};
#[allow(unused_imports)]
use crate::float::Real;
use crate::grid::{Flags, GridFunction, GridSpec, RadialGrid};
use crate::inequality::{Measure, Profile, TensorMeasure};
use crate::math::{unit_ball_volume, Fnv};
use crate::weight::{Region, WeightSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderGrid {
    split: usize,
    x: Arc<RadialGrid>,
    y: Arc<RadialGrid>,
}

impl CylinderGrid {
    /// `spec.nodes` is the node count along each axis.
    pub fn new(dim: usize, split: usize, spec: &GridSpec) -> Result<Self> {
        if split == 0 || split >= dim {
            return Err(param_err!("split {split} must lie in 1..{dim}"));
        }
        let x = Arc::new(RadialGrid::new(split, spec)?);
        let y = Arc::new(RadialGrid::new(dim - split, spec)?);
        Ok(CylinderGrid { split, x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.dim() + self.y.dim()
    }

    pub fn split(&self) -> usize {
        self.split
    }

    pub fn x(&self) -> &Arc<RadialGrid> {
        &self.x
    }

    pub fn y(&self) -> &Arc<RadialGrid> {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Radial weights along one axis with the inner cap folded into the first node.
    fn axis_weights(g: &RadialGrid, beta: f64) -> Vec<f64> {
        let mut w: Vec<f64> = g.weights().iter().zip(g.nodes()).map(|(w, s)| w * s.powf(-beta)).collect();
        let k = g.dim() as f64;
        let b = g.inner_radius();
        w[0] += k * unit_ball_volume(g.dim()) * b.powf(k - beta) / (k - beta);
        w
    }

    fn masses(&self, beta_x: f64, mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
        let wx = Self::axis_weights(&self.x, beta_x);
        let wy = Self::axis_weights(&self.y, 0.0);
        let mut out = Vec::with_capacity(self.len());
        for (rho, a) in self.x.nodes().iter().zip(&wx) {
            for (sigma, b) in self.y.nodes().iter().zip(&wy) {
                out.push(a * b * f(*rho, *sigma));
            }
        }
        out
    }

    /// `g` as a function of `(ρ, σ)`, with a power `ρ^{-β}` split off for
    /// exact treatment at the axis.
    fn factor(&self, g: &WeightSpec) -> Result<(f64, CylWeight)> {
        Ok(match g {
            WeightSpec::CylindricalPower { beta, split } if *split == self.split => (*beta, CylWeight::One),
            WeightSpec::CylindricalPower { .. } => {
                return Err(Error::Unsupported("cylindrical weight split differs from the grid split".into()))
            }
            WeightSpec::Power { alpha } => (0.0, CylWeight::Power(*alpha)),
            WeightSpec::Scaled { factor, inner } => {
                let (b, w) = self.factor(inner)?;
                (b, CylWeight::Scaled(*factor, alloc::boxed::Box::new(w)))
            }
            WeightSpec::Truncated { inner, region: Region::Ball(r) } => {
                let (b, w) = self.factor(inner)?;
                (b, CylWeight::Ball(*r, alloc::boxed::Box::new(w)))
            }
            WeightSpec::Truncated { region: Region::Cube(_), .. } => {
                return Err(Error::Unsupported("cube truncation is not a function of (|x'|, |x''|)".into()))
            }
            WeightSpec::Tabulated(f) => (0.0, CylWeight::Radial(f.clone())),
        })
    }
}

enum CylWeight {
    One,
    Power(f64),
    Scaled(f64, alloc::boxed::Box<CylWeight>),
    Ball(f64, alloc::boxed::Box<CylWeight>),
    Radial(GridFunction),
}

impl CylWeight {
    fn eval(&self, rho: f64, sigma: f64) -> f64 {
        match self {
            CylWeight::One => 1.0,
            CylWeight::Power(a) => rho.hypot(sigma).powf(-a),
            CylWeight::Scaled(c, w) => c * w.eval(rho, sigma),
            CylWeight::Ball(r, w) => {
                if rho.hypot(sigma) <= *r {
                    w.eval(rho, sigma)
                } else {
                    0.0
                }
            }
            CylWeight::Radial(f) => f.value_at(rho.hypot(sigma)),
        }
    }
}

/// Samples `u(ρ_i, σ_j)`, row-major in `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylFunction {
    grid: Arc<CylinderGrid>,
    values: Vec<f64>,
    flags: Flags,
}

impl CylFunction {
    pub fn from_values(grid: Arc<CylinderGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(param_err!("expected {} samples, got {}", grid.len(), values.len()));
        }
        let mut flags = Flags::empty();
        if values.iter().any(|v| !v.is_finite()) {
            flags |= Flags::NON_INTEGRABLE;
        }
        Ok(CylFunction { grid, values, flags })
    }

    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Arc<CylinderGrid>, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len());
        for rho in grid.x.nodes() {
            for sigma in grid.y.nodes() {
                values.push(f(*rho, *sigma));
            }
        }
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Arc<CylinderGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }
}

impl Profile for CylFunction {
    fn dim(&self) -> usize {
        self.grid.dim()
    }

    fn samples(&self) -> &[f64] {
        &self.values
    }

    fn flags(&self) -> Flags {
        self.flags
    }

    fn measure(&self, weight: Option<&WeightSpec>) -> Result<Measure> {
        let masses = match weight {
            None => self.grid.masses(0.0, |_, _| 1.0),
            Some(g) => {
                g.validate(self.dim())?;
                let (beta, w) = self.grid.factor(g)?;
                self.grid.masses(beta, |r, s| w.eval(r, s))
            }
        };
        Ok(Measure::Tensor(TensorMeasure {
            masses,
            rows: self.grid.x.len(),
            cols: self.grid.y.len(),
            per_octave: self.grid.x.cells_per_octave(),
        }))
    }

    fn gradient_norm(&self) -> (Vec<f64>, Flags) {
        let (nx, ny) = (self.grid.x.len(), self.grid.y.len());
        let mut flags = Flags::empty();
        let mut sq = alloc::vec![0.0; nx * ny];
        for i in 0..nx {
            let row = self.values[i * ny..(i + 1) * ny].to_vec();
            let f = GridFunction::from_values(self.grid.y.clone(), row).expect("row length");
            let (d, _, fl) = f.derivatives();
            flags |= fl;
            sq[i * ny..(i + 1) * ny].iter_mut().zip(&d).for_each(|(s, d)| *s += d * d);
        }
        for j in 0..ny {
            let col = (0..nx).map(|i| self.values[i * ny + j]).collect();
            let f = GridFunction::from_values(self.grid.x.clone(), col).expect("column length");
            let (d, _, fl) = f.derivatives();
            flags |= fl;
            (0..nx).for_each(|i| sq[i * ny + j] += d[i] * d[i]);
        }
        (sq.into_iter().map(|s| s.sqrt()).collect(), flags)
    }

    fn fingerprint(&self) -> u64 {
        let mut h = Fnv::default();
        h.f64(self.dim() as f64)
            .f64(self.grid.split as f64)
            .f64(self.grid.x.cells_per_octave() as f64)
            .f64(self.grid.x.inner_radius())
            .f64s(&self.values);
        h.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{default_ball_family, mazya_inequality_residual, mazya_norm_estimate};
    use crate::inequality::{weight_mass, wls_residual};
    use core::f64::consts::PI;

    fn cyl(dim: usize) -> Arc<CylinderGrid> {
        Arc::new(CylinderGrid::new(dim, 2, &GridSpec { r_min: 1e-6, r_max: 50.0, nodes: 512 }).unwrap())
    }

    fn gaussian(dim: usize) -> CylFunction {
        CylFunction::from_fn(cyl(dim), |r, s| (-0.5 * (r * r + s * s)).exp()).unwrap()
    }

    fn radial(dim: usize) -> GridFunction {
        let g = Arc::new(RadialGrid::new(dim, &GridSpec::default()).unwrap());
        GridFunction::from_fn(g, |s| (-0.5 * s * s).exp()).unwrap()
    }

    #[test]
    fn lebesgue_and_dirichlet_match_radial() {
        let u = gaussian(3);
        let a = weight_mass(&u, &WeightSpec::Power { alpha: 0.0 }, 2.0).unwrap();
        assert!((a.value - PI.powf(1.5)).abs() < 1e-6 * a.value, "{a:?}");
        let d = u.dirichlet(2.0).unwrap();
        assert!((d.value - 1.5 * PI.powf(1.5)).abs() < 1e-5 * d.value, "{d:?}");
    }

    #[test]
    fn g2_mass_matches_axial_average() {
        for dim in [3, 4] {
            let g2 = WeightSpec::g2(dim, 2.0, 3.0);
            let a = weight_mass(&gaussian(dim), &g2, 2.0).unwrap();
            let b = weight_mass(&radial(dim), &g2, 2.0).unwrap();
            assert!((a.value - b.value).abs() < 1e-4 * b.value, "{dim}: {} vs {}", a.value, b.value);
            let h = weight_mass(&gaussian(dim), &WeightSpec::Power { alpha: 1.0 }, 2.0).unwrap();
            let k = weight_mass(&radial(dim), &WeightSpec::Power { alpha: 1.0 }, 2.0).unwrap();
            assert!((h.value - k.value).abs() < 1e-4 * k.value);
        }
        let cube = WeightSpec::g2_truncated(3, 2.0, 3.0);
        assert!(gaussian(3).measure(Some(&cube)).is_err());
    }

    #[test]
    fn g2_mazya_and_wls() {
        let (dim, p, r) = (3, 2.0, 5.0);
        let g2 = WeightSpec::g2(dim, p, r);
        let u = gaussian(dim);
        let norm = mazya_norm_estimate(&g2, dim, p, r, &default_ball_family(dim)).unwrap();
        assert!(norm.lower_bound > 0.0 && norm.lower_bound.is_finite());
        let m = mazya_inequality_residual(&g2, &u, p, r, norm.lower_bound, true).unwrap();
        assert!(m.holds(), "{m:?}");
        let w = wls_residual(&u, &g2, p, r, None).unwrap();
        assert!(w.holds(), "{w:?}");
        let w7 = wls_residual(&u.scaled(7.0), &g2, p, r, None).unwrap();
        assert!((w7.residual - w.residual).abs() < 1e-10);
    }
}
