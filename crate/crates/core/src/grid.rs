//! Radial quadrature grids and sampled radial test functions.
//!
//! A [`RadialGrid`] splits `(0, r_max]` into geometric cells whose edges are
//! the powers `2^{j/m}` (`m` cells per octave), so `r = 1` is always a cell
//! edge and a dilation by `2^{k/m}` maps nodes onto nodes. Nodes sit at the
//! geometric cell midpoints, i.e. uniformly in `t = ln s`, and the weights are
//! the midpoint rule in `t`:
//!
//! ```text
//! ∫_{R^N} f(|x|) dx = N ω_N ∫ f(e^t) e^{N t} dt ≈ Σ_i N ω_N h s_i^N f(s_i)
//! ```
//!
//! which is spectrally accurate for smooth integrands that decay at both ends
//! of the `t` axis. The innermost ball `B_{b_0}` is a separate cap term.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use crate::error::{domain_err, param_err, Result};
use crate::math::unit_ball_volume;
#[allow(unused_imports)]
use crate::float::Real;

bitflags::bitflags! {
    /// Diagnostic flags attached to integrals, functions and reports.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    #[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
    pub struct Flags: u16 {
        /// Mass or support reaches the outer radius; the tail is extrapolated.
        const TRUNCATED = 1;
        /// An integral diverges; its value is a `+inf` sentinel.
        const DIVERGENT = 1 << 1;
        /// The sample is unbounded near the origin; the sup is a surrogate.
        const UNBOUNDED_AT_ORIGIN = 1 << 2;
        /// A one-sided difference stencil touched non-negligible data.
        const ONE_SIDED_STENCIL = 1 << 3;
        /// The value is a lower bound (discrete sup, sampled family).
        const LOWER_BOUND = 1 << 4;
        /// An iterative solver stopped before its tolerance.
        const NOT_CONVERGED = 1 << 5;
        /// A negative residual cannot be interpreted (lower-bound constant).
        const INCONCLUSIVE = 1 << 6;
        /// An exponent lies outside the admissible window.
        const OUTSIDE_WINDOW = 1 << 7;
        /// A weighted integral is not finite on the grid.
        const NON_INTEGRABLE = 1 << 8;
    }
}

/// A quadrature value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub flags: Flags,
}

impl Quadrature {
    pub fn exact(value: f64) -> Self {
        Quadrature { value, error: 0.0, flags: Flags::empty() }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            self.error
        } else {
            self.error / self.value.abs()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && !self.flags.contains(Flags::DIVERGENT)
    }
}

/// Grid construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    /// Approximate node count; the realized count snaps to whole cells per octave.
    pub nodes: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { r_min: 1e-6, r_max: 50.0, nodes: 4096 }
    }
}

impl GridSpec {
    pub fn cells_per_octave(&self) -> u32 {
        let octaves = (self.r_max / self.r_min).log2();
        ((self.nodes as f64 / octaves).round() as u32).max(1)
    }
}

/// Geometric radial grid in `R^N` (any `N ≥ 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    per_octave: u32,
    j_lo: i64,
    j_hi: i64,
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ball_volume: f64,
}

impl RadialGrid {
    pub fn new(dim: usize, spec: &GridSpec) -> Result<Self> {
        if !(spec.r_min > 0.0 && spec.r_max > spec.r_min && spec.r_max.is_finite()) {
            return Err(param_err!(
                "grid radii must satisfy 0 < r_min < r_max, got ({}, {})",
                spec.r_min,
                spec.r_max
            ));
        }
        let m = spec.cells_per_octave();
        let j_lo = (m as f64 * spec.r_min.log2()).floor() as i64;
        let j_hi = (m as f64 * spec.r_max.log2()).ceil() as i64;
        Self::from_octaves(dim, m, j_lo, j_hi)
    }

    /// Grid with cell edges `2^{j/m}` for `j_lo ≤ j ≤ j_hi`.
    pub fn from_octaves(dim: usize, per_octave: u32, j_lo: i64, j_hi: i64) -> Result<Self> {
        if dim == 0 || per_octave == 0 || j_hi - j_lo < 4 {
            return Err(param_err!("degenerate grid: dim={dim}, m={per_octave}, cells={}", j_hi - j_lo));
        }
        let m = per_octave as f64;
        let h = LN_2 / m;
        let ball_volume = unit_ball_volume(dim);
        let n = (j_hi - j_lo) as usize;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let s = ((j_lo + i as i64) as f64 + 0.5) / m;
            let s = s.exp2();
            nodes.push(s);
            weights.push(dim as f64 * ball_volume * h * s.powi(dim as i32));
        }
        Ok(RadialGrid { dim, per_octave, j_lo, j_hi, h, nodes, weights, ball_volume })
    }

    /// Same radial range with twice as many cells per octave.
    pub fn refined(&self) -> Self {
        Self::from_octaves(self.dim, 2 * self.per_octave, 2 * self.j_lo, 2 * self.j_hi)
            .expect("refining a valid grid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cells_per_octave(&self) -> u32 {
        self.per_octave
    }

    /// Uniform spacing in `t = ln s`.
    pub fn log_step(&self) -> f64 {
        self.h
    }

    /// Unit-ball volume `ω_N` for this grid's dimension.
    pub fn ball_volume(&self) -> f64 {
        self.ball_volume
    }

    /// Radius of the innermost cap ball.
    pub fn inner_radius(&self) -> f64 {
        (self.j_lo as f64 / self.per_octave as f64).exp2()
    }

    pub fn outer_radius(&self) -> f64 {
        (self.j_hi as f64 / self.per_octave as f64).exp2()
    }

    /// Cell edges `b_0 < b_1 < ... < b_n`; node `i` lies in `(b_i, b_{i+1})`.
    pub fn edges(&self) -> Vec<f64> {
        (self.j_lo..=self.j_hi)
            .map(|j| (j as f64 / self.per_octave as f64).exp2())
            .collect()
    }

    /// Volume of the innermost cap ball `B_{b_0}`.
    pub fn cap_volume(&self) -> f64 {
        self.ball_volume * self.inner_radius().powi(self.dim as i32)
    }

    /// Position of radius `s` in node-index units (fractional).
    pub fn index_position(&self, s: f64) -> f64 {
        let m = self.per_octave as f64;
        s.log2() * m - self.j_lo as f64 - 0.5
    }

    /// Number of cells a dilation by `lambda` shifts, when it is a whole number.
    pub fn exact_shift(&self, lambda: f64) -> Option<i64> {
        let k = lambda.log2() * self.per_octave as f64;
        let kr = k.round();
        ((k - kr).abs() < 1e-9).then_some(kr as i64)
    }

    /// `∫ g f dx` with node densities `f(i)` and the weight profile `g`.
    ///
    /// The error combines the even/odd half-rule difference (a node-doubling
    /// Richardson estimate), an extrapolated outer tail and the variation of
    /// the integrand across the inner cap.
    pub fn integrate<F: Fn(usize) -> f64>(&self, weight: Option<&WeightProfile>, f: F) -> Quadrature {
        let n = self.len();
        let mut total = 0.0;
        let mut halves = [0.0, 0.0];
        let mut abs_sum = 0.0;
        let mut flags = Flags::empty();
        let mut last = [0.0; 2];
        for i in 0..n {
            let g = weight.map_or(1.0, |w| w.values[i]);
            let fi = f(i);
            let term = if g == 0.0 { 0.0 } else { self.weights[i] * g * fi };
            if !term.is_finite() {
                flags |= Flags::NON_INTEGRABLE | Flags::DIVERGENT;
            }
            total += term;
            halves[i % 2] += term;
            abs_sum += term.abs();
            if i + 2 >= n {
                last[i + 2 - n] = term;
            }
        }
        let f0 = f(0);
        let cap_mass = weight.map_or(self.cap_volume(), |w| w.cap_mass);
        let cap = if cap_mass == 0.0 { 0.0 } else { cap_mass * f0 };
        if !cap.is_finite() {
            flags |= Flags::NON_INTEGRABLE | Flags::DIVERGENT;
        }
        total += cap;
        if flags.contains(Flags::DIVERGENT) {
            return Quadrature { value: f64::INFINITY, error: f64::INFINITY, flags };
        }
        let mut richardson = (halves[0] - halves[1]).abs();
        if let Some(cut) = weight.and_then(|w| w.cut) {
            let t_cut = cut.ln();
            let t0 = self.nodes[0].ln();
            if t_cut > t0 + self.h && t_cut < self.outer_radius().ln() {
                let density = |i: usize| {
                    let g = weight.map_or(1.0, |w| w.values[i]);
                    if g == 0.0 { 0.0 } else { self.weights[i] / self.h * g * f(i) }
                };
                let fine = self.closed_sum(&density, t_cut, 1, 0);
                let coarse = [self.closed_sum(&density, t_cut, 2, 0), self.closed_sum(&density, t_cut, 2, 1)];
                total += fine - halves[0] - halves[1];
                richardson = coarse.iter().map(|c| (c - fine).abs()).fold(0.0, f64::max);
            }
        }
        let cap_err = if cap_mass == 0.0 { 0.0 } else { (cap_mass * (f0 - f(1))).abs() };
        let tail = outer_tail(last[0], last[1], self.per_octave, abs_sum);
        if tail.1 {
            flags |= Flags::TRUNCATED;
        }
        let error = richardson + cap_err + tail.0 + 4.0 * f64::EPSILON * (abs_sum + cap.abs());
        Quadrature { value: total, error, flags }
    }
}

impl RadialGrid {
    /// Midpoint rule in `t = ln s` over every `stride`-th node from `offset`,
    /// closed at `t_cut`: Euler-Maclaurin end corrections at the last full
    /// edge `a` plus the partial cell `[a, t_cut]`, both from the cubic
    /// through the last four nodes.
    fn closed_sum<D: Fn(usize) -> f64>(&self, density: &D, t_cut: f64, stride: usize, offset: usize) -> f64 {
        let step = stride as f64 * self.h;
        let t = |i: usize| self.nodes[0].ln() + i as f64 * self.h;
        let mut sum = 0.0;
        let mut i = offset;
        let mut prev = None;
        while i < self.len() && t(i) + 0.5 * step <= t_cut {
            sum += step * density(i);
            prev = Some(i);
            i += stride;
        }
        let Some(last) = prev else {
            return sum;
        };
        if last < 3 * stride {
            return sum;
        }
        let f: [f64; 4] = core::array::from_fn(|k| density(last - k * stride));
        let d1 = f[0] - f[1];
        let d2 = d1 - (f[1] - f[2]);
        let d3 = d2 - ((f[1] - f[2]) - (f[2] - f[3]));
        // Q(x) = f0 + x d1 + x(x+1)/2 d2 + x(x+1)(x+2)/6 d3, t = t_last + x H.
        let antiderivative = |x: f64| {
            let (x2, x3) = (x * x, x * x * x);
            f[0] * x + 0.5 * d1 * x2 + 0.5 * d2 * (x3 / 3.0 + 0.5 * x2) + d3 * (0.25 * x3 * x + x3 + x2) / 6.0
        };
        let slope = d1 + d2 + 23.0 / 24.0 * d3;
        sum += step * (slope / 24.0 - 7.0 / 5760.0 * d3);
        sum + step * (antiderivative((t_cut - t(last)) / step) - antiderivative(0.5))
    }
}

/// Geometric extrapolation of the contributions beyond the last node.
fn outer_tail(prev: f64, last: f64, per_octave: u32, scale: f64) -> (f64, bool) {
    if last == 0.0 {
        return (0.0, false);
    }
    let q = last / prev;
    if q.is_finite() && q > 0.0 && q < 1.0 {
        let tail = (last * q / (1.0 - q)).abs();
        (tail, tail > 1e-12 * scale)
    } else {
        // Non-decaying tail: charge one more octave and flag it.
        (last.abs() * per_octave as f64, true)
    }
}

/// A weight sampled on a grid: spherical averages at the nodes plus the mass
/// of the inner cap ball.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    pub values: Vec<f64>,
    pub cap_mass: f64,
    /// Radius beyond which the weight vanishes, when it jumps there.
    pub cut: Option<f64>,
}

impl WeightProfile {
    pub fn ones(grid: &RadialGrid) -> Self {
        WeightProfile { values: alloc::vec![1.0; grid.len()], cap_mass: grid.cap_volume(), cut: None }
    }

    /// Pointwise `|x|^{-alpha}` profile with the exact cap mass.
    pub fn power(grid: &RadialGrid, alpha: f64) -> Self {
        let n = grid.dim() as f64;
        let values = grid.nodes().iter().map(|s| s.powf(-alpha)).collect();
        let cap_mass = if alpha < n {
            grid.dim() as f64 * grid.ball_volume() * grid.inner_radius().powf(n - alpha) / (n - alpha)
        } else {
            f64::INFINITY
        };
        WeightProfile { values, cap_mass, cut: None }
    }
}

/// A radial function sampled at the nodes of a [`RadialGrid`].
///
/// Values beyond the outer radius are zero; values inside the inner cap equal
/// the first sample. An optional `center` records where the radial profile
/// is centered (the origin when absent).
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
    center: Option<Vec<f64>>,
    support: Option<f64>,
    flags: Flags,
}

impl GridFunction {
    pub fn from_values(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(domain_err!("{} samples for a grid of {} nodes", values.len(), grid.len()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain_err!("non-finite sample at node {i} (s = {})", grid.nodes()[i]));
        }
        let mut flags = Flags::empty();
        let n = values.len();
        let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if n > 1 && values[n - 1].abs() > 1e-12 * peak {
            flags |= Flags::TRUNCATED;
        }
        if n > 2 && values[0].abs() > values[1].abs() * (1.0 + 1e-6) && values[1].abs() > values[2].abs() * (1.0 + 1e-6)
        {
            let growth = (values[0] / values[2]).abs().ln() / (2.0 * grid.log_step());
            if growth > 1e-3 {
                flags |= Flags::UNBOUNDED_AT_ORIGIN;
            }
        }
        Ok(GridFunction { grid, values, center: None, support: None, flags })
    }

    /// Samples `f(s)` at every node.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Arc<RadialGrid>, f: F) -> Result<Self> {
        let values = grid.nodes().iter().map(|&s| f(s)).collect();
        Self::from_values(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        GridFunction { grid, values: alloc::vec![0.0; n], center: None, support: None, flags: Flags::empty() }
    }

    /// Declares compact support: the samples must vanish beyond `radius`.
    pub fn with_support(mut self, radius: f64) -> Result<Self> {
        if radius >= self.grid.outer_radius() {
            return Err(domain_err!(
                "support radius {radius} is not inside r_max = {}",
                self.grid.outer_radius()
            ));
        }
        for (s, v) in self.grid.nodes().iter().zip(&self.values) {
            if *s > radius && *v != 0.0 {
                return Err(domain_err!("sample {v} at s = {s} beyond declared support {radius}"));
            }
        }
        self.support = Some(radius);
        Ok(self)
    }

    pub fn with_center(mut self, center: Vec<f64>) -> Result<Self> {
        if center.len() != self.grid.dim() {
            return Err(param_err!("center has {} coordinates in R^{}", center.len(), self.grid.dim()));
        }
        self.center = Some(center);
        Ok(self)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn center(&self) -> Option<&[f64]> {
        self.center.as_deref()
    }

    pub fn support(&self) -> Option<f64> {
        self.support
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Largest node radius with a non-zero sample.
    pub fn support_radius(&self) -> f64 {
        match self.values.iter().rposition(|v| *v != 0.0) {
            Some(i) if i + 1 < self.values.len() => self.grid.edges()[i + 1],
            Some(_) => self.grid.outer_radius(),
            None => 0.0,
        }
    }

    /// `c · u`, samples scaled exactly.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }

    /// Pointwise map of the samples.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v = f(*v));
        out
    }

    /// Cubic Lagrange interpolation in `ln s`.
    pub fn value_at(&self, s: f64) -> f64 {
        let n = self.values.len();
        if s <= 0.0 {
            return self.values[0];
        }
        if s > self.grid.outer_radius() {
            return 0.0;
        }
        let x = self.grid.index_position(s);
        if x <= 0.0 {
            return self.values[0];
        }
        if x >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = x.floor() as i64;
        let frac = x - i as f64;
        let at = |k: i64| -> f64 {
            if k < 0 {
                self.values[0]
            } else if k as usize >= n {
                0.0
            } else {
                self.values[k as usize]
            }
        };
        if i == n as i64 - 2 {
            return at(i) * (1.0 - frac) + at(i + 1) * frac;
        }
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let u = frac;
        let l0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let l1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let l2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let l3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        p0 * l0 + p1 * l1 + p2 * l2 + p3 * l3
    }

    /// `d/dt` of the samples, `t = ln s`: fourth-order centered differences,
    /// constant extension through the inner cap, one-sided at the outer end.
    fn log_derivatives(&self) -> (Vec<f64>, Vec<f64>, Flags) {
        let v = &self.values;
        let n = v.len();
        let h = self.grid.log_step();
        let at = |k: i64| -> f64 { if k < 0 { v[0] } else { v[k as usize] } };
        let mut d1 = alloc::vec![0.0; n];
        let mut d2 = alloc::vec![0.0; n];
        for i in 0..n.saturating_sub(2) {
            let k = i as i64;
            let (a, b, c, d, e) = (at(k - 2), at(k - 1), at(k), at(k + 1), at(k + 2));
            d1[i] = (a - 8.0 * b + 8.0 * d - e) / (12.0 * h);
            d2[i] = (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h);
        }
        let mut flags = Flags::empty();
        if n >= 4 {
            let i = n - 2;
            d1[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
            d2[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
            let i = n - 1;
            d1[i] = (3.0 * v[i] - 4.0 * v[i - 1] + v[i - 2]) / (2.0 * h);
            d2[i] = (2.0 * v[i] - 5.0 * v[i - 1] + 4.0 * v[i - 2] - v[i - 3]) / (h * h);
            let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if v[n - 3..].iter().any(|x| x.abs() > 1e-12 * peak) {
                flags |= Flags::ONE_SIDED_STENCIL;
            }
        }
        (d1, d2, flags)
    }

    /// `u'(s)` at every node.
    pub fn derivative(&self) -> Vec<f64> {
        let (d1, _, _) = self.log_derivatives();
        d1.iter().zip(self.grid.nodes()).map(|(d, s)| d / s).collect()
    }

    /// `(u'(s), u''(s))` at every node.
    pub fn derivatives(&self) -> (Vec<f64>, Vec<f64>, Flags) {
        let (d1, d2, flags) = self.log_derivatives();
        let s = self.grid.nodes();
        let du: Vec<f64> = d1.iter().zip(s).map(|(d, s)| d / s).collect();
        let ddu = d1.iter().zip(&d2).zip(s).map(|((a, b), s)| (b - a) / (s * s)).collect();
        (du, ddu, flags)
    }

    /// Radial Laplacian `u'' + (N-1) u'/s` at every node.
    pub fn laplacian(&self) -> Vec<f64> {
        let (du, ddu, _) = self.derivatives();
        let k = (self.dim() - 1) as f64;
        self.grid
            .nodes()
            .iter()
            .zip(du.iter().zip(&ddu))
            .map(|(s, (d1, d2))| d2 + k * d1 / s)
            .collect()
    }
}

/// `∫ f dx` over `R^N`.
pub fn integrate(f: &GridFunction) -> Quadrature {
    let mut q = f.grid.integrate(None, |i| f.values[i]);
    q.flags |= f.flags & Flags::TRUNCATED;
    q
}

fn check_energy_exponent(u: &GridFunction, p: f64) -> Result<()> {
    let n = u.dim() as f64;
    if !(p > 1.0 && p < n) {
        return Err(param_err!("energy exponent p = {p} must lie in (1, N) = (1, {n})"));
    }
    Ok(())
}

/// `∫ |∇u|^p dx`.
pub fn dirichlet_energy(u: &GridFunction, p: f64) -> Result<Quadrature> {
    check_energy_exponent(u, p)?;
    Ok(weighted_dirichlet_energy(u, p, None))
}

/// `∫ |∇u|^p g dx` for a radial weight profile `g` (no exponent window check).
pub fn weighted_dirichlet_energy(u: &GridFunction, p: f64, weight: Option<&WeightProfile>) -> Quadrature {
    let (du, _, flags) = u.derivatives();
    let mut q = u.grid.integrate(weight, |i| du[i].abs().powf(p));
    q.flags |= flags;
    q
}

/// `∫ |∇²u|^p dx` with `|∇²u|² = u''² + (N-1)(u'/s)²` for radial `u`.
pub fn hessian_energy(u: &GridFunction, p: f64) -> Result<Quadrature> {
    if !(p >= 1.0) {
        return Err(param_err!("Hessian energy exponent p = {p} must be at least 1"));
    }
    Ok(weighted_hessian_energy(u, p, None))
}

pub fn weighted_hessian_energy(u: &GridFunction, p: f64, weight: Option<&WeightProfile>) -> Quadrature {
    let (du, ddu, flags) = u.derivatives();
    let k = (u.dim() - 1) as f64;
    let s = u.grid.nodes();
    let mut q = u.grid.integrate(weight, |i| {
        let tan = du[i] / s[i];
        (ddu[i] * ddu[i] + k * tan * tan).powf(0.5 * p)
    });
    q.flags |= flags;
    q
}

/// `∫ (Δu)² dx`.
pub fn laplacian_energy(u: &GridFunction) -> Quadrature {
    let lap = u.laplacian();
    u.grid.integrate(None, |i| lap[i] * lap[i])
}

/// `u_λ(x) = λ^e u(λ x)` resampled on the same grid.
///
/// Dilations by `2^{k/m}` shift samples by whole cells and are exact; other
/// factors use cubic interpolation in `ln s`.
pub fn dilate(u: &GridFunction, lambda: f64, exponent: f64) -> Result<GridFunction> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(param_err!("dilation factor must be positive, got {lambda}"));
    }
    let n = u.values.len();
    let factor = lambda.powf(exponent);
    let peak = u.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut flags = u.flags;
    let values: Vec<f64> = match u.grid.exact_shift(lambda) {
        Some(k) => {
            if k < 0 {
                let dropped = &u.values[(n as i64 + k).max(0) as usize..];
                if dropped.iter().any(|v| v.abs() > 1e-14 * peak) {
                    flags |= Flags::TRUNCATED;
                }
            }
            (0..n as i64)
                .map(|i| {
                    let j = i + k;
                    let v = if j < 0 {
                        u.values[0]
                    } else if j as usize >= n {
                        0.0
                    } else {
                        u.values[j as usize]
                    };
                    factor * v
                })
                .collect()
        }
        None => {
            if lambda < 1.0 && u.support_radius() / lambda > u.grid.outer_radius() {
                flags |= Flags::TRUNCATED;
            }
            u.grid.nodes().iter().map(|s| factor * u.value_at(lambda * s)).collect()
        }
    };
    let center = u.center.as_ref().map(|c| c.iter().map(|x| x / lambda).collect());
    let support = u.support.map(|r| r / lambda);
    if let Some(r) = support {
        if r >= u.grid.outer_radius() {
            flags |= Flags::TRUNCATED;
        }
    }
    Ok(GridFunction { grid: u.grid.clone(), values, center, support, flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn grid(dim: usize) -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(dim, &GridSpec::default()).unwrap())
    }

    fn gaussian(g: &Arc<RadialGrid>) -> GridFunction {
        GridFunction::from_fn(g.clone(), |s| (-0.5 * s * s).exp()).unwrap()
    }

    #[test]
    fn default_grid_shape() {
        let g = grid(3);
        assert_eq!(g.cells_per_octave(), 160);
        assert!(g.len() > 4000 && g.len() < 4200);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!(g.weights().iter().all(|w| *w > 0.0));
        assert!(g.inner_radius() <= 1e-6 && g.outer_radius() >= 50.0);
        assert_eq!(g.exact_shift(2.0), Some(160));
        assert_eq!(g.exact_shift(0.25), Some(-320));
        assert_eq!(g.exact_shift(3.0), None);
    }

    #[test]
    fn constant_reproduces_ball_volume() {
        let g = grid(3);
        let one = GridFunction::from_fn(g.clone(), |_| 1.0).unwrap();
        let v = integrate(&one).value;
        let exact = 4.0 * PI / 3.0 * g.outer_radius().powi(3);
        assert!((v - exact).abs() < 1e-5 * exact, "{v} vs {exact}");
    }

    #[test]
    fn indicator_and_gaussian_integrals() {
        let g = grid(3);
        let chi = GridFunction::from_fn(g.clone(), |s| if s < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let q = integrate(&chi);
        assert!((q.value - 4.0 * PI / 3.0).abs() < 1e-4, "{}", q.value);
        let gauss = GridFunction::from_fn(g.clone(), |s| (-s * s).exp()).unwrap();
        let q = integrate(&gauss);
        let exact = PI.powf(1.5);
        assert!((q.value - exact).abs() < 1e-10 * exact, "{} vs {exact}", q.value);
        assert!(q.error < 1e-8 * exact);
        assert_eq!(integrate(&GridFunction::zeros(g)).value, 0.0);
    }

    #[test]
    fn gaussian_dirichlet_energy() {
        let g = grid(3);
        let e = dirichlet_energy(&gaussian(&g), 2.0).unwrap();
        let exact = 1.5 * PI.powf(1.5);
        assert!((e.value - exact).abs() < 1e-7 * exact, "{} vs {exact}", e.value);
        assert!(dirichlet_energy(&gaussian(&g), 3.0).is_err());
        assert!(dirichlet_energy(&gaussian(&g), 1.0).is_err());
    }

    #[test]
    fn capacity_extremal_energy() {
        let g = Arc::new(RadialGrid::new(3, &GridSpec { r_min: 1e-6, r_max: 1e3, nodes: 4096 }).unwrap());
        let u = GridFunction::from_fn(g, |s| if s <= 1.0 { 1.0 } else { 1.0 / s }).unwrap();
        let e = dirichlet_energy(&u, 2.0).unwrap().value;
        assert!((e - 4.0 * PI).abs() < 0.02 * 4.0 * PI, "{e}");
    }

    #[test]
    fn hessian_matches_laplacian_for_gaussian() {
        let g = grid(3);
        let u = gaussian(&g);
        let h = hessian_energy(&u, 2.0).unwrap().value;
        let l = laplacian_energy(&u).value;
        assert!((h - l).abs() < 1e-6 * l, "{h} vs {l}");
        assert_eq!(hessian_energy(&GridFunction::zeros(g), 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn hessian_of_polynomial_bump() {
        // u = (1 - s²)² on B_1: u' = -4s(1-s²), u'' = -4 + 12 s².
        // ∫ |∇²u|² = 4π ∫_0^1 [(12s²-4)² + 2·16(1-s²)²] s² ds = 4π · 64/7.
        let g = grid(3);
        let u = GridFunction::from_fn(g, |s| if s < 1.0 { (1.0 - s * s).powi(2) } else { 0.0 }).unwrap();
        let h = hessian_energy(&u, 2.0).unwrap().value;
        let exact = 4.0 * PI * 64.0 / 7.0;
        assert!((h - exact).abs() < 1e-2 * exact, "{h} vs {exact}");
    }

    #[test]
    fn dilation_identity_and_scaling() {
        let g = grid(3);
        let u = gaussian(&g);
        let same = dilate(&u, 1.0, 0.7).unwrap();
        assert_eq!(same.values(), u.values());
        let d = dilate(&u, 2.0, 0.5).unwrap();
        let e0 = dirichlet_energy(&u, 2.0).unwrap().value;
        let e1 = dirichlet_energy(&d, 2.0).unwrap().value;
        assert!((e0 - e1).abs() < 1e-6 * e0);
        let sq = |f: &GridFunction| integrate(&f.map(|v| v * v)).value;
        let d0 = dilate(&u, 2.0, 0.0).unwrap();
        assert!((sq(&d0) - sq(&u) / 8.0).abs() < 1e-6 * sq(&u));
        assert!(dilate(&u, 0.0, 1.0).is_err());
    }

    #[test]
    fn interpolated_dilation_composes() {
        let g = grid(3);
        let u = gaussian(&g);
        let a = dilate(&dilate(&u, 1.3, 0.5).unwrap(), 1.7, 0.5).unwrap();
        let b = dilate(&u, 1.3 * 1.7, 0.5).unwrap();
        let err = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn rejects_bad_samples() {
        let g = grid(3);
        let mut v = alloc::vec![0.0; g.len()];
        v[10] = f64::NAN;
        assert!(GridFunction::from_values(g.clone(), v).is_err());
        let u = gaussian(&g);
        assert!(u.clone().with_support(2.0).is_err());
        let bump = GridFunction::from_fn(g, |s| if s < 1.0 { 1.0 - s } else { 0.0 }).unwrap();
        assert!(bump.with_support(1.0).is_ok());
    }

    #[test]
    fn refinement_keeps_range() {
        let g = grid(3);
        let f = g.refined();
        assert_eq!(f.len(), 2 * g.len());
        assert!((f.outer_radius() - g.outer_radius()).abs() < 1e-12);
        assert!((f.inner_radius() - g.inner_radius()).abs() < 1e-18);
    }
}
