//! Closed sets `E ⊂ R^N`, the distance `δ_E`, dense samplers of `E ∩ B_R(x)`
//! and the exponent windows of the log-Hardy inequalities.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{param_err, Result};
#[allow(unused_imports)]
use crate::float::Real;

/// A closed set in `R^N`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ClosedSetSpec {
    Point(Vec<f64>),
    /// The sphere `|x - center| = radius`.
    Sphere { center: Vec<f64>, radius: f64 },
    /// `{x · n̂ = offset}` with `n̂ = normal / |normal|`.
    Hyperplane { normal: Vec<f64>, offset: f64 },
    Segment { a: Vec<f64>, b: Vec<f64> },
    PointCloud(Vec<Vec<f64>>),
    /// The closed solid ball.
    Ball { center: Vec<f64>, radius: f64 },
    Union(Vec<ClosedSetSpec>),
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn unit(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

/// A unit vector orthogonal to the unit vector `v` (`dim >= 2`).
pub fn perpendicular(v: &[f64]) -> Vec<f64> {
    complement_basis(v).swap_remove(0)
}

/// Orthonormal basis of the complement of `v` (unit) in `R^dim`.
fn complement_basis(v: &[f64]) -> Vec<Vec<f64>> {
    let dim = v.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim - 1);
    for k in 0..dim {
        let mut e = alloc::vec![0.0; dim];
        e[k] = 1.0;
        let c = dot(&e, v);
        e.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
        for q in &basis {
            let c = dot(&e, q);
            e.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let n = norm(&e);
        if n > 1e-8 {
            basis.push(e.iter().map(|x| x / n).collect());
        }
        if basis.len() == dim - 1 {
            break;
        }
    }
    basis
}

impl ClosedSetSpec {
    pub fn point(dim: usize) -> Self {
        ClosedSetSpec::Point(alloc::vec![0.0; dim])
    }

    pub fn unit_sphere(dim: usize) -> Self {
        ClosedSetSpec::Sphere { center: alloc::vec![0.0; dim], radius: 1.0 }
    }

    /// `R^{N-1} × {0}`.
    pub fn hyperplane(dim: usize) -> Self {
        let mut normal = alloc::vec![0.0; dim];
        normal[dim - 1] = 1.0;
        ClosedSetSpec::Hyperplane { normal, offset: 0.0 }
    }

    /// Segment of length 2 along the first axis, centered at the origin.
    pub fn segment(dim: usize) -> Self {
        let mut a = alloc::vec![0.0; dim];
        let mut b = alloc::vec![0.0; dim];
        a[0] = -1.0;
        b[0] = 1.0;
        ClosedSetSpec::Segment { a, b }
    }

    pub fn label(&self) -> String {
        match self {
            ClosedSetSpec::Point(_) => String::from("point"),
            ClosedSetSpec::Sphere { radius, .. } => alloc::format!("sphere(R={radius})"),
            ClosedSetSpec::Hyperplane { .. } => String::from("hyperplane"),
            ClosedSetSpec::Segment { a, b } => alloc::format!("segment(len={})", norm(&sub(b, a))),
            ClosedSetSpec::PointCloud(p) => alloc::format!("cloud({})", p.len()),
            ClosedSetSpec::Ball { radius, .. } => alloc::format!("ball(R={radius})"),
            ClosedSetSpec::Union(parts) => {
                let l: Vec<String> = parts.iter().map(|p| p.label()).collect();
                alloc::format!("union[{}]", l.join(", "))
            }
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let check = |v: &[f64]| -> Result<()> {
            if v.len() != dim {
                return Err(param_err!("set coordinate has {} entries in R^{dim}", v.len()));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(param_err!("non-finite set coordinate"));
            }
            Ok(())
        };
        match self {
            ClosedSetSpec::Point(x) => check(x),
            ClosedSetSpec::Sphere { center, radius } | ClosedSetSpec::Ball { center, radius } => {
                check(center)?;
                if !(*radius > 0.0) {
                    return Err(param_err!("radius must be positive, got {radius}"));
                }
                Ok(())
            }
            ClosedSetSpec::Hyperplane { normal, .. } => {
                check(normal)?;
                if norm(normal) == 0.0 {
                    return Err(param_err!("hyperplane normal must be non-zero"));
                }
                Ok(())
            }
            ClosedSetSpec::Segment { a, b } => {
                check(a)?;
                check(b)
            }
            ClosedSetSpec::PointCloud(ps) => {
                if ps.is_empty() {
                    return Err(param_err!("empty point cloud"));
                }
                ps.iter().try_for_each(|p| check(p))
            }
            ClosedSetSpec::Union(parts) => {
                if parts.is_empty() {
                    return Err(param_err!("empty union"));
                }
                parts.iter().try_for_each(|p| p.validate(dim))
            }
        }
    }

    /// Euclidean distance `δ_E(x)`.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            ClosedSetSpec::Point(p) => norm(&sub(x, p)),
            ClosedSetSpec::Sphere { center, radius } => (norm(&sub(x, center)) - radius).abs(),
            ClosedSetSpec::Ball { center, radius } => (norm(&sub(x, center)) - radius).max(0.0),
            ClosedSetSpec::Hyperplane { normal, offset } => (dot(x, normal) / norm(normal) - offset).abs(),
            ClosedSetSpec::Segment { a, b } => {
                let ab = sub(b, a);
                let l2 = dot(&ab, &ab);
                let t = if l2 == 0.0 { 0.0 } else { (dot(&sub(x, a), &ab) / l2).clamp(0.0, 1.0) };
                x.iter().zip(a.iter().zip(&ab)).map(|(xi, (ai, di))| (xi - ai - t * di).powi(2)).sum::<f64>().sqrt()
            }
            ClosedSetSpec::PointCloud(ps) => ps.iter().map(|p| norm(&sub(x, p))).fold(f64::INFINITY, f64::min),
            ClosedSetSpec::Union(parts) => parts.iter().map(|p| p.distance(x)).fold(f64::INFINITY, f64::min),
        }
    }

    /// Assouad dimension of the analytic kinds (`N` for the solid ball).
    pub fn nominal_dimension(&self, dim: usize) -> f64 {
        match self {
            ClosedSetSpec::Point(_) | ClosedSetSpec::PointCloud(_) => 0.0,
            ClosedSetSpec::Sphere { .. } | ClosedSetSpec::Hyperplane { .. } => (dim - 1) as f64,
            ClosedSetSpec::Segment { a, b } => {
                if norm(&sub(b, a)) > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ClosedSetSpec::Ball { .. } => dim as f64,
            ClosedSetSpec::Union(parts) => parts.iter().map(|p| p.nominal_dimension(dim)).fold(0.0, f64::max),
        }
    }

    /// Diameter of the set (`+inf` when unbounded).
    pub fn diameter(&self) -> f64 {
        match self {
            ClosedSetSpec::Point(_) => 0.0,
            ClosedSetSpec::Sphere { radius, .. } | ClosedSetSpec::Ball { radius, .. } => 2.0 * radius,
            ClosedSetSpec::Hyperplane { .. } => f64::INFINITY,
            ClosedSetSpec::Segment { a, b } => norm(&sub(b, a)),
            ClosedSetSpec::PointCloud(ps) => {
                let mut d = 0.0f64;
                for i in 0..ps.len() {
                    for j in 0..i {
                        d = d.max(norm(&sub(&ps[i], &ps[j])));
                    }
                }
                d
            }
            ClosedSetSpec::Union(parts) => {
                if parts.iter().any(|p| p.diameter().is_infinite()) {
                    return f64::INFINITY;
                }
                let reps: Vec<Vec<f64>> = parts.iter().flat_map(|p| p.base_points(4)).collect();
                let mut d = parts.iter().map(|p| p.diameter()).fold(0.0, f64::max);
                for i in 0..reps.len() {
                    for j in 0..i {
                        d = d.max(norm(&sub(&reps[i], &reps[j])));
                    }
                }
                d
            }
        }
    }

    /// Direction `e` such that `δ_E(c + y)` depends only on `|y|` and `y · e`,
    /// when such an axis exists. `Some(None)` means `δ_E(c + y)` is radial.
    pub fn axis_through(&self, c: &[f64]) -> Option<Option<Vec<f64>>> {
        let axial = |p: &[f64]| {
            let d = sub(p, c);
            if norm(&d) < 1e-14 {
                Some(None)
            } else {
                Some(Some(unit(&d)))
            }
        };
        match self {
            ClosedSetSpec::Point(p) => axial(p),
            ClosedSetSpec::Sphere { center, .. } | ClosedSetSpec::Ball { center, .. } => axial(center),
            ClosedSetSpec::Hyperplane { normal, .. } => Some(Some(unit(normal))),
            ClosedSetSpec::Segment { a, b } => {
                let ab = sub(b, a);
                let ac = sub(c, a);
                let l = norm(&ab);
                if l == 0.0 {
                    return axial(a);
                }
                let t = dot(&ac, &ab) / (l * l);
                let off: f64 = ac.iter().zip(&ab).map(|(x, y)| (x - t * y).powi(2)).sum::<f64>().sqrt();
                (off < 1e-12 * (1.0 + l)).then(|| Some(unit(&ab)))
            }
            ClosedSetSpec::PointCloud(ps) if ps.len() == 1 => axial(&ps[0]),
            _ => None,
        }
    }

    /// `n` representative points of `E`, spread over the set.
    pub fn base_points(&self, n: usize) -> Vec<Vec<f64>> {
        let n = n.max(1);
        match self {
            ClosedSetSpec::Point(p) => alloc::vec![p.clone()],
            ClosedSetSpec::Sphere { center, radius } | ClosedSetSpec::Ball { center, radius } => {
                let dim = center.len();
                let solid = matches!(self, ClosedSetSpec::Ball { .. });
                (0..n)
                    .map(|k| {
                        // Golden-angle spiral on the great 2-sphere of the first three axes.
                        let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
                        let rho = (1.0 - z * z).sqrt();
                        let phi = k as f64 * PI * (3.0 - 5f64.sqrt());
                        let mut x = center.clone();
                        let scale = if solid { radius * (k as f64 / n as f64) } else { *radius };
                        let dirs = [rho * phi.cos(), rho * phi.sin(), z];
                        for (i, d) in dirs.iter().enumerate().take(dim) {
                            x[i] += scale * d;
                        }
                        if dim < 3 {
                            let nrm = norm(&sub(&x, center));
                            if nrm > 0.0 && !solid {
                                for i in 0..dim {
                                    x[i] = center[i] + (x[i] - center[i]) * radius / nrm;
                                }
                            }
                        }
                        x
                    })
                    .collect()
            }
            ClosedSetSpec::Hyperplane { normal, offset } => {
                let e = unit(normal);
                let basis = complement_basis(&e);
                (0..n)
                    .map(|k| {
                        let mut x: Vec<f64> = e.iter().map(|v| v * offset).collect();
                        let t = k as f64 * 1.7;
                        for (j, b) in basis.iter().enumerate() {
                            let c = if j % 2 == 0 { t } else { -0.5 * t };
                            x.iter_mut().zip(b).for_each(|(a, v)| *a += c * v);
                        }
                        x
                    })
                    .collect()
            }
            ClosedSetSpec::Segment { a, b } => (0..n)
                .map(|k| {
                    let t = if n == 1 { 0.5 } else { 0.25 + 0.5 * k as f64 / (n - 1) as f64 };
                    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
                })
                .collect(),
            ClosedSetSpec::PointCloud(ps) => {
                let step = (ps.len() / n).max(1);
                ps.iter().step_by(step).take(n).cloned().collect()
            }
            ClosedSetSpec::Union(parts) => {
                let per = n.div_ceil(parts.len());
                parts.iter().flat_map(|p| p.base_points(per)).take(n.max(parts.len())).collect()
            }
        }
    }

    /// Calls `f` on points of `E ∩ B_R(x)` forming an `h`-net of it: every
    /// point of the intersection lies within `h` of some emitted point.
    /// Returns the number of emitted points, or `None` past `limit`.
    pub fn for_each_sample<F: FnMut(&[f64])>(
        &self,
        x: &[f64],
        radius: f64,
        h: f64,
        limit: usize,
        f: &mut F,
    ) -> Option<usize> {
        let dim = x.len();
        let mut count = 0usize;
        let mut emit = |y: &[f64], f: &mut F| -> bool {
            count += 1;
            f(y);
            count <= limit
        };
        match self {
            ClosedSetSpec::Point(p) => {
                if norm(&sub(p, x)) <= radius {
                    emit(p, f);
                }
            }
            ClosedSetSpec::PointCloud(ps) => {
                for p in ps {
                    if norm(&sub(p, x)) <= radius && !emit(p, f) {
                        return None;
                    }
                }
            }
            ClosedSetSpec::Segment { a, b } => {
                let ab = sub(b, a);
                let l = norm(&ab);
                let steps = (l / h).ceil().max(1.0) as usize;
                let mut y = alloc::vec![0.0; dim];
                for k in 0..=steps {
                    let t = k as f64 / steps as f64;
                    y.iter_mut().zip(a.iter().zip(&ab)).for_each(|(yi, (ai, di))| *yi = ai + t * di);
                    if norm(&sub(&y, x)) <= radius + h && !emit(&y, f) {
                        return None;
                    }
                }
            }
            ClosedSetSpec::Hyperplane { normal, offset } => {
                let e = unit(normal);
                let basis = complement_basis(&e);
                let c = dot(x, &e) - offset;
                let foot: Vec<f64> = x.iter().zip(&e).map(|(xi, ei)| xi - c * ei).collect();
                let rr = radius * radius - c * c;
                if rr < 0.0 {
                    return Some(0);
                }
                let rho = rr.sqrt();
                // Lattice spacing 2h/sqrt(k) keeps the covering radius at h.
                let k = basis.len();
                let step = 2.0 * h / (k as f64).sqrt();
                let m = (rho / step).ceil() as i64 + 1;
                let mut idx = alloc::vec![-m; k];
                let mut y = alloc::vec![0.0; dim];
                loop {
                    let r2: f64 = idx.iter().map(|i| (*i as f64 * step).powi(2)).sum();
                    if r2.sqrt() <= rho + h {
                        y.copy_from_slice(&foot);
                        for (i, b) in idx.iter().zip(&basis) {
                            let t = *i as f64 * step;
                            y.iter_mut().zip(b).for_each(|(a, v)| *a += t * v);
                        }
                        if !emit(&y, f) {
                            return None;
                        }
                    }
                    let mut j = 0;
                    while j < k {
                        idx[j] += 1;
                        if idx[j] <= m {
                            break;
                        }
                        idx[j] = -m;
                        j += 1;
                    }
                    if j == k {
                        break;
                    }
                }
            }
            ClosedSetSpec::Sphere { center, radius: big } => {
                // Rings of constant polar angle about the axis through x; every
                // point of a ring is equidistant from x.
                let d = sub(x, center);
                let dn = norm(&d);
                let axis = if dn > 0.0 {
                    unit(&d)
                } else {
                    let mut e = alloc::vec![0.0; dim];
                    e[0] = 1.0;
                    e
                };
                let basis = complement_basis(&axis);
                // Ring spacing and in-ring spacing sqrt(2) h keep the covering radius near h.
                let rings = ((PI * big / (core::f64::consts::SQRT_2 * h)).ceil() as usize).max(1);
                let mut y = alloc::vec![0.0; dim];
                let mut dirs: Vec<Vec<f64>> = Vec::new();
                for ri in 0..=rings {
                    let theta = PI * ri as f64 / rings as f64;
                    let (s, c) = theta.sin_cos();
                    let ring_r = big * s;
                    if (dn - big * c).hypot(ring_r) > radius + h {
                        continue;
                    }
                    if basis.len() == 2 && ring_r >= 1e-12 * big {
                        let m = ((2.0 * PI * ring_r / (core::f64::consts::SQRT_2 * h)).ceil() as usize).max(1);
                        for j in 0..m {
                            let (sp, cp) = (2.0 * PI * j as f64 / m as f64).sin_cos();
                            for i in 0..dim {
                                y[i] = center[i] + big * c * axis[i] + ring_r * (cp * basis[0][i] + sp * basis[1][i]);
                            }
                            if !emit(&y, f) {
                                return None;
                            }
                        }
                        continue;
                    }
                    if ring_r < 1e-12 * big {
                        dirs.clear();
                        dirs.push(alloc::vec![0.0; basis.len()]);
                    } else {
                        sphere_directions(basis.len(), (h / ring_r).min(PI), &mut dirs);
                    }
                    for w in dirs.iter() {
                        y.copy_from_slice(center);
                        y.iter_mut().zip(&axis).for_each(|(a, v)| *a += big * c * v);
                        for (wi, b) in w.iter().zip(&basis) {
                            y.iter_mut().zip(b).for_each(|(a, v)| *a += ring_r * wi * v);
                        }
                        if !emit(&y, f) {
                            return None;
                        }
                    }
                }
            }
            ClosedSetSpec::Ball { center, radius: big } => {
                let step = 2.0 * h / (dim as f64).sqrt();
                let lo: Vec<f64> = x.iter().zip(center).map(|(a, c)| (a - radius).max(c - big)).collect();
                let hi: Vec<f64> = x.iter().zip(center).map(|(a, c)| (a + radius).min(c + big)).collect();
                let counts: Vec<i64> = lo.iter().zip(&hi).map(|(l, u)| ((u - l) / step).ceil().max(0.0) as i64).collect();
                let mut idx = alloc::vec![0i64; dim];
                let mut y = alloc::vec![0.0; dim];
                loop {
                    for i in 0..dim {
                        y[i] = lo[i] + idx[i] as f64 * step;
                    }
                    if self.distance(&y) <= h && norm(&sub(&y, x)) <= radius + h && !emit(&y, f) {
                        return None;
                    }
                    let mut j = 0;
                    while j < dim {
                        idx[j] += 1;
                        if idx[j] <= counts[j] {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                    if j == dim {
                        break;
                    }
                }
            }
            ClosedSetSpec::Union(parts) => {
                let mut total = 0;
                for p in parts {
                    total += p.for_each_sample(x, radius, h, limit.saturating_sub(total), f)?;
                }
                return Some(total);
            }
        }
        Some(count)
    }
}

/// Unit vectors of `R^k` with angular spacing at most `dtheta` (a net of `S^{k-1}`).
fn sphere_directions(k: usize, dtheta: f64, out: &mut Vec<Vec<f64>>) {
    out.clear();
    match k {
        0 => out.push(Vec::new()),
        1 => {
            out.push(alloc::vec![1.0]);
            out.push(alloc::vec![-1.0]);
        }
        2 => {
            let m = ((2.0 * PI / dtheta).ceil() as usize).max(1);
            for j in 0..m {
                let phi = 2.0 * PI * j as f64 / m as f64;
                out.push(alloc::vec![phi.cos(), phi.sin()]);
            }
        }
        _ => {
            let rings = ((PI / dtheta).ceil() as usize).max(1);
            let mut inner = Vec::new();
            for ri in 0..=rings {
                let theta = PI * ri as f64 / rings as f64;
                let (s, c) = theta.sin_cos();
                if s < 1e-12 {
                    let mut v = alloc::vec![0.0; k];
                    v[0] = c;
                    out.push(v);
                    continue;
                }
                sphere_directions(k - 1, (dtheta / s).min(PI), &mut inner);
                for w in &inner {
                    let mut v = Vec::with_capacity(k);
                    v.push(c);
                    v.extend(w.iter().map(|x| s * x));
                    out.push(v);
                }
            }
        }
    }
}

/// Order of the log-Hardy inequality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Order {
    First,
    Second,
}

/// One dimension bound of the weighted Sobolev lemma behind the log-Hardy
/// inequalities, instantiated at a given `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionCondition {
    pub bound: f64,
    pub holds: bool,
}

/// Admissible interval for `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentWindow {
    pub dim: usize,
    pub p: f64,
    pub d: f64,
    pub order: Order,
    pub lower: f64,
    pub upper: f64,
    pub feasible: bool,
    /// Why the window is empty, when it is.
    pub reason: Option<String>,
}

impl ExponentWindow {
    pub fn contains(&self, a: f64) -> bool {
        self.feasible && a > self.lower && a < self.upper
    }

    /// The two dimension bounds that `d` must beat at exponent `a`.
    pub fn conditions(&self, a: f64) -> [DimensionCondition; 2] {
        let n = self.dim as f64;
        let p = self.p;
        let ps = n * p / (n - p);
        let bounds = match self.order {
            Order::First => [ps / p * (n - p - p * a), n + p * a / (p - 1.0)],
            Order::Second => [n - p + (1.0 - a) * p, n - (1.0 - a) * p / (p - 1.0)],
        };
        bounds.map(|bound| DimensionCondition { bound, holds: self.d < bound })
    }
}

/// `a`-window for the first order inequality,
/// `(-(N-d)(p-1)/p, (N-p)(N-d)/(Np))`, or for the second order one,
/// `(1 - (N-d)(p-1)/p, (N-p)(N-d)/(Np))` with `p < N/2` and
/// `d < N(N-2p)/(N-p)`.
pub fn admissible_exponent_range(dim: usize, p: f64, d: f64, order: Order) -> Result<ExponentWindow> {
    let n = dim as f64;
    if dim < 3 {
        return Err(param_err!("dimension N = {dim} must be at least 3"));
    }
    if !(p > 1.0 && p < n) {
        return Err(param_err!("p = {p} must lie in (1, N) = (1, {n})"));
    }
    if !(d >= 0.0 && d <= n) {
        return Err(param_err!("Assouad dimension d = {d} must lie in [0, N]"));
    }
    let upper = (n - p) * (n - d) / (n * p);
    let base = (n - d) * (p - 1.0) / p;
    let (lower, reason) = match order {
        Order::First => (-base, (d >= n).then(|| alloc::format!("d = {d} is not below N = {n}"))),
        Order::Second => {
            let dmax = n * (n - 2.0 * p) / (n - p);
            let reason = if !(p < 0.5 * n) {
                Some(alloc::format!("second order needs p < N/2 = {}, got p = {p}", 0.5 * n))
            } else if !(d < dmax) {
                Some(alloc::format!("second order needs d < N(N-2p)/(N-p) = {dmax}, got d = {d}"))
            } else {
                None
            };
            (1.0 - base, reason)
        }
    };
    let reason = reason.or_else(|| (lower >= upper).then(|| alloc::format!("empty interval ({lower}, {upper})")));
    Ok(ExponentWindow { dim, p, d, order, lower, upper, feasible: reason.is_none(), reason })
}
