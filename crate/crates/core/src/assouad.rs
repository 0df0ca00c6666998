//! Covering numbers `η(E ∩ B_R(x), r)`, sampled Assouad dimension and
//! porosity of closed sets.

use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::error::{param_err, Error, Result};
use crate::geometry::ClosedSetSpec;
use crate::grid::Flags;
use crate::math::linear_fit;
use crate::sphere::sphere_rule;
#[allow(unused_imports)]
use crate::float::Real;

const MAX_DIM: usize = 6;

type Cell = [i64; MAX_DIM];

fn cell_of(y: &[f64], size: f64) -> Cell {
    let mut c = [0i64; MAX_DIM];
    for (ci, yi) in c.iter_mut().zip(y) {
        *ci = (yi / size).floor() as i64;
    }
    c
}

/// Point set with a uniform spatial hash; answers "is any stored point
/// within `radius` of y" for `radius ≤ cell size`.
struct SpatialHash {
    size: f64,
    dim: usize,
    cells: HashMap<Cell, Vec<usize>>,
    points: Vec<f64>,
    /// Last point that answered a query; samples arrive in lattice order.
    hint: Option<usize>,
}

impl SpatialHash {
    fn new(dim: usize, size: f64) -> Self {
        SpatialHash { size, dim, cells: HashMap::new(), points: Vec::new(), hint: None }
    }

    fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    fn dist2(&self, i: usize, y: &[f64]) -> f64 {
        let p = &self.points[i * self.dim..(i + 1) * self.dim];
        p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    fn any_within(&mut self, y: &[f64], radius: f64) -> bool {
        let r2 = radius * radius;
        if let Some(i) = self.hint {
            if self.dist2(i, y) < r2 {
                return true;
            }
        }
        let base = cell_of(y, self.size);
        let mut offset = [-1i64; MAX_DIM];
        loop {
            let mut key = base;
            for k in 0..self.dim {
                key[k] += offset[k];
            }
            if let Some(ids) = self.cells.get(&key) {
                for &i in ids {
                    if self.dist2(i, y) < r2 {
                        self.hint = Some(i);
                        return true;
                    }
                }
            }
            let mut k = 0;
            while k < self.dim {
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
            if k == self.dim {
                return false;
            }
        }
    }

    fn insert(&mut self, y: &[f64]) {
        let id = self.len();
        self.points.extend_from_slice(y);
        self.cells.entry(cell_of(y, self.size)).or_default().push(id);
        self.hint = Some(id);
    }
}

/// Bounds `lower ≤ η(E ∩ B_R(x), r) ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoveringBounds {
    /// Size of a 2r-separated subset (no r-ball holds two of its points).
    pub lower: usize,
    /// Size of a cover by r-balls.
    pub upper: usize,
    pub samples: usize,
}

/// Default cap on the number of sample points per covering computation.
pub const SAMPLE_LIMIT: usize = 20_000_000;

/// Greedy net and greedy packing over an `r/4`-dense sample of `E ∩ B_R(x)`.
///
/// Every point of the intersection lies within `h = r/4` of a sample and
/// every sample lies within `r - 1.01 h` of a net center, so the net centers
/// cover with open `r`-balls.
pub fn covering_number_bounds(e: &ClosedSetSpec, x: &[f64], big_r: f64, r: f64) -> Result<CoveringBounds> {
    let dim = x.len();
    if dim == 0 || dim > MAX_DIM {
        return Err(param_err!("covering supports 1 <= N <= {MAX_DIM}, got N = {dim}"));
    }
    e.validate(dim)?;
    if !(r > 0.0 && r < big_r) {
        return Err(param_err!("radii must satisfy 0 < r < R, got r = {r}, R = {big_r}"));
    }
    let diam = e.diameter();
    if diam > 0.0 && !(big_r < diam) {
        return Err(param_err!("R = {big_r} must be below diam(E) = {diam}"));
    }
    let h = 0.25 * r;
    let net_r = r - 1.01 * h;
    let mut net = SpatialHash::new(dim, net_r);
    let mut pack = SpatialHash::new(dim, 2.0 * r);
    let r2 = big_r * big_r;
    let samples = e.for_each_sample(x, big_r, h, SAMPLE_LIMIT, &mut |y| {
        if !net.any_within(y, net_r) {
            net.insert(y);
        }
        let d2: f64 = y.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 <= r2 && !pack.any_within(y, 2.0 * r) {
            pack.insert(y);
        }
    });
    let samples = samples.ok_or_else(|| {
        Error::InsufficientData(alloc::format!("more than {SAMPLE_LIMIT} samples needed at R/r = {}", big_r / r))
    })?;
    Ok(CoveringBounds { lower: pack.len().max(1), upper: net.len().max(1), samples })
}

/// Sampling plan for [`assouad_dimension_estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AssouadSampling {
    pub base_points: usize,
    pub pairs: usize,
    /// Outer radius `R`; defaults to `min(1, diam/2)` (or 1 when `diam` is 0 or infinite).
    pub radius: Option<f64>,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

impl Default for AssouadSampling {
    fn default() -> Self {
        AssouadSampling { base_points: 8, pairs: 12, radius: None, min_ratio: 3.0, max_ratio: 300.0 }
    }
}

impl AssouadSampling {
    pub fn outer_radius(&self, e: &ClosedSetSpec) -> f64 {
        self.radius.unwrap_or_else(|| {
            let d = e.diameter();
            if d > 0.0 && d.is_finite() {
                (0.5 * d).min(1.0)
            } else {
                1.0
            }
        })
    }

    /// `(R, r)` pairs with `R/r` geometric over `[min_ratio, max_ratio]`.
    pub fn radius_pairs(&self, e: &ClosedSetSpec) -> Vec<(f64, f64)> {
        let big_r = self.outer_radius(e);
        (0..self.pairs)
            .map(|k| {
                let t = if self.pairs > 1 { k as f64 / (self.pairs - 1) as f64 } else { 0.0 };
                let ratio = self.min_ratio * (self.max_ratio / self.min_ratio).powf(t);
                (big_r, big_r / ratio)
            })
            .collect()
    }
}

/// One covering computation.
#[derive(Debug, Clone, PartialEq)]
pub struct AssouadRow {
    pub base: usize,
    pub x: Vec<f64>,
    pub big_r: f64,
    pub r: f64,
    pub lower: usize,
    pub upper: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssouadEstimate {
    /// Largest upper-count slope over the base points, clamped to `[0, N]`.
    pub dim: f64,
    /// Same from the packing counts.
    pub dim_lower: f64,
    /// Upper-count slope per base point.
    pub per_base: Vec<f64>,
    /// `max - min` of the per-base slopes.
    pub spread: f64,
    pub rows: Vec<AssouadRow>,
    pub flags: Flags,
}

/// Covering rows for a single base point.
pub fn covering_rows(e: &ClosedSetSpec, base: usize, x: &[f64], sampling: &AssouadSampling) -> Result<Vec<AssouadRow>> {
    sampling
        .radius_pairs(e)
        .into_iter()
        .map(|(big_r, r)| {
            let b = covering_number_bounds(e, x, big_r, r)?;
            Ok(AssouadRow { base, x: x.to_vec(), big_r, r, lower: b.lower, upper: b.upper })
        })
        .collect()
}

/// Fits `ln η` against `ln(R/r)` per base point and takes the sup.
pub fn assemble_estimate(dim: usize, rows: Vec<AssouadRow>) -> Result<AssouadEstimate> {
    let bases = rows.iter().map(|r| r.base).max().map_or(0, |b| b + 1);
    let mut per_base = Vec::with_capacity(bases);
    let mut lower_slopes = Vec::with_capacity(bases);
    for b in 0..bases {
        let rs: Vec<&AssouadRow> = rows.iter().filter(|r| r.base == b).collect();
        if rs.len() < 3 {
            return Err(Error::InsufficientData(alloc::format!(
                "base point {b} has {} radius pairs, need at least 3",
                rs.len()
            )));
        }
        let xs: Vec<f64> = rs.iter().map(|r| (r.big_r / r.r).ln()).collect();
        let up: Vec<f64> = rs.iter().map(|r| (r.upper as f64).ln()).collect();
        let lo: Vec<f64> = rs.iter().map(|r| (r.lower as f64).ln()).collect();
        per_base.push(linear_fit(&xs, &up).0.clamp(0.0, dim as f64));
        lower_slopes.push(linear_fit(&xs, &lo).0.clamp(0.0, dim as f64));
    }
    if per_base.is_empty() {
        return Err(Error::InsufficientData(alloc::string::String::from("no base points")));
    }
    let hi = per_base.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = per_base.iter().copied().fold(f64::INFINITY, f64::min);
    let dim_lower = lower_slopes.iter().copied().fold(0.0, f64::max);
    Ok(AssouadEstimate { dim: hi, dim_lower, per_base, spread: hi - lo, rows, flags: Flags::LOWER_BOUND })
}

/// Sampled `dim_A(E)`: the sup over base points of the log-log slope of the
/// upper covering counts. A lower estimate of the true sup over all centers
/// and scales.
pub fn assouad_dimension_estimate(e: &ClosedSetSpec, dim: usize, sampling: &AssouadSampling) -> Result<AssouadEstimate> {
    e.validate(dim)?;
    if sampling.pairs < 3 {
        return Err(Error::InsufficientData(alloc::format!("{} radius pairs, need at least 3", sampling.pairs)));
    }
    let mut rows = Vec::new();
    for (b, x) in e.base_points(sampling.base_points).iter().enumerate() {
        rows.extend(covering_rows(e, b, x, sampling)?);
    }
    assemble_estimate(dim, rows)
}

/// Sampling plan for [`porosity_constant`].
#[derive(Debug, Clone, PartialEq)]
pub struct PorositySampling {
    pub base_points: usize,
    pub radii: Vec<f64>,
}

impl Default for PorositySampling {
    fn default() -> Self {
        PorositySampling { base_points: 8, radii: alloc::vec![0.5, 0.25, 0.1, 0.05, 0.01] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Porosity {
    /// Minimum over samples of the best hole ratio found.
    pub alpha: f64,
    /// `(x, r)` where the minimum is attained.
    pub witness: Option<(Vec<f64>, f64)>,
    pub per_sample: Vec<f64>,
}

/// Largest `α` with a ball `B_{αr}(y) ⊂ B_r(x) \ E` at every sampled `(x, r)`.
/// Candidates are `y = x + t r v` over a direction net and `t ∈ {0.1, ..., 0.9}`;
/// each scores `min(1 - t, δ_E(y)/r)`.
pub fn porosity_constant(e: &ClosedSetSpec, dim: usize, sampling: &PorositySampling) -> Result<Porosity> {
    e.validate(dim)?;
    let diam = e.diameter();
    let mut dirs: Vec<Vec<f64>> = sphere_rule(dim, 6).points;
    for k in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = alloc::vec![0.0; dim];
            v[k] = s;
            dirs.push(v);
        }
    }
    let mut per_sample = Vec::new();
    let mut alpha = f64::INFINITY;
    let mut witness = None;
    let mut y = alloc::vec![0.0; dim];
    for x in e.base_points(sampling.base_points) {
        for &r in &sampling.radii {
            if diam > 0.0 && r >= diam {
                continue;
            }
            let mut best = 0.0f64;
            for v in &dirs {
                for k in 1..10 {
                    let t = 0.1 * k as f64;
                    y.iter_mut().zip(x.iter().zip(v)).for_each(|(yi, (xi, vi))| *yi = xi + t * r * vi);
                    best = best.max((1.0 - t).min(e.distance(&y) / r));
                }
            }
            per_sample.push(best);
            if best < alpha {
                alpha = best;
                witness = Some((x.clone(), r));
            }
        }
    }
    if per_sample.is_empty() {
        return Err(Error::InsufficientData(alloc::string::String::from("no admissible (x, r) samples")));
    }
    let witness = if alpha <= 0.0 { witness } else { None };
    Ok(Porosity { alpha, witness, per_sample })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_has_dimension_zero() {
        let e = ClosedSetSpec::point(3);
        let b = covering_number_bounds(&e, &[0.0; 3], 1.0, 0.01).unwrap();
        assert_eq!((b.lower, b.upper), (1, 1));
        let est = assouad_dimension_estimate(&e, 3, &AssouadSampling::default()).unwrap();
        assert_eq!(est.dim, 0.0);
    }

    #[test]
    fn flat_and_segment_counts() {
        let e = ClosedSetSpec::hyperplane(3);
        let b = covering_number_bounds(&e, &[0.0; 3], 1.0, 0.25).unwrap();
        // [lower, upper] meets [16, 64] = c·(R/r)^2 for c ∈ [1, 4].
        assert!(b.lower <= b.upper);
        assert!(b.upper >= 16 && b.lower <= 64, "{b:?}");
        let s = ClosedSetSpec::segment(3);
        let b = covering_number_bounds(&s, &[0.0; 3], 1.0, 0.25).unwrap();
        assert!(b.upper >= 4 && b.lower <= 8, "{b:?}");
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn preconditions() {
        let s = ClosedSetSpec::segment(3);
        assert!(covering_number_bounds(&s, &[0.0; 3], 3.0, 0.25).is_err());
        assert!(covering_number_bounds(&s, &[0.0; 3], 1.0, 1.5).is_err());
        let few = AssouadSampling { pairs: 2, ..AssouadSampling::default() };
        assert!(matches!(assouad_dimension_estimate(&s, 3, &few), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn segment_dimension() {
        let sampling = AssouadSampling { base_points: 3, ..AssouadSampling::default() };
        let est = assouad_dimension_estimate(&ClosedSetSpec::segment(3), 3, &sampling).unwrap();
        assert!((est.dim - 1.0).abs() < 0.1, "{est:?}");
        assert!((est.dim - est.dim_lower).abs() < 0.2);
    }

    #[test]
    fn porosity_examples() {
        let p = porosity_constant(&ClosedSetSpec::unit_sphere(3), 3, &PorositySampling::default()).unwrap();
        assert!(p.alpha >= 0.25, "{p:?}");
        let p = porosity_constant(&ClosedSetSpec::hyperplane(3), 3, &PorositySampling::default()).unwrap();
        assert!(p.alpha >= 0.25);
        let solid = ClosedSetSpec::Ball { center: alloc::vec![0.0; 3], radius: 1.0 };
        let p = porosity_constant(&solid, 3, &PorositySampling::default()).unwrap();
        assert_eq!(p.alpha, 0.0);
        assert!(p.witness.is_some());
    }
}
