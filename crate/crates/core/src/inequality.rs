//! Left side, right side and residual of each inequality, in homogeneous form.
//!
//! Functionals are evaluated at `ũ = u / A^{1/p}` with `A` the relevant
//! weighted `L^p` mass, so every residual is invariant under `u ← c u`.
//! Throughout `0 log 0 = 0`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::capacity::c_h;
use crate::error::{domain_err, param_err, Result};
use crate::geometry::{admissible_exponent_range, perpendicular, ClosedSetSpec, ExponentWindow, Order};
use crate::grid::{Flags, GridFunction, Quadrature, RadialGrid, WeightProfile};
use crate::math::{composite_gauss, unit_ball_volume, Fnv};
use crate::params::critical_exponent;
use crate::rearrange::{log_lorentz_entropy, lorentz_quasinorm};
use crate::sphere::{axial_rule, sphere_rule};
use crate::weight::WeightSpec;
#[allow(unused_imports)]
use crate::float::Real;

/// Quadrature masses of `g dx` attached to the samples of a profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Radial { grid: Arc<RadialGrid>, weight: WeightProfile },
    Tensor(TensorMeasure),
}

/// Product-grid masses, row-major with `cols` samples per row.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMeasure {
    pub masses: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    /// Cells per octave along each axis, for the outer tail charge.
    pub per_octave: u32,
}

impl Measure {
    pub fn integrate<F: Fn(usize) -> f64>(&self, f: F) -> Quadrature {
        match self {
            Measure::Radial { grid, weight } => grid.integrate(Some(weight), f),
            Measure::Tensor(t) => t.integrate(f),
        }
    }
}

impl TensorMeasure {
    /// Sum with an even/odd Richardson estimate along both axes and a
    /// charge for mass on the outermost row and column.
    pub fn integrate<F: Fn(usize) -> f64>(&self, f: F) -> Quadrature {
        let mut total = 0.0;
        let mut halves = [[0.0; 2]; 2];
        let mut abs_sum = 0.0;
        let mut edge = 0.0;
        let mut flags = Flags::empty();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let k = i * self.cols + j;
                let m = self.masses[k];
                if m == 0.0 {
                    continue;
                }
                let t = m * f(k);
                if !t.is_finite() {
                    flags |= Flags::NON_INTEGRABLE | Flags::DIVERGENT;
                    continue;
                }
                total += t;
                halves[0][i % 2] += t;
                halves[1][j % 2] += t;
                abs_sum += t.abs();
                if i + 1 == self.rows || j + 1 == self.cols {
                    edge += t.abs();
                }
            }
        }
        if flags.contains(Flags::DIVERGENT) {
            return Quadrature { value: f64::INFINITY, error: f64::INFINITY, flags };
        }
        if edge > 1e-12 * abs_sum {
            flags |= Flags::TRUNCATED;
        }
        let richardson = (halves[0][0] - halves[0][1]).abs() + (halves[1][0] - halves[1][1]).abs();
        let error = richardson + edge * self.per_octave as f64 + 4.0 * f64::EPSILON * abs_sum;
        Quadrature { value: total, error, flags }
    }
}

/// A sampled test function on `R^N` with a quadrature measure and a
/// gradient.
pub trait Profile {
    fn dim(&self) -> usize;
    fn samples(&self) -> &[f64];
    fn flags(&self) -> Flags;
    /// Masses of `g dx` (Lebesgue for `None`) at the samples.
    fn measure(&self, weight: Option<&WeightSpec>) -> Result<Measure>;
    /// `|∇u|` at the samples.
    fn gradient_norm(&self) -> (Vec<f64>, Flags);
    fn fingerprint(&self) -> u64;

    /// `∫ |∇u|^p dx`.
    fn dirichlet(&self, p: f64) -> Result<Quadrature> {
        let (grad, flags) = self.gradient_norm();
        let m = self.measure(None)?;
        let mut q = m.integrate(|i| grad[i].abs().powf(p));
        q.flags |= flags | self.flags();
        Ok(q)
    }
}

fn is_constant_weight(g: &WeightSpec) -> bool {
    match g {
        WeightSpec::Power { alpha } => *alpha == 0.0,
        WeightSpec::Scaled { factor, inner } => *factor == 0.0 || is_constant_weight(inner),
        _ => false,
    }
}

/// Spherical means of `g` over spheres centered at `c` (not the origin).
fn offset_profile(g: &WeightSpec, grid: &Arc<RadialGrid>, c: &[f64]) -> Result<WeightProfile> {
    let dim = grid.dim();
    g.validate(dim)?;
    let rule = sphere_rule(dim, 10);
    let mut x = alloc::vec![0.0; dim];
    let values = grid
        .nodes()
        .iter()
        .map(|&s| {
            rule.mean(|w| {
                x.iter_mut().zip(c.iter().zip(w)).for_each(|(xi, (ci, wi))| *xi = ci + s * wi);
                g.eval(&x)
            })
        })
        .collect();
    Ok(WeightProfile { values, cap_mass: grid.cap_volume() * g.eval(c), cut: None })
}

impl Profile for GridFunction {
    fn dim(&self) -> usize {
        GridFunction::dim(self)
    }

    fn samples(&self) -> &[f64] {
        self.values()
    }

    fn flags(&self) -> Flags {
        GridFunction::flags(self)
    }

    fn measure(&self, weight: Option<&WeightSpec>) -> Result<Measure> {
        let grid = self.grid().clone();
        let weight = match (weight, self.center()) {
            (None, _) => WeightProfile::ones(&grid),
            (Some(g), Some(c)) if c.iter().any(|x| *x != 0.0) && !is_constant_weight(g) => {
                offset_profile(g, &grid, c)?
            }
            (Some(g), _) => g.profile(&grid)?,
        };
        Ok(Measure::Radial { grid, weight })
    }

    fn gradient_norm(&self) -> (Vec<f64>, Flags) {
        let (du, _, flags) = self.derivatives();
        (du.iter().map(|d| d.abs()).collect(), flags)
    }

    fn fingerprint(&self) -> u64 {
        let g = self.grid();
        let mut h = Fnv::default();
        h.f64(GridFunction::dim(self) as f64)
            .f64(g.cells_per_octave() as f64)
            .f64(g.inner_radius())
            .f64(g.len() as f64)
            .f64s(self.values());
        if let Some(c) = self.center() {
            h.f64s(c);
        }
        h.finish()
    }
}

/// Which inequality a report evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ReportKind {
    /// Entropy against the Hölder interpolation of `A` and `B`.
    Wls,
    InterpolationGap,
    LogHardy,
    LogHardySecondOrder,
    /// Log-Hardy entropy against the critical weighted integral.
    LogHardyChain,
    Hardy,
    LogSobolevLp,
    LorentzSobolev,
    LogLorentzSobolev,
    Mazya,
}

impl ReportKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReportKind::Wls => "wls",
            ReportKind::InterpolationGap => "interpolation-gap",
            ReportKind::LogHardy => "log-hardy",
            ReportKind::LogHardySecondOrder => "log-hardy-2",
            ReportKind::LogHardyChain => "log-hardy-chain",
            ReportKind::Hardy => "hardy",
            ReportKind::LogSobolevLp => "log-sobolev-lp",
            ReportKind::LorentzSobolev => "lorentz-sobolev",
            ReportKind::LogLorentzSobolev => "log-lorentz-sobolev",
            ReportKind::Mazya => "mazya",
        }
    }
}

/// The same inequality with the explicit constant, when one is available.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoremForm {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityReport {
    pub kind: ReportKind,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub residual: f64,
    pub constants: BTreeMap<String, f64>,
    /// Factor applied to `u` before evaluation.
    pub normalization_factor: f64,
    pub error_budget: f64,
    pub flags: Flags,
    pub input_hash: u64,
    pub theorem_form: Option<TheoremForm>,
}

impl InequalityReport {
    pub fn new(kind: ReportKind, lhs: f64, rhs: f64, error_budget: f64, flags: Flags) -> Self {
        InequalityReport {
            kind,
            lhs,
            rhs,
            residual: rhs - lhs,
            constants: BTreeMap::new(),
            normalization_factor: 1.0,
            error_budget,
            flags,
            input_hash: 0,
            theorem_form: None,
        }
    }

    pub fn constant(&mut self, name: &str, value: f64) -> &mut Self {
        self.constants.insert(String::from(name), value);
        self
    }

    /// `residual ≥ -error_budget`.
    pub fn holds(&self) -> bool {
        self.residual >= -self.error_budget
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(param_err!("exponent p = {p} must be positive"));
    }
    Ok(())
}

fn require_mass(a: &Quadrature) -> Result<()> {
    if a.value == 0.0 {
        return Err(domain_err!("weighted mass A = 0: u cannot be normalized"));
    }
    if !a.value.is_finite() {
        return Err(domain_err!("weighted mass A diverges"));
    }
    Ok(())
}

/// `A = ∫ |g| |u|^p dx`.
pub fn weight_mass<P: Profile + ?Sized>(u: &P, g: &WeightSpec, p: f64) -> Result<Quadrature> {
    check_p(p)?;
    let m = u.measure(Some(g))?;
    let v = u.samples();
    let mut q = m.integrate(|i| v[i].abs().powf(p));
    q.flags |= u.flags() & Flags::TRUNCATED;
    Ok(q)
}

/// `A^{-1/p}`, the factor taking `u` to unit weighted mass.
pub fn normalization_factor<P: Profile + ?Sized>(u: &P, g: &WeightSpec, p: f64) -> Result<f64> {
    let a = weight_mass(u, g, p)?;
    require_mass(&a)?;
    Ok(a.value.powf(-1.0 / p))
}

fn entropy_with(m: &Measure, v: &[f64], p: f64, a: &Quadrature) -> Quadrature {
    let ln_a = a.value.ln();
    let mut e = m.integrate(|i| {
        let x = v[i].abs();
        let t = x.powf(p);
        if t == 0.0 {
            0.0
        } else {
            t * (p * x.ln() - ln_a)
        }
    });
    e.error += a.error;
    e.flags |= a.flags;
    e
}

/// `∫ |g| |u|^p log(|u|^p / A) dx`.
pub fn entropy_term<P: Profile + ?Sized>(u: &P, g: &WeightSpec, p: f64) -> Result<Quadrature> {
    check_p(p)?;
    let m = u.measure(Some(g))?;
    let v = u.samples();
    let a = m.integrate(|i| v[i].abs().powf(p));
    require_mass(&a)?;
    Ok(entropy_with(&m, v, p, &a))
}

fn check_pr(p: f64, r: f64) -> Result<()> {
    if !(p > 1.0 && r > p && r.is_finite()) {
        return Err(param_err!("need 1 < p < r, got p = {p}, r = {r}"));
    }
    Ok(())
}

/// `A^{(r-q)/(r-p)} B^{(q-p)/(r-p)} - ∫ |g||u|^q` with `B = ∫ |g||u|^r`.
pub fn interpolation_gap<P: Profile + ?Sized>(u: &P, g: &WeightSpec, p: f64, r: f64, q: f64) -> Result<InequalityReport> {
    check_pr(p, r)?;
    if !(q >= p && q < r) {
        return Err(param_err!("interpolation exponent q = {q} must lie in [p, r) = [{p}, {r})"));
    }
    let m = u.measure(Some(g))?;
    let v = u.samples();
    let a = m.integrate(|i| v[i].abs().powf(p));
    let b = m.integrate(|i| v[i].abs().powf(r));
    let mid = m.integrate(|i| v[i].abs().powf(q));
    let theta = (r - q) / (r - p);
    let phi = (q - p) / (r - p);
    let rhs = a.value.powf(theta) * b.value.powf(phi);
    let rel = |x: &Quadrature| if x.value > 0.0 { x.error / x.value } else { 0.0 };
    let budget = rhs * (theta * rel(&a) + phi * rel(&b)) + mid.error;
    let mut flags = a.flags | mid.flags | u.flags() & Flags::TRUNCATED;
    if phi > 0.0 {
        flags |= b.flags;
    }
    let mut report = InequalityReport::new(ReportKind::InterpolationGap, mid.value, rhs, budget, flags);
    report.constant("p", p).constant("r", r).constant("q", q).constant("A", a.value).constant("B", b.value);
    report.input_hash = u.fingerprint();
    Ok(report)
}

/// Entropy–interpolation inequality at unit mass:
/// `∫ g|ũ|^p log|ũ|^p ≤ (p/(r-p)) log ∫ g|ũ|^r`.
///
/// With `norm` (a value of `‖g‖_{p,r}`) the report also carries the form with
/// the explicit constant, `(r/(r-p)) log(C_H ‖g‖^{p/r} ∫|∇ũ|^p)`; a negative
/// residual there is flagged inconclusive since ball-family norms are lower
/// bounds.
pub fn wls_residual<P: Profile + ?Sized>(
    u: &P,
    g: &WeightSpec,
    p: f64,
    r: f64,
    norm: Option<f64>,
) -> Result<InequalityReport> {
    check_pr(p, r)?;
    let m = u.measure(Some(g))?;
    let v = u.samples();
    let a = m.integrate(|i| v[i].abs().powf(p));
    require_mass(&a)?;
    let b = m.integrate(|i| v[i].abs().powf(r));
    let e = entropy_with(&m, v, p, &a);
    let k = p / (r - p);
    let lhs = e.value / a.value;
    let rhs = k * (b.value / a.value.powf(r / p)).ln();
    let ra = a.error / a.value;
    let budget = e.error / a.value + lhs.abs() * ra + k * (b.error / b.value + r / p * ra);
    let flags = a.flags | b.flags | e.flags | u.flags() & Flags::TRUNCATED;
    let mut report = InequalityReport::new(ReportKind::Wls, lhs, rhs, budget, flags);
    report.normalization_factor = a.value.powf(-1.0 / p);
    report.constant("p", p).constant("r", r).constant("A", a.value).constant("B", b.value);
    if let Some(norm) = norm {
        let ch = c_h(p)?;
        let d = u.dirichlet(p)?;
        let dn = d.value / a.value;
        let thm_rhs = r / (r - p) * (ch * norm.powf(p / r) * dn).ln();
        let mut tf = d.flags;
        if r > critical_exponent(u.dim(), p) * (1.0 + 1e-12) {
            tf |= Flags::OUTSIDE_WINDOW;
        }
        let residual = thm_rhs - lhs;
        if residual < -budget {
            tf |= Flags::INCONCLUSIVE;
        }
        report.theorem_form = Some(TheoremForm { lhs, rhs: thm_rhs, residual, flags: tf });
        report
            .constant("C_H", ch)
            .constant("norm", norm)
            .constant("C_H*norm^(p/r)", ch * norm.powf(p / r))
            .constant("C_H*norm", ch * norm)
            .constant("dirichlet", d.value);
    }
    report.input_hash = u.fingerprint();
    Ok(report)
}

/// The integrals entering the log-Hardy inequalities for `u` radial about
/// its center and `δ = δ_E`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogHardyTerms {
    /// `A_E = ∫ |u|^p δ^{-p(a+1)}`.
    pub mass: Quadrature,
    /// `∫ |u|^p δ^{-p(a+1)} log(δ^{N-p-pa} |u|^p / A_E)`.
    pub entropy: Quadrature,
    /// `∫ |∇u|^p δ^{-pa}` (first order) or `∫ |∇²u|^p δ^{-(a-1)p}` (second).
    pub energy: Quadrature,
    /// `B_E = ∫ |u|^{p*} δ^{-(N - (p*/p)(N-p-pa))}`.
    pub critical: Quadrature,
    pub window: ExponentWindow,
    pub flags: Flags,
}

impl LogHardyTerms {
    /// Normalized left side `entropy / A_E`.
    pub fn lhs(&self) -> f64 {
        self.entropy.value / self.mass.value
    }

    /// `A_E / D · exp(p lhs / N)`: the constant making the inequality an equality.
    pub fn calibrated_constant(&self, p: f64) -> f64 {
        let n = self.window.dim as f64;
        self.mass.value / self.energy.value * (p * self.lhs() / n).exp()
    }
}

struct DistanceWeights {
    /// `δ^{-alpha}` means per exponent, with cap masses.
    powers: Vec<WeightProfile>,
    /// `δ^{-alpha_0} log δ^{beta}` means.
    log: WeightProfile,
}

/// Spherical means about `c` of `δ_E^{-alpha}` and `δ_E^{-alpha_0} log δ_E^beta`.
fn distance_weights(
    grid: &Arc<RadialGrid>,
    c: &[f64],
    e: &ClosedSetSpec,
    alphas: &[f64],
    beta: f64,
) -> DistanceWeights {
    let dim = grid.dim();
    let n = dim as f64;
    let nodes = grid.nodes();
    let b = grid.inner_radius();
    let area = n * unit_ball_volume(dim);
    let exact_point = matches!(e, ClosedSetSpec::Point(x0) if x0.iter().zip(c).all(|(a, b)| a == b));
    if exact_point {
        // δ = |x - c|: pointwise powers with exact cap masses.
        let cap = |alpha: f64| {
            let m = n - alpha;
            if m > 0.0 {
                area * b.powf(m) / m
            } else {
                f64::INFINITY
            }
        };
        let powers = alphas
            .iter()
            .map(|&al| WeightProfile { values: nodes.iter().map(|s| s.powf(-al)).collect(), cap_mass: cap(al), cut: None })
            .collect();
        let a0 = alphas[0];
        let m = n - a0;
        let log_cap = if m > 0.0 { beta * area * b.powf(m) / m * (b.ln() - 1.0 / m) } else { f64::NEG_INFINITY };
        let log = WeightProfile {
            values: nodes.iter().map(|s| s.powf(-a0) * beta * s.ln()).collect(),
            cap_mass: log_cap,
            cut: None,
        };
        return DistanceWeights { powers, log };
    }
    // Directions and weights on the unit sphere about c.
    let (dirs, wts): (Vec<Vec<f64>>, Vec<f64>) = match e.axis_through(c) {
        Some(None) => {
            let mut e1 = alloc::vec![0.0; dim];
            e1[0] = 1.0;
            (alloc::vec![e1], alloc::vec![1.0])
        }
        Some(Some(axis)) => {
            let perp = perpendicular(&axis);
            let (mu, w) = axial_rule(dim, 16);
            let dirs = mu
                .iter()
                .map(|m| {
                    let sn = (1.0 - m * m).max(0.0).sqrt();
                    axis.iter().zip(&perp).map(|(a, q)| m * a + sn * q).collect()
                })
                .collect();
            (dirs, w)
        }
        None => {
            let rule = sphere_rule(dim, 8);
            (rule.points, rule.weights)
        }
    };
    let mut x = alloc::vec![0.0; dim];
    let mut powers: Vec<Vec<f64>> = alloc::vec![Vec::with_capacity(nodes.len()); alphas.len()];
    let mut log = Vec::with_capacity(nodes.len());
    let mut means = alloc::vec![0.0; alphas.len()];
    for &s in nodes {
        means.iter_mut().for_each(|m| *m = 0.0);
        let mut lmean = 0.0;
        for (d, w) in dirs.iter().zip(&wts) {
            x.iter_mut().zip(c.iter().zip(d)).for_each(|(xi, (ci, di))| *xi = ci + s * di);
            let delta = e.distance(&x);
            for (m, al) in means.iter_mut().zip(alphas) {
                *m += w * delta.powf(-al);
            }
            lmean += w * delta.powf(-alphas[0]) * beta * delta.ln();
        }
        for (p, m) in powers.iter_mut().zip(&means) {
            p.push(*m);
        }
        log.push(lmean);
    }
    let vol = grid.cap_volume();
    let powers = powers
        .into_iter()
        .map(|values| {
            let cap_mass = vol * values[0];
            WeightProfile { values, cap_mass, cut: None }
        })
        .collect();
    let cap_mass = vol * log[0];
    DistanceWeights { powers, log: WeightProfile { values: log, cap_mass, cut: None } }
}

/// `∫ w f` skipping nodes where `f` vanishes (so `∞ · 0 = 0`).
fn masked_integral(grid: &RadialGrid, w: &WeightProfile, f: &[f64]) -> Quadrature {
    let values = w.values.iter().zip(f).map(|(w, f)| if *f == 0.0 { 0.0 } else { *w }).collect();
    let cap_mass = if f[0] == 0.0 { 0.0 } else { w.cap_mass };
    let masked = WeightProfile { values, cap_mass, cut: w.cut };
    grid.integrate(Some(&masked), |i| f[i])
}

/// Evaluates the log-Hardy integrals. `u` is radial about its center (the
/// origin when unset); `d` defaults to the Assouad dimension of `E`.
pub fn log_hardy_terms(
    u: &GridFunction,
    e: &ClosedSetSpec,
    p: f64,
    a: f64,
    order: Order,
    d: Option<f64>,
) -> Result<LogHardyTerms> {
    let dim = u.dim();
    let n = dim as f64;
    if !(p > 1.0 && p < n) {
        return Err(param_err!("p = {p} must lie in (1, N) = (1, {n})"));
    }
    e.validate(dim)?;
    let d = d.unwrap_or_else(|| e.nominal_dimension(dim));
    let window = admissible_exponent_range(dim, p, d.min(n), order)?;
    let ps = critical_exponent(dim, p);
    let alpha_mass = p * (a + 1.0);
    let beta = n - p - p * a;
    let alpha_energy = match order {
        Order::First => p * a,
        Order::Second => (a - 1.0) * p,
    };
    let alpha_crit = n - ps / p * beta;
    let origin = alloc::vec![0.0; dim];
    let c = u.center().unwrap_or(&origin);
    let grid = u.grid();
    let w = distance_weights(grid, c, e, &[alpha_mass, alpha_energy, alpha_crit], beta);
    let v = u.values();
    let up: Vec<f64> = v.iter().map(|x| x.abs().powf(p)).collect();
    let mass = masked_integral(grid, &w.powers[0], &up);
    require_mass(&mass)?;
    let log_part = masked_integral(grid, &w.log, &up);
    let ln_a = mass.value.ln();
    let ent: Vec<f64> = up
        .iter()
        .zip(v)
        .map(|(t, x)| if *t == 0.0 { 0.0 } else { t * (p * x.abs().ln() - ln_a) })
        .collect();
    let ent_part = masked_integral(grid, &w.powers[0], &ent);
    let entropy = Quadrature {
        value: log_part.value + ent_part.value,
        error: log_part.error + ent_part.error + mass.error,
        flags: log_part.flags | ent_part.flags,
    };
    let (du, ddu, dflags) = u.derivatives();
    let grad: Vec<f64> = match order {
        Order::First => du.iter().map(|x| x.abs().powf(p)).collect(),
        Order::Second => {
            let k = n - 1.0;
            du.iter()
                .zip(&ddu)
                .zip(grid.nodes())
                .map(|((d1, d2), s)| {
                    let t = d1 / s;
                    (d2 * d2 + k * t * t).powf(0.5 * p)
                })
                .collect()
        }
    };
    let mut energy = masked_integral(grid, &w.powers[1], &grad);
    energy.flags |= dflags;
    let crit: Vec<f64> = v.iter().map(|x| x.abs().powf(ps)).collect();
    let critical = masked_integral(grid, &w.powers[2], &crit);
    let mut flags = mass.flags | entropy.flags | energy.flags | u.flags() & Flags::TRUNCATED;
    if !window.contains(a) {
        flags |= Flags::OUTSIDE_WINDOW;
    }
    Ok(LogHardyTerms { mass, entropy, energy, critical, window, flags })
}

/// `lhs = (1/A_E) ∫ |u|^p δ^{-p(a+1)} log(δ^{N-p-pa} |u|^p / A_E)` against
/// `rhs = (N/p) log(C D / A_E)`. Without `constant` the report is calibrated:
/// `C` is the smallest constant for which this `u` satisfies the inequality.
pub fn log_hardy_report(
    u: &GridFunction,
    e: &ClosedSetSpec,
    p: f64,
    a: f64,
    order: Order,
    constant: Option<f64>,
) -> Result<InequalityReport> {
    let t = log_hardy_terms(u, e, p, a, order, None)?;
    let n = u.dim() as f64;
    let lhs = t.lhs();
    let calibrated = t.calibrated_constant(p);
    let c = constant.unwrap_or(calibrated);
    let rhs = n / p * (c * t.energy.value / t.mass.value).ln();
    let ra = t.mass.error / t.mass.value;
    let budget = t.entropy.error / t.mass.value + lhs.abs() * ra + n / p * (t.energy.error / t.energy.value + ra);
    let kind = match order {
        Order::First => ReportKind::LogHardy,
        Order::Second => ReportKind::LogHardySecondOrder,
    };
    let mut report = InequalityReport::new(kind, lhs, rhs, budget, t.flags);
    report.normalization_factor = t.mass.value.powf(-1.0 / p);
    report
        .constant("p", p)
        .constant("a", a)
        .constant("d", t.window.d)
        .constant("window_lower", t.window.lower)
        .constant("window_upper", t.window.upper)
        .constant("C_calibrated", calibrated)
        .constant("A_E", t.mass.value)
        .constant("energy", t.energy.value);
    if let Some(c) = constant {
        report.constant("C", c);
    }
    report.input_hash = u.fingerprint();
    Ok(report)
}

/// Constant-free chain: `lhs ≤ (p/(p*-p)) log(B_E / A_E^{p*/p})`.
pub fn log_hardy_chain(u: &GridFunction, e: &ClosedSetSpec, p: f64, a: f64) -> Result<InequalityReport> {
    let t = log_hardy_terms(u, e, p, a, Order::First, None)?;
    let ps = critical_exponent(u.dim(), p);
    let k = p / (ps - p);
    let lhs = t.lhs();
    let rhs = k * (t.critical.value / t.mass.value.powf(ps / p)).ln();
    let ra = t.mass.error / t.mass.value;
    let budget =
        t.entropy.error / t.mass.value + lhs.abs() * ra + k * (t.critical.error / t.critical.value + ps / p * ra);
    let mut report = InequalityReport::new(ReportKind::LogHardyChain, lhs, rhs, budget, t.flags | t.critical.flags);
    report.normalization_factor = t.mass.value.powf(-1.0 / p);
    report.constant("p", p).constant("a", a).constant("A_E", t.mass.value).constant("B_E", t.critical.value);
    report.input_hash = u.fingerprint();
    Ok(report)
}

/// Classical inequalities the logarithmic ones refine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Baseline {
    /// `∫ |u|^p / |x|^p ≤ (p/(N-p))^p ∫ |∇u|^p`.
    Hardy,
    /// `∫ |ũ|^p log |ũ|^p ≤ (N/p) log(C ∫ |∇ũ|^p)` at unit `L^p` norm.
    LogSobolevLp,
    /// `‖u‖_{L^{p*,p}}^p ≤ C ∫ |∇u|^p`.
    LorentzSobolev,
    /// Logarithmic Lorentz entropy at unit `L^{p*,p}` norm.
    LogLorentzSobolev,
}

pub fn classical_baseline_report(u: &GridFunction, kind: Baseline, p: f64) -> Result<InequalityReport> {
    let dim = u.dim();
    let n = dim as f64;
    if !(p > 1.0 && p < n) {
        return Err(param_err!("p = {p} must lie in (1, N) = (1, {n})"));
    }
    let d = u.dirichlet(p)?;
    let mut report = match kind {
        Baseline::Hardy => {
            let lhs = weight_mass(u, &WeightSpec::Power { alpha: p }, p)?;
            let k = (p / (n - p)).powf(p);
            let mut r = InequalityReport::new(
                ReportKind::Hardy,
                lhs.value,
                k * d.value,
                lhs.error + k * d.error,
                lhs.flags | d.flags,
            );
            r.constant("C", k);
            r
        }
        Baseline::LogSobolevLp => {
            let one = WeightSpec::Power { alpha: 0.0 };
            let m = u.measure(Some(&one))?;
            let v = u.samples();
            let a = m.integrate(|i| v[i].abs().powf(p));
            require_mass(&a)?;
            let e = entropy_with(&m, v, p, &a);
            let lhs = e.value / a.value;
            let dn = d.value / a.value;
            let c = (p * lhs / n).exp() / dn;
            let rhs = n / p * (c * dn).ln();
            let budget = e.error / a.value + lhs.abs() * a.error / a.value + n / p * d.error / d.value;
            let mut r = InequalityReport::new(ReportKind::LogSobolevLp, lhs, rhs, budget, a.flags | e.flags | d.flags);
            r.normalization_factor = a.value.powf(-1.0 / p);
            r.constant("C_calibrated", c);
            r
        }
        Baseline::LorentzSobolev => {
            let ps = critical_exponent(dim, p);
            let l = lorentz_quasinorm(u, ps, p)?;
            let lhs = l.value.powf(p);
            let ratio = lhs / d.value;
            let mut r = InequalityReport::new(
                ReportKind::LorentzSobolev,
                lhs,
                ratio * d.value,
                p * lhs * l.error / l.value.max(f64::MIN_POSITIVE),
                l.flags | d.flags,
            );
            r.constant("ratio", ratio).constant("C_calibrated", ratio);
            r
        }
        Baseline::LogLorentzSobolev => {
            let ent = log_lorentz_entropy(u, p)?;
            let dn = d.value * ent.factor.powf(p);
            let c = (p * ent.value / n).exp() / dn;
            let rhs = n / p * (c * dn).ln();
            let mut r = InequalityReport::new(
                ReportKind::LogLorentzSobolev,
                ent.value,
                rhs,
                n / p * d.error / d.value,
                ent.flags | d.flags,
            );
            r.normalization_factor = ent.factor;
            r.constant("C_calibrated", c);
            r
        }
    };
    report.constant("p", p).constant("dirichlet", d.value);
    report.input_hash = u.fingerprint();
    Ok(report)
}

/// Brezis–Lieb defects along a translation sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct BrezisLieb {
    pub shifts: Vec<f64>,
    pub defects: Vec<f64>,
    pub flags: Flags,
}

fn j_entropy(t: f64, p: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        t.powf(p) * t.ln()
    }
}

/// `∫ |J(f + g_n) - J(g_n) - J(f)|` with `J(t) = t^p log t`,
/// `g_n = f(· - shift_n e_1)`, by Gauss quadrature in `(x_1, |x'|)` over the
/// lens where both supports meet.
pub fn brezis_lieb_defect(f: &GridFunction, shifts: &[f64], p: f64) -> Result<BrezisLieb> {
    check_p(p)?;
    if shifts.windows(2).any(|w| !(w[1] > w[0])) || shifts.iter().any(|s| !(*s >= 0.0)) {
        return Err(param_err!("shifts must be non-negative and increasing"));
    }
    let dim = f.dim();
    if dim < 2 {
        return Err(param_err!("translation defects need N >= 2"));
    }
    let radius = f.support().unwrap_or_else(|| f.support_radius());
    if radius >= f.grid().outer_radius() {
        return Err(domain_err!("f must be compactly supported inside the grid"));
    }
    let m = (dim - 1) as f64;
    let area = m * unit_ball_volume(dim - 1);
    let defects: Vec<f64> = shifts
        .iter()
        .map(|&t| {
            if t >= 2.0 * radius {
                return 0.0;
            }
            let (xs, xw) = composite_gauss(t - radius, radius, 48, 8);
            let (rs, rw) = composite_gauss(0.0, radius, 48, 8);
            let mut total = 0.0;
            for (x1, wx) in xs.iter().zip(&xw) {
                for (rho, wr) in rs.iter().zip(&rw) {
                    let a = f.value_at(x1.hypot(*rho)).abs();
                    let b = f.value_at((x1 - t).hypot(*rho)).abs();
                    if a == 0.0 || b == 0.0 {
                        continue;
                    }
                    let defect = (j_entropy(a + b, p) - j_entropy(a, p) - j_entropy(b, p)).abs();
                    total += wx * wr * area * rho.powf(m - 1.0) * defect;
                }
            }
            total
        })
        .collect();
    let mut flags = Flags::empty();
    if shifts.iter().all(|t| *t < 2.0 * radius) {
        flags |= Flags::INCONCLUSIVE;
    }
    Ok(BrezisLieb { shifts: shifts.to_vec(), defects, flags })
}

/// Boxed report, for heterogeneous collections.
pub type BoxedReport = Box<InequalityReport>;
