//! Search for the best constant `C_B(g, γ)` over radial bump profiles.
//!
//! `1/C_B = inf ∫|∇u|^p / exp((1/γ) ∫|g||u|^p log|u|^p)` over `∫|g||u|^p = 1`.
//! Every quotient is evaluated at the normalized profile, in log space.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{domain_err, param_err, Result};
#[allow(unused_imports)]
use crate::float::Real;
use crate::grid::{weighted_dirichlet_energy, Flags, GridFunction, GridSpec, RadialGrid, WeightProfile};
use crate::weight::WeightSpec;

/// Box constraints on the coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bounds {
    pub amplitude: (f64, f64),
    pub log_width: (f64, f64),
}

/// `u(s) = Σ a_k exp(-(s - c_k)^2 / (2 w_k^2))` with fixed centers `c_k`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProfileParams {
    pub centers: Vec<f64>,
    /// Amplitudes followed by log-widths.
    pub coefficients: Vec<f64>,
    pub bounds: Bounds,
}

impl ProfileParams {
    /// `count` bumps with centers log-spaced over `[c_min, c_max]`, unit
    /// amplitudes and widths equal to their centers.
    pub fn log_spaced(count: usize, c_min: f64, c_max: f64) -> Result<Self> {
        if count == 0 || !(c_min > 0.0 && c_max > c_min) {
            return Err(param_err!("need count ≥ 1 and 0 < c_min < c_max, got {count}, {c_min}, {c_max}"));
        }
        let centers: Vec<f64> = (0..count)
            .map(|k| {
                let t = if count == 1 { 0.0 } else { k as f64 / (count - 1) as f64 };
                c_min * (c_max / c_min).powf(t)
            })
            .collect();
        let mut coefficients = alloc::vec![1.0; count];
        coefficients.extend(centers.iter().map(|c| c.ln()));
        let bounds = Bounds { amplitude: (0.0, 1e6), log_width: ((0.2 * c_min).ln(), (2.0 * c_max).ln()) };
        Ok(ProfileParams { centers, coefficients, bounds })
    }

    /// Same center range with twice as many bumps.
    pub fn doubled(&self) -> Result<Self> {
        let n = self.len();
        let (lo, hi) = (self.centers[0], self.centers[n - 1]);
        let mut out = Self::log_spaced(2 * n, lo, hi)?;
        out.bounds = self.bounds;
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.coefficients[..self.len()]
    }

    pub fn log_widths(&self) -> &[f64] {
        &self.coefficients[self.len()..]
    }

    pub fn with_coefficients(&self, coefficients: Vec<f64>) -> Self {
        ProfileParams { centers: self.centers.clone(), coefficients, bounds: self.bounds }
    }

    /// Projection onto the box.
    pub fn project(&mut self) {
        let n = self.len();
        let b = self.bounds;
        for (i, c) in self.coefficients.iter_mut().enumerate() {
            let (lo, hi) = if i < n { b.amplitude } else { b.log_width };
            *c = c.clamp(lo, hi);
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.centers
            .iter()
            .zip(self.amplitudes())
            .zip(self.log_widths())
            .map(|((c, a), lw)| {
                let z = (s - c) / lw.exp();
                a * (-0.5 * z * z).exp()
            })
            .sum()
    }

    pub fn profile(&self, grid: &Arc<RadialGrid>) -> Result<GridFunction> {
        GridFunction::from_fn(grid.clone(), |s| self.eval(s))
    }
}

/// Quotient terms at the normalized profile `ũ = u / A^{1/p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuotientValue {
    pub q: f64,
    pub log_q: f64,
    /// `∫|g||ũ|^p`, one up to rounding.
    pub mass: f64,
    /// `∫|∇ũ|^p`.
    pub dirichlet: f64,
    /// `∫|g||ũ|^p log|ũ|^p`.
    pub entropy: f64,
    /// Mass of `u` before normalization.
    pub raw_mass: f64,
    pub flags: Flags,
}

/// Precomputed grid and weight for repeated quotient evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientContext {
    pub grid: Arc<RadialGrid>,
    pub weight: WeightProfile,
    pub p: f64,
    pub gamma: f64,
}

impl QuotientContext {
    pub fn new(g: &WeightSpec, dim: usize, p: f64, gamma: f64, spec: &GridSpec) -> Result<Self> {
        if !(p > 1.0 && p < dim as f64) {
            return Err(param_err!("p = {p} must lie in (1, N) = (1, {dim})"));
        }
        if !(gamma > 0.0) {
            return Err(param_err!("gamma = {gamma} must be positive"));
        }
        let grid = Arc::new(RadialGrid::new(dim, spec)?);
        let weight = g.profile(&grid)?;
        Ok(QuotientContext { grid, weight, p, gamma })
    }

    pub fn evaluate(&self, u: &GridFunction) -> Result<QuotientValue> {
        let p = self.p;
        let v = u.values();
        let a = self.grid.integrate(Some(&self.weight), |i| v[i].abs().powf(p));
        if !(a.value > 0.0 && a.value.is_finite()) {
            return Err(domain_err!("weighted mass A = {} cannot be normalized", a.value));
        }
        let ln_a = a.value.ln();
        let lg = self.grid.integrate(Some(&self.weight), |i| {
            let x = v[i].abs();
            if x == 0.0 {
                0.0
            } else {
                x.powf(p) * p * x.ln()
            }
        });
        let d = weighted_dirichlet_energy(u, p, None);
        let entropy = lg.value / a.value - ln_a;
        let dirichlet = d.value / a.value;
        let mass = self.grid.integrate(Some(&self.weight), |i| v[i].abs().powf(p) / a.value).value;
        let log_q = dirichlet.ln() - entropy / self.gamma;
        Ok(QuotientValue {
            q: log_q.exp(),
            log_q,
            mass,
            dirichlet,
            entropy,
            raw_mass: a.value,
            flags: a.flags | lg.flags | d.flags,
        })
    }

    pub fn quotient(&self, theta: &ProfileParams) -> Result<QuotientValue> {
        self.evaluate(&theta.profile(&self.grid)?)
    }
}

/// `Q(θ)` on a default grid.
pub fn rayleigh_quotient(theta: &ProfileParams, g: &WeightSpec, dim: usize, p: f64, gamma: f64) -> Result<QuotientValue> {
    QuotientContext::new(g, dim, p, gamma, &OptimizerConfig::default().grid)?.quotient(theta)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizerConfig {
    pub max_iter: usize,
    /// Relative finite-difference step.
    pub fd_step: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Smallest decrease of `log Q` counted as progress.
    pub tol: f64,
    pub grid: GridSpec,
    /// Interpolation exponent behind `γ > r/(r-p)`.
    pub r: Option<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iter: 2000,
            fd_step: 1e-4,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            tol: 1e-10,
            grid: GridSpec { r_min: 1e-6, r_max: 100.0, nodes: 2048 },
            r: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Status {
    Converged,
    IterationCap,
    Stalled,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::IterationCap => "iteration_cap",
            Status::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Iterate {
    pub iteration: usize,
    pub value: QuotientValue,
    /// `∫|g||ũ_n - ũ_final|^p`.
    pub diagnostic: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationTrace {
    pub iterates: Vec<Iterate>,
    pub status: Status,
    pub best: ProfileParams,
    pub q_star: f64,
    pub evaluations: usize,
    pub flags: Flags,
    pub context: QuotientContext,
}

impl OptimizationTrace {
    /// Trace through the given parameter sequence, without descent.
    pub fn from_params(context: QuotientContext, params: &[ProfileParams]) -> Result<Self> {
        if params.is_empty() {
            return Err(param_err!("a trace needs at least one iterate"));
        }
        let mut iterates = Vec::with_capacity(params.len());
        for (k, th) in params.iter().enumerate() {
            let value = context.quotient(th)?;
            iterates.push(Iterate { iteration: k, value, diagnostic: 0.0, coefficients: th.coefficients.clone() });
        }
        let best = params[params.len() - 1].clone();
        let q_star = iterates[iterates.len() - 1].value.q;
        let mut trace = OptimizationTrace {
            iterates,
            status: Status::IterationCap,
            best,
            q_star,
            evaluations: params.len(),
            flags: Flags::empty(),
            context,
        };
        trace.fill_diagnostics()?;
        Ok(trace)
    }

    pub fn is_monotone(&self) -> bool {
        self.iterates.windows(2).all(|w| w[1].value.log_q <= w[0].value.log_q)
    }

    fn normalized(&self, coefficients: &[f64]) -> Result<Vec<f64>> {
        let th = self.best.with_coefficients(coefficients.to_vec());
        let u = th.profile(&self.context.grid)?;
        let p = self.context.p;
        let v = u.values();
        let a = self.context.grid.integrate(Some(&self.context.weight), |i| v[i].abs().powf(p));
        let k = a.value.powf(-1.0 / p);
        Ok(v.iter().map(|x| x * k).collect())
    }

    fn fill_diagnostics(&mut self) -> Result<()> {
        let a = concentration_sequence(self)?;
        if !a.is_empty() {
            for (it, d) in self.iterates.iter_mut().zip(a) {
                it.diagnostic = d;
            }
        }
        Ok(())
    }
}

fn concentration_sequence(trace: &OptimizationTrace) -> Result<Vec<f64>> {
    let n = trace.iterates.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let last = trace.normalized(&trace.iterates[n - 1].coefficients)?;
    let p = trace.context.p;
    trace
        .iterates
        .iter()
        .map(|it| {
            let un = trace.normalized(&it.coefficients)?;
            Ok(trace.context.grid.integrate(Some(&trace.context.weight), |i| (un[i] - last[i]).abs().powf(p)).value)
        })
        .collect()
}

/// `A_n = ∫|g||ũ_n - ũ|^p` against the last iterate; empty for a single iterate.
pub fn concentration_diagnostic(trace: &OptimizationTrace, g: &WeightSpec, p: f64) -> Result<Vec<f64>> {
    if trace.iterates.len() < 2 {
        return Ok(Vec::new());
    }
    let mut t = trace.clone();
    if p != t.context.p || g.profile(&t.context.grid)? != t.context.weight {
        t.context.p = p;
        t.context.weight = g.profile(&t.context.grid)?;
    }
    concentration_sequence(&t)
}

fn objective(ctx: &QuotientContext, theta: &ProfileParams, evals: &mut usize) -> Option<QuotientValue> {
    *evals += 1;
    ctx.quotient(theta).ok().filter(|v| v.log_q.is_finite())
}

/// Projected-gradient descent on `log Q` with central finite differences and
/// Armijo backtracking.
pub fn minimize_quotient(
    theta0: &ProfileParams,
    g: &WeightSpec,
    dim: usize,
    p: f64,
    gamma: f64,
    config: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    let ctx = QuotientContext::new(g, dim, p, gamma, &config.grid)?;
    minimize_in(ctx, theta0, config)
}

pub fn minimize_in(ctx: QuotientContext, theta0: &ProfileParams, config: &OptimizerConfig) -> Result<OptimizationTrace> {
    let mut flags = Flags::empty();
    if let Some(r) = config.r {
        if !(r > ctx.p && ctx.gamma > r / (r - ctx.p)) {
            flags |= Flags::OUTSIDE_WINDOW;
        }
    }
    let mut theta = theta0.clone();
    theta.project();
    let mut evals = 0;
    let mut current = objective(&ctx, &theta, &mut evals)
        .ok_or_else(|| domain_err!("initial profile has no finite quotient"))?;
    let mut iterates =
        alloc::vec![Iterate { iteration: 0, value: current, diagnostic: 0.0, coefficients: theta.coefficients.clone() }];
    let n = theta.coefficients.len();
    let mut status = Status::IterationCap;
    for iter in 1..=config.max_iter {
        let mut grad = alloc::vec![0.0; n];
        for i in 0..n {
            let x = theta.coefficients[i];
            let h = config.fd_step * x.abs().max(1.0);
            let mut plus = theta.clone();
            plus.coefficients[i] = x + h;
            let mut minus = theta.clone();
            minus.coefficients[i] = x - h;
            let fp = objective(&ctx, &plus, &mut evals);
            let fm = objective(&ctx, &minus, &mut evals);
            grad[i] = match (fp, fm) {
                (Some(a), Some(b)) => (a.log_q - b.log_q) / (2.0 * h),
                (Some(a), None) => (a.log_q - current.log_q) / h,
                (None, Some(b)) => (current.log_q - b.log_q) / h,
                (None, None) => 0.0,
            };
        }
        let gmax = grad.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if gmax == 0.0 {
            status = Status::Converged;
            break;
        }
        let mut t = 1.0 / gmax;
        let mut accepted = None;
        let mut tiny = false;
        for _ in 0..config.max_backtracks {
            let mut trial = theta.with_coefficients(
                theta.coefficients.iter().zip(&grad).map(|(c, d)| c - t * d).collect(),
            );
            trial.project();
            let slope: f64 =
                trial.coefficients.iter().zip(&theta.coefficients).zip(&grad).map(|((a, b), d)| (a - b) * d).sum();
            if slope >= 0.0 {
                tiny = true;
                break;
            }
            if let Some(v) = objective(&ctx, &trial, &mut evals) {
                if v.log_q <= current.log_q + config.armijo * slope {
                    accepted = Some((trial, v));
                    break;
                }
            }
            t *= config.backtrack;
        }
        match accepted {
            Some((trial, v)) if current.log_q - v.log_q > config.tol * current.log_q.abs().max(1.0) => {
                theta = trial;
                current = v;
                iterates.push(Iterate {
                    iteration: iter,
                    value: v,
                    diagnostic: 0.0,
                    coefficients: theta.coefficients.clone(),
                });
            }
            Some(_) => {
                status = Status::Converged;
                break;
            }
            None if tiny => {
                status = Status::Converged;
                break;
            }
            None => {
                status = Status::Stalled;
                break;
            }
        }
    }
    flags |= current.flags & (Flags::TRUNCATED | Flags::DIVERGENT);
    let mut trace = OptimizationTrace {
        iterates,
        status,
        best: theta,
        q_star: current.q,
        evaluations: evals,
        flags,
        context: ctx,
    };
    trace.fill_diagnostics()?;
    Ok(trace)
}

/// Runs each start in order and keeps the lowest `Q*` (first on ties).
pub fn minimize_multistart(
    starts: &[ProfileParams],
    g: &WeightSpec,
    dim: usize,
    p: f64,
    gamma: f64,
    config: &OptimizerConfig,
) -> Result<OptimizationTrace> {
    let ctx = QuotientContext::new(g, dim, p, gamma, &config.grid)?;
    let mut best: Option<OptimizationTrace> = None;
    for s in starts {
        let t = minimize_in(ctx.clone(), s, config)?;
        if best.as_ref().map_or(true, |b| t.q_star < b.q_star) {
            best = Some(t);
        }
    }
    best.ok_or_else(|| param_err!("no starting profiles"))
}
