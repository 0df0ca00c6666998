//! Distribution functions, decreasing rearrangements and Lorentz quasi-norms.
//!
//! The rearrangement sorts `(|u_i|, w_i)` pieces by value, `w_i` being the
//! quadrature mass of node `i` (the inner cap is one more piece). On the
//! measure axis `u*` is piecewise constant with breakpoints at the cumulative
//! masses, so `∫ (u*)^q dt` reproduces the grid quadrature of `∫ |u|^q dx`.

use alloc::vec::Vec;

use crate::error::{domain_err, param_err, Result};
use crate::grid::{Flags, GridFunction};
use crate::params::critical_exponent;
#[allow(unused_imports)]
use crate::float::Real;

/// `u*` on `(0, ∞)`: value `values[k]` on `(edges[k], edges[k+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedProfile {
    /// Cumulative measures, `edges[0] = 0`.
    pub edges: Vec<f64>,
    /// Non-increasing, non-negative.
    pub values: Vec<f64>,
    pub flags: Flags,
}

impl RearrangedProfile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Representative measure coordinate of piece `k` (geometric midpoint).
    pub fn s_node(&self, k: usize) -> f64 {
        let (a, b) = (self.edges[k], self.edges[k + 1]);
        if a == 0.0 {
            0.5 * b
        } else {
            (a * b).sqrt()
        }
    }

    /// `(s, u*(s))` rows for export.
    pub fn table(&self) -> Vec<(f64, f64)> {
        (0..self.len()).map(|k| (self.s_node(k), self.values[k])).collect()
    }

    /// `u*(t)`, linear between piece midpoints, ess sup at `t = 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        let total = *self.edges.last().unwrap_or(&0.0);
        if t > total {
            return 0.0;
        }
        // First piece whose midpoint is >= t.
        let k = self.partition_mid(t);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.len() {
            return self.values[self.len() - 1];
        }
        let (t0, t1) = (self.s_node(k - 1), self.s_node(k));
        let w = (t - t0) / (t1 - t0);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }

    /// Value of the piece containing `t`.
    pub fn eval_step(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.values.first().copied().unwrap_or(0.0);
        }
        let k = self.edges.partition_point(|e| *e < t);
        if k == 0 || k > self.len() {
            0.0
        } else {
            self.values[k - 1]
        }
    }

    fn partition_mid(&self, t: f64) -> usize {
        let (mut lo, mut hi) = (0usize, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.s_node(mid) < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `∫_0^∞ (u*)^q dt`, exact on the pieces.
    pub fn power_integral(&self, q: f64) -> f64 {
        self.values
            .iter()
            .zip(self.edges.windows(2))
            .map(|(v, e)| if *v == 0.0 { 0.0 } else { v.powf(q) * (e[1] - e[0]) })
            .sum()
    }
}

/// `|{|u| > s}|`.
///
/// For radially non-increasing `|u|` the level radius is interpolated linearly
/// in `ln s` and the ball volume returned; otherwise the quadrature masses of
/// the super-level nodes are summed.
pub fn distribution_function(u: &GridFunction, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(param_err!("distribution function needs a level s > 0, got {s}"));
    }
    let grid = u.grid();
    let v = u.values();
    let n = v.len();
    let monotone = v.windows(2).all(|w| w[1].abs() <= w[0].abs());
    let omega = grid.ball_volume();
    let dim = grid.dim() as i32;
    if monotone {
        if v[0].abs() <= s {
            return Ok(0.0);
        }
        let nodes = grid.nodes();
        let i = v.iter().position(|x| x.abs() <= s);
        let rho = match i {
            None => grid.outer_radius(),
            Some(0) => return Ok(omega * grid.inner_radius().powi(dim)),
            Some(i) => {
                // Bisection on the cubic interpolant between the bracketing nodes.
                let (mut lo, mut hi) = (nodes[i - 1].ln(), nodes[i].ln());
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if u.value_at(mid.exp()).abs() > s {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0.5 * (lo + hi)).exp()
            }
        };
        return Ok(omega * rho.powi(dim));
    }
    let mut m = if v[0].abs() > s { grid.cap_volume() } else { 0.0 };
    for i in 0..n {
        if v[i].abs() > s {
            m += grid.weights()[i];
        }
    }
    Ok(m)
}

/// Sorts the sampled pieces of `|u|` into `u*`.
pub fn decreasing_rearrangement(u: &GridFunction) -> RearrangedProfile {
    let grid = u.grid();
    let v = u.values();
    let mut pieces: Vec<(f64, f64)> = Vec::with_capacity(v.len() + 1);
    pieces.push((v[0].abs(), grid.cap_volume()));
    pieces.extend(v.iter().zip(grid.weights()).map(|(x, w)| (x.abs(), *w)));
    // Stable sort keeps radial order among ties.
    pieces.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let mut edges = Vec::with_capacity(pieces.len() + 1);
    edges.push(0.0);
    let mut acc = 0.0;
    for (_, w) in &pieces {
        acc += w;
        edges.push(acc);
    }
    let values = pieces.into_iter().map(|(x, _)| x).collect();
    let flags = u.flags() & (Flags::UNBOUNDED_AT_ORIGIN | Flags::TRUNCATED);
    RearrangedProfile { edges, values, flags }
}

/// A Lorentz quasi-norm value with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzNorm {
    /// `+inf` when the integral diverges.
    pub value: f64,
    /// Estimated contribution beyond the sampled range.
    pub error: f64,
    pub flags: Flags,
}

/// `‖u‖_{L^{p,q}} = ‖t^{1/p - 1/q} u*(t)‖_{L^q(0,∞)}`; `q = f64::INFINITY`
/// gives the sup norm over the piece edges (a lower bound).
pub fn lorentz_quasinorm(u: &GridFunction, p: f64, q: f64) -> Result<LorentzNorm> {
    let r = decreasing_rearrangement(u);
    lorentz_of_profile(&r, p, q)
}

pub fn lorentz_of_profile(r: &RearrangedProfile, p: f64, q: f64) -> Result<LorentzNorm> {
    if !(p >= 1.0 && p.is_finite()) || !(q >= 1.0) {
        return Err(param_err!("Lorentz exponents need 1 <= p < inf and 1 <= q <= inf, got ({p}, {q})"));
    }
    let mut flags = r.flags;
    if q.is_infinite() {
        let sup = r
            .values
            .iter()
            .zip(&r.edges[1..])
            .map(|(v, t)| t.powf(1.0 / p) * v)
            .fold(0.0, f64::max);
        return Ok(LorentzNorm { value: sup, error: 0.0, flags: flags | Flags::LOWER_BOUND });
    }
    let e = q / p;
    let contrib: Vec<f64> = r
        .values
        .iter()
        .zip(r.edges.windows(2))
        .map(|(v, w)| if *v == 0.0 { 0.0 } else { v.powf(q) * (w[1].powf(e) - w[0].powf(e)) / e })
        .collect();
    let total: f64 = contrib.iter().sum();
    let (tail, divergent) = end_behavior(r, &contrib, total);
    if divergent {
        flags |= Flags::DIVERGENT;
        return Ok(LorentzNorm { value: f64::INFINITY, error: f64::INFINITY, flags });
    }
    let value = total.powf(1.0 / q);
    let error = if total > 0.0 { value * tail / (q * total) } else { 0.0 };
    Ok(LorentzNorm { value, error, flags })
}

/// Tail estimate and divergence test from the density of `contrib` per unit
/// `ln t` at an end that the sample cuts off (unbounded core or truncation).
fn end_behavior(r: &RearrangedProfile, contrib: &[f64], total: f64) -> (f64, bool) {
    let n = contrib.len();
    let density = |k: usize| {
        let (a, b) = (r.edges[k], r.edges[k + 1]);
        if a <= 0.0 || contrib[k] == 0.0 {
            0.0
        } else {
            contrib[k] / (b / a).ln()
        }
    };
    let mut tail = 0.0;
    let mut divergent = false;
    // A run of pieces spanning a factor `span` of t at either end.
    let span = 64.0;
    let slope = |k0: usize, k1: usize| -> Option<f64> {
        let (d0, d1) = (density(k0), density(k1));
        if d0 <= 0.0 || d1 <= 0.0 {
            return None;
        }
        Some((d1 / d0).ln() / (r.s_node(k1) / r.s_node(k0)).ln())
    };
    if r.flags.contains(Flags::TRUNCATED) {
        if let Some(last) = contrib.iter().rposition(|c| *c > 0.0) {
            let t_last = r.s_node(last);
            let first = (0..last).rev().find(|&k| r.s_node(k) < t_last / span).unwrap_or(0);
            if let Some(sl) = slope(first, last) {
                if sl > -0.02 {
                    divergent = true;
                } else {
                    tail += density(last) / -sl;
                }
            }
        }
    }
    if r.flags.contains(Flags::UNBOUNDED_AT_ORIGIN) && n > 2 {
        let k0 = 1;
        let t0 = r.s_node(k0);
        let k1 = (k0..n).find(|&k| r.s_node(k) > t0 * span).unwrap_or(n - 1);
        if let Some(sl) = slope(k0, k1) {
            if sl < 0.02 {
                divergent = true;
            } else {
                tail += density(k0) / sl;
            }
        }
    }
    let _ = total;
    (tail, divergent)
}

/// Value of the logarithmic Lorentz entropy and the normalization used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzEntropy {
    /// `∫ s^{p/p*-1} |v*|^p log(s^{1-p/N} |v*|^p) ds` for `v = c u`.
    pub value: f64,
    /// `c = 1 / ‖u‖_{L^{p*,p}}`.
    pub factor: f64,
    pub flags: Flags,
}

/// Logarithmic Lorentz entropy of `u` rescaled to unit `L^{p*,p}` norm,
/// integrated exactly on the rearrangement pieces.
pub fn log_lorentz_entropy(u: &GridFunction, p: f64) -> Result<LorentzEntropy> {
    let dim = u.dim();
    if !(p > 1.0 && p < dim as f64) {
        return Err(param_err!("p = {p} must lie in (1, N) = (1, {dim})"));
    }
    let ps = critical_exponent(dim, p);
    let r = decreasing_rearrangement(u);
    let norm = lorentz_of_profile(&r, ps, p)?;
    if !(norm.value > 0.0) {
        return Err(domain_err!("u has zero L^(p*,p) norm and cannot be normalized"));
    }
    if !norm.value.is_finite() {
        return Err(domain_err!("u has infinite L^(p*,p) norm"));
    }
    let c = 1.0 / norm.value;
    let a = p / ps;
    // ∫ s^{a-1}(a ln s + L) ds = [s^a ln s - s^a/a + L s^a / a], L = p ln v.
    let prim = |s: f64, l: f64| -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            let sa = s.powf(a);
            sa * s.ln() - sa / a + l * sa / a
        }
    };
    let mut value = 0.0;
    for (v, e) in r.values.iter().zip(r.edges.windows(2)) {
        if *v == 0.0 {
            continue;
        }
        let vp = (c * v).powf(p);
        if vp == 0.0 {
            continue;
        }
        let l = vp.ln();
        value += vp * (prim(e[1], l) - prim(e[0], l));
    }
    Ok(LorentzEntropy { value, factor: c, flags: norm.flags })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dilate, integrate, GridSpec, RadialGrid};
    use alloc::sync::Arc;
    use core::f64::consts::PI;
    use proptest::prelude::*;

    fn grid() -> Arc<RadialGrid> {
        Arc::new(RadialGrid::new(3, &GridSpec::default()).unwrap())
    }

    fn indicator(g: &Arc<RadialGrid>) -> GridFunction {
        GridFunction::from_fn(g.clone(), |s| if s < 1.0 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn distribution_examples() {
        let g = grid();
        let chi = indicator(&g);
        assert!((distribution_function(&chi, 0.5).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
        assert_eq!(distribution_function(&chi, 1.5).unwrap(), 0.0);
        let gauss = GridFunction::from_fn(g, |s| (-0.5 * s * s).exp()).unwrap();
        let a = distribution_function(&gauss, (-0.5f64).exp()).unwrap();
        assert!((a - 4.0 * PI / 3.0).abs() < 1e-5, "{a}");
        assert!(distribution_function(&gauss, 0.0).is_err());
    }

    #[test]
    fn rearrangement_examples() {
        let g = grid();
        let r = decreasing_rearrangement(&indicator(&g));
        let omega = 4.0 * PI / 3.0;
        assert_eq!(r.eval(0.5 * omega), 1.0);
        assert_eq!(r.eval(1.01 * omega), 0.0);
        let gauss = GridFunction::from_fn(g.clone(), |s| (-0.5 * s * s).exp()).unwrap();
        let r = decreasing_rearrangement(&gauss);
        assert!((r.eval(omega) - (-0.5f64).exp()).abs() < 1e-4);
        for i in (100..g.len()).step_by(97) {
            let s = g.nodes()[i];
            let t = omega * s.powi(3);
            let want = (-0.5 * s * s).exp();
            assert!((r.eval(t) - want).abs() < 1e-4 * want.max(1e-3), "s={s}");
        }
    }

    #[test]
    fn equimeasurability() {
        let g = grid();
        let u = GridFunction::from_fn(g, |s| (1.0 + s * s).powf(-2.0) * (2.0 + (3.0 * s).sin())).unwrap();
        let r = decreasing_rearrangement(&u);
        for q in [2.0, 6.0] {
            let a = r.power_integral(q);
            let b = integrate(&u.map(|v| v.abs().powf(q))).value;
            assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        }
    }

    #[test]
    fn lorentz_indicator() {
        let g = grid();
        let n = lorentz_quasinorm(&indicator(&g), 6.0, 2.0).unwrap();
        let exact = 3f64.sqrt() * (4.0 * PI / 3.0).powf(1.0 / 6.0);
        assert!((n.value - exact).abs() < 1e-4, "{} vs {exact}", n.value);
        assert!((n.value - 2.1989).abs() < 1e-3);
    }

    #[test]
    fn lorentz_diagonal_is_lebesgue() {
        let g = grid();
        let u = GridFunction::from_fn(g, |s| (-s * s).exp()).unwrap();
        let l = lorentz_quasinorm(&u, 3.0, 3.0).unwrap().value;
        let lp = integrate(&u.map(|v| v.powi(3))).value.cbrt();
        assert!((l - lp).abs() < 1e-10 * lp);
    }

    #[test]
    fn weak_versus_strong_norm_of_power() {
        // |x|^{-1} in R^3 lies in weak L^3 but not in L^3.
        let g = grid();
        let w = GridFunction::from_fn(g, |s| 1.0 / s).unwrap();
        let weak = lorentz_quasinorm(&w, 3.0, f64::INFINITY).unwrap();
        assert!((weak.value - (4.0 * PI / 3.0).cbrt()).abs() < 1e-2, "{}", weak.value);
        assert!(weak.flags.contains(Flags::LOWER_BOUND));
        let strong = lorentz_quasinorm(&w, 3.0, 3.0).unwrap();
        assert!(strong.value.is_infinite() && strong.flags.contains(Flags::DIVERGENT));
        // A faster-decaying truncated tail stays finite.
        let g = grid();
        let v = GridFunction::from_fn(g, |s| (1.0 + s).powi(-4)).unwrap();
        assert!(lorentz_quasinorm(&v, 3.0, 3.0).unwrap().value.is_finite());
    }

    #[test]
    fn lorentz_entropy_of_indicator() {
        // Scale invariance of the normalized functional: -1 + ln(p/p*).
        let g = grid();
        let e = log_lorentz_entropy(&indicator(&g), 2.0).unwrap();
        let exact = -1.0 + (1.0f64 / 3.0).ln();
        assert!((e.value - exact).abs() < 1e-10, "{} vs {exact}", e.value);
        assert!(log_lorentz_entropy(&GridFunction::zeros(g), 2.0).is_err());
    }

    #[test]
    fn lorentz_entropy_dilation_invariant() {
        let g = grid();
        let u = GridFunction::from_fn(g, |s| (-s * s).exp()).unwrap();
        let e0 = log_lorentz_entropy(&u, 2.0).unwrap().value;
        for lam in [0.25, 0.5, 2.0, 4.0] {
            let d = dilate(&u, lam, 0.5).unwrap();
            let e1 = log_lorentz_entropy(&d, 2.0).unwrap().value;
            assert!((e1 - e0).abs() < 1e-5 * e0.abs(), "{lam}: {e1} vs {e0}");
        }
    }

    #[test]
    fn secondary_index_inclusion() {
        // ‖u‖_{p,r} ≤ (q/p)^{1/q - 1/r} ‖u‖_{p,q} for q ≤ r.
        let g = grid();
        for k in 1..6 {
            let u = GridFunction::from_fn(g.clone(), |s| (-(s * k as f64).powf(1.5)).exp()).unwrap();
            let (p, q, r) = (3.0, 1.5, 4.0);
            let a = lorentz_quasinorm(&u, p, r).unwrap().value;
            let b = lorentz_quasinorm(&u, p, q).unwrap().value;
            assert!(a <= (q / p).powf(1.0 / q - 1.0 / r) * b * (1.0 + 1e-9));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn rearrangement_is_monotone(c in 0.1f64..3.0, w in 0.2f64..4.0, shift in 0.0f64..2.0) {
            let g = grid();
            let u = GridFunction::from_fn(g.clone(), |s| c * (-(s - shift).powi(2) / w).exp()).unwrap();
            let v = u.map(|x| x + 0.1 * (-x).exp() * x);
            let ru = decreasing_rearrangement(&u);
            let rv = decreasing_rearrangement(&v);
            prop_assert!(ru.values.windows(2).all(|p| p[1] <= p[0]));
            for k in (0..ru.len()).step_by(211) {
                let t = ru.s_node(k);
                prop_assert!(ru.eval_step(t) <= rv.eval_step(t) + 1e-12);
            }
        }
    }
}
