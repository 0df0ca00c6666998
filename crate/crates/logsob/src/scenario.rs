//! Pipelines behind each subcommand.

use std::sync::Arc;

use logsob_core::assouad::{assouad_dimension_estimate, porosity_constant, AssouadSampling, PorositySampling};
use logsob_core::capacity::{
    cap_p_ball, cap_p_refinement, default_ball_family, mazya_inequality_residual, mazya_norm_estimate, CompactSetSpec,
};
use logsob_core::cylinder::{CylFunction, CylinderGrid};
use logsob_core::geometry::{ClosedSetSpec, Order};
use logsob_core::grid::{GridFunction, GridSpec, RadialGrid};
use logsob_core::inequality::{
    classical_baseline_report, interpolation_gap, log_hardy_chain, log_hardy_report, wls_residual, Baseline,
    InequalityReport, Profile,
};
use logsob_core::optimize::{minimize_in, OptimizationTrace, OptimizerConfig, ProfileParams, QuotientContext};
use logsob_core::weight::{Region, WeightSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, Ineq, ScenarioConfig};
use crate::parse::{parse_closed_set, parse_compact_set, parse_weight};
use crate::report::{flag_names, num, to_json, Envelope, ReportRecord, Status, Table};
use crate::Error;

/// Files produced by a run, in memory.
#[derive(Debug, Clone)]
pub struct Output {
    pub status: Status,
    pub warnings: Vec<String>,
    pub files: Vec<(String, Vec<u8>)>,
}

impl Output {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }
}

/// Validates, runs and writes the report files into `config.out`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<Output, Error> {
    let out = execute(config)?;
    std::fs::create_dir_all(&config.out).map_err(|e| Error::Io(config.out.display().to_string(), e))?;
    for (name, bytes) in &out.files {
        let path = config.out.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::Io(path.display().to_string(), e))?;
    }
    Ok(out)
}

/// Validates and runs without touching the file system.
pub fn execute(config: &ScenarioConfig) -> Result<Output, Error> {
    let warnings = config.validate()?;
    let hash = config.hash();
    let ctx = Ctx { config, hash: &hash, warnings };
    match config.command {
        Command::Verify => verify(ctx),
        Command::BestConstant => best_constant(ctx),
        Command::Capacity => capacity(ctx),
        Command::Assouad => assouad(ctx),
        Command::Sweep => sweep(ctx),
    }
}

struct Ctx<'a> {
    config: &'a ScenarioConfig,
    hash: &'a str,
    warnings: Vec<String>,
}

impl Ctx<'_> {
    fn envelope<T: Serialize>(&self, status: Status, result: T) -> Result<Vec<u8>, Error> {
        let env = Envelope {
            schema: crate::report::SCHEMA,
            version: crate::report::SCHEMA_VERSION,
            command: self.config.command.as_str(),
            config_hash: self.hash.to_string(),
            config: {
                let mut v = serde_json::to_value(self.config).map_err(|e| Error::Output(e.to_string()))?;
                if let Some(m) = v.as_object_mut() {
                    m.remove("out");
                }
                v
            },
            status,
            exit_code: status.exit_code(),
            warnings: self.warnings.clone(),
            result,
        };
        to_json(&env)
    }

    fn grid_spec(&self) -> GridSpec {
        let g = &self.config.grid;
        GridSpec { r_min: g.r_min, r_max: g.r_max, nodes: g.nodes }
    }

    /// `Ok` unless a residual failed; policy warnings override success.
    fn status(&self, holds: bool) -> Status {
        if !self.warnings.is_empty() {
            Status::Policy
        } else if holds {
            Status::Ok
        } else {
            Status::Violated
        }
    }
}

enum TestFunction {
    Radial(GridFunction),
    Cylindrical(CylFunction),
}

impl TestFunction {
    fn as_profile(&self) -> &dyn Profile {
        match self {
            TestFunction::Radial(u) => u,
            TestFunction::Cylindrical(u) => u,
        }
    }
}

fn gaussian(s: f64) -> f64 {
    (-0.5 * s * s).exp()
}

fn bump(s: f64) -> f64 {
    if s < 1.0 {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

fn is_cylindrical(g: &WeightSpec) -> bool {
    match g {
        WeightSpec::CylindricalPower { .. } => true,
        WeightSpec::Scaled { inner, .. } => is_cylindrical(inner),
        WeightSpec::Truncated { inner, region: Region::Ball(_) } => is_cylindrical(inner),
        _ => false,
    }
}

/// Center and radius of a bump kept away from `e`.
fn placement(e: &ClosedSetSpec, dim: usize) -> (Vec<f64>, f64) {
    let mut c = vec![0.0; dim];
    match e {
        ClosedSetSpec::Point(x) => (x.clone(), 1.0),
        ClosedSetSpec::Sphere { center, radius } => (center.clone(), 0.5 * radius),
        ClosedSetSpec::Ball { center, radius } => {
            c.clone_from(center);
            c[dim - 1] += radius + 2.0;
            (c, 1.0)
        }
        _ => {
            c[dim - 1] = 3.0;
            (c, 1.0)
        }
    }
}

fn test_function(
    ctx: &Ctx,
    weight: Option<&WeightSpec>,
    set: Option<&ClosedSetSpec>,
) -> Result<(TestFunction, String), Error> {
    let c = ctx.config;
    let dim = c.n;
    let core = |e: logsob_core::Error| Error::Numerical(e.to_string());
    let grid = Arc::new(RadialGrid::new(dim, &ctx.grid_spec()).map_err(core)?);
    let kind = match c.profile.as_str() {
        "auto" => {
            if weight.is_some_and(is_cylindrical) {
                "cylindrical"
            } else if set.is_some_and(|e| !matches!(e, ClosedSetSpec::Point(_))) {
                "bump"
            } else {
                "gaussian"
            }
        }
        other => other,
    };
    let u = match kind {
        "gaussian" => GridFunction::from_fn(grid, gaussian),
        "shell" => GridFunction::from_fn(grid, |s| bump(2.0 * (s - 1.0))),
        "bump" => {
            let (center, radius) = match set {
                Some(e) => placement(e, dim),
                None => (vec![0.0; dim], 1.0),
            };
            GridFunction::from_fn(grid, |s| bump(s / radius))
                .and_then(|u| u.with_support(radius))
                .and_then(|u| if center.iter().any(|x| *x != 0.0) { u.with_center(center) } else { Ok(u) })
        }
        "cylindrical" => {
            let spec = GridSpec { nodes: ctx.config.grid.nodes.min(512), ..ctx.grid_spec() };
            let split = match weight {
                Some(WeightSpec::CylindricalPower { split, .. }) => *split,
                _ => 2,
            };
            let g = Arc::new(CylinderGrid::new(dim, split, &spec).map_err(core)?);
            let u = CylFunction::from_fn(g, |r, s| gaussian(r.hypot(s))).map_err(core)?;
            return Ok((TestFunction::Cylindrical(u), kind.into()));
        }
        other => return Err(Error::Config(format!("unknown profile '{other}' (auto, gaussian, bump, shell, cylindrical)"))),
    }
    .map_err(core)?;
    Ok((TestFunction::Radial(u), kind.into()))
}

#[derive(Serialize)]
struct VerifyResult {
    ineq: Ineq,
    profile: String,
    weight: Option<String>,
    set: Option<String>,
    mazya_norm_lower_bound: Option<f64>,
    reports: Vec<ReportRecord>,
    error: Option<String>,
}

fn verify_reports(
    ctx: &Ctx,
    weight: Option<&WeightSpec>,
    set: Option<&ClosedSetSpec>,
    u: &TestFunction,
) -> Result<(Vec<InequalityReport>, Option<f64>), logsob_core::Error> {
    let c = ctx.config;
    let (dim, p) = (c.n, c.p);
    let prof = u.as_profile();
    let radial = match u {
        TestFunction::Radial(f) => Some(f),
        TestFunction::Cylindrical(_) => None,
    };
    let need_radial =
        || radial.ok_or_else(|| logsob_core::Error::Unsupported("this inequality needs a radial profile".into()));
    let mut norm = None;
    let reports = match c.ineq {
        Ineq::Wls | Ineq::InterpolationGap | Ineq::Mazya => {
            let g = weight.expect("weight parsed");
            let r = c.r.expect("r validated");
            let nm = mazya_norm_estimate(g, dim, p, r, &default_ball_family(dim))?;
            norm = Some(nm.lower_bound);
            match c.ineq {
                Ineq::Wls => vec![wls_residual(prof, g, p, r, Some(nm.lower_bound))?],
                Ineq::Mazya => vec![mazya_inequality_residual(g, prof, p, r, nm.lower_bound, true)?],
                _ => {
                    let qs: Vec<f64> = match c.q {
                        Some(q) => vec![q],
                        None => (0..20).map(|k| p + (r - p) * k as f64 / 20.0).collect(),
                    };
                    qs.iter().map(|q| interpolation_gap(prof, g, p, r, *q)).collect::<Result<_, _>>()?
                }
            }
        }
        Ineq::LogHardy | Ineq::LogHardy2 => {
            let order = if c.ineq == Ineq::LogHardy { Order::First } else { Order::Second };
            vec![log_hardy_report(need_radial()?, set.expect("set parsed"), p, c.a, order, None)?]
        }
        Ineq::LogHardyChain => vec![log_hardy_chain(need_radial()?, set.expect("set parsed"), p, c.a)?],
        Ineq::Hardy => vec![classical_baseline_report(need_radial()?, Baseline::Hardy, p)?],
        Ineq::LogSobolevLp => vec![classical_baseline_report(need_radial()?, Baseline::LogSobolevLp, p)?],
        Ineq::LorentzSobolev => vec![classical_baseline_report(need_radial()?, Baseline::LorentzSobolev, p)?],
        Ineq::LogLorentzSobolev => {
            vec![classical_baseline_report(need_radial()?, Baseline::LogLorentzSobolev, p)?]
        }
    };
    Ok((reports, norm))
}

fn verify_inputs(c: &ScenarioConfig) -> Result<(Option<WeightSpec>, Option<ClosedSetSpec>), Error> {
    let weight = match c.ineq {
        Ineq::Wls | Ineq::InterpolationGap | Ineq::Mazya => Some(parse_weight(&c.weight, c.n, c.p, c.r)?),
        _ => None,
    };
    let set = match c.ineq.order() {
        Some(_) => Some(parse_closed_set(&c.set, c.n)?),
        None => None,
    };
    Ok((weight, set))
}

fn verify(ctx: Ctx) -> Result<Output, Error> {
    let c = ctx.config;
    let (weight, set) = verify_inputs(c)?;
    let (u, profile_name) = test_function(&ctx, weight.as_ref(), set.as_ref())?;
    let outcome = verify_reports(&ctx, weight.as_ref(), set.as_ref(), &u);
    let (reports, norm, error) = match outcome {
        Ok((r, n)) => (r, n, None),
        Err(e) => (Vec::new(), None, Some(e.to_string())),
    };
    let holds = error.is_none() && reports.iter().all(|r| r.holds());
    let status = if error.is_some() && ctx.warnings.is_empty() { Status::Error } else { ctx.status(holds) };
    let records: Vec<ReportRecord> = reports.iter().map(ReportRecord::from).collect();
    let mut table = Table::new(
        "reports",
        &["kind", "lhs", "rhs", "residual", "error_budget", "holds", "flags", "q"],
    )?;
    for r in &records {
        let q = r.constants.get("q").copied().map(num).unwrap_or_default();
        table.row([
            r.kind.to_string(),
            num(r.lhs),
            num(r.rhs),
            num(r.residual),
            num(r.error_budget),
            r.holds.to_string(),
            r.flags.join("|"),
            q,
        ])?;
    }
    let mut files = vec![("reports.csv".to_string(), table.finish(ctx.hash)?)];
    if let TestFunction::Radial(f) = &u {
        files.push(("profile.csv".into(), snapshot(f, ctx.hash)?));
    }
    let result = VerifyResult {
        ineq: c.ineq,
        profile: profile_name,
        weight: weight.as_ref().map(|w| w.label()),
        set: set.as_ref().map(|e| e.label()),
        mazya_norm_lower_bound: norm,
        reports: records,
        error,
    };
    files.insert(0, ("report.json".into(), ctx.envelope(status, result)?));
    Ok(Output { status, warnings: ctx.warnings, files })
}

/// `node, weight, value` with the Lebesgue quadrature weights.
pub fn snapshot(u: &GridFunction, hash: &str) -> Result<Vec<u8>, Error> {
    let mut t = Table::new("profile", &["node", "weight", "value"])?;
    for ((s, w), v) in u.grid().nodes().iter().zip(u.grid().weights()).zip(u.values()) {
        t.row([num(*s), num(*w), num(*v)])?;
    }
    t.finish(hash)
}

#[derive(Serialize)]
struct BestConstantResult {
    q_star: f64,
    c_b_lower_bound: f64,
    status: &'static str,
    iterations: usize,
    evaluations: usize,
    monotone: bool,
    restart: usize,
    restarts: Vec<RestartSummary>,
    mazya_norm_lower_bound: f64,
    c_h_norm_power: f64,
    consistency_product: f64,
    consistency_holds: bool,
    centers: Vec<f64>,
    coefficients: Vec<f64>,
    flags: Vec<String>,
}

#[derive(Serialize)]
struct RestartSummary {
    seed: u64,
    q_star: f64,
    status: &'static str,
}

/// Start `k`: the log-spaced family, perturbed by a seeded generator for `k > 0`.
fn start(c: &ScenarioConfig, k: usize) -> Result<ProfileParams, Error> {
    let o = &c.optimize;
    let mut th = ProfileParams::log_spaced(o.bumps, o.c_min, o.c_max).map_err(|e| Error::Hypothesis(e.to_string()))?;
    if k > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed.wrapping_add(k as u64));
        let n = th.len();
        for (i, x) in th.coefficients.iter_mut().enumerate() {
            if i < n {
                *x *= rng.gen_range(0.5..1.5);
            } else {
                *x += rng.gen_range(-0.3..0.3);
            }
        }
        th.project();
    }
    Ok(th)
}

fn best_constant(ctx: Ctx) -> Result<Output, Error> {
    let c = ctx.config;
    let (dim, p) = (c.n, c.p);
    let r = c.r.expect("r validated");
    let gamma = c.gamma.expect("gamma validated");
    let g = parse_weight(&c.weight, dim, p, c.r)?;
    let num_err = |e: logsob_core::Error| Error::Numerical(e.to_string());
    let oc = OptimizerConfig {
        max_iter: c.optimize.max_iter,
        grid: GridSpec { r_min: c.grid.r_min, r_max: c.optimize.r_max, nodes: c.optimize.nodes },
        r: Some(r),
        ..OptimizerConfig::default()
    };
    let qctx = QuotientContext::new(&g, dim, p, gamma, &oc.grid).map_err(num_err)?;
    let starts = (0..c.optimize.restarts).map(|k| start(c, k)).collect::<Result<Vec<_>, _>>()?;
    let traces: Vec<OptimizationTrace> = starts
        .par_iter()
        .map(|s| minimize_in(qctx.clone(), s, &oc))
        .collect::<Result<_, _>>()
        .map_err(num_err)?;
    let (best_k, best) = traces
        .iter()
        .enumerate()
        .fold(None::<(usize, &OptimizationTrace)>, |acc, (k, t)| match acc {
            Some((_, b)) if b.q_star <= t.q_star => acc,
            _ => Some((k, t)),
        })
        .expect("at least one restart");
    let norm = mazya_norm_estimate(&g, dim, p, r, &default_ball_family(dim)).map_err(num_err)?;
    let ch = logsob_core::capacity::c_h(p).map_err(num_err)?;
    let k = ch * norm.lower_bound.powf(p / r);
    let product = best.q_star * k;
    let consistency_holds = product >= 1.0 - c.tolerances.consistency;
    let holds = consistency_holds && best.is_monotone();
    let status = ctx.status(holds);
    let mut table = Table::new("trace", &["iteration", "Q", "A", "D", "diagnostic"])?;
    for it in &best.iterates {
        table.row([
            it.iteration.to_string(),
            num(it.value.q),
            num(it.value.mass),
            num(it.value.dirichlet),
            num(it.diagnostic),
        ])?;
    }
    let result = BestConstantResult {
        q_star: best.q_star,
        c_b_lower_bound: 1.0 / best.q_star,
        status: best.status.as_str(),
        iterations: best.iterates.len() - 1,
        evaluations: best.evaluations,
        monotone: best.is_monotone(),
        restart: best_k,
        restarts: traces
            .iter()
            .enumerate()
            .map(|(k, t)| RestartSummary { seed: c.seed.wrapping_add(k as u64), q_star: t.q_star, status: t.status.as_str() })
            .collect(),
        mazya_norm_lower_bound: norm.lower_bound,
        c_h_norm_power: k,
        consistency_product: product,
        consistency_holds,
        centers: best.best.centers.clone(),
        coefficients: best.best.coefficients.clone(),
        flags: flag_names(best.flags),
    };
    let files = vec![
        ("best_constant.json".to_string(), ctx.envelope(status, result)?),
        ("trace.csv".to_string(), table.finish(ctx.hash)?),
    ];
    Ok(Output { status, warnings: ctx.warnings, files })
}

#[derive(Serialize)]
struct CapacityResult {
    set: String,
    value: f64,
    kind: String,
    reference: Option<f64>,
    reference_exact: bool,
    relative_gap: Option<f64>,
    convergence: Vec<f64>,
    monotone: bool,
    iterations: usize,
    flags: Vec<String>,
    mazya: Option<MazyaResult>,
}

#[derive(Serialize)]
struct MazyaResult {
    weight: String,
    r: f64,
    lower_bound: f64,
    family: String,
}

fn capacity(ctx: Ctx) -> Result<Output, Error> {
    let c = ctx.config;
    let (dim, p) = (c.n, c.p);
    let f = parse_compact_set(&c.set, dim)?;
    let num_err = |e: logsob_core::Error| Error::Numerical(e.to_string());
    let grid = Arc::new(RadialGrid::new(dim, &ctx.grid_spec()).map_err(num_err)?);
    let est = cap_p_refinement(&f, &grid, p, c.doublings).map_err(num_err)?;
    let (reference, exact) = match &f {
        CompactSetSpec::Ball { center, radius } if center.iter().all(|x| *x == 0.0) => {
            (Some(cap_p_ball(dim, p, *radius).map_err(num_err)?), true)
        }
        other => match other.capacity_upper(dim, p) {
            Ok((v, e)) => (Some(v), e),
            Err(_) => (None, false),
        },
    };
    let monotone = est.convergence.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
    let holds = match (reference, exact) {
        (Some(v), true) => est.value >= v * (1.0 - c.tolerances.capacity),
        (Some(v), false) => est.value <= v * (1.0 + c.tolerances.capacity),
        _ => true,
    } && monotone;
    let mut conv = Table::new("capacity", &["level", "value"])?;
    for (k, v) in est.convergence.iter().enumerate() {
        conv.row([k.to_string(), num(*v)])?;
    }
    let mut files = vec![("capacity.csv".to_string(), conv.finish(ctx.hash)?)];
    let mazya = match c.r {
        Some(r) => {
            let g = parse_weight(&c.weight, dim, p, Some(r))?;
            let nm = mazya_norm_estimate(&g, dim, p, r, &default_ball_family(dim)).map_err(num_err)?;
            let mut t = Table::new("mazya", &["set", "integral", "capacity", "capacity_power", "ratio"])?;
            for row in &nm.rows {
                t.row([row.set.clone(), num(row.integral), num(row.capacity), num(row.capacity_power), num(row.ratio)])?;
            }
            files.push(("mazya.csv".into(), t.finish(ctx.hash)?));
            Some(MazyaResult { weight: g.label(), r, lower_bound: nm.lower_bound, family: nm.family })
        }
        None => None,
    };
    let status = ctx.status(holds);
    let result = CapacityResult {
        set: f.label(),
        value: est.value,
        kind: format!("{:?}", est.kind),
        reference,
        reference_exact: exact,
        relative_gap: reference.map(|v| est.value / v - 1.0),
        convergence: est.convergence.clone(),
        monotone,
        iterations: est.iterations,
        flags: flag_names(est.flags),
        mazya,
    };
    files.insert(0, ("capacity.json".into(), ctx.envelope(status, result)?));
    Ok(Output { status, warnings: ctx.warnings, files })
}

#[derive(Serialize)]
struct AssouadResult {
    set: String,
    dim: f64,
    dim_lower: f64,
    per_base: Vec<f64>,
    spread: f64,
    porosity: f64,
    flags: Vec<String>,
}

fn assouad(ctx: Ctx) -> Result<Output, Error> {
    let c = ctx.config;
    let e = parse_closed_set(&c.set, c.n)?;
    let num_err = |e: logsob_core::Error| Error::Numerical(e.to_string());
    let est = assouad_dimension_estimate(&e, c.n, &AssouadSampling::default()).map_err(num_err)?;
    let por = porosity_constant(&e, c.n, &PorositySampling::default()).map_err(num_err)?;
    let mut t = Table::new("assouad", &["base", "R", "r", "lower", "upper"])?;
    for row in &est.rows {
        t.row([row.base.to_string(), num(row.big_r), num(row.r), row.lower.to_string(), row.upper.to_string()])?;
    }
    let status = ctx.status(true);
    let result = AssouadResult {
        set: e.label(),
        dim: est.dim,
        dim_lower: est.dim_lower,
        per_base: est.per_base.clone(),
        spread: est.spread,
        porosity: por.alpha,
        flags: flag_names(est.flags),
    };
    let files = vec![
        ("assouad.json".to_string(), ctx.envelope(status, result)?),
        ("assouad.csv".to_string(), t.finish(ctx.hash)?),
    ];
    Ok(Output { status, warnings: ctx.warnings, files })
}

#[derive(Serialize)]
struct SweepPoint {
    #[serde(rename = "N")]
    n: usize,
    p: f64,
    r: Option<f64>,
    a: f64,
    gamma: Option<f64>,
    status: Status,
    reason: Option<String>,
    reports: Vec<ReportRecord>,
}

fn sweep(ctx: Ctx) -> Result<Output, Error> {
    let c = ctx.config;
    let s = &c.sweep;
    let or_scalar = |v: &Vec<f64>, x: Option<f64>| if v.is_empty() { vec![x] } else { v.iter().map(|y| Some(*y)).collect() };
    let ns = if s.n.is_empty() { vec![c.n] } else { s.n.clone() };
    let ps = if s.p.is_empty() { vec![c.p] } else { s.p.clone() };
    let rs = or_scalar(&s.r, c.r);
    let as_ = if s.a.is_empty() { vec![c.a] } else { s.a.clone() };
    let gs = or_scalar(&s.gamma, c.gamma);
    let mut points = Vec::new();
    for &n in &ns {
        for &p in &ps {
            for &r in &rs {
                for &a in &as_ {
                    for &gamma in &gs {
                        points.push(ScenarioConfig {
                            command: Command::Verify,
                            n,
                            p,
                            r,
                            a,
                            gamma,
                            sweep: Default::default(),
                            ..c.clone()
                        });
                    }
                }
            }
        }
    }
    let results: Vec<SweepPoint> = points
        .par_iter()
        .map(|pc| {
            let base = |status, reason, reports| SweepPoint {
                n: pc.n,
                p: pc.p,
                r: pc.r,
                a: pc.a,
                gamma: pc.gamma,
                status,
                reason,
                reports,
            };
            let warnings = match pc.validate() {
                Ok(w) => w,
                Err(e) => return base(Status::Error, Some(format!("skipped: {e}")), Vec::new()),
            };
            let hash = pc.hash();
            let sub = Ctx { config: pc, hash: &hash, warnings };
            let prepared = verify_inputs(pc).and_then(|(w, e)| {
                let (u, _) = test_function(&sub, w.as_ref(), e.as_ref())?;
                Ok((w, e, u))
            });
            match prepared {
                Err(e) => base(Status::Error, Some(e.to_string()), Vec::new()),
                Ok((w, e, u)) => match verify_reports(&sub, w.as_ref(), e.as_ref(), &u) {
                    Err(err) => base(Status::Error, Some(err.to_string()), Vec::new()),
                    Ok((reports, _)) => {
                        let holds = reports.iter().all(|r| r.holds());
                        let status = sub.status(holds);
                        let reason = (!sub.warnings.is_empty()).then(|| sub.warnings.join("; "));
                        base(status, reason, reports.iter().map(ReportRecord::from).collect())
                    }
                },
            }
        })
        .collect();
    let mut t = Table::new(
        "sweep",
        &["N", "p", "r", "a", "gamma", "kind", "lhs", "rhs", "residual", "error_budget", "holds", "status"],
    )?;
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for pt in &results {
        let status = serde_json::to_value(pt.status).map_err(|e| Error::Output(e.to_string()))?;
        let status = status.as_str().unwrap_or_default().to_string();
        if pt.reports.is_empty() {
            t.row([
                pt.n.to_string(),
                num(pt.p),
                opt(pt.r),
                num(pt.a),
                opt(pt.gamma),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                status.clone(),
            ])?;
        }
        for r in &pt.reports {
            t.row([
                pt.n.to_string(),
                num(pt.p),
                opt(pt.r),
                num(pt.a),
                opt(pt.gamma),
                r.kind.to_string(),
                num(r.lhs),
                num(r.rhs),
                num(r.residual),
                num(r.error_budget),
                r.holds.to_string(),
                status.clone(),
            ])?;
        }
    }
    let ran: Vec<&SweepPoint> = results.iter().filter(|p| !p.reason.as_deref().is_some_and(|r| r.starts_with("skipped"))).collect();
    let status = if ran.iter().all(|p| p.status == Status::Ok) {
        ctx.status(true)
    } else if ran.iter().any(|p| matches!(p.status, Status::Violated | Status::Error)) {
        Status::Violated
    } else {
        Status::Policy
    };
    let files = vec![
        ("sweep.json".to_string(), ctx.envelope(status, &results)?),
        ("sweep.csv".to_string(), t.finish(ctx.hash)?),
    ];
    Ok(Output { status, warnings: ctx.warnings, files })
}
