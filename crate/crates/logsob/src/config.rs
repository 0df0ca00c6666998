//! Scenario configuration: a TOML file plus command-line overrides.

use std::path::{Path, PathBuf};

use logsob_core::geometry::{admissible_exponent_range, Order};
use logsob_core::params::critical_exponent;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::parse::{parse_closed_set, parse_compact_set, parse_weight};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    BestConstant,
    Capacity,
    Assouad,
    Sweep,
}

impl Command {
    pub fn as_str(&self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::BestConstant => "best-constant",
            Command::Capacity => "capacity",
            Command::Assouad => "assouad",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Ineq {
    Wls,
    InterpolationGap,
    Mazya,
    LogHardy,
    LogHardy2,
    LogHardyChain,
    Hardy,
    LogSobolevLp,
    LorentzSobolev,
    LogLorentzSobolev,
}

impl Ineq {
    fn needs_r(&self) -> bool {
        matches!(self, Ineq::Wls | Ineq::InterpolationGap | Ineq::Mazya)
    }

    pub fn order(&self) -> Option<Order> {
        match self {
            Ineq::LogHardy | Ineq::LogHardyChain => Some(Order::First),
            Ineq::LogHardy2 => Some(Order::Second),
            _ => None,
        }
    }
}

/// What to do when `a` falls outside the admissible window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Run anyway and exit with the policy status.
    Warn,
    /// Refuse to run.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nodes: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { nodes: 4096, r_min: 1e-6, r_max: 50.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed shortfall of `Q* C_H norm^{p/r}` below one.
    pub consistency: f64,
    /// Allowed shortfall of a variational capacity below the closed form, relative.
    pub capacity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { consistency: 1e-3, capacity: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizeConfig {
    pub bumps: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub c_min: f64,
    pub c_max: f64,
    pub nodes: usize,
    pub r_max: f64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig { bumps: 8, restarts: 1, max_iter: 2000, c_min: 0.05, c_max: 5.0, nodes: 2048, r_max: 100.0 }
    }
}

/// Value lists for `sweep`; an empty list keeps the scalar setting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "N")]
    pub n: Vec<usize>,
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub a: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub command: Command,
    pub ineq: Ineq,
    pub weight: String,
    pub set: String,
    /// `auto`, `gaussian`, `bump`, `shell` or `cylindrical`.
    pub profile: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub r: Option<f64>,
    pub a: f64,
    pub gamma: Option<f64>,
    pub q: Option<f64>,
    pub seed: u64,
    pub policy: Policy,
    pub doublings: usize,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub optimize: OptimizeConfig,
    pub sweep: SweepConfig,
    pub out: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            command: Command::Verify,
            ineq: Ineq::Wls,
            weight: "g1".into(),
            set: "point".into(),
            profile: "auto".into(),
            n: 3,
            p: 2.0,
            r: None,
            a: 0.0,
            gamma: None,
            q: None,
            seed: 0,
            policy: Policy::Warn,
            doublings: 2,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            optimize: OptimizeConfig::default(),
            sweep: SweepConfig::default(),
            out: PathBuf::from("out"),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, Error> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Checks the parameter windows of the requested pipeline. Hard
    /// violations are errors; soft ones come back as warnings.
    pub fn validate(&self) -> Result<Vec<String>, Error> {
        let mut warnings = Vec::new();
        let n = self.n as f64;
        let violated = |h: &str, detail: String| Err(Error::Hypothesis(format!("{h} ({detail})")));
        if self.grid.nodes < 16 || !(self.grid.r_min > 0.0 && self.grid.r_max > self.grid.r_min) {
            return violated("grid needs 0 < r_min < r_max and at least 16 nodes", format!("{:?}", self.grid));
        }
        if self.command == Command::Assouad {
            if self.n == 0 {
                return violated("N >= 1", format!("N = {}", self.n));
            }
            parse_closed_set(&self.set, self.n)?;
            return Ok(warnings);
        }
        if self.n < 3 {
            return violated("N >= 3", format!("N = {}", self.n));
        }
        if !(self.p > 1.0 && self.p < n) {
            return violated("1 < p < N", format!("p = {}, N = {}", self.p, self.n));
        }
        let ps = critical_exponent(self.n, self.p);
        let check_r = |r: Option<f64>| -> Result<f64, Error> {
            let r = r.ok_or_else(|| Error::Hypothesis("r is required: p < r <= p*".into()))?;
            if !(r > self.p && r <= ps * (1.0 + 1e-12)) {
                return Err(Error::Hypothesis(format!("p < r <= p* (r = {r}, p = {}, p* = {ps})", self.p)));
            }
            Ok(r)
        };
        match self.command {
            Command::Verify | Command::Sweep => {
                if self.command == Command::Sweep {
                    return Ok(warnings);
                }
                if self.ineq.needs_r() {
                    check_r(self.r)?;
                    parse_weight(&self.weight, self.n, self.p, self.r)?;
                }
                if self.ineq == Ineq::InterpolationGap {
                    if let (Some(q), Some(r)) = (self.q, self.r) {
                        if !(q >= self.p && q < r) {
                            return violated("p <= q < r", format!("q = {q}"));
                        }
                    }
                }
                if let Some(order) = self.ineq.order() {
                    let e = parse_closed_set(&self.set, self.n)?;
                    let d = e.nominal_dimension(self.n);
                    if !(d < n) {
                        return violated("Assouad dimension d < N", format!("d = {d}"));
                    }
                    let w = admissible_exponent_range(self.n, self.p, d, order)
                        .map_err(|e| Error::Hypothesis(e.to_string()))?;
                    if !w.contains(self.a) {
                        let msg = format!(
                            "a = {} outside the admissible window ({}, {}) for N = {}, p = {}, d = {}",
                            self.a, w.lower, w.upper, self.n, self.p, d
                        );
                        if self.policy == Policy::Strict {
                            return Err(Error::Hypothesis(msg));
                        }
                        warnings.push(msg);
                    }
                }
            }
            Command::BestConstant => {
                let r = check_r(self.r)?;
                parse_weight(&self.weight, self.n, self.p, self.r)?;
                let gamma = self
                    .gamma
                    .ok_or_else(|| Error::Hypothesis("gamma is required: gamma > r/(r-p)".into()))?;
                if !(gamma > 0.0) {
                    return violated("gamma > 0", format!("gamma = {gamma}"));
                }
                let t = r / (r - self.p);
                if !(gamma > t) {
                    warnings.push(format!("gamma = {gamma} does not exceed r/(r-p) = {t}; the quotient may be unbounded below"));
                }
                if self.optimize.bumps == 0 || self.optimize.restarts == 0 {
                    return violated("at least one bump and one restart", format!("{:?}", self.optimize));
                }
            }
            Command::Capacity => {
                parse_compact_set(&self.set, self.n)?;
                if self.r.is_some() {
                    check_r(self.r)?;
                    parse_weight(&self.weight, self.n, self.p, self.r)?;
                }
            }
            Command::Assouad => unreachable!(),
        }
        Ok(warnings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_and_hash() {
        let c = ScenarioConfig::from_toml(
            "command = 'best-constant'\nN = 3\np = 2.0\nr = 4.0\ngamma = 3.0\n[optimize]\nbumps = 4\n",
        )
        .unwrap();
        assert_eq!(c.command, Command::BestConstant);
        assert_eq!(c.optimize.bumps, 4);
        assert_eq!(c.optimize.restarts, 1);
        let mut d = c.clone();
        d.out = PathBuf::from("elsewhere");
        assert_eq!(c.hash(), d.hash());
        d.seed = 1;
        assert_ne!(c.hash(), d.hash());
        assert!(ScenarioConfig::from_toml("nonsense = 1").is_err());
    }

    #[test]
    fn hypotheses_are_named() {
        let c = ScenarioConfig { p: 3.0, ..Default::default() };
        assert!(c.validate().unwrap_err().to_string().contains("1 < p < N"));
        let c = ScenarioConfig { r: Some(7.0), ..Default::default() };
        assert!(c.validate().unwrap_err().to_string().contains("p < r <= p*"));
        let c = ScenarioConfig { ineq: Ineq::LogHardy, a: 0.6, ..Default::default() };
        let w = c.validate().unwrap();
        assert!(w[0].contains("(-1.5, 0.5)"), "{w:?}");
        let c = ScenarioConfig { policy: Policy::Strict, ..c };
        assert!(c.validate().is_err());
        let c = ScenarioConfig {
            command: Command::BestConstant,
            r: Some(4.0),
            gamma: Some(1.5),
            ..Default::default()
        };
        assert!(c.validate().unwrap()[0].contains("r/(r-p)"));
    }
}
