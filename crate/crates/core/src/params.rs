use crate::error::{param_err, Result};

/// The exponent tuple `(N, p, r, a, gamma)`.
///
/// `pstar = N p / (N - p)` is derived. `r`, `a` and `gamma` are optional;
/// each is validated against its window when present.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Params {
    pub dim: usize,
    pub p: f64,
    pub r: Option<f64>,
    pub a: Option<f64>,
    pub gamma: Option<f64>,
}

impl Params {
    pub fn new(dim: usize, p: f64) -> Result<Self> {
        let params = Params { dim, p, r: None, a: None, gamma: None };
        params.validate_base()?;
        Ok(params)
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        self.r = Some(r);
        self.validate_r()?;
        Ok(self)
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = Some(a);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = Some(gamma);
        self.validate_gamma()?;
        Ok(self)
    }

    /// Critical Sobolev exponent `N p / (N - p)`.
    pub fn pstar(&self) -> f64 {
        critical_exponent(self.dim, self.p)
    }

    /// `r / (r - p)`, the smallest admissible log-Sobolev level for `r`.
    pub fn gamma_threshold(&self) -> Option<f64> {
        self.r.map(|r| r / (r - self.p))
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_base()?;
        self.validate_r()?;
        self.validate_gamma()
    }

    fn validate_base(&self) -> Result<()> {
        if self.dim < 3 {
            return Err(param_err!("dimension N = {} must be at least 3", self.dim));
        }
        if !(self.p > 1.0 && self.p < self.dim as f64) {
            return Err(param_err!("p = {} must lie in (1, N) = (1, {})", self.p, self.dim));
        }
        Ok(())
    }

    fn validate_r(&self) -> Result<()> {
        if let Some(r) = self.r {
            let ps = self.pstar();
            if !(r > self.p && r <= ps * (1.0 + 1e-12)) {
                return Err(param_err!(
                    "r = {r} must lie in (p, p*] = ({}, {ps}) for the weighted log-Sobolev inequality",
                    self.p
                ));
            }
        }
        Ok(())
    }

    fn validate_gamma(&self) -> Result<()> {
        if let (Some(g), Some(t)) = (self.gamma, self.gamma_threshold()) {
            if !(g > t) {
                return Err(param_err!(
                    "gamma = {g} must exceed r/(r-p) = {t} for best-constant attainment"
                ));
            }
        }
        Ok(())
    }
}

/// `N p / (N - p)`.
pub fn critical_exponent(dim: usize, p: f64) -> f64 {
    let n = dim as f64;
    n * p / (n - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pstar_is_exact() {
        let pr = Params::new(3, 2.0).unwrap();
        assert_eq!(pr.pstar(), 6.0);
        assert_eq!(Params::new(4, 2.0).unwrap().pstar(), 4.0);
    }

    #[test]
    fn windows_are_enforced() {
        assert!(Params::new(2, 1.5).is_err());
        assert!(Params::new(3, 1.0).is_err());
        assert!(Params::new(3, 3.0).is_err());
        let pr = Params::new(3, 2.0).unwrap();
        assert!(pr.with_r(2.0).is_err());
        assert!(pr.with_r(6.0).is_ok());
        assert!(pr.with_r(6.5).is_err());
        let pr = pr.with_r(4.0).unwrap();
        assert_eq!(pr.gamma_threshold(), Some(2.0));
        assert!(pr.with_gamma(2.0).is_err());
        assert!(pr.with_gamma(3.0).is_ok());
    }
}
