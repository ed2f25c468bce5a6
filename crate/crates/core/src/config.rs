//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::equilibrium::NewtonConfig;
use crate::reconstruct::CwenoParams;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Standard scheme, quadrature source.
    Sm,
    /// Well-balanced with closed-form equilibria.
    Wbm,
    /// Well-balanced with equilibria from the discrete stationary solver.
    Dwbm,
}

impl Scheme {
    pub fn label(self, order: u8) -> String {
        let s = match self {
            Scheme::Sm => "SM",
            Scheme::Wbm => "WBM",
            Scheme::Dwbm => "DWBM",
        };
        format!("{s}{order}")
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "sm" => Ok(Scheme::Sm),
            "wbm" => Ok(Scheme::Wbm),
            "dwbm" => Ok(Scheme::Dwbm),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

/// Boundary data at one end of the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySpec {
    /// Open boundary.
    Free,
    /// Full state prescribed at the boundary point.
    DirichletState(Vec<f64>),
    /// Listed `(component, value)` pairs prescribed, the rest extrapolated.
    DirichletComponents(Vec<(usize, f64)>),
}

impl BoundarySpec {
    pub fn validate(&self, n_vars: usize) -> Result<(), Error> {
        match self {
            BoundarySpec::Free => Ok(()),
            BoundarySpec::DirichletState(v) if v.len() != n_vars => {
                Err(Error::Config(format!("boundary state has {} components, expected {n_vars}", v.len())))
            }
            BoundarySpec::DirichletState(v) if v.iter().any(|x| !x.is_finite()) => {
                Err(Error::Config("boundary state must be finite".into()))
            }
            BoundarySpec::DirichletState(_) => Ok(()),
            BoundarySpec::DirichletComponents(c) => {
                let mut seen = vec![false; n_vars];
                for &(j, v) in c {
                    if j >= n_vars {
                        return Err(Error::Config(format!("boundary component {j} out of range")));
                    }
                    if std::mem::replace(&mut seen[j], true) {
                        return Err(Error::Config(format!("boundary component {j} given twice")));
                    }
                    if !v.is_finite() {
                        return Err(Error::Config("boundary value must be finite".into()));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Numerical method settings shared by every run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    pub order: u8,
    pub np: usize,
    pub newton: NewtonConfig,
    pub scalar_sw: bool,
    pub cweno: CwenoParams,
}

impl SchemeSpec {
    pub fn new(scheme: Scheme, order: u8, np: usize) -> Self {
        Self { scheme, order, np, newton: NewtonConfig::default(), scalar_sw: false, cweno: CwenoParams::default() }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(1..=3).contains(&self.order) {
            return Err(Error::Config(format!("order must be 1, 2 or 3, got {}", self.order)));
        }
        if self.np == 0 {
            return Err(Error::Config("np must be positive".into()));
        }
        if !(self.newton.tol > 0.0) {
            return Err(Error::Config("newton_tol must be positive".into()));
        }
        if self.newton.max_iter == 0 {
            return Err(Error::Config("newton_max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// File-level configuration. Unset optional fields take the scenario's
/// defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: String,
    pub scheme: Scheme,
    pub order: u8,
    pub cells: usize,
    pub cfl: Option<f64>,
    pub t_end: Option<f64>,
    pub np: Option<usize>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Jacobian recomputed every `k_reuse` Newton iterations; `0` freezes it.
    pub k_reuse: Option<usize>,
    pub scalar_sw: bool,
    pub output_times: Vec<f64>,
    pub output_dir: Option<PathBuf>,
    pub left_bc: Option<BoundarySpec>,
    pub right_bc: Option<BoundarySpec>,
    pub cweno: CwenoParams,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            scenario: "1.1".into(),
            scheme: Scheme::Dwbm,
            order: 3,
            cells: 100,
            cfl: None,
            t_end: None,
            np: None,
            newton_tol: 1e-8,
            newton_max_iter: 20,
            k_reuse: None,
            scalar_sw: false,
            output_times: Vec::new(),
            output_dir: None,
            left_bc: None,
            right_bc: None,
            cweno: CwenoParams::default(),
        }
    }
}

impl SimulationConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, Error> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, Error> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let Some(c) = self.cfl {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::Config(format!("cfl must lie in (0, 1], got {c}")));
            }
        }
        if let Some(t) = self.t_end {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("t_end must be finite and >= 0, got {t}")));
            }
        }
        if self.cells == 0 {
            return Err(Error::Config("cells must be positive".into()));
        }
        if self.output_times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Config("output times must be finite and >= 0".into()));
        }
        self.scheme_spec(1).validate()
    }

    /// Newton settings with `k_reuse` resolved against a default.
    pub fn newton(&self, default_k: usize) -> NewtonConfig {
        let k = match self.k_reuse.unwrap_or(default_k) {
            0 => usize::MAX,
            k => k,
        };
        NewtonConfig { tol: self.newton_tol, max_iter: self.newton_max_iter, k_reuse: k }
    }

    pub fn scheme_spec(&self, default_np: usize) -> SchemeSpec {
        SchemeSpec {
            scheme: self.scheme,
            order: self.order,
            np: self.np.unwrap_or(default_np),
            newton: self.newton(1),
            scalar_sw: self.scalar_sw,
            cweno: self.cweno,
        }
    }
}
