use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{gallery, realize_domain, validate_steiner, DomainMask, DomainSpec};
use crate::grid::Grid;

/// Integrability exponent `q`, possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(q) => q,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }
}

impl From<f64> for Exponent {
    fn from(q: f64) -> Self {
        if q == f64::INFINITY {
            Exponent::Infinity
        } else {
            Exponent::Finite(q)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(q) => s.serialize_f64(*q),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(q) => Ok(Exponent::from(q)),
            Raw::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
                other => other
                    .parse::<f64>()
                    .map(Exponent::from)
                    .map_err(|_| serde::de::Error::custom(format!("invalid exponent '{t}'"))),
            },
        }
    }
}

/// Domain given either by gallery name or by an explicit spec.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainChoice {
    Named(String),
    Spec(DomainSpec),
}

impl From<DomainSpec> for DomainChoice {
    fn from(spec: DomainSpec) -> Self {
        DomainChoice::Spec(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Extent {
    Uniform(f64),
    PerAxis(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    #[serde(alias = "h")]
    pub spacing: f64,
    /// Truncation half extent `L`. On bounded axes the box is trimmed to the
    /// domain plus one cell; omitted entirely for bounded domains.
    #[serde(default, alias = "L", skip_serializing_if = "Option::is_none")]
    pub half_extent: Option<Extent>,
}

impl GridParams {
    pub fn new(spacing: f64, half_extent: Option<f64>) -> Self {
        GridParams {
            spacing,
            half_extent: half_extent.map(Extent::Uniform),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    pub max_iterations: usize,
    /// Relative decrease of the Rayleigh quotient over `window` iterations
    /// below which the descent stops.
    pub tolerance: f64,
    pub window: usize,
    /// Symmetrize every `sym_every` iterations (0 disables).
    pub sym_every: usize,
    /// `δ` in the smoothed integrand `(|∇u|² + δ²)^{p/2}`.
    pub smoothing: f64,
    /// Seed for the random perturbation of the initial guess.
    pub seed: u64,
    /// Amplitude of the multiplicative random perturbation, in `[0, 1)`.
    pub perturbation: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            max_iterations: 200_000,
            tolerance: 1e-9,
            window: 50,
            sym_every: 10,
            smoothing: 0.0,
            seed: 0,
            perturbation: 0.0,
        }
    }
}

/// Everything needed to pose and solve one discrete problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(alias = "N")]
    pub dim: usize,
    pub p: f64,
    pub q: Exponent,
    pub domain: DomainChoice,
    pub grid: GridParams,
    /// Confinement index `n` of the potential `|x|/(n+1)`; absent means none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confinement: Option<u32>,
    #[serde(default)]
    pub solver: SolverParams,
}

impl ProblemConfig {
    pub fn new(
        dim: usize,
        p: f64,
        q: impl Into<Exponent>,
        domain: DomainSpec,
        grid: GridParams,
    ) -> Self {
        ProblemConfig {
            dim,
            p,
            q: q.into(),
            domain: DomainChoice::Spec(domain),
            grid,
            confinement: None,
            solver: SolverParams::default(),
        }
    }

    pub fn with_confinement(mut self, n: Option<u32>) -> Self {
        self.confinement = n;
        self
    }

    pub fn with_solver(mut self, solver: SolverParams) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_q(mut self, q: impl Into<Exponent>) -> Self {
        self.q = q.into();
        self
    }

    pub fn with_half_extent(mut self, l: f64) -> Self {
        self.grid.half_extent = Some(Extent::Uniform(l));
        self
    }

    pub fn domain_spec(&self) -> Result<DomainSpec> {
        let spec = match &self.domain {
            DomainChoice::Named(name) => gallery(name, self.dim)?,
            DomainChoice::Spec(spec) => spec.clone(),
        };
        spec.check_dim(self.dim)?;
        Ok(spec)
    }

    /// Checks `p > 1` and the admissible range of `q`. `q = p` is accepted
    /// only on bounded domains, where it is the plain eigenvalue problem.
    pub fn validate(&self) -> Result<()> {
        let spec = self.domain_spec()?;
        check_exponents(self.dim, self.p, self.q, spec.is_bounded(self.dim))?;
        let s = &self.solver;
        if !(s.tolerance > 0.0) || s.window == 0 || s.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "solver tolerance, window and max_iterations must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&s.perturbation) || s.smoothing < 0.0 {
            return Err(Error::InvalidArgument(
                "perturbation must lie in [0,1) and smoothing be >= 0".into(),
            ));
        }
        self.extents(&spec).map(|_| ())
    }

    pub(crate) fn extents(&self, spec: &DomainSpec) -> Result<Vec<f64>> {
        let h = self.grid.spacing;
        match &self.grid.half_extent {
            None if spec.is_bounded(self.dim) => {
                Ok(spec.truncation_extents(self.dim, f64::INFINITY, h))
            }
            None => Err(Error::InvalidArgument(format!(
                "domain '{}' is unbounded; grid.half_extent is required",
                spec.name()
            ))),
            Some(Extent::Uniform(l)) => Ok(spec.truncation_extents(self.dim, *l, h)),
            Some(Extent::PerAxis(v)) if v.len() == self.dim => Ok(v.clone()),
            Some(Extent::PerAxis(v)) => Err(Error::InvalidArgument(format!(
                "{} half extents given in dimension {}",
                v.len(),
                self.dim
            ))),
        }
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let spec = self.domain_spec()?;
        Grid::with_extents(&self.extents(&spec)?, self.grid.spacing)
    }

    /// Realized and Steiner-checked domain mask.
    pub fn build_mask(&self) -> Result<Arc<DomainMask>> {
        let spec = self.domain_spec()?;
        let grid = Grid::with_extents(&self.extents(&spec)?, self.grid.spacing)?;
        Ok(Arc::new(validate_steiner(realize_domain(&spec, &grid)?)))
    }
}

/// Admissible exponent pairs: `p > 1` and `q > p` with `q < Np/(N−p)` when
/// `p < N`, `q` finite when `p = N`, and `q = ∞` allowed when `p > N`.
pub fn check_exponents(dim: usize, p: f64, q: Exponent, bounded: bool) -> Result<()> {
    let n = dim as f64;
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::Infeasible(format!(
            "p = {p} must be a finite number > 1"
        )));
    }
    match q {
        Exponent::Infinity => {
            if p > n {
                Ok(())
            } else {
                Err(Error::Infeasible(format!(
                    "q = inf requires p > N (got p = {p}, N = {dim})"
                )))
            }
        }
        Exponent::Finite(q) => {
            if !q.is_finite() || q < p {
                return Err(Error::Infeasible(format!(
                    "q = {q} must satisfy q > p = {p}"
                )));
            }
            if q == p {
                return if bounded {
                    Ok(())
                } else {
                    Err(Error::Infeasible(format!(
                        "q = p = {p}: for q <= p the infimum is in general not attained on \
                         unbounded domains; q = p is only accepted on bounded domains"
                    )))
                };
            }
            if p < n {
                let critical = n * p / (n - p);
                if q >= critical {
                    return Err(Error::Infeasible(format!(
                        "q = {q} must be below the critical exponent Np/(N-p) = {critical}"
                    )));
                }
            }
            Ok(())
        }
    }
}
