//! Discrete minimization of `∫|∇u|^p (+ ∫V_n|u|^p)` under `‖u‖_q = 1`, the
//! pinned problem for `q = ∞`, and the sweeps built on them.

mod config;
mod descent;
mod linalg;
mod sweeps;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{inradius, DomainMask, SteinerValidity};
use crate::grid::{lq_norm_raw, GridFunction};
use crate::scalar::Scalar;
use crate::symmetrization::rearrange;

pub use config::{
    check_exponents, DomainChoice, Exponent, Extent, GridParams, ProblemConfig, SolverParams,
};
pub use descent::HistoryEntry;
pub use sweeps::{
    aitken_limit, box_sweep, confinement_sweep, drift_test, q_sweep, BoxPoint, BoxSweep,
    ConfinementPoint, ConfinementSweep, DriftPoint, DriftReport, QPoint, QSweep,
};

use descent::{descend, Constraint, Objective};

/// Computed constant, extremal and diagnostics of one solve.
#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    /// Final value of the Rayleigh quotient (or of the pinned energy).
    pub lambda: f64,
    /// Extremal: `‖u‖_q = 1`, or `u(0) = 1` when `q = ∞`.
    pub u: GridFunction<T>,
    /// Preconditioned gradient norm relative to `λ` at the last iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub argmax: Vec<f64>,
    pub sup: f64,
    /// Minimum of `u` over the ball of radius `r_Ω/(3√N)` about the origin.
    pub ball_floor: f64,
    pub steiner: SteinerValidity,
    pub energy_history: Vec<HistoryEntry>,
}

/// Serializable part of a [`SolveResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub lambda: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub argmax: Vec<f64>,
    pub sup: f64,
    pub ball_floor: f64,
    pub steiner: SteinerValidity,
}

impl<T: Scalar> SolveResult<T> {
    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            lambda: self.lambda,
            residual: self.residual,
            iterations: self.iterations,
            converged: self.converged,
            argmax: self.argmax.clone(),
            sup: self.sup,
            ball_floor: self.ball_floor,
            steiner: self.steiner.clone(),
        }
    }
}

/// `G_{p,n}(u) / ‖u‖_q^p` with the exponents and confinement of `cfg`.
pub fn rayleigh<T: Scalar>(u: &GridFunction<T>, cfg: &ProblemConfig) -> Result<T> {
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    if !(cfg.p > 1.0) {
        return Err(Error::InvalidArgument(format!(
            "p = {} must exceed 1",
            cfg.p
        )));
    }
    let objective = Objective::<T>::new(u.mask(), cfg.p, cfg.solver.smoothing, cfg.confinement);
    let g = objective.value(u.values());
    let norm = lq_norm_raw(u.values(), cfg.q.value(), u.grid().cell_volume());
    Ok(g / norm.powf(T::lit(cfg.p)))
}

/// Positive bump of width `max(r_Ω, 2h)` centered at `center`, optionally
/// perturbed by a seeded multiplicative factor in `1 ± perturbation`.
fn initial_guess<T: Scalar>(mask: &DomainMask, center: &[f64], cfg: &ProblemConfig) -> Vec<T> {
    let grid = mask.grid();
    let w = inradius(mask).max(2.0 * grid.spacing());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    let amp = cfg.solver.perturbation;
    let mut x = vec![0.0; grid.dim()];
    (0..grid.len())
        .map(|c| {
            if !mask.is_inside(c) {
                return T::zero();
            }
            grid.center_into(c, &mut x);
            let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
            let noise = if amp > 0.0 {
                1.0 + amp * (2.0 * rng.gen::<f64>() - 1.0)
            } else {
                1.0
            };
            T::lit((-d2 / (2.0 * w * w)).exp() * noise)
        })
        .collect()
}

/// Samples `u` at the cell centers of `mask` (zero where `u` has no data).
pub fn transfer<T: Scalar>(u: &GridFunction<T>, mask: Arc<DomainMask>) -> GridFunction<T> {
    if u.grid() == mask.grid() {
        return GridFunction::from_values_masked(mask, u.values().to_vec());
    }
    GridFunction::from_fn(mask, |x| match u.grid().locate(x) {
        Some(c)
            if u.mask().is_inside(c)
                && u.grid()
                    .center(c)
                    .iter()
                    .zip(x)
                    .all(|(a, b)| (a - b).abs() < 1e-9) =>
        {
            u.values()[c]
        }
        _ => T::zero(),
    })
}

fn ball_floor<T: Scalar>(u: &GridFunction<T>) -> f64 {
    let grid = u.grid();
    let r = inradius(u.mask()) / (3.0 * (grid.dim() as f64).sqrt());
    let radii = grid.radii();
    let mut floor = u.values()[grid.origin()].as_f64();
    for (c, &rc) in radii.iter().enumerate() {
        if rc <= r && u.mask().is_inside(c) {
            floor = floor.min(u.values()[c].as_f64());
        }
    }
    floor
}

fn finish<T: Scalar>(mask: Arc<DomainMask>, out: descent::Outcome<T>) -> SolveResult<T> {
    let u = GridFunction::from_values_masked(mask.clone(), out.values);
    let (cell, sup) = u.argmax();
    SolveResult {
        lambda: out.value.as_f64(),
        argmax: u.grid().center(cell),
        sup: sup.as_f64(),
        ball_floor: ball_floor(&u),
        steiner: mask.steiner().clone(),
        residual: out.residual,
        iterations: out.iterations,
        converged: out.converged,
        energy_history: out.history,
        u,
    }
}

/// Initial iterate of a descent run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Start {
    /// Bump at the origin, symmetrized when the domain is Steiner.
    Origin,
    /// Constant on the inside cells with `x_0 > 0`.
    PositiveHalf,
}

/// Finite-`q` solve without exponent validation; `q = p` is the eigenvalue
/// problem.
pub(crate) fn solve_unchecked<T: Scalar>(
    cfg: &ProblemConfig,
    init: Option<&GridFunction<T>>,
    start: Start,
) -> Result<SolveResult<T>> {
    let q = match cfg.q {
        Exponent::Finite(q) => q,
        Exponent::Infinity => {
            return Err(Error::InvalidArgument(
                "q = inf is solved by solve_linfty".into(),
            ))
        }
    };
    let mask = cfg.build_mask()?;
    let grid = mask.grid();
    let origin = vec![0.0; grid.dim()];
    let mut values = match init {
        Some(u) => transfer(u, mask.clone()).into_values(),
        None => Vec::new(),
    };
    if values.iter().all(|v| *v == T::zero()) {
        values = initial_guess(&mask, &origin, cfg);
        if start == Start::PositiveHalf {
            let mut x = vec![0.0; grid.dim()];
            for (c, v) in values.iter_mut().enumerate() {
                grid.center_into(c, &mut x);
                *v = if mask.is_inside(c) && x[0] > 0.0 {
                    T::one()
                } else {
                    T::zero()
                };
            }
            if values.iter().all(|v| *v == T::zero()) {
                return Err(Error::InvalidArgument("no inside cell with x_0 > 0".into()));
            }
        } else if mask.is_steiner_valid() {
            for axis in 0..grid.dim() {
                values = rearrange(grid, &values, axis);
            }
        }
    }
    let objective = Objective::new(&mask, cfg.p, cfg.solver.smoothing, cfg.confinement);
    let out = descend(
        &mask,
        &objective,
        Constraint::Sphere { q },
        &cfg.solver,
        values,
    );
    Ok(finish(mask, out))
}

/// Minimizes the Rayleigh quotient for finite `q`, starting from a
/// symmetrized bump at the origin.
pub fn solve_extremal<T: Scalar>(cfg: &ProblemConfig) -> Result<SolveResult<T>> {
    solve_extremal_from(cfg, None)
}

/// As [`solve_extremal`], warm-started from `init` (sampled onto the new
/// grid by cell centers).
pub fn solve_extremal_from<T: Scalar>(
    cfg: &ProblemConfig,
    init: Option<&GridFunction<T>>,
) -> Result<SolveResult<T>> {
    cfg.validate()?;
    if !cfg.q.is_finite() {
        return Err(Error::InvalidArgument(
            "q = inf is solved by solve_linfty".into(),
        ));
    }
    solve_unchecked(cfg, init, Start::Origin)
}

/// First eigenvalue `λ_p` of the `p`-Laplacian on the same truncated grid
/// (`q = p`, no confinement).
pub fn lambda_p<T: Scalar>(cfg: &ProblemConfig) -> Result<SolveResult<T>> {
    let mut c = cfg.clone().with_q(cfg.p).with_confinement(None);
    c.solver.sym_every = cfg.solver.sym_every;
    solve_unchecked(&c, None, Start::Origin)
}

/// Minimizes `∫|∇u|^p` with `u(0) = 1` (requires `p > N`), the discrete
/// form of the `q = ∞` problem. Fails if the extremal exceeds 1 anywhere.
pub fn solve_linfty<T: Scalar>(cfg: &ProblemConfig) -> Result<SolveResult<T>> {
    let cfg = cfg.clone().with_q(Exponent::Infinity);
    cfg.validate()?;
    let mask = cfg.build_mask()?;
    let grid = mask.grid();
    let origin = grid.origin();
    if !mask.is_inside(origin) {
        return Err(Error::InvalidArgument(
            "the origin must lie in the domain".into(),
        ));
    }
    let zero = vec![0.0; grid.dim()];
    let init = initial_guess(&mask, &zero, &cfg);
    let objective = Objective::new(&mask, cfg.p, cfg.solver.smoothing, cfg.confinement);
    let out = descend(
        &mask,
        &objective,
        Constraint::Pinned { cell: origin },
        &cfg.solver,
        init,
    );
    let res = finish(mask, out);
    if res.sup > 1.0 + 1e-9 {
        return Err(Error::SymmetryViolation(format!(
            "extremal reaches {} at {:?}, above its pinned value at the origin",
            res.sup, res.argmax
        )));
    }
    Ok(res)
}
