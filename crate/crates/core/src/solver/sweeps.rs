//! Confinement, box, `q` and drift sweeps.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::w1p_distance;
use crate::scalar::Scalar;

use super::{
    solve_extremal, solve_extremal_from, solve_linfty, solve_unchecked, Exponent, ProblemConfig,
    SolveResult, Start,
};

/// Runs `f(0..n)` on up to `jobs` threads; results keep input order.
fn run_parallel<R: Send>(n: usize, jobs: usize, f: impl Fn(usize) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || n <= 1 {
        return (0..n).map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(n) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let r = f(i);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.unwrap())
        .collect()
}

fn at<T>(label: String, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Sweep {
        at: label,
        source: Box::new(e),
    })
}

#[derive(Debug, Clone)]
pub struct ConfinementPoint<T> {
    pub n: u32,
    pub lambda: f64,
    pub result: SolveResult<T>,
}

#[derive(Debug, Clone)]
pub struct ConfinementSweep<T> {
    pub points: Vec<ConfinementPoint<T>>,
    pub unconfined: SolveResult<T>,
    /// `λ_n` nonincreasing along the schedule and above the unconfined value,
    /// both up to a relative slack of `1e-6`.
    pub monotone: bool,
}

/// Solves the confined problems for an increasing schedule of `n`, each
/// warm-started from the previous extremal, then the unconfined problem.
pub fn confinement_sweep<T: Scalar>(
    cfg: &ProblemConfig,
    schedule: &[u32],
) -> Result<ConfinementSweep<T>> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "confinement schedule must be nonempty and increasing".into(),
        ));
    }
    cfg.validate()?;
    let mut points: Vec<ConfinementPoint<T>> = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let c = cfg.clone().with_confinement(Some(n));
        let prev = points.last().map(|pt| &pt.result.u);
        let result = at(format!("n = {n}"), solve_extremal_from(&c, prev))?;
        points.push(ConfinementPoint {
            n,
            lambda: result.lambda,
            result,
        });
    }
    let last = points.last().map(|pt| &pt.result.u);
    let unconfined = at(
        "unconfined".into(),
        solve_extremal_from(&cfg.clone().with_confinement(None), last),
    )?;
    let slack = 1e-6;
    let monotone = points
        .windows(2)
        .all(|w| w[1].lambda <= w[0].lambda * (1.0 + slack))
        && points.last().unwrap().lambda >= unconfined.lambda * (1.0 - slack);
    Ok(ConfinementSweep {
        points,
        unconfined,
        monotone,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxPoint {
    pub half_extent: f64,
    pub lambda: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxSweep {
    pub points: Vec<BoxPoint>,
    /// `λ(L)` nonincreasing up to a relative slack of `1e-6`.
    pub monotone: bool,
    /// Aitken Δ² extrapolation of the last three values (the last value when
    /// fewer than three points or the differences do not contract).
    pub extrapolated: f64,
}

/// Aitken Δ² limit of the last three terms of a sequence.
pub fn aitken_limit(values: &[f64]) -> f64 {
    let n = values.len();
    let last = values[n - 1];
    if n < 3 {
        return last;
    }
    let (x0, x1, x2) = (values[n - 3], values[n - 2], values[n - 1]);
    let (d1, d2) = (x1 - x0, x2 - x1);
    let denom = d2 - d1;
    if denom == 0.0 || d1 == 0.0 || (d2 / d1).abs() >= 1.0 || d2 / d1 < 0.0 {
        return last;
    }
    x2 - d2 * d2 / denom
}

/// Cold-started solves on growing truncation boxes. Steiner domains start
/// from the symmetrized bump at the origin; other domains from the flat
/// start of [`drift_test`], since mass placed at the origin would creep
/// toward the escaping direction only very slowly.
pub fn box_sweep<T: Scalar>(
    cfg: &ProblemConfig,
    schedule: &[f64],
    jobs: usize,
) -> Result<BoxSweep> {
    if schedule.len() < 2 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "box schedule needs at least two increasing extents".into(),
        ));
    }
    cfg.validate()?;
    let start = if cfg
        .clone()
        .with_half_extent(schedule[0])
        .build_mask()?
        .is_steiner_valid()
    {
        Start::Origin
    } else {
        Start::PositiveHalf
    };
    let results = run_parallel(schedule.len(), jobs, |i| {
        let c = cfg.clone().with_half_extent(schedule[i]);
        at(
            format!("L = {}", schedule[i]),
            solve_unchecked::<T>(&c, None, start),
        )
    });
    let mut points = Vec::with_capacity(schedule.len());
    for (r, &l) in results.into_iter().zip(schedule) {
        let r = r?;
        points.push(BoxPoint {
            half_extent: l,
            lambda: r.lambda,
            converged: r.converged,
        });
    }
    let monotone = points
        .windows(2)
        .all(|w| w[1].lambda <= w[0].lambda * (1.0 + 1e-6));
    let lambdas: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    Ok(BoxSweep {
        extrapolated: aitken_limit(&lambdas),
        points,
        monotone,
    })
}

#[derive(Debug, Clone)]
pub struct QPoint<T> {
    pub q: f64,
    pub lambda: f64,
    /// `‖u_q − u_∞‖_{W^{1,p}}`.
    pub distance: f64,
    pub argmax_at_origin: bool,
    pub result: SolveResult<T>,
}

#[derive(Debug, Clone)]
pub struct QSweep<T> {
    pub limit: SolveResult<T>,
    pub points: Vec<QPoint<T>>,
    /// Distances strictly decreasing along the schedule.
    pub distance_decreasing: bool,
    /// `|λ_q − λ_∞|` strictly decreasing along the schedule.
    pub lambda_approaching: bool,
}

/// Finite-`q` extremals for an increasing schedule compared with the pinned
/// `q = ∞` extremal (requires `p > N`).
pub fn q_sweep<T: Scalar>(cfg: &ProblemConfig, schedule: &[f64], jobs: usize) -> Result<QSweep<T>> {
    if cfg.p <= cfg.dim as f64 {
        return Err(Error::Infeasible(format!(
            "q sweep requires p > N (p = {}, N = {})",
            cfg.p, cfg.dim
        )));
    }
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "q schedule must be nonempty and increasing".into(),
        ));
    }
    let limit = at(
        "q = inf".into(),
        solve_linfty::<T>(&cfg.clone().with_q(Exponent::Infinity)),
    )?;
    let results = run_parallel(schedule.len(), jobs, |i| {
        let c = cfg.clone().with_q(schedule[i]);
        at(format!("q = {}", schedule[i]), solve_extremal::<T>(&c))
    });
    let origin = limit.u.grid().origin();
    let mut points = Vec::with_capacity(schedule.len());
    for (r, &q) in results.into_iter().zip(schedule) {
        let r = r?;
        let distance = w1p_distance(&r.u, &limit.u, cfg.p)?.as_f64();
        let argmax_at_origin = r.u.argmax().0 == origin;
        points.push(QPoint {
            q,
            lambda: r.lambda,
            distance,
            argmax_at_origin,
            result: r,
        });
    }
    let distance_decreasing = points.windows(2).all(|w| w[1].distance < w[0].distance);
    let lambda_approaching = points
        .windows(2)
        .all(|w| (w[1].lambda - limit.lambda).abs() < (w[0].lambda - limit.lambda).abs());
    Ok(QSweep {
        limit,
        points,
        distance_decreasing,
        lambda_approaching,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftPoint {
    pub half_extent: f64,
    pub argmax: Vec<f64>,
    /// `|x_0|` of the argmax: distance from the wall or pinch along axis 0.
    pub distance: f64,
    pub lambda: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriftReport {
    pub points: Vec<DriftPoint>,
    /// Argmax distance strictly increasing in `L`.
    pub drifting: bool,
}

/// Solves on growing boxes from an iterate that is constant on `{x_0 > 0}`
/// and records where the extremal peaks. A start localized at the origin
/// would only slide away from a wall or pinch at an exponentially small
/// rate; the flat start instead concentrates where the truncated domain
/// leaves the most room.
pub fn drift_test<T: Scalar>(
    cfg: &ProblemConfig,
    schedule: &[f64],
    jobs: usize,
) -> Result<DriftReport> {
    if schedule.len() < 3 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "drift test needs at least three increasing extents".into(),
        ));
    }
    cfg.validate()?;
    let runs = run_parallel(schedule.len(), jobs, |i| {
        let c = cfg.clone().with_half_extent(schedule[i]);
        at(
            format!("L = {}", schedule[i]),
            solve_unchecked::<T>(&c, None, Start::PositiveHalf),
        )
    });
    let mut points = Vec::with_capacity(schedule.len());
    for (r, &l) in runs.into_iter().zip(schedule) {
        let r = r?;
        points.push(DriftPoint {
            half_extent: l,
            distance: r.argmax[0].abs(),
            argmax: r.argmax,
            lambda: r.lambda,
            converged: r.converged,
        });
    }
    let drifting = points.windows(2).all(|w| w[1].distance > w[0].distance);
    Ok(DriftReport { points, drifting })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aitken_recovers_geometric_limits() {
        let seq: Vec<f64> = (0..3).map(|k| 2.0 + 0.5f64.powi(k)).collect();
        assert!((aitken_limit(&seq) - 2.0).abs() < 1e-12);
        assert_eq!(aitken_limit(&[3.0, 2.0]), 2.0);
        assert_eq!(aitken_limit(&[1.0, 1.0, 1.0]), 1.0);
    }

    #[test]
    fn parallel_keeps_order() {
        let out = run_parallel(20, 4, |i| i * i);
        assert_eq!(out, (0..20).map(|i| i * i).collect::<Vec<_>>());
    }
}
