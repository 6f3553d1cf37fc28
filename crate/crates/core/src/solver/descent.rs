//! Preconditioned projected descent shared by the finite-`q` and the pinned
//! (`q = ∞`) problems.
//!
//! The search direction is `−P⁻¹ g` with `P = p h^N (s A + diag V)`, where
//! `A` is the masked negative Laplacian, `V` the confinement potential and
//! `s` the ratio `Σ|Du|^p / Σ|Du|²` that matches `P` to the size of the
//! `p`-energy. For `p = q = 2` a unit step is one inverse-iteration step.
//! Iterates are projected by `u ↦ |u|` (which never raises the energy) and,
//! on the sphere, renormalized.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::fd::Stencil;
use crate::geometry::DomainMask;
use crate::grid::lq_norm_raw;
use crate::scalar::Scalar;
use crate::solver::config::SolverParams;
use crate::solver::linalg::{conjugate_gradient, dot};
use crate::symmetrization::rearrange;

/// One accepted step of a descent run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub energy: f64,
    pub residual: f64,
}

/// `G(u) = ∫|∇u|^p + ∫V|u|^p`, discretized.
pub(crate) struct Objective<T> {
    stencil: Stencil,
    p: f64,
    delta: f64,
    potential: Option<Vec<T>>,
    cell_volume: f64,
}

impl<T: Scalar> Objective<T> {
    pub fn new(mask: &DomainMask, p: f64, delta: f64, confinement: Option<u32>) -> Self {
        let grid = mask.grid();
        let potential = confinement.map(|n| {
            let w = 1.0 / (n as f64 + 1.0);
            grid.radii().iter().map(|&r| T::lit(r * w)).collect()
        });
        Objective {
            stencil: Stencil::new(grid),
            p,
            delta,
            potential,
            cell_volume: grid.cell_volume(),
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn potential_term(&self, u: &[T]) -> T {
        match &self.potential {
            None => T::zero(),
            Some(v) => {
                let pt = T::lit(self.p);
                let s: T = u.iter().zip(v).map(|(&x, &w)| w * x.abs().powf(pt)).sum();
                s * T::lit(self.cell_volume)
            }
        }
    }

    pub fn value(&self, u: &[T]) -> T {
        self.stencil.energy(u, self.p, self.delta) + self.potential_term(u)
    }

    pub fn value_grad(&self, u: &[T], grad: &mut [T]) -> T {
        let e = self.stencil.energy_and_grad(u, self.p, self.delta, grad);
        if let Some(v) = &self.potential {
            let c = T::lit(self.p * self.cell_volume);
            let pm2 = T::lit(self.p - 2.0);
            for ((g, &x), &w) in grad.iter_mut().zip(u).zip(v) {
                if x != T::zero() {
                    *g = *g + c * w * x.abs().powf(pm2) * x;
                }
            }
        }
        e + self.potential_term(u)
    }

    /// Scale `s` of the preconditioner.
    fn stiffness(&self, u: &[T]) -> T {
        if self.p == 2.0 {
            return T::one();
        }
        let e2 = self.stencil.energy(u, 2.0, 0.0);
        let ep = self.stencil.energy(u, self.p, self.delta);
        if e2 > T::zero() && ep > T::zero() {
            ep / e2
        } else {
            T::one()
        }
    }

    fn precondition(&self, g: &[T], active: &[bool], s: T) -> Vec<T> {
        let n = g.len();
        let scale = T::lit(self.p * self.cell_volume);
        let apply = |x: &[T], out: &mut [T]| {
            self.stencil.laplacian(x, active, out);
            for i in 0..n {
                let mut v = s * out[i];
                if let Some(w) = &self.potential {
                    if active[i] {
                        v = v + w[i] * x[i];
                    }
                }
                out[i] = v * scale;
            }
        };
        let active_count = active.iter().filter(|&&a| a).count();
        let max_iter = 200 + 4 * active_count.min(5000);
        conjugate_gradient(apply, g, active, 1e-9, max_iter).0
    }
}

/// Constraint defining the admissible set.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Constraint {
    /// `‖u‖_q = 1`; the objective is the Rayleigh quotient `G/‖u‖_q^p`.
    Sphere { q: f64 },
    /// `u(cell) = 1`; the objective is `G`.
    Pinned { cell: usize },
}

pub(crate) struct Outcome<T> {
    pub values: Vec<T>,
    pub value: T,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<HistoryEntry>,
}

struct Descent<'a, T> {
    objective: &'a Objective<T>,
    constraint: Constraint,
    active: Vec<bool>,
    cell_volume: f64,
}

impl<T: Scalar> Descent<'_, T> {
    fn project(&self, v: &mut [T]) {
        for (x, &a) in v.iter_mut().zip(&self.active) {
            *x = if a { x.abs() } else { T::zero() };
        }
        match self.constraint {
            Constraint::Sphere { q } => {
                let norm = lq_norm_raw(v, q, self.cell_volume);
                if norm > T::zero() {
                    let inv = norm.recip();
                    v.iter_mut().for_each(|x| *x = *x * inv);
                }
            }
            Constraint::Pinned { cell } => v[cell] = T::one(),
        }
    }

    fn value(&self, u: &[T]) -> T {
        let g = self.objective.value(u);
        match self.constraint {
            Constraint::Sphere { q } => {
                g / lq_norm_raw(u, q, self.cell_volume).powf(T::lit(self.objective.p()))
            }
            Constraint::Pinned { .. } => g,
        }
    }

    /// Objective and its gradient at a projected point.
    fn value_grad(&self, u: &[T], grad: &mut [T]) -> T {
        let g = self.objective.value_grad(u, grad);
        if let Constraint::Sphere { q } = self.constraint {
            let c = T::lit(self.objective.p() * self.cell_volume) * g;
            let qm2 = T::lit(q - 2.0);
            for (d, &x) in grad.iter_mut().zip(u) {
                if x != T::zero() {
                    *d = *d - c * x.abs().powf(qm2) * x;
                }
            }
        }
        for (d, &a) in grad.iter_mut().zip(&self.active) {
            if !a {
                *d = T::zero();
            }
        }
        g
    }
}

/// Minimizes the objective from `init` under `constraint`.
pub(crate) fn descend<T: Scalar>(
    mask: &Arc<DomainMask>,
    objective: &Objective<T>,
    constraint: Constraint,
    params: &SolverParams,
    init: Vec<T>,
) -> Outcome<T> {
    let grid = mask.grid();
    let mut active = mask.inside().to_vec();
    if let Constraint::Pinned { cell } = constraint {
        active[cell] = false;
    }
    let symmetrize = matches!(constraint, Constraint::Sphere { .. })
        && mask.is_steiner_valid()
        && params.sym_every > 0;
    let problem = Descent {
        objective,
        constraint,
        active,
        cell_volume: grid.cell_volume(),
    };

    let n = init.len();
    let mut u = init;
    problem.project(&mut u);
    let mut grad = vec![T::zero(); n];
    let mut value = problem.value_grad(&u, &mut grad);
    let mut trail = vec![value.as_f64()];
    let mut history = vec![HistoryEntry {
        iteration: 0,
        energy: value.as_f64(),
        residual: f64::NAN,
    }];
    let mut step = T::one();
    let armijo = T::lit(1e-4);
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![T::zero(); n];

    for it in 1..=params.max_iterations {
        iterations = it;
        if symmetrize && it % params.sym_every == 0 {
            let mut v = u.clone();
            for axis in 0..grid.dim() {
                v = rearrange(grid, &v, axis);
            }
            if v != u {
                u = v;
                value = problem.value_grad(&u, &mut grad);
            }
        }
        let s = objective.stiffness(&u);
        let z = objective.precondition(&grad, &problem.active, s);
        let gz = dot(&grad, &z);
        residual = (gz.max(T::zero()) / value.abs().max(T::min_positive_value()))
            .as_f64()
            .sqrt();
        if residual * residual < params.tolerance / params.window as f64 {
            converged = true;
            history.push(HistoryEntry {
                iteration: it,
                energy: value.as_f64(),
                residual,
            });
            break;
        }

        let mut t = step;
        let mut first = true;
        let accepted = loop {
            for i in 0..n {
                trial[i] = u[i] - t * z[i];
            }
            problem.project(&mut trial);
            let v = problem.value(&trial);
            if v.is_finite() && v <= value - armijo * t * gz {
                break true;
            }
            t = t * T::lit(0.5);
            first = false;
            if t < step * T::lit(1e-12) || t < T::lit(1e-30) {
                break false;
            }
        };
        if !accepted {
            converged = residual * residual < params.tolerance;
            history.push(HistoryEntry {
                iteration: it,
                energy: value.as_f64(),
                residual,
            });
            break;
        }
        step = if first {
            (t * T::lit(2.0)).min(T::one())
        } else {
            t
        };
        std::mem::swap(&mut u, &mut trial);
        value = problem.value_grad(&u, &mut grad);
        trail.push(value.as_f64());
        history.push(HistoryEntry {
            iteration: it,
            energy: value.as_f64(),
            residual,
        });

        let w = params.window;
        if trail.len() > w {
            let old = trail[trail.len() - 1 - w];
            let now = value.as_f64();
            if (old - now) <= params.tolerance * now.abs() {
                converged = true;
                break;
            }
        }
    }
    Outcome {
        values: u,
        value,
        residual,
        iterations,
        converged,
        history,
    }
}
