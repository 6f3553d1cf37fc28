//! Discrete Steiner symmetrization of masks and nonnegative grid functions
//! along coordinate axes.
//!
//! On each grid line parallel to the axis, values are sorted in decreasing
//! order and placed starting at the center cell, then alternating right and
//! left: ranks 0, 1, 2, 3, ... land on cells `m, m+1, m-1, m+2, ...`.

use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainMask;
use crate::grid::{gradient_pnorm, lp_distance, weighted_pnorm, Grid, GridFunction};
use crate::scalar::Scalar;

/// Cell offsets along a line of `n` cells in placement order.
fn placement_order(n: usize) -> Vec<usize> {
    let m = (n - 1) / 2;
    let mut order = Vec::with_capacity(n);
    order.push(m);
    for k in 1..=m {
        order.push(m + k);
        order.push(m - k);
    }
    order
}

fn check_axis(grid: &Grid, axis: usize) -> Result<()> {
    if axis >= grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "axis {axis} out of range for dimension {}",
            grid.dim()
        )));
    }
    Ok(())
}

/// Replaces the inside cells of every line parallel to `axis` by the same
/// number of cells packed around the axis hyperplane.
pub fn symmetrize_set(mask: &DomainMask, axis: usize) -> Result<DomainMask> {
    let grid = mask.grid();
    check_axis(grid, axis)?;
    let order = placement_order(grid.cells_per_axis()[axis]);
    let mut inside = vec![false; grid.len()];
    let mut line = Vec::with_capacity(order.len());
    for start in grid.line_starts(axis) {
        line.clear();
        line.extend(grid.line(axis, start));
        let count = line.iter().filter(|&&c| mask.is_inside(c)).count();
        for &k in &order[..count] {
            inside[line[k]] = true;
        }
    }
    if inside == mask.inside() {
        return Ok(mask.clone());
    }
    DomainMask::from_cells(grid.clone(), inside)
}

fn shared_symmetric_mask(mask: &Arc<DomainMask>, axis: usize) -> Result<Arc<DomainMask>> {
    let sym = symmetrize_set(mask, axis)?;
    if sym.same_cells(mask) {
        Ok(mask.clone())
    } else {
        Ok(Arc::new(sym))
    }
}

fn check_nonnegative<T: Scalar>(u: &GridFunction<T>) -> Result<()> {
    let min = u.values().iter().fold(T::zero(), |m, &v| m.min(v));
    if min < T::zero() {
        return Err(Error::NegativeValues(min.as_f64()));
    }
    Ok(())
}

fn descending<T: Scalar>(a: &T, b: &T) -> Ordering {
    b.partial_cmp(a).unwrap_or(Ordering::Equal)
}

/// Symmetric-decreasing rearrangement of `u` along every line parallel to
/// `axis`. The result lives on `symmetrize_set(u.mask(), axis)`.
pub fn symmetrize_fn<T: Scalar>(u: &GridFunction<T>, axis: usize) -> Result<GridFunction<T>> {
    check_axis(u.grid(), axis)?;
    check_nonnegative(u)?;
    let mask = shared_symmetric_mask(u.mask(), axis)?;
    Ok(GridFunction::from_values_masked(
        mask,
        rearrange(u.grid(), u.values(), axis),
    ))
}

pub(crate) fn rearrange<T: Scalar>(grid: &Grid, values: &[T], axis: usize) -> Vec<T> {
    let order = placement_order(grid.cells_per_axis()[axis]);
    let mut out = vec![T::zero(); values.len()];
    let mut line = Vec::with_capacity(order.len());
    let mut buf = Vec::with_capacity(order.len());
    for start in grid.line_starts(axis) {
        line.clear();
        line.extend(grid.line(axis, start));
        buf.clear();
        buf.extend(line.iter().map(|&c| values[c]));
        buf.sort_by(descending);
        for (&v, &k) in buf.iter().zip(&order) {
            out[line[k]] = v;
        }
    }
    out
}

/// Composition of [`symmetrize_fn`] over axes `0, 1, ..., N-1`.
pub fn full_symmetrize<T: Scalar>(u: &GridFunction<T>) -> Result<GridFunction<T>> {
    let mut v = symmetrize_fn(u, 0)?;
    for axis in 1..u.grid().dim() {
        v = symmetrize_fn(&v, axis)?;
    }
    Ok(v)
}

/// Effect of [`full_symmetrize`] on norms, energy and potentials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RearrangementReport {
    /// The values of `S(u)` are a permutation of those of `u`.
    pub equimeasurable: bool,
    /// `∫|∇u|^p − ∫|∇S(u)|^p`.
    pub pz_defect: f64,
    /// `(α, ∫|x|^α u^p − ∫|x|^α S(u)^p)`.
    pub potential_defects: Vec<(f64, f64)>,
}

pub fn rearrangement_report<T: Scalar>(
    u: &GridFunction<T>,
    p: f64,
    alphas: &[f64],
) -> Result<RearrangementReport> {
    let s = full_symmetrize(u)?;
    let mut a: Vec<T> = u.values().to_vec();
    let mut b: Vec<T> = s.values().to_vec();
    a.sort_by(descending);
    b.sort_by(descending);
    let equimeasurable = a == b;
    let pz_defect = gradient_pnorm(u, p)?.as_f64() - gradient_pnorm(&s, p)?.as_f64();
    let potential_defects = alphas
        .iter()
        .map(|&alpha| {
            let d = weighted_pnorm(u, p, alpha)?.as_f64() - weighted_pnorm(&s, p, alpha)?.as_f64();
            Ok((alpha, d))
        })
        .collect::<Result<_>>()?;
    Ok(RearrangementReport {
        equimeasurable,
        pz_defect,
        potential_defects,
    })
}

/// Returns `(‖S u − S v‖_p, ‖u − v‖_p)` for the symmetrization along `axis`.
pub fn contractivity_check<T: Scalar>(
    u: &GridFunction<T>,
    v: &GridFunction<T>,
    p: f64,
    axis: usize,
) -> Result<(f64, f64)> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch(
            "contractivity needs a common grid".into(),
        ));
    }
    let su = symmetrize_fn(u, axis)?;
    let sv = symmetrize_fn(v, axis)?;
    Ok((
        lp_distance(&su, &sv, p)?.as_f64(),
        lp_distance(u, v, p)?.as_f64(),
    ))
}
