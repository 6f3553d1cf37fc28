//! Uniform tensor grids, masked grid functions and the finite-difference
//! functionals evaluated on them.
//!
//! A [`Grid`] discretizes the box `(-L_1, L_1) x ... x (-L_N, L_N)` with cell
//! centers at integer multiples of the spacing `h`, so the origin is always a
//! cell center. Everything outside the grid, and every cell outside a
//! function's [`DomainMask`], is treated as zero: forward differences taken
//! across the domain boundary are therefore penalized, which is the discrete
//! form of the homogeneous Dirichlet condition.

use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::Stencil;
use crate::geometry::DomainMask;
use crate::scalar::Scalar;

/// Uniform grid on a symmetric box with an odd number of cells per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_extent: Vec<f64>,
    spacing: f64,
    cells_per_axis: Vec<usize>,
}

/// Builds a grid on the cube `(-half_extent, half_extent)^dim`.
pub fn make_grid(dim: usize, half_extent: f64, spacing: f64) -> Result<Grid> {
    Grid::with_extents(&vec![half_extent; dim], spacing)
}

impl Grid {
    /// Builds a grid on a box with a possibly different half extent per axis.
    ///
    /// Each axis gets the largest odd number of cells whose centers lie in
    /// `[-L, L]`.
    pub fn with_extents(half_extent: &[f64], spacing: f64) -> Result<Self> {
        if half_extent.is_empty() {
            return Err(Error::InvalidGrid("dimension must be at least 1".into()));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let mut cells = Vec::with_capacity(half_extent.len());
        for &l in half_extent {
            if !l.is_finite() || l < spacing {
                return Err(Error::InvalidGrid(format!(
                    "half extent {l} is smaller than the spacing {spacing}"
                )));
            }
            // Tolerance absorbs representation error in ratios such as 1.0 / 0.1.
            let half = (l / spacing + 1e-9).floor() as usize;
            cells.push(2 * half + 1);
        }
        Ok(Grid {
            dim: half_extent.len(),
            half_extent: half_extent.to_vec(),
            spacing,
            cells_per_axis: cells,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_extent(&self) -> &[f64] {
        &self.half_extent
    }

    pub fn cells_per_axis(&self) -> &[usize] {
        &self.cells_per_axis
    }

    /// Total number of cells.
    pub fn len(&self) -> usize {
        self.cells_per_axis.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight `h^N` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    /// Row-major strides; the last axis is contiguous.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dim];
        for a in (0..self.dim.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.cells_per_axis[a + 1];
        }
        strides
    }

    /// Index of the cell centered on the hyperplane `x_axis = 0`.
    pub fn center_index(&self, axis: usize) -> usize {
        (self.cells_per_axis[axis] - 1) / 2
    }

    /// Coordinate of the `i`-th cell center along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        (i as f64 - self.center_index(axis) as f64) * self.spacing
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for a in (0..self.dim).rev() {
            let n = self.cells_per_axis[a];
            idx[a] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.cells_per_axis)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Writes the center of cell `flat` into `out`.
    pub fn center_into(&self, flat: usize, out: &mut [f64]) {
        let mut rest = flat;
        for a in (0..self.dim).rev() {
            let n = self.cells_per_axis[a];
            out[a] = self.coord(a, rest % n);
            rest /= n;
        }
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.center_into(flat, &mut x);
        x
    }

    pub fn origin(&self) -> usize {
        let idx: Vec<usize> = (0..self.dim).map(|a| self.center_index(a)).collect();
        self.flat_index(&idx)
    }

    /// Cell whose center is nearest to `x`, if `x` lies within the grid.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim {
            return None;
        }
        let mut idx = Vec::with_capacity(self.dim);
        for (a, &xa) in x.iter().enumerate() {
            let i = (xa / self.spacing).round() + self.center_index(a) as f64;
            if i < 0.0 || i >= self.cells_per_axis[a] as f64 {
                return None;
            }
            idx.push(i as usize);
        }
        Some(self.flat_index(&idx))
    }

    /// Euclidean norm of every cell center, in flat order.
    pub fn radii(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        (0..self.len())
            .map(|c| {
                self.center_into(c, &mut x);
                x.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .collect()
    }

    /// Flat indices of the grid line through `base` parallel to `axis`
    /// (the coordinate of `base` along `axis` is ignored).
    pub fn line(&self, axis: usize, base: usize) -> impl Iterator<Item = usize> {
        let stride = self.strides()[axis];
        let n = self.cells_per_axis[axis];
        let pos = (base / stride) % n;
        let start = base - pos * stride;
        (0..n).map(move |k| start + k * stride)
    }

    /// One representative cell (coordinate 0 along `axis`) for every line
    /// parallel to `axis`.
    pub fn line_starts(&self, axis: usize) -> Vec<usize> {
        let stride = self.strides()[axis];
        let n = self.cells_per_axis[axis];
        (0..self.len())
            .filter(|&c| (c / stride).is_multiple_of(n))
            .collect()
    }
}

/// Scalar field on a grid, zero outside its domain mask.
#[derive(Debug, Clone)]
pub struct GridFunction<T> {
    mask: Arc<DomainMask>,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn zeros(mask: Arc<DomainMask>) -> Self {
        let n = mask.grid().len();
        GridFunction {
            mask,
            values: vec![T::zero(); n],
        }
    }

    /// Samples `f` at every inside cell center.
    pub fn from_fn(mask: Arc<DomainMask>, mut f: impl FnMut(&[f64]) -> T) -> Self {
        let grid = mask.grid();
        let mut x = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|c| {
                if mask.is_inside(c) {
                    grid.center_into(c, &mut x);
                    f(&x)
                } else {
                    T::zero()
                }
            })
            .collect();
        GridFunction { mask, values }
    }

    /// Wraps raw values, checking finiteness and the zero exterior.
    pub fn from_values(mask: Arc<DomainMask>, values: Vec<T>) -> Result<Self> {
        if values.len() != mask.grid().len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                mask.grid().len()
            )));
        }
        if let Some(c) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at cell {c}"
            )));
        }
        if let Some(c) = (0..values.len()).find(|&c| !mask.is_inside(c) && values[c] != T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "nonzero value at cell {c} outside the domain"
            )));
        }
        Ok(GridFunction { mask, values })
    }

    /// Same as [`GridFunction::from_values`] but silently zeroes the exterior.
    pub(crate) fn from_values_masked(mask: Arc<DomainMask>, mut values: Vec<T>) -> Self {
        for (c, v) in values.iter_mut().enumerate() {
            if !mask.is_inside(c) {
                *v = T::zero();
            }
        }
        GridFunction { mask, values }
    }

    pub fn grid(&self) -> &Grid {
        self.mask.grid()
    }

    pub fn mask(&self) -> &Arc<DomainMask> {
        &self.mask
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn value_at(&self, x: &[f64]) -> Option<T> {
        self.grid().locate(x).map(|c| self.values[c])
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= T::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == T::zero())
    }

    pub fn scaled(&self, c: T) -> Self {
        GridFunction {
            mask: self.mask.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        GridFunction {
            mask: self.mask.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// Largest value and the cell attaining it; ties go to the center
    /// nearest the origin.
    pub fn argmax(&self) -> (usize, T) {
        let radii = self.grid().radii();
        let mut best = 0;
        for c in 1..self.values.len() {
            let (v, b) = (self.values[c], self.values[best]);
            if v > b || (v == b && radii[c] < radii[best]) {
                best = c;
            }
        }
        (best, self.values[best])
    }

    /// Converts the values to another scalar type.
    pub fn cast<U: Scalar>(&self) -> GridFunction<U> {
        GridFunction {
            mask: self.mask.clone(),
            values: self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        }
    }
}

fn check_gradient_exponent(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "gradient exponent p = {p} must exceed 1"
        )));
    }
    Ok(())
}

/// Midpoint approximation of `∫ |∇u|^p` with forward differences and a zero
/// exterior.
pub fn gradient_pnorm<T: Scalar>(u: &GridFunction<T>, p: f64) -> Result<T> {
    check_gradient_exponent(p)?;
    let stencil = Stencil::new(u.grid());
    Ok(stencil.energy(u.values(), p, 0.0))
}

/// Midpoint `L^q` norm; `q = f64::INFINITY` gives the maximum of `|u|`.
pub fn lq_norm<T: Scalar>(u: &GridFunction<T>, q: f64) -> Result<T> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "exponent q = {q} out of range"
        )));
    }
    Ok(lq_norm_raw(u.values(), q, u.grid().cell_volume()))
}

pub(crate) fn lq_norm_raw<T: Scalar>(values: &[T], q: f64, cell_volume: f64) -> T {
    if q.is_infinite() {
        return values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    }
    let w = T::lit(cell_volume);
    if q == 2.0 {
        return (values.iter().map(|&v| v * v).sum::<T>() * w).sqrt();
    }
    let qt = T::lit(q);
    let s: T = values.iter().map(|v| v.abs().powf(qt)).sum();
    (s * w).powf(qt.recip())
}

/// Midpoint approximation of `∫ |x|^alpha |u|^p`.
pub fn weighted_pnorm<T: Scalar>(u: &GridFunction<T>, p: f64, alpha: f64) -> Result<T> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "exponent p = {p} out of range"
        )));
    }
    if alpha.is_nan() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "weight exponent alpha = {alpha} must be >= 0"
        )));
    }
    let grid = u.grid();
    let radii = grid.radii();
    let pt = T::lit(p);
    let s: T = u
        .values()
        .iter()
        .zip(&radii)
        .map(|(&v, &r)| T::lit(r.powf(alpha)) * v.abs().powf(pt))
        .sum();
    Ok(s * T::lit(grid.cell_volume()))
}

/// `‖u − v‖_p` over the shared grid; the masks may differ.
pub fn lp_distance<T: Scalar>(u: &GridFunction<T>, v: &GridFunction<T>, p: f64) -> Result<T> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch(
            "functions live on different grids".into(),
        ));
    }
    let diff: Vec<T> = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(&a, &b)| a - b)
        .collect();
    Ok(lq_norm_raw(&diff, p, u.grid().cell_volume()))
}

/// `‖u − v‖_{W^{1,p}} = (‖u − v‖_p^p + ‖∇(u − v)‖_p^p)^{1/p}`.
pub fn w1p_distance<T: Scalar>(u: &GridFunction<T>, v: &GridFunction<T>, p: f64) -> Result<T> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch(
            "functions live on different grids".into(),
        ));
    }
    check_gradient_exponent(p)?;
    let diff: Vec<T> = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(&a, &b)| a - b)
        .collect();
    let stencil = Stencil::new(u.grid());
    let grad = stencil.energy(&diff, p, 0.0);
    let lp = lq_norm_raw(&diff, p, u.grid().cell_volume()).powf(T::lit(p));
    Ok((grad + lp).powf(T::lit(1.0 / p)))
}

/// JSON header describing a grid in the field file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct FieldHeader {
    dim: usize,
    half_extent: Vec<f64>,
    spacing: f64,
    cells_per_axis: Vec<usize>,
}

/// Writes a field as a `#`-prefixed JSON grid header followed by CSV rows
/// `i0,...,i{N-1},value`, one per inside cell, values with 17 significant
/// digits.
pub fn write_field<T: Scalar, W: Write>(u: &GridFunction<T>, mut out: W) -> Result<()> {
    let grid = u.grid();
    let header = FieldHeader {
        dim: grid.dim(),
        half_extent: grid.half_extent().to_vec(),
        spacing: grid.spacing(),
        cells_per_axis: grid.cells_per_axis().to_vec(),
    };
    writeln!(out, "# {}", serde_json::to_string(&header)?)?;
    let cols: Vec<String> = (0..grid.dim()).map(|a| format!("i{a}")).collect();
    writeln!(out, "{},value", cols.join(","))?;
    for c in 0..grid.len() {
        if !u.mask().is_inside(c) {
            continue;
        }
        for i in grid.multi_index(c) {
            write!(out, "{i},")?;
        }
        writeln!(out, "{:.16e}", u.values()[c].as_f64())?;
    }
    Ok(())
}

/// Reads a field written by [`write_field`]. The mask is rebuilt from the
/// listed cells and left unchecked.
pub fn read_field<T: Scalar, R: BufRead>(input: R) -> Result<GridFunction<T>> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Format("empty input".into()))??;
    let json = first
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("missing '#' grid header".into()))?;
    let header: FieldHeader = serde_json::from_str(json.trim())?;
    let grid = Grid::with_extents(&header.half_extent, header.spacing)?;
    if grid.cells_per_axis() != header.cells_per_axis.as_slice() || grid.dim() != header.dim {
        return Err(Error::Format(
            "header cell counts disagree with extents".into(),
        ));
    }
    lines
        .next()
        .ok_or_else(|| Error::Format("missing column header".into()))??;
    let mut inside = vec![false; grid.len()];
    let mut values = vec![T::zero(); grid.len()];
    let mut idx = vec![0usize; grid.dim()];
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != grid.dim() + 1 {
            return Err(Error::Format(format!(
                "row {row}: expected {} columns",
                grid.dim() + 1
            )));
        }
        for a in 0..grid.dim() {
            idx[a] = fields[a]
                .trim()
                .parse()
                .map_err(|e| Error::Format(format!("row {row}: {e}")))?;
            if idx[a] >= grid.cells_per_axis()[a] {
                return Err(Error::Format(format!("row {row}: index out of range")));
            }
        }
        let v: f64 = fields[grid.dim()]
            .trim()
            .parse()
            .map_err(|e| Error::Format(format!("row {row}: {e}")))?;
        let c = grid.flat_index(&idx);
        inside[c] = true;
        values[c] = T::lit(v);
    }
    let mask = DomainMask::from_cells(grid, inside)?;
    GridFunction::from_values(Arc::new(mask), values)
}
