//! Forward-difference stencil on a zero-padded copy of the grid.
//!
//! The padded array has one extra layer of cells on each side of every axis.
//! Differences are taken from every padded cell whose coordinates all lie in
//! `0..=n_a`, so the jump from the last inside cell to the zero exterior is
//! counted on both ends of each line.

use crate::grid::Grid;
use crate::scalar::Scalar;

pub(crate) struct Stencil {
    dim: usize,
    spacing: f64,
    cell_volume: f64,
    pad_len: usize,
    pad_strides: Vec<usize>,
    /// Grid flat index -> padded flat index.
    interior: Vec<usize>,
    /// Padded cells that own a forward difference.
    extended: Vec<usize>,
}

impl Stencil {
    pub fn new(grid: &Grid) -> Self {
        let dim = grid.dim();
        let pad_dims: Vec<usize> = grid.cells_per_axis().iter().map(|n| n + 2).collect();
        let mut pad_strides = vec![1; dim];
        for a in (0..dim.saturating_sub(1)).rev() {
            pad_strides[a] = pad_strides[a + 1] * pad_dims[a + 1];
        }
        let pad_len: usize = pad_dims.iter().product();

        let interior = (0..grid.len())
            .map(|c| {
                grid.multi_index(c)
                    .iter()
                    .zip(&pad_strides)
                    .map(|(&i, &s)| (i + 1) * s)
                    .sum()
            })
            .collect();

        let mut extended = Vec::new();
        let mut idx = vec![0usize; dim];
        for flat in 0..pad_len {
            let mut rest = flat;
            for a in (0..dim).rev() {
                idx[a] = rest % pad_dims[a];
                rest /= pad_dims[a];
            }
            if idx.iter().zip(grid.cells_per_axis()).all(|(&i, &n)| i <= n) {
                extended.push(flat);
            }
        }

        Stencil {
            dim,
            spacing: grid.spacing(),
            cell_volume: grid.cell_volume(),
            pad_len,
            pad_strides,
            interior,
            extended,
        }
    }

    pub fn pad<T: Scalar>(&self, values: &[T]) -> Vec<T> {
        let mut padded = vec![T::zero(); self.pad_len];
        for (c, &pc) in self.interior.iter().enumerate() {
            padded[pc] = values[c];
        }
        padded
    }

    /// `h^N Σ ((|Du|² + δ²)^{p/2} − δ^p)` over all forward-difference cells.
    pub fn energy<T: Scalar>(&self, values: &[T], p: f64, delta: f64) -> T {
        let padded = self.pad(values);
        let inv_h = T::lit(1.0 / self.spacing);
        let half_p = T::lit(p / 2.0);
        let d2 = T::lit(delta * delta);
        let offset = T::lit(delta.powf(p));
        let mut total = T::zero();
        for &e in &self.extended {
            let base = padded[e];
            let mut s = T::zero();
            for &st in &self.pad_strides {
                let g = (padded[e + st] - base) * inv_h;
                s = s + g * g;
            }
            if s == T::zero() {
                continue;
            }
            total = total
                + if p == 2.0 && delta == 0.0 {
                    s
                } else {
                    (s + d2).powf(half_p) - offset
                };
        }
        total * T::lit(self.cell_volume)
    }

    /// Energy and its gradient with respect to every grid value.
    pub fn energy_and_grad<T: Scalar>(
        &self,
        values: &[T],
        p: f64,
        delta: f64,
        grad: &mut [T],
    ) -> T {
        let padded = self.pad(values);
        let mut pgrad = vec![T::zero(); self.pad_len];
        let inv_h = T::lit(1.0 / self.spacing);
        let half_p = T::lit(p / 2.0);
        let pt = T::lit(p);
        let expo = T::lit((p - 2.0) / 2.0);
        let d2 = T::lit(delta * delta);
        let offset = T::lit(delta.powf(p));
        let quadratic = p == 2.0 && delta == 0.0;
        let mut g = vec![T::zero(); self.dim];
        let mut total = T::zero();
        for &e in &self.extended {
            let base = padded[e];
            let mut s = T::zero();
            for (a, &st) in self.pad_strides.iter().enumerate() {
                g[a] = (padded[e + st] - base) * inv_h;
                s = s + g[a] * g[a];
            }
            if s == T::zero() && delta == 0.0 {
                continue;
            }
            let w = if quadratic {
                total = total + s;
                T::lit(2.0)
            } else {
                let sd = s + d2;
                total = total + sd.powf(half_p) - offset;
                pt * sd.powf(expo)
            };
            for (a, &st) in self.pad_strides.iter().enumerate() {
                let f = w * g[a] * inv_h;
                pgrad[e + st] = pgrad[e + st] + f;
                pgrad[e] = pgrad[e] - f;
            }
        }
        let vol = T::lit(self.cell_volume);
        for (c, &pc) in self.interior.iter().enumerate() {
            grad[c] = pgrad[pc] * vol;
        }
        total * vol
    }

    /// `D^T D x` restricted to `active` cells; inactive cells read and write 0.
    /// This is the 2N+1 point negative Laplacian with zero exterior.
    pub fn laplacian<T: Scalar>(&self, x: &[T], active: &[bool], out: &mut [T]) {
        let mut padded = vec![T::zero(); self.pad_len];
        for (c, &pc) in self.interior.iter().enumerate() {
            if active[c] {
                padded[pc] = x[c];
            }
        }
        let inv_h2 = T::lit(1.0 / (self.spacing * self.spacing));
        let two = T::lit(2.0);
        for (c, &pc) in self.interior.iter().enumerate() {
            if !active[c] {
                out[c] = T::zero();
                continue;
            }
            let mut acc = T::zero();
            let centre = padded[pc];
            for &st in &self.pad_strides {
                acc = acc + two * centre - padded[pc + st] - padded[pc - st];
            }
            out[c] = acc * inv_h2;
        }
    }
}
