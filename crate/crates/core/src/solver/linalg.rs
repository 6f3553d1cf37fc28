//! Conjugate gradients on masked vectors.

use crate::scalar::Scalar;

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solves `A x = b` for a symmetric positive definite `A` acting on the
/// `active` entries; inactive entries of `x` stay zero. Stops when the
/// residual norm drops below `rtol · |b|`. Returns `x` and the iteration
/// count.
pub(crate) fn conjugate_gradient<T: Scalar>(
    apply: impl Fn(&[T], &mut [T]),
    b: &[T],
    active: &[bool],
    rtol: f64,
    max_iter: usize,
) -> (Vec<T>, usize) {
    let n = b.len();
    let mut x = vec![T::zero(); n];
    let mut r: Vec<T> = b
        .iter()
        .zip(active)
        .map(|(&v, &a)| if a { v } else { T::zero() })
        .collect();
    let mut d = r.clone();
    let mut ad = vec![T::zero(); n];
    let mut rr = dot(&r, &r);
    let stop = T::lit(rtol * rtol) * rr;
    if rr == T::zero() {
        return (x, 0);
    }
    for it in 1..=max_iter {
        apply(&d, &mut ad);
        let dad = dot(&d, &ad);
        if dad <= T::zero() {
            return (x, it);
        }
        let alpha = rr / dad;
        for i in 0..n {
            x[i] = x[i] + alpha * d[i];
            r[i] = r[i] - alpha * ad[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new <= stop {
            return (x, it);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            d[i] = r[i] + beta * d[i];
        }
    }
    (x, max_iter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_tridiagonal_system() {
        let n = 50;
        let active: Vec<bool> = (0..n).map(|i| i != 0 && i != n - 1).collect();
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                out[i] = if active[i] {
                    2.0 * x[i] - x[i - 1] - x[i + 1]
                } else {
                    0.0
                };
            }
        };
        let b: Vec<f64> = (0..n).map(|i| if active[i] { 1.0 } else { 0.0 }).collect();
        let (x, _) = conjugate_gradient(apply, &b, &active, 1e-12, 200);
        // discrete solution of -u'' = 1 with unit spacing: u_i = i (n-1-i) / 2
        for i in 1..n - 1 {
            let exact = (i * (n - 1 - i)) as f64 / 2.0;
            assert!((x[i] - exact).abs() < 1e-8 * exact.max(1.0));
        }
    }
}
