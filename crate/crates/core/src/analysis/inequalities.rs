use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{inradius, DomainMask, DomainSpec};
use crate::grid::{gradient_pnorm, lq_norm, GridFunction};
use crate::scalar::Scalar;
use crate::solver::{check_exponents, solve_extremal, Exponent, GridParams, ProblemConfig};

/// Both sides of `(A+B)^α ≤ A^α + B^α − ((1−α)/2^{α+1}) min(A^α, B^α)`.
pub fn subadditivity_check(alpha: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} must lie in (0,1)"
        )));
    }
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "A = {a}, B = {b} must be positive"
        )));
    }
    let (aa, ba) = (a.powf(alpha), b.powf(alpha));
    let lhs = (a + b).powf(alpha);
    let rhs = aa + ba - (1.0 - alpha) / 2f64.powf(alpha + 1.0) * aa.min(ba);
    Ok((lhs, rhs))
}

/// Interpolation ratio `‖ψ‖_r / (‖∇ψ‖_p^θ ‖ψ‖_p^{1−θ})` and `θ = N/p − N/r`.
pub fn gns_check<T: Scalar>(psi: &GridFunction<T>, p: f64, r: f64) -> Result<(f64, f64)> {
    let n = psi.grid().dim();
    check_exponents(n, p, Exponent::from(r), true)?;
    if psi.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let nf = n as f64;
    let theta = nf / p - if r.is_infinite() { 0.0 } else { nf / r };
    let grad = gradient_pnorm(psi, p)?.as_f64().powf(1.0 / p);
    let lp = lq_norm(psi, p)?.as_f64();
    let lr = lq_norm(psi, r)?.as_f64();
    Ok((lr / (grad.powf(theta) * lp.powf(1.0 - theta)), theta))
}

/// One solved domain: `λ_p` and `λ_{p,q}` on the same grid.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EquivalencePair {
    pub lambda_p: f64,
    pub lambda_pq: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquivalenceBand {
    /// `1 − N/p + N/q`.
    pub exponent: f64,
    /// `λ_{p,q} / λ_p^{exponent}` per instance.
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
}

/// Range of `λ_{p,q}/λ_p^{1−N/p+N/q}` over a family of solved domains.
pub fn equivalence_band(
    dim: usize,
    p: f64,
    q: f64,
    instances: &[EquivalencePair],
) -> Result<EquivalenceBand> {
    if instances.len() < 3 {
        return Err(Error::InvalidArgument(
            "equivalence band needs at least three instances".into(),
        ));
    }
    if let Some(bad) = instances.iter().find(|i| {
        !(i.lambda_p > 0.0
            && i.lambda_pq > 0.0
            && i.lambda_p.is_finite()
            && i.lambda_pq.is_finite())
    }) {
        return Err(Error::InvalidArgument(format!(
            "degenerate instance {bad:?}"
        )));
    }
    let n = dim as f64;
    let exponent = 1.0 - n / p + n / q;
    let ratios: Vec<f64> = instances
        .iter()
        .map(|i| i.lambda_pq / i.lambda_p.powf(exponent))
        .collect();
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(EquivalenceBand {
        exponent,
        ratios,
        min,
        max,
    })
}

/// `λ · r_Ω^{p − N + Np/q}`, bounded below by a positive constant on Steiner
/// domains.
pub fn inradius_bound_check(lambda: f64, mask: &DomainMask, p: f64, q: Exponent) -> Result<f64> {
    if mask.inside().iter().all(|&b| b) {
        return Err(Error::InvalidArgument(
            "the domain fills the grid; its inradius is not resolved".into(),
        ));
    }
    let n = mask.grid().dim() as f64;
    let r = inradius(mask);
    let exponent = p - n + n * p / q.value();
    Ok(lambda * r.powf(exponent))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingCheck {
    /// `r^{N − p − pN/q}`.
    pub predicted: f64,
    /// `λ(B_r)/λ(B_1)`.
    pub measured: f64,
    pub lambda_unit: f64,
    pub lambda_r: f64,
}

/// Solves on `B_1` and `B_r` with the same spacing and compares the ratio of
/// the constants with the scaling law.
pub fn scaling_check(dim: usize, p: f64, q: f64, r: f64, spacing: f64) -> Result<ScalingCheck> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} must be positive"
        )));
    }
    let solve = |radius: f64| -> Result<f64> {
        let cfg = ProblemConfig::new(
            dim,
            p,
            q,
            DomainSpec::Ball { radius },
            GridParams::new(spacing, None),
        );
        Ok(solve_extremal::<f64>(&cfg)?.lambda)
    };
    let n = dim as f64;
    let lambda_unit = solve(1.0)?;
    let lambda_r = solve(r)?;
    Ok(ScalingCheck {
        predicted: r.powf(n - p - p * n / q),
        measured: lambda_r / lambda_unit,
        lambda_unit,
        lambda_r,
    })
}

/// Volume of the unit ball in `R^N`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        n => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// Upper bound on the confined constant `λ_{p,q}(Ω; V_n)` from a ball of
/// radius `r` inside `Ω`:
/// `r^{N−p−pN/q} λ(B_1) + (1/(n+1)) (Nω_N/(N + q/(q−p)))^{(q−p)/q} r^{N+1−pN/q}`.
pub fn confinement_upper_bound(
    dim: usize,
    p: f64,
    q: f64,
    r: f64,
    n: u32,
    lambda_unit_ball: f64,
) -> f64 {
    let nf = dim as f64;
    let shape = (nf * unit_ball_volume(dim) / (nf + q / (q - p))).powf((q - p) / q);
    r.powf(nf - p - p * nf / q) * lambda_unit_ball
        + shape * r.powf(nf + 1.0 - p * nf / q) / (n as f64 + 1.0)
}
