use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{section_inradius, AxisClass, InfinityProfile};
use crate::grid::GridFunction;
use crate::scalar::Scalar;

/// Constants of the exponential decay estimate for `λ = λ_{p,q}(Ω)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayConstants {
    pub p: f64,
    pub q: f64,
    /// `4^p (p(q−p+1))^{p−1}`.
    pub c7: f64,
    /// Tail threshold `(λ_p / (2 C7 λ))^{1/(q−p)}`.
    pub eps: f64,
    /// `1 + 2 C7 / λ_p`.
    pub k: f64,
    /// Guaranteed rate `(1/q) ln((K+1)/K)`.
    pub a: f64,
}

pub fn decay_constants(p: f64, q: f64, lambda_p: f64, lambda: f64) -> Result<DecayConstants> {
    if !(p > 1.0 && q > p && q.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "decay constants need 1 < p < q < inf (p = {p}, q = {q})"
        )));
    }
    if !(lambda_p > 0.0 && lambda_p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_p = {lambda_p} must be positive"
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    let c7 = 4f64.powf(p) * (p * (q - p + 1.0)).powf(p - 1.0);
    let eps = (lambda_p / (2.0 * c7 * lambda)).powf(1.0 / (q - p));
    let k = 1.0 + 2.0 * c7 / lambda_p;
    let a = ((k + 1.0) / k).ln() / q;
    Ok(DecayConstants {
        p,
        q,
        c7,
        eps,
        k,
        a,
    })
}

/// Least-squares rate of `u(t e_axis) ≈ C e^{−rate t}` on the positive
/// half-axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisRate {
    pub axis: usize,
    /// `None` when fewer than three positive samples fall in the window.
    pub rate: Option<f64>,
    pub prefactor: Option<f64>,
    /// Fit window `[start, end]` along the axis.
    pub window: (f64, f64),
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub constants: DecayConstants,
    /// `(R, A(R))` with `A(R) = ∫_{Ω∖B_R} |u|^q`, `R = 0, 1, 2, …`.
    pub tail_mass: Vec<(f64, f64)>,
    /// `(ρ, sup_{Ω∖B_ρ} |u|)`.
    pub tail_sup: Vec<(f64, f64)>,
    /// First integer radius with tail sup at most `eps`.
    pub r0: f64,
    /// `A(R+1) ≤ K/(K+1) A(R)` for every `R ≥ r0` on the grid.
    pub recursion_pass: bool,
    pub recursion_failures: Vec<f64>,
    pub rates: Vec<AxisRate>,
    /// Every fitted rate is at least `a`.
    pub rate_pass: bool,
    /// `(ρ, sup_{Ω∖B_{ρ+1}} |u| / ‖u‖_{L^q(Ω∖B_ρ)})` where the tail norm is
    /// positive.
    pub localized_ratios: Vec<(f64, f64)>,
    pub localized_max: f64,
}

/// Fits `−ln u = rate·t − ln C` by least squares.
fn fit_rate(samples: &[(f64, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.1 > 0.0)
        .map(|&(t, u)| (t, u.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stl: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - ml)).sum();
    if stt == 0.0 {
        return None;
    }
    let slope = stl / stt;
    Some((-slope, (ml - slope * mt).exp()))
}

/// `(t, u(t e_axis))` for the cells on the nonnegative half of an axis.
fn axis_ray<T: Scalar>(u: &GridFunction<T>, axis: usize) -> Vec<(f64, f64)> {
    let grid = u.grid();
    let stride = grid.strides()[axis];
    let origin = grid.origin();
    let c = grid.center_index(axis);
    (0..grid.cells_per_axis()[axis] - c)
        .map(|k| {
            (
                k as f64 * grid.spacing(),
                u.values()[origin + k * stride].as_f64(),
            )
        })
        .collect()
}

fn axis_rate<T: Scalar>(u: &GridFunction<T>, axis: usize, start: f64) -> AxisRate {
    let ray = axis_ray(u, axis);
    let floor = 100.0 * f64::EPSILON;
    let wall = u.grid().half_extent()[axis] - 1.0;
    let last = ray
        .iter()
        .filter(|s| s.1 > floor && s.0 <= wall)
        .map(|s| s.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let window: Vec<(f64, f64)> = ray
        .into_iter()
        .filter(|s| s.0 >= start && s.0 <= last && s.1 > floor)
        .collect();
    let fit = fit_rate(&window);
    AxisRate {
        axis,
        rate: fit.map(|f| f.0),
        prefactor: fit.map(|f| f.1),
        window: (start, last.max(start)),
        samples: window.len(),
    }
}

/// Whether the domain has cells on the outer layer of the box.
fn reaches_wall<T: Scalar>(u: &GridFunction<T>) -> bool {
    let grid = u.grid();
    let n = grid.cells_per_axis();
    (0..grid.len()).any(|c| {
        u.mask().is_inside(c)
            && grid
                .multi_index(c)
                .iter()
                .zip(n)
                .any(|(&i, &m)| i == 0 || i + 1 == m)
    })
}

/// Tail diagnostics of a nonnegative extremal.
///
/// Fails with [`Error::TailUnresolved`] when the box is too small to see the
/// tail: the sup of `u` outside the ball of radius `L_max/2` still exceeds
/// `eps`, and the domain reaches the box wall.
pub fn tail_report<T: Scalar>(
    u: &GridFunction<T>,
    constants: &DecayConstants,
) -> Result<DecayReport> {
    if !u.is_nonnegative() {
        return Err(Error::NegativeValues(
            u.values().iter().map(|v| v.as_f64()).fold(0.0, f64::min),
        ));
    }
    if u.is_zero() {
        return Err(Error::ZeroFunction);
    }
    let grid = u.grid();
    let q = constants.q;
    let radii = grid.radii();
    let bins = radii.iter().fold(0.0f64, |m, &r| m.max(r)).floor() as usize + 1;
    let mut mass = vec![0.0; bins + 1];
    let mut sup = vec![0.0f64; bins + 1];
    for (&r, v) in radii.iter().zip(u.values()) {
        let v = v.as_f64();
        let b = r.floor() as usize;
        mass[b] += v.powf(q);
        sup[b] = sup[b].max(v);
    }
    for b in (0..bins).rev() {
        mass[b] += mass[b + 1];
        sup[b] = sup[b].max(sup[b + 1]);
    }
    let vol = grid.cell_volume();
    let tail_mass: Vec<(f64, f64)> = mass
        .iter()
        .enumerate()
        .map(|(r, &m)| (r as f64, m * vol))
        .collect();
    let tail_sup: Vec<(f64, f64)> = sup
        .iter()
        .enumerate()
        .map(|(r, &s)| (r as f64, s))
        .collect();

    let r0 = sup.iter().position(|&s| s <= constants.eps).unwrap_or(bins);
    let l_max = grid.half_extent().iter().copied().fold(0.0, f64::max);
    let half = (l_max / 2.0).ceil() as usize;
    if reaches_wall(u) && r0 > half {
        return Err(Error::TailUnresolved(format!(
            "sup of u outside B_{} is {:.3e} > eps = {:.3e}; enlarge the box",
            half,
            sup[half.min(bins)],
            constants.eps
        )));
    }

    let contraction = constants.k / (constants.k + 1.0);
    let recursion_failures: Vec<f64> = (r0..bins)
        .filter(|&r| tail_mass[r + 1].1 > contraction * tail_mass[r].1)
        .map(|r| r as f64)
        .collect();

    let rates: Vec<AxisRate> = (0..grid.dim())
        .map(|axis| axis_rate(u, axis, r0 as f64 + 1.0))
        .collect();
    let rate_pass = rates
        .iter()
        .all(|r| r.rate.is_none_or(|v| v >= constants.a));

    let localized_ratios: Vec<(f64, f64)> = (0..bins)
        .filter(|&r| tail_mass[r].1 > 0.0)
        .map(|r| (r as f64, sup[r + 1] / tail_mass[r].1.powf(1.0 / q)))
        .collect();
    let localized_max = localized_ratios.iter().map(|x| x.1).fold(0.0, f64::max);

    Ok(DecayReport {
        constants: *constants,
        tail_mass,
        tail_sup,
        r0: r0 as f64,
        recursion_pass: recursion_failures.is_empty(),
        recursion_failures,
        rates,
        rate_pass,
        localized_ratios,
        localized_max,
    })
}

/// Outcome of the directional check along one axis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisVerdict {
    pub axis: usize,
    pub class: AxisClass,
    pub pass: bool,
    /// Bounded axes: largest `|u|` at `|x_axis| ≥ t`. Shrinking axes: largest
    /// `u((t+1)e) / r(t)^{p/q}`. Tubular axes: fitted exponential rate.
    pub statistic: f64,
}

/// Checks the extremal against the behavior at infinity of each axis:
/// vanishing past a bounded axis, `u((t+1)e) ≲ r(t)^{p/q}` along a shrinking
/// axis, exponential decay along a tubular one.
pub fn directional_profile_check<T: Scalar>(
    u: &GridFunction<T>,
    profile: &InfinityProfile,
    p: f64,
    q: f64,
) -> Result<Vec<AxisVerdict>> {
    let grid = u.grid();
    if profile.axes.len() != grid.dim() {
        return Err(Error::InvalidArgument(format!(
            "profile has {} axes, the grid {}",
            profile.axes.len(),
            grid.dim()
        )));
    }
    let mut out = Vec::with_capacity(grid.dim());
    for ap in &profile.axes {
        let axis = ap.axis;
        let l = grid.half_extent()[axis];
        let (pass, statistic) = match ap.class {
            AxisClass::Bounded { t } => {
                let mut worst = 0.0f64;
                for c in 0..grid.len() {
                    if grid.center(c)[axis].abs() >= t {
                        worst = worst.max(u.values()[c].as_f64().abs());
                    }
                }
                (worst == 0.0, worst)
            }
            AxisClass::Shrinking => {
                let ray = axis_ray(u, axis);
                let value_at = |s: f64| {
                    ray.iter()
                        .min_by(|a, b| (a.0 - s).abs().total_cmp(&(b.0 - s).abs()))
                        .map_or(0.0, |x| x.1)
                };
                let mut worst = 0.0f64;
                let mut t = 2.0;
                while t + 1.0 <= l - 1.0 {
                    let r = section_inradius(u.mask(), axis, t)?;
                    if r > 0.0 {
                        worst = worst.max(value_at(t + 1.0) / r.powf(p / q));
                    }
                    t += 1.0;
                }
                (worst.is_finite(), worst)
            }
            AxisClass::Tubular { .. } => {
                let rate = axis_rate(u, axis, 1.0).rate.unwrap_or(0.0);
                (rate > 0.0, rate)
            }
        };
        out.push(AxisVerdict {
            axis,
            class: ap.class.clone(),
            pass,
            statistic,
        });
    }
    Ok(out)
}
