//! Domains: analytic families, their realization on grids, Steiner validity,
//! inradii of the domain and of its axis sections, and the classification of
//! each axis direction at infinity.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Profile `φ` used to carve or bulge the pinched slabs. Even, decreasing on
/// `[0, 1)`, supported in `(-1, 1)` and equal to 1 at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinchProfile {
    /// `exp(1 - 1/(1 - s²))`, smooth with compact support.
    #[default]
    Bump,
    /// `(1 + cos(π s))/2`, only C¹ at `|s| = 1`.
    RaisedCosine,
}

impl PinchProfile {
    pub fn eval(self, s: f64) -> f64 {
        let s = s.abs();
        if s >= 1.0 {
            return 0.0;
        }
        match self {
            PinchProfile::Bump => (1.0 - 1.0 / (1.0 - s * s)).exp(),
            PinchProfile::RaisedCosine => 0.5 * (1.0 + (std::f64::consts::PI * s).cos()),
        }
    }
}

fn default_eps() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

/// Membership predicate for domains outside the analytic families.
#[derive(Clone)]
pub struct CustomDomain {
    pub name: String,
    pub contains: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl fmt::Debug for CustomDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomDomain({})", self.name)
    }
}

/// An open subset of `R^N` from the gallery of test domains.
///
/// Serialized as `{"family": "...", "params": {...}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum DomainSpec {
    /// `R^{N-1} x (-w, w)`; bounded only along the last axis.
    Slab {
        #[serde(default = "one")]
        half_width: f64,
    },
    /// Union over every axis of the tube `{|x_j| < a for all j ≠ i}`.
    Cross {
        #[serde(default = "one")]
        arm_half_width: f64,
    },
    #[serde(alias = "interval")]
    Ball {
        #[serde(default = "one")]
        radius: f64,
    },
    Box {
        half_extents: Vec<f64>,
    },
    /// `(0, ∞) x (-w, w)^{N-1}`.
    HalfSlab {
        #[serde(default = "one")]
        half_width: f64,
    },
    /// `|x_N| < 1 - ε φ(|x'|/ε)`.
    PinchedMinus {
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default)]
        profile: PinchProfile,
    },
    /// `|x_N| < 1 + ε φ(|x'|/ε)`.
    PinchedPlus {
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default)]
        profile: PinchProfile,
    },
    /// Planar set `|y| < 1/(⌊|x|⌋ + 1)`.
    Staircase,
    #[serde(skip)]
    Custom(CustomDomain),
}

/// Names accepted by [`gallery`].
pub const GALLERY: [&str; 8] = [
    "slab",
    "cross",
    "half_slab",
    "pinched_minus",
    "pinched_plus",
    "ball",
    "box",
    "staircase",
];

/// Named gallery domain in dimension `dim`.
pub fn gallery(name: &str, dim: usize) -> Result<DomainSpec> {
    let spec = match name {
        "slab" => DomainSpec::Slab { half_width: 1.0 },
        "cross" => DomainSpec::Cross {
            arm_half_width: 1.0,
        },
        "half_slab" => DomainSpec::HalfSlab { half_width: 1.0 },
        "pinched_minus" => DomainSpec::PinchedMinus {
            eps: 0.5,
            profile: PinchProfile::Bump,
        },
        "pinched_plus" => DomainSpec::PinchedPlus {
            eps: 0.5,
            profile: PinchProfile::Bump,
        },
        "ball" | "interval" => DomainSpec::Ball { radius: 1.0 },
        "box" => DomainSpec::Box {
            half_extents: vec![1.0; dim],
        },
        "staircase" => DomainSpec::Staircase,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown gallery domain '{other}' (known: {})",
                GALLERY.join(", ")
            )))
        }
    };
    spec.check_dim(dim)?;
    Ok(spec)
}

impl DomainSpec {
    pub fn custom(name: &str, contains: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        DomainSpec::Custom(CustomDomain {
            name: name.to_string(),
            contains: Arc::new(contains),
        })
    }

    pub fn name(&self) -> String {
        match self {
            DomainSpec::Slab { .. } => "slab".into(),
            DomainSpec::Cross { .. } => "cross".into(),
            DomainSpec::Ball { .. } => "ball".into(),
            DomainSpec::Box { .. } => "box".into(),
            DomainSpec::HalfSlab { .. } => "half_slab".into(),
            DomainSpec::PinchedMinus { .. } => "pinched_minus".into(),
            DomainSpec::PinchedPlus { .. } => "pinched_plus".into(),
            DomainSpec::Staircase => "staircase".into(),
            DomainSpec::Custom(c) => c.name.clone(),
        }
    }

    /// Checks parameters and that the family exists in dimension `dim`.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{what} must be positive, got {v}"
                )))
            }
        };
        let planar_or_more = |fam: &str| {
            if dim >= 2 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "{fam} needs dimension >= 2"
                )))
            }
        };
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "dimension must be at least 1".into(),
            ));
        }
        match self {
            DomainSpec::Slab { half_width } => positive(*half_width, "slab half width"),
            DomainSpec::Cross { arm_half_width } => {
                planar_or_more("cross")?;
                positive(*arm_half_width, "arm half width")
            }
            DomainSpec::Ball { radius } => positive(*radius, "radius"),
            DomainSpec::Box { half_extents } => {
                if half_extents.len() != dim {
                    return Err(Error::InvalidArgument(format!(
                        "box has {} half extents in dimension {dim}",
                        half_extents.len()
                    )));
                }
                half_extents
                    .iter()
                    .try_for_each(|&l| positive(l, "box half extent"))
            }
            DomainSpec::HalfSlab { half_width } => {
                planar_or_more("half slab")?;
                positive(*half_width, "half slab width")
            }
            DomainSpec::PinchedMinus { eps, .. } | DomainSpec::PinchedPlus { eps, .. } => {
                planar_or_more("pinched slab")?;
                if *eps > 0.0 && *eps < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!(
                        "pinch eps must lie in (0,1), got {eps}"
                    )))
                }
            }
            DomainSpec::Staircase => {
                if dim == 2 {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument("staircase is planar".into()))
                }
            }
            DomainSpec::Custom(_) => Ok(()),
        }
    }

    /// Open-set membership of a point.
    pub fn contains(&self, x: &[f64]) -> bool {
        let n = x.len();
        match self {
            DomainSpec::Slab { half_width } => x[n - 1].abs() < *half_width,
            DomainSpec::Cross { arm_half_width } => (0..n).any(|i| {
                x.iter()
                    .enumerate()
                    .all(|(j, v)| j == i || v.abs() < *arm_half_width)
            }),
            DomainSpec::Ball { radius } => x.iter().map(|v| v * v).sum::<f64>() < radius * radius,
            DomainSpec::Box { half_extents } => {
                x.iter().zip(half_extents).all(|(v, l)| v.abs() < *l)
            }
            DomainSpec::HalfSlab { half_width } => {
                x[0] > 0.0 && x[1..].iter().all(|v| v.abs() < *half_width)
            }
            DomainSpec::PinchedMinus { eps, profile } => {
                let r = x[..n - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
                x[n - 1].abs() < 1.0 - eps * profile.eval(r / eps)
            }
            DomainSpec::PinchedPlus { eps, profile } => {
                let r = x[..n - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
                x[n - 1].abs() < 1.0 + eps * profile.eval(r / eps)
            }
            DomainSpec::Staircase => x[1].abs() < 1.0 / (x[0].abs().floor() + 1.0),
            DomainSpec::Custom(c) => (c.contains)(x),
        }
    }

    /// Half extent of the domain along each axis, `None` where it is
    /// unbounded (or unknown, for custom domains).
    pub fn axis_bounds(&self, dim: usize) -> Vec<Option<f64>> {
        let mut b = vec![None; dim];
        match self {
            DomainSpec::Slab { half_width } => b[dim - 1] = Some(*half_width),
            DomainSpec::Cross { .. } | DomainSpec::Custom(_) => {}
            DomainSpec::Ball { radius } => b.iter_mut().for_each(|v| *v = Some(*radius)),
            DomainSpec::Box { half_extents } => {
                for (v, l) in b.iter_mut().zip(half_extents) {
                    *v = Some(*l);
                }
            }
            DomainSpec::HalfSlab { half_width } => {
                for v in b.iter_mut().skip(1) {
                    *v = Some(*half_width);
                }
            }
            DomainSpec::PinchedMinus { .. } => b[dim - 1] = Some(1.0),
            DomainSpec::PinchedPlus { eps, .. } => b[dim - 1] = Some(1.0 + eps),
            DomainSpec::Staircase => b[1] = Some(1.0),
        }
        b
    }

    pub fn is_bounded(&self, dim: usize) -> bool {
        self.axis_bounds(dim).iter().all(Option::is_some)
    }

    /// Half extents of the truncation box `Q_L ∩ (bounding box)`, padded by a
    /// cell on bounded axes so that the boundary layer is represented.
    pub fn truncation_extents(&self, dim: usize, l: f64, spacing: f64) -> Vec<f64> {
        self.axis_bounds(dim)
            .into_iter()
            .map(|b| match b {
                Some(w) => l.min(w + spacing),
                None => l,
            })
            .collect()
    }
}

/// Which part of the Steiner property a line violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SteinerProperty {
    /// Symmetry with respect to the coordinate hyperplane.
    S1,
    /// Convexity along the coordinate direction.
    S2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SteinerValidity {
    Unchecked,
    Validated,
    Violated {
        axis: usize,
        /// Multi-index of the first cell of the offending line.
        line: Vec<usize>,
        property: SteinerProperty,
    },
}

/// Cell-center membership of a domain on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainMask {
    grid: Grid,
    inside: Vec<bool>,
    steiner: SteinerValidity,
}

impl DomainMask {
    /// Mask from explicit per-cell membership; unchecked.
    pub fn from_cells(grid: Grid, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} membership flags for {} cells",
                inside.len(),
                grid.len()
            )));
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::EmptyDomain);
        }
        Ok(DomainMask {
            grid,
            inside,
            steiner: SteinerValidity::Unchecked,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn is_inside(&self, cell: usize) -> bool {
        self.inside[cell]
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn steiner(&self) -> &SteinerValidity {
        &self.steiner
    }

    pub fn is_steiner_valid(&self) -> bool {
        self.steiner == SteinerValidity::Validated
    }

    pub(crate) fn with_validity(mut self, steiner: SteinerValidity) -> Self {
        self.steiner = steiner;
        self
    }

    /// Same membership, ignoring validation metadata.
    pub fn same_cells(&self, other: &DomainMask) -> bool {
        self.grid == other.grid && self.inside == other.inside
    }
}

/// Marks every cell whose center lies in the domain.
pub fn realize_domain(spec: &DomainSpec, grid: &Grid) -> Result<DomainMask> {
    spec.check_dim(grid.dim())?;
    let mut x = vec![0.0; grid.dim()];
    let inside = (0..grid.len())
        .map(|c| {
            grid.center_into(c, &mut x);
            spec.contains(&x)
        })
        .collect();
    DomainMask::from_cells(grid.clone(), inside)
}

/// Checks that every axis-parallel line of inside cells is one contiguous run
/// (convexity) centered on the coordinate hyperplane (symmetry).
pub fn validate_steiner(mask: DomainMask) -> DomainMask {
    let grid = mask.grid.clone();
    for axis in 0..grid.dim() {
        for start in grid.line_starts(axis) {
            let line: Vec<bool> = grid.line(axis, start).map(|c| mask.inside[c]).collect();
            let Some(first) = line.iter().position(|&b| b) else {
                continue;
            };
            let last = line.iter().rposition(|&b| b).unwrap();
            let property = if line[first..=last].iter().any(|&b| !b) {
                Some(SteinerProperty::S2)
            } else if first + last != line.len() - 1 {
                Some(SteinerProperty::S1)
            } else {
                None
            };
            if let Some(property) = property {
                let steiner = SteinerValidity::Violated {
                    axis,
                    line: grid.multi_index(start),
                    property,
                };
                return mask.with_validity(steiner);
            }
        }
    }
    mask.with_validity(SteinerValidity::Validated)
}

const FAR: f64 = 1e30;

/// 1-D squared distance transform of a sampled function (lower envelope of
/// parabolas).
fn distance_transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let fq = f[q] + (q * q) as f64;
        let mut s;
        loop {
            let p = v[k];
            s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                break;
            }
        }
        if s <= z[k] {
            // k == 0 and the new parabola dominates everywhere
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            continue;
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for q in 0..n {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        out[q] = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance (in cell units) from every cell of a
/// `dims`-shaped array to the nearest site. The array is surrounded by a ring
/// of sites, standing for the exterior of the grid.
pub(crate) fn squared_distance_to_sites(dims: &[usize], site: &[bool]) -> Vec<f64> {
    let pad: Vec<usize> = dims.iter().map(|n| n + 2).collect();
    let len: usize = pad.iter().product();
    let dim = dims.len();
    let mut strides = vec![1usize; dim];
    for a in (0..dim.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * pad[a + 1];
    }
    let mut f = vec![0.0; len];
    let mut interior = Vec::with_capacity(site.len());
    let mut idx = vec![0usize; dim];
    for flat in 0..len {
        let mut rest = flat;
        let mut border = false;
        for a in (0..dim).rev() {
            idx[a] = rest % pad[a];
            rest /= pad[a];
            border |= idx[a] == 0 || idx[a] == pad[a] - 1;
        }
        if !border {
            interior.push(flat);
        }
    }
    for (c, &pc) in interior.iter().enumerate() {
        f[pc] = if site[c] { 0.0 } else { FAR };
    }
    let max_n = *pad.iter().max().unwrap();
    let (mut line, mut out) = (vec![0.0; max_n], vec![0.0; max_n]);
    let (mut v, mut z) = (vec![0usize; max_n], vec![0.0; max_n + 1]);
    for a in 0..dim {
        let n = pad[a];
        let st = strides[a];
        for start in (0..len).filter(|&c| (c / st).is_multiple_of(n)) {
            for k in 0..n {
                line[k] = f[start + k * st];
            }
            distance_transform_1d(&line[..n], &mut out[..n], &mut v[..n], &mut z[..n + 1]);
            for k in 0..n {
                f[start + k * st] = out[k];
            }
        }
    }
    interior.iter().map(|&pc| f[pc]).collect()
}

/// Largest ball inside the mask: its radius (distance from an inside cell
/// center to the nearest outside center, ± h) and its center. Ties go to the
/// center nearest the origin.
pub fn maximal_ball(mask: &DomainMask) -> (f64, Vec<f64>) {
    let grid = mask.grid();
    let outside: Vec<bool> = mask.inside().iter().map(|b| !b).collect();
    let d2 = squared_distance_to_sites(grid.cells_per_axis(), &outside);
    let radii = grid.radii();
    let mut best = grid.origin();
    let mut best_d = -1.0;
    for c in 0..grid.len() {
        if !mask.is_inside(c) {
            continue;
        }
        if d2[c] > best_d || (d2[c] == best_d && radii[c] < radii[best]) {
            best = c;
            best_d = d2[c];
        }
    }
    (best_d.sqrt() * grid.spacing(), grid.center(best))
}

pub fn inradius(mask: &DomainMask) -> f64 {
    maximal_ball(mask).0
}

fn section_radius(
    grid: &Grid,
    axis: usize,
    k: usize,
    mut member: impl FnMut(usize) -> bool,
) -> f64 {
    let dims: Vec<usize> = (0..grid.dim())
        .filter(|&a| a != axis)
        .map(|a| grid.cells_per_axis()[a])
        .collect();
    let count: usize = dims.iter().product();
    let mut site = vec![true; count];
    let mut any = false;
    let mut idx = vec![0usize; grid.dim()];
    for (s, slot) in site.iter_mut().enumerate() {
        let mut rest = s;
        for a in (0..grid.dim()).rev() {
            if a == axis {
                idx[a] = k;
                continue;
            }
            let n = grid.cells_per_axis()[a];
            idx[a] = rest % n;
            rest /= n;
        }
        if member(grid.flat_index(&idx)) {
            *slot = false;
            any = true;
        }
    }
    if !any {
        return 0.0;
    }
    let d2 = squared_distance_to_sites(&dims, &site);
    let best = d2
        .iter()
        .zip(&site)
        .filter(|(_, &s)| !s)
        .map(|(d, _)| *d)
        .fold(0.0, f64::max);
    best.sqrt() * grid.spacing()
}

fn section_index(grid: &Grid, axis: usize, t: f64) -> Result<usize> {
    if grid.dim() < 2 {
        return Err(Error::InvalidArgument(
            "sections need dimension >= 2".into(),
        ));
    }
    if axis >= grid.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let k = (t / grid.spacing()).round() + grid.center_index(axis) as f64;
    if !(0.0..grid.cells_per_axis()[axis] as f64).contains(&k) {
        return Err(Error::InvalidArgument(format!(
            "section t = {t} outside the grid"
        )));
    }
    Ok(k as usize)
}

/// Inradius of the `(N-1)`-dimensional section `{x ∈ Ω : x_axis = t}`, ± h;
/// zero when the section is empty.
pub fn section_inradius(mask: &DomainMask, axis: usize, t: f64) -> Result<f64> {
    let grid = mask.grid();
    let k = section_index(grid, axis, t)?;
    Ok(section_radius(grid, axis, k, |c| mask.is_inside(c)))
}

/// Behavior of a domain at infinity along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum AxisClass {
    /// Sections are empty for `|t| >= t`.
    Bounded { t: f64 },
    /// Section inradii decrease to zero.
    Shrinking,
    /// Section inradii converge to `radius > 0`.
    Tubular { radius: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxisProfile {
    pub axis: usize,
    pub class: AxisClass,
    /// `(t, r(t))` on the largest box.
    pub samples: Vec<(f64, f64)>,
    /// `(L, r(L/2))` along the box schedule.
    pub tail: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfinityProfile {
    pub axes: Vec<AxisProfile>,
}

impl InfinityProfile {
    pub fn class(&self, axis: usize) -> &AxisClass {
        &self.axes[axis].class
    }
}

/// Growing truncation boxes used to probe a domain at infinity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InfinitySchedule {
    pub dim: usize,
    pub spacing: f64,
    /// Increasing half extents `L`.
    pub extents: Vec<f64>,
}

/// Classifies every axis as bounded, shrinking or tubular from section
/// inradii sampled on growing boxes.
pub fn classify_infinity(
    spec: &DomainSpec,
    schedule: &InfinitySchedule,
) -> Result<InfinityProfile> {
    let dim = schedule.dim;
    spec.check_dim(dim)?;
    if dim < 2 {
        return Err(Error::InvalidArgument(
            "classification needs dimension >= 2".into(),
        ));
    }
    if schedule.extents.len() < 2 || schedule.extents.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "need at least two increasing box extents".into(),
        ));
    }
    let h = schedule.spacing;
    let grids: Vec<Grid> = schedule
        .extents
        .iter()
        .map(|&l| Grid::with_extents(&spec.truncation_extents(dim, l, h), h))
        .collect::<Result<_>>()?;
    let radius_at = |grid: &Grid, axis: usize, t: f64| -> Result<f64> {
        let k = section_index(grid, axis, t)?;
        let mut x = vec![0.0; dim];
        Ok(section_radius(grid, axis, k, |c| {
            grid.center_into(c, &mut x);
            spec.contains(&x)
        }))
    };

    let mut axes = Vec::with_capacity(dim);
    for axis in 0..dim {
        let big = grids.last().unwrap();
        let l_max = big.half_extent()[axis];
        let step = h.max(l_max / 128.0);
        let mut samples = Vec::new();
        let mut t = 0.0;
        while t <= l_max - h * 0.5 {
            samples.push((t, radius_at(big, axis, t)?));
            t += step;
        }
        let tail: Vec<(f64, f64)> = schedule
            .extents
            .iter()
            .zip(&grids)
            .map(|(&l, g)| Ok((l, radius_at(g, axis, (l / 2.0).min(g.half_extent()[axis]))?)))
            .collect::<Result<_>>()?;

        let class = if let Some(t_i) = vanishing_point(&samples) {
            AxisClass::Bounded { t: t_i }
        } else {
            let r: Vec<f64> = tail.iter().map(|x| x.1).collect();
            let (first, last, prev) = (r[0], r[r.len() - 1], r[r.len() - 2]);
            let monotone = r.windows(2).all(|w| w[1] <= w[0] + 0.5 * h);
            if monotone && last < prev && last < first - h && last <= 0.75 * first {
                AxisClass::Shrinking
            } else if monotone && (last - prev).abs() <= h {
                AxisClass::Tubular { radius: last }
            } else {
                return Err(Error::Inconclusive(format!(
                    "axis {axis} of '{}': section inradii {r:?} neither stabilize nor decrease",
                    spec.name()
                )));
            }
        };
        axes.push(AxisProfile {
            axis,
            class,
            samples,
            tail,
        });
    }
    Ok(InfinityProfile { axes })
}

/// First sampled `t` beyond which every section is empty.
fn vanishing_point(samples: &[(f64, f64)]) -> Option<f64> {
    let last_nonempty = samples.iter().rposition(|s| s.1 > 0.0)?;
    samples.get(last_nonempty + 1).map(|s| s.0)
}

/// Fraction of `B_r(x)` outside the domain, by cell counting. `x` must be
/// within `h√N` of both an inside and an outside cell center, and the ball
/// must fit in the grid.
pub fn measure_density(mask: &DomainMask, x: &[f64], r: f64) -> Result<f64> {
    let grid = mask.grid();
    let h = grid.spacing();
    if x.len() != grid.dim() {
        return Err(Error::InvalidArgument("point dimension mismatch".into()));
    }
    if !(r > 2.0 * h) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} must exceed 2h = {}",
            2.0 * h
        )));
    }
    for (a, &xa) in x.iter().enumerate() {
        if xa.abs() + r > grid.half_extent()[a] {
            return Err(Error::InvalidArgument("ball leaves the grid".into()));
        }
    }
    let near = h * (grid.dim() as f64).sqrt() * (1.0 + 1e-9);
    let (mut in_near, mut out_near) = (false, false);
    let (mut total, mut outside) = (0usize, 0usize);
    let mut c_x = vec![0.0; grid.dim()];
    for c in 0..grid.len() {
        grid.center_into(c, &mut c_x);
        let d = c_x
            .iter()
            .zip(x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if d <= near {
            if mask.is_inside(c) {
                in_near = true;
            } else {
                out_near = true;
            }
        }
        if d < r {
            total += 1;
            if !mask.is_inside(c) {
                outside += 1;
            }
        }
    }
    if !in_near {
        return Err(Error::InvalidArgument(format!(
            "point {x:?} is far outside the domain"
        )));
    }
    if !out_near {
        return Err(Error::InvalidArgument(format!("point {x:?} is interior")));
    }
    Ok(outside as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn mask(spec: &DomainSpec, l: f64, h: f64) -> DomainMask {
        realize_domain(spec, &make_grid(2, l, h).unwrap()).unwrap()
    }

    /// Brute-force distance from each inside cell to the nearest outside one
    /// (including the ring just outside the grid).
    fn brute_inradius(m: &DomainMask) -> f64 {
        let g = m.grid();
        let h = g.spacing();
        let mut sites: Vec<Vec<f64>> = (0..g.len())
            .filter(|&c| !m.is_inside(c))
            .map(|c| g.center(c))
            .collect();
        let n = g.cells_per_axis()[0] as i64;
        let m0 = g.center_index(0) as i64;
        for i in -1..=n {
            for j in -1..=n {
                if i == -1 || j == -1 || i == n || j == n {
                    sites.push(vec![(i - m0) as f64 * h, (j - m0) as f64 * h]);
                }
            }
        }
        (0..g.len())
            .filter(|&c| m.is_inside(c))
            .map(|c| {
                let x = g.center(c);
                sites
                    .iter()
                    .map(|s| ((s[0] - x[0]).powi(2) + (s[1] - x[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn realize_examples() {
        let slab = mask(&DomainSpec::Slab { half_width: 1.0 }, 4.0, 0.25);
        let g = slab.grid();
        for c in 0..g.len() {
            assert_eq!(slab.is_inside(c), g.center(c)[1].abs() < 1.0);
        }
        let cross = mask(&gallery("cross", 2).unwrap(), 4.0, 0.25);
        assert!(cross.is_inside(cross.grid().locate(&[2.0, 0.5]).unwrap()));
        assert!(!cross.is_inside(cross.grid().locate(&[2.0, 1.5]).unwrap()));
        let half = mask(&gallery("half_slab", 2).unwrap(), 4.0, 0.25);
        assert!(!half.is_inside(half.grid().locate(&[-0.5, 0.0]).unwrap()));
        assert!(half.is_inside(half.grid().locate(&[0.5, 0.0]).unwrap()));
    }

    #[test]
    fn empty_realization_is_an_error() {
        let g = make_grid(2, 1.0, 0.25).unwrap();
        let r = realize_domain(&DomainSpec::custom("nothing", |x| x[0] > 5.0), &g);
        assert!(matches!(r, Err(Error::EmptyDomain)));
    }

    #[test]
    fn gallery_validation_verdicts() {
        let cases = [
            ("slab", true),
            ("cross", true),
            ("ball", true),
            ("box", true),
            ("staircase", true),
            ("pinched_plus", true),
        ];
        for (name, ok) in cases {
            let m = validate_steiner(mask(&gallery(name, 2).unwrap(), 4.0, 0.125));
            assert_eq!(m.is_steiner_valid(), ok, "{name}: {:?}", m.steiner());
        }
        let half = validate_steiner(mask(&gallery("half_slab", 2).unwrap(), 4.0, 0.125));
        assert!(matches!(
            half.steiner(),
            SteinerValidity::Violated {
                axis: 0,
                property: SteinerProperty::S1,
                ..
            }
        ));
        let pinched = validate_steiner(mask(&gallery("pinched_minus", 2).unwrap(), 4.0, 0.125));
        assert!(matches!(
            pinched.steiner(),
            SteinerValidity::Violated {
                axis: 0,
                property: SteinerProperty::S2,
                ..
            }
        ));
    }

    #[test]
    fn inradius_examples() {
        let h = 0.125;
        let slab = mask(&gallery("slab", 2).unwrap(), 4.0, h);
        assert!((inradius(&slab) - 1.0).abs() <= h);
        let cross = mask(&gallery("cross", 2).unwrap(), 4.0, h);
        assert!((inradius(&cross) - 2f64.sqrt()).abs() <= h);
        let ball = mask(&DomainSpec::Ball { radius: 0.7 }, 1.0, 1.0 / 32.0);
        assert!((inradius(&ball) - 0.7).abs() <= 1.0 / 32.0);
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        for name in ["cross", "staircase", "pinched_minus", "half_slab"] {
            let m = mask(&gallery(name, 2).unwrap(), 2.0, 0.25);
            assert!((inradius(&m) - brute_inradius(&m)).abs() < 1e-12, "{name}");
        }
        let odd = DomainSpec::custom("annulus", |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            r > 0.4 && r < 1.7
        });
        let m = mask(&odd, 2.0, 0.125);
        assert!((inradius(&m) - brute_inradius(&m)).abs() < 1e-12);
    }

    #[test]
    fn steiner_maximal_ball_is_centered() {
        for name in ["slab", "cross", "ball", "box", "staircase", "pinched_plus"] {
            let m = validate_steiner(mask(&gallery(name, 2).unwrap(), 3.0, 0.125));
            assert!(m.is_steiner_valid());
            let (r, center) = maximal_ball(&m);
            let origin_r = {
                let g = m.grid();
                let outside: Vec<bool> = m.inside().iter().map(|b| !b).collect();
                let d2 = squared_distance_to_sites(g.cells_per_axis(), &outside);
                d2[g.origin()].sqrt() * g.spacing()
            };
            assert!(
                (r - origin_r).abs() <= 0.125,
                "{name}: {r} vs {origin_r} at {center:?}"
            );
        }
    }

    #[test]
    fn section_examples() {
        let h = 0.0625;
        let slab = mask(&gallery("slab", 2).unwrap(), 4.0, h);
        assert!((section_inradius(&slab, 0, 3.0).unwrap() - 1.0).abs() <= h);
        let cross = mask(&gallery("cross", 2).unwrap(), 4.0, h);
        assert!((section_inradius(&cross, 0, 2.0).unwrap() - 1.0).abs() <= h);
        let ball = mask(&DomainSpec::Ball { radius: 1.0 }, 1.5, h);
        assert!((section_inradius(&ball, 0, 0.6).unwrap() - 0.8).abs() <= h);
        assert_eq!(section_inradius(&ball, 0, 1.25).unwrap(), 0.0);
        assert!(section_inradius(&ball, 2, 0.0).is_err());
        assert!(section_inradius(&ball, 0, 9.0).is_err());
    }

    #[test]
    fn section_inradius_even_and_nonincreasing() {
        let h = 0.0625;
        for name in ["cross", "ball", "staircase", "pinched_plus"] {
            let m = validate_steiner(mask(&gallery(name, 2).unwrap(), 3.0, h));
            for axis in 0..2 {
                let mut prev = f64::INFINITY;
                for k in 0..40 {
                    let t = k as f64 * h;
                    let r = section_inradius(&m, axis, t).unwrap();
                    assert_eq!(r, section_inradius(&m, axis, -t).unwrap());
                    assert!(r <= prev, "{name} axis {axis} t {t}");
                    prev = r;
                }
            }
        }
    }

    #[test]
    fn infinity_classification() {
        let schedule = InfinitySchedule {
            dim: 2,
            spacing: 1.0 / 16.0,
            extents: vec![8.0, 16.0, 32.0],
        };
        let slab = classify_infinity(&gallery("slab", 2).unwrap(), &schedule).unwrap();
        assert!(
            matches!(slab.class(0), AxisClass::Tubular { radius } if (radius - 1.0).abs() <= 1.0 / 16.0)
        );
        assert!(matches!(slab.class(1), AxisClass::Bounded { t } if (t - 1.0).abs() <= 1.0 / 16.0));
        let cross = classify_infinity(&gallery("cross", 2).unwrap(), &schedule).unwrap();
        for a in 0..2 {
            assert!(
                matches!(cross.class(a), AxisClass::Tubular { radius } if (radius - 1.0).abs() <= 1.0 / 16.0)
            );
        }
        let ball = classify_infinity(&gallery("ball", 2).unwrap(), &schedule).unwrap();
        for a in 0..2 {
            assert!(
                matches!(ball.class(a), AxisClass::Bounded { t } if (t - 1.0).abs() <= 1.0 / 16.0)
            );
        }
        let stairs = classify_infinity(&gallery("staircase", 2).unwrap(), &schedule).unwrap();
        assert_eq!(stairs.class(0), &AxisClass::Shrinking);
        let horn = DomainSpec::custom("horn", |x| x[1].abs() < 1.0 / (1.0 + x[0].abs()));
        let horn = classify_infinity(&horn, &schedule).unwrap();
        assert_eq!(horn.class(0), &AxisClass::Shrinking);
        assert!(matches!(horn.class(1), AxisClass::Bounded { .. }));
    }

    #[test]
    fn inconclusive_custom_domain_is_reported() {
        // section width oscillates with |x|
        let wavy = DomainSpec::custom("wavy", |x| {
            x[1].abs() < 0.5 + 0.4 * (x[0] * 0.7).sin().abs()
        });
        let schedule = InfinitySchedule {
            dim: 2,
            spacing: 1.0 / 16.0,
            extents: vec![4.0, 9.0, 20.0],
        };
        assert!(matches!(
            classify_infinity(&wavy, &schedule),
            Err(Error::Inconclusive(_))
        ));
    }

    #[test]
    fn measure_density_examples() {
        let h = 1.0 / 64.0;
        let cross = mask(&gallery("cross", 2).unwrap(), 2.0, h);
        let d = measure_density(&cross, &[1.0, 1.0], 0.5).unwrap();
        assert!((d - 0.25).abs() <= 4.0 * h / 0.5, "{d}");
        let slab = mask(&gallery("slab", 2).unwrap(), 2.0, h);
        let d = measure_density(&slab, &[0.0, 1.0], 0.5).unwrap();
        assert!((d - 0.5).abs() <= 4.0 * h / 0.5, "{d}");
        assert!(measure_density(&slab, &[0.0, 0.0], 0.5).is_err());
        assert!(measure_density(&slab, &[0.0, 1.0], 0.01).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec: DomainSpec =
            serde_json::from_str(r#"{"family":"slab","params":{"half_width":1.0}}"#).unwrap();
        assert!(matches!(spec, DomainSpec::Slab { half_width } if half_width == 1.0));
        let spec: DomainSpec =
            serde_json::from_str(r#"{"family":"interval","params":{"radius":2.0}}"#).unwrap();
        assert!(matches!(spec, DomainSpec::Ball { radius } if radius == 2.0));
        let spec: DomainSpec =
            serde_json::from_str(r#"{"family":"pinched_minus","params":{"eps":0.3}}"#).unwrap();
        assert!(
            matches!(spec, DomainSpec::PinchedMinus { eps, profile: PinchProfile::Bump } if eps == 0.3)
        );
        let json = serde_json::to_string(&gallery("cross", 2).unwrap()).unwrap();
        assert_eq!(
            json,
            r#"{"family":"cross","params":{"arm_half_width":1.0}}"#
        );
        assert!(gallery("moebius", 2).is_err());
    }
}
