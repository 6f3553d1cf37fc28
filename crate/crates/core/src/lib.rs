//! Sharp constants `λ_{p,q}(Ω) = inf ∫|∇u|^p / ‖u‖_q^p` on Steiner symmetric
//! domains, computed on uniform grids.
//!
//! The numerical core is generic over the scalar type; the aliases below fix
//! it to `f64` or `f32`.

pub mod analysis;
pub mod error;
mod fd;
pub mod geometry;
pub mod grid;
pub mod scalar;
pub mod solver;
pub mod symmetrization;

pub use error::{Error, Result};
pub use geometry::{gallery, realize_domain, validate_steiner, DomainMask, DomainSpec};
pub use grid::{make_grid, Grid, GridFunction};
pub use scalar::Scalar;
pub use solver::{solve_extremal, solve_linfty, Exponent, ProblemConfig, SolveResult};

pub type GridFunction64 = GridFunction<f64>;
pub type GridFunction32 = GridFunction<f32>;
pub type SolveResult64 = SolveResult<f64>;
pub type SolveResult32 = SolveResult<f32>;
