//! Semismooth Newton method for finding singularities of locally Lipschitz
//! vector fields on Riemannian manifolds.
//!
//! The crate covers the unit sphere `S^n` and flat `R^n` through one manifold
//! interface ([`geometry`]), nonsmooth vector fields with selectable Clarke
//! generalized covariant derivative elements ([`fields`]), the Newton iteration
//! itself ([`solver`]), diagnostics that make the convergence hypotheses
//! measurable ([`analysis`]), independent reference computations
//! ([`oracle`]) and a config-driven experiment runner ([`experiment`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`, with `*32` variants for `f32`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod experiment;
pub mod fields;
pub mod geometry;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod solver;

pub use fields::{AmbientMap, SelectionRule, TangentMap, VectorField};
pub use geometry::{ManifoldKind, ManifoldPoint, TangentBasis, TangentVector};
pub use linalg::Matrix;
pub use scalar::Real;
pub use solver::{newton_solve, solve_step, NewtonTrace, SolverConfig, Termination};

pub type Point = ManifoldPoint<f64>;
pub type Tangent = TangentVector<f64>;
pub type Basis = TangentBasis<f64>;
pub type Map = TangentMap<f64>;
pub type Trace = NewtonTrace<f64>;
pub type Config = SolverConfig<f64>;

pub type Point32 = ManifoldPoint<f32>;
pub type Tangent32 = TangentVector<f32>;
pub type Map32 = TangentMap<f32>;
pub type Trace32 = NewtonTrace<f32>;
pub type Config32 = SolverConfig<f32>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point is off the manifold (norm deviation {deviation:e})")]
    NotOnManifold { deviation: f64 },
    #[error("vector is not tangent at its base point (normal component {normal:e})")]
    NotTangent { normal: f64 },
    #[error("points are within the antipodal margin {margin:e} (distance {distance})")]
    NearAntipodal { distance: f64, margin: f64 },
    #[error("singular linear map (smallest singular value {sigma_min:e})")]
    Singular { sigma_min: f64 },
    #[error("regularity violated: Clarke element at the center is singular (smallest singular value {sigma_min:e})")]
    RegularityViolation { sigma_min: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
