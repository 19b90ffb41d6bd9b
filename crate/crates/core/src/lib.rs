//! Proximal gradient methods for composite problems `g + h` on Hadamard
//! manifolds, with hyperbolic and SPD geometries, the usual proximal maps,
//! and numerical checks of the descent and rate bounds.

// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod euclidean;
pub mod hyperbolic;
pub mod linalg;
pub mod manifold;
pub mod objectives;
pub mod prox;
pub mod scalar;
pub mod solvers;
pub mod spd;
pub mod theory;

pub use error::{Error, Result};
pub use euclidean::Euclidean;
pub use hyperbolic::{Hyperbolic, HyperbolicPoint};
pub use linalg::Matrix;
pub use manifold::{CurvatureBounds, CurvatureCoefficients, Geometry, Vector};
pub use scalar::Real;
pub use spd::{Spd, SpdPoint};

pub type HyperbolicPoint64 = HyperbolicPoint<f64>;
pub type SpdPoint64 = SpdPoint<f64>;
pub type Matrix64 = Matrix<f64>;
