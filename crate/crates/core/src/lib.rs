//! Convex bodies, log-concave densities and the perturbation constructions
//! that replace a symmetric convex body by a nearby body with bounded
//! isotropic constant, together with numerical checks of every step.

// `!(x > 0.0)` is the idiom that also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod body;
pub mod constants;
pub mod directions;
pub mod distance;
pub mod error;
pub mod estimate;
pub mod interpolation;
pub mod linalg;
pub mod logconcave;
pub mod lp;
pub mod mc;
pub mod pipeline;
pub mod polytope;
pub mod quadrature;
pub mod quasi;
pub mod report;
pub mod rng;
pub mod sampling;
pub mod sections;
pub mod special;

pub use body::Body;
pub use constants::Constants;
pub use error::{Error, Result};
pub use estimate::Estimate;
pub use report::Report;
