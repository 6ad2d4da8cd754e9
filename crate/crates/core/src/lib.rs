//! Pseudo-Finsleroid metric function of spatially anisotropic relativistic type.
//!
//! The metric function `F(y)` on a four-dimensional tangent space is built from
//! a timelike covector `b`, a preferred spacelike direction `i3`, and two
//! scalars: `H >= 1` (the indicatrix has constant curvature `-H^2`) and
//! `0 < p <= 1` (the horizontal section has constant curvature `p^2`).
//! At `H = p = 1` it reduces to the pseudo-Euclidean norm.
//!
//! ```
//! use finsleroid::{Background, kernel};
//! use nalgebra::Vector4;
//!
//! let bg = Background::canonical(1.25, 0.8).unwrap();
//! let y = Vector4::new(2.0, 0.2, 0.1, 0.5);
//! let f = kernel::finsler_norm(&y, &bg.tetrad, &bg.params).unwrap();
//! assert!(f > 0.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod curvature;
pub mod dual;
pub mod error;
pub mod frame;
pub mod indicatrix;
pub mod kernel;
pub mod limits;
pub mod report;
pub mod sampling;
pub mod tensors;

pub use error::{FinsleroidError, Result};
pub use frame::{Background, FrameComponents, Parameters, Tetrad};
pub use kernel::{AngleCoords, DomainInfo, EvalBundle};
pub use tensors::{AngleGradients, TensorBundle};
