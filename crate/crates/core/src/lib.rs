//! Steklov eigenvalues of second- and fourth-order problems on rotationally
//! symmetric balls `dr² + h(r)² g_{S^{n-1}}`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod curvature;
pub mod eigen;
pub mod error;
pub mod ode;
pub mod quad;
pub mod radial;
pub mod scaling;
pub mod warp;

pub use error::{Result, SteklovError};
