//! Fractional curvature, fractional perimeter and moving-plane symmetry
//! audits for droplet-shaped sets resting on a hyperplane.

// `!(x > 0.0)` is how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod geom;
pub mod measures;
pub mod quadrature;
pub mod shapes;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
