//! Declarative shape descriptions, as read from JSON.
//!
//! ```json
//! { "n": 2,
//!   "shape": { "type": "ball_cap", "radius": 1.0, "center_height": 0.5 } }
//! ```

use serde::{Deserialize, Serialize};

/// Analytic description of a bounded open set in the upper half-space.
///
/// Horizontal vectors carry `n - 1` components; translations may also carry
/// `n` components as long as the vertical one is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    /// Ball of radius `radius` centred at `(horizontal_center, center_height)`,
    /// intersected with the upper half-space.
    BallCap {
        radius: f64,
        center_height: f64,
        #[serde(default)]
        horizontal_center: Vec<f64>,
    },
    /// Ellipsoid with semi-axes `semi_axes` (the last one vertical before
    /// tilting) intersected with the upper half-space. `tilt` rotates the
    /// ellipsoid in the `x_1`-`x_n` plane about its centre.
    EllipsoidCap {
        semi_axes: Vec<f64>,
        center_height: f64,
        #[serde(default)]
        tilt: f64,
        #[serde(default)]
        horizontal_center: Vec<f64>,
    },
    Union {
        members: Vec<ShapeSpec>,
    },
    Transformed {
        base: Box<ShapeSpec>,
        op: TransformOp,
    },
}

/// Isometries and dilations that keep the half-space invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformOp {
    Translate {
        vector: Vec<f64>,
    },
    Scale {
        factor: f64,
    },
    /// Rotation about the vertical axis through the origin.
    Rotate {
        angle: f64,
    },
    /// Reflection across the vertical hyperplane `{x . normal = offset}`.
    Reflect {
        normal: Vec<f64>,
        offset: f64,
    },
}

/// A shape together with its ambient dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeDocument {
    pub n: usize,
    pub shape: ShapeSpec,
    /// Admit disconnected unions. Only meant for oracle fixtures.
    #[serde(default)]
    pub allow_disconnected: bool,
}

impl ShapeDocument {
    pub fn new(n: usize, shape: ShapeSpec) -> Self {
        ShapeDocument {
            n,
            shape,
            allow_disconnected: false,
        }
    }
}

impl ShapeSpec {
    pub fn ball_cap(radius: f64, center_height: f64) -> Self {
        ShapeSpec::BallCap {
            radius,
            center_height,
            horizontal_center: Vec::new(),
        }
    }

    pub fn ball_cap_at(radius: f64, center_height: f64, horizontal_center: Vec<f64>) -> Self {
        ShapeSpec::BallCap {
            radius,
            center_height,
            horizontal_center,
        }
    }

    pub fn ellipsoid_cap(semi_axes: Vec<f64>, center_height: f64) -> Self {
        ShapeSpec::EllipsoidCap {
            semi_axes,
            center_height,
            tilt: 0.0,
            horizontal_center: Vec::new(),
        }
    }

    pub fn transformed(self, op: TransformOp) -> Self {
        ShapeSpec::Transformed {
            base: Box::new(self),
            op,
        }
    }
}
