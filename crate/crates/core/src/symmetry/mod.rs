//! Moving-plane machinery: critical positions, tangency cases, reflection
//! asymmetry and the s-deficit.

mod deficit;
pub mod lines;
mod plane;

pub use deficit::{deficit, DeficitEstimate, DEFAULT_HEIGHT_TOLERANCE_REL};
pub use plane::{
    critical_plane, symmetric_difference_volume, weighted_asymmetry, CriticalPlane, PlaneOptions,
    TangencyCase,
};
