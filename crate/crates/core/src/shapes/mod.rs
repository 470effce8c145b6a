//! Analytic set models in the half-space `H = {x_n > 0}`.

mod model;
pub mod node;
mod sample;
mod spec;
mod summary;

pub use model::{ball_cap_volume, build_shape, transform, ExactMetadata, RayCast, SetModel};
pub use node::{clip_intervals, merge_intervals, Intervals};
pub use sample::{
    max_pair_distance, meridian_point, probe_ok, project_along, sample_boundary, slice_points,
    BoundaryPoint,
};
pub use spec::{ShapeDocument, ShapeSpec, TransformOp};
pub use summary::{
    cross_section, geometric_summary, voxel_volume, CrossSection, GeometricSummary, VoxelGrid,
};
