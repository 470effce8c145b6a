//! Named quantities: curvature fields, gradients, perimeter and energy,
//! half-space potential, Euler-Lagrange residual, wedge constants and the
//! first-variation check.

mod energy;
mod field;
mod variation;
mod wedge;

pub use energy::{
    fractional_perimeter, gauss_energy, halfspace_energy, halfspace_kappa, halfspace_potential,
    interior_energy, EnergyParts,
};
pub use field::{
    content_digest, curvature_at, curvature_field, el_residual, el_residual_from_field, median,
    tangent_directions, tangential_gradient, CurvatureField, ElResidual, FieldEntry,
    TangentialGradient,
};
pub use variation::{first_variation_check, NormalSpeed, VariationCheck};
pub use wedge::{wedge_constant, wedge_scaled_curvature, WedgeCache, WedgeConstant};
