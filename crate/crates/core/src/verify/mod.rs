//! Audits of the quantitative symmetry estimates and of the behaviour near
//! the contact line.

mod blowup;
mod constants;
mod report;
mod theorem;

pub use blowup::{
    contact_cosine, dyadic_heights, fit_blowup, fit_blowup_with, gradient_bound_audit,
    gradient_bound_audit_with, BlowupFit, GradientAudit, LadderPoint, GRADIENT_HEADROOM,
};
pub use constants::Constants;
pub use report::{symmetry_report, SymmetryReport};
pub use theorem::{
    audit_theorem_a, audit_theorem_b, default_directions, default_heights, estimate_deficit,
    recenter, AuditOptions, Check, DeficitSummary, DirectionRecord, Gate, HeightRecord,
    LambdaRecord, SliceAudit,
};
