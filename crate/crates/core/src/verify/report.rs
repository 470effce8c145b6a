use serde::Serialize;

use super::blowup::{
    contact_cosine, fit_blowup_with, gradient_bound_audit_with, BlowupFit, GradientAudit,
};
use super::theorem::{
    audit_theorem_a, audit_theorem_b, estimate_deficit, AuditOptions, Check, DeficitSummary,
    DirectionRecord, SliceAudit,
};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::measures::{content_digest, wedge_constant};
use crate::quadrature::QuadratureConfig;
use crate::shapes::SetModel;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub n: usize,
    pub s: f64,
    pub shape_digest: String,
    pub deficit: DeficitSummary,
    pub directions: Vec<DirectionRecord>,
    pub slices: SliceAudit,
    pub blowup: Option<BlowupFit>,
    pub gradient: Option<GradientAudit>,
    /// Why the contact-line audits were skipped.
    pub contact_skipped: Option<String>,
    /// Every audit whose hypotheses hold passes.
    pub all_guaranteed_pass: bool,
}

/// Runs every audit with one curvature field and one `delta_s`.
pub fn symmetry_report(
    model: &SetModel,
    s: f64,
    cfg: &QuadratureConfig,
    opts: &AuditOptions,
    directions: &[Vec3],
    heights: &[f64],
    ladder: &[f64],
) -> Result<SymmetryReport> {
    let deficit = estimate_deficit(model, s, cfg, opts)?;
    let dirs = audit_theorem_a(model, s, directions, &deficit, opts)?;
    let slices = audit_theorem_b(model, s, directions, heights, &deficit, opts)?;
    let (blowup, gradient, contact_skipped) = match contact_cosine(model) {
        Ok(sigma) => {
            let wedge = wedge_constant(model.n(), s, sigma, cfg)?;
            (
                Some(fit_blowup_with(model, s, cfg, ladder, &wedge)?),
                Some(gradient_bound_audit_with(model, s, cfg, ladder, &wedge)?),
                None,
            )
        }
        Err(e @ (Error::NoContactLine | Error::NonConstantAngle(_))) => {
            (None, None, Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let a_pass = dirs.iter().all(|d| d.reflection.pass && d.weighted.pass);
    let b_pass = !slices.guaranteed
        || (slices.lambdas.iter().all(|l| l.bound.pass) && slices.heights.iter().all(|h| h.pass));
    let g_pass = gradient.as_ref().is_none_or(|g| g.pass);
    Ok(SymmetryReport {
        n: model.n(),
        s,
        shape_digest: content_digest(model, &(s, cfg, opts)),
        deficit,
        directions: dirs,
        slices,
        blowup,
        gradient,
        contact_skipped,
        all_guaranteed_pass: a_pass && b_pass && g_pass,
    })
}

fn row(out: &mut String, kind: &str, key: &str, c: &Check) {
    out.push_str(&format!(
        "{kind},{key},{},{},{},{},{}\n",
        c.lhs, c.rhs, c.budget, c.slack, c.pass
    ));
}

impl SymmetryReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }

    /// One row per audited inequality.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,key,lhs,rhs,budget,slack,pass\n");
        let key = |e: &[f64]| {
            e.iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for d in &self.directions {
            row(&mut out, "reflection", &key(&d.e), &d.reflection);
            row(&mut out, "weighted", &key(&d.e), &d.weighted);
        }
        for l in &self.slices.lambdas {
            row(&mut out, "lambda", &key(&l.e), &l.bound);
        }
        for h in &self.slices.heights {
            row(&mut out, "pinch", &h.h.to_string(), &h.pinch);
            if let Some(c) = &h.small_slice {
                row(&mut out, "small_slice", &h.h.to_string(), c);
            }
        }
        if let Some(g) = &self.gradient {
            let c = Check::new(g.sup_scaled, super::GRADIENT_HEADROOM * g.wedge_c, g.budget);
            row(&mut out, "gradient", "sup", &c);
        }
        out
    }
}
