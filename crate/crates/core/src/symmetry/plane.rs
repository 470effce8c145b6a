//! Moving planes: the critical position `lambda_e`, tangency cases and
//! reflection asymmetry measures.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lines::{abs_moment, intersect, line_contains_reflection, reflect, LineFamily};
use crate::error::{Error, Result};
use crate::geom::{csum, Vec3};
use crate::shapes::SetModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum TangencyCase {
    InteriorOffPlane,
    InteriorOnPlane,
    ContactOffPlane,
    ContactOnPlane,
    Undetermined,
}

impl TangencyCase {
    pub fn label(&self) -> &'static str {
        match self {
            TangencyCase::InteriorOffPlane => "interiorOffPlane",
            TangencyCase::InteriorOnPlane => "interiorOnPlane",
            TangencyCase::ContactOffPlane => "contactOffPlane",
            TangencyCase::ContactOnPlane => "contactOnPlane",
            TangencyCase::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaneOptions {
    /// Bisection tolerance relative to the diameter.
    pub bisection_tol_rel: f64,
    /// Transverse probe lines per diameter.
    pub probe_resolution: usize,
    /// Tangency thresholds in units of the probe spacing.
    pub tangency_factor: f64,
    /// Fail when the containment predicate holds again below `lambda_e`.
    pub strict_monotone: bool,
}

impl Default for PlaneOptions {
    fn default() -> Self {
        PlaneOptions {
            bisection_tol_rel: 1e-6,
            probe_resolution: 512,
            tangency_factor: 2.0,
            strict_monotone: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPlane {
    pub direction: Vec3,
    pub lambda: f64,
    pub tangency_case: TangencyCase,
    /// Boundary point of `E` touched by the reflected cap.
    pub witness: Vec3,
    /// Bisection tolerance plus the change in `lambda` between the probe
    /// grid and one twice as coarse.
    pub probe_error: f64,
    pub probe_spacing: f64,
    /// Whether the predicate holds for no `mu` below `lambda`.
    pub monotone: bool,
}

fn predicate(family: &LineFamily, mu: f64, tol: f64) -> bool {
    family
        .lines
        .par_iter()
        .all(|l| line_contains_reflection(&l.chords, mu, tol))
}

/// First `mu` (coming from `+infinity`) where the containment fails, by a
/// coarse scan followed by bisection. Also reports whether the predicate
/// holds again further down.
fn stopping_position(family: &LineFamily, lo: f64, hi: f64, tol: f64) -> Result<(f64, bool)> {
    let eps = 1e-12 * (hi - lo);
    const SCAN: usize = 64;
    let mus: Vec<f64> = (0..=SCAN)
        .map(|k| hi - (hi - lo) * k as f64 / SCAN as f64)
        .collect();
    let pass: Vec<bool> = mus.iter().map(|&m| predicate(family, m, eps)).collect();
    if !pass[0] {
        return Err(Error::DegenerateDirection([
            family.e.x, family.e.y, family.e.z,
        ]));
    }
    let Some(k) = pass.iter().position(|p| !p) else {
        return Err(Error::DegenerateDirection([
            family.e.x, family.e.y, family.e.z,
        ]));
    };
    let monotone = pass[k..].iter().all(|p| !p);
    let (mut fail, mut ok) = (mus[k], mus[k - 1]);
    while ok - fail > tol {
        let mid = 0.5 * (ok + fail);
        if predicate(family, mid, eps) {
            ok = mid;
        } else {
            fail = mid;
        }
    }
    Ok((ok, monotone))
}

/// The critical position `lambda_e` along `e`, read as the first
/// stopping position of the plane coming from `+infinity`.
pub fn critical_plane(model: &SetModel, e: &Vec3, opts: &PlaneOptions) -> Result<CriticalPlane> {
    let diam = model.diameter();
    let cell = diam / opts.probe_resolution.max(1) as f64;
    let family = LineFamily::new(model, e, cell)?;
    let e = family.e;
    let center = model.bbox().center().dot(&e);
    let (lo, hi) = (center - diam, center + diam);
    let tol = opts.bisection_tol_rel * diam;
    let (lambda, monotone) = stopping_position(&family, lo, hi, tol)?;
    if opts.strict_monotone && !monotone {
        return Err(Error::NonMonotonePredicate(format!(
            "containment holds again below lambda = {lambda}"
        )));
    }
    let coarse = LineFamily::new(model, &e, 2.0 * cell)?;
    let (lambda_coarse, _) = stopping_position(&coarse, lo, hi, tol)?;

    // the line whose last chord has its midpoint at lambda carries the witness
    let spacing = family.cell;
    let thresh = opts.tangency_factor * spacing;
    let mut candidates: Vec<(f64, Vec3, f64, (usize, usize))> = family
        .lines
        .iter()
        .map(|l| {
            let &(a, b) = l.chords.last().unwrap();
            (0.5 * (a + b), l.origin + a * e, b - a, l.cell)
        })
        .collect();
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0));
    // a maximum on the rim of the family of lines is reached where the
    // plane meets the boundary
    let classify = |(_, p, len, cell): &(f64, Vec3, f64, (usize, usize))| {
        let on_plane = 0.5 * len < thresh || family.on_rim(*cell);
        let contact = p.z < thresh;
        match (contact, on_plane) {
            (false, false) => TangencyCase::InteriorOffPlane,
            (false, true) => TangencyCase::InteriorOnPlane,
            (true, false) => TangencyCase::ContactOffPlane,
            (true, true) => TangencyCase::ContactOnPlane,
        }
    };
    let best = candidates[0];
    let mut case = classify(&best);
    if candidates[..candidates.len().min(64)]
        .iter()
        .take_while(|c| best.0 - c.0 <= tol)
        .any(|c| classify(c) != case)
    {
        case = TangencyCase::Undetermined;
    }
    Ok(CriticalPlane {
        direction: e,
        lambda,
        tangency_case: case,
        witness: best.1,
        probe_error: tol + (lambda - lambda_coarse).abs(),
        probe_spacing: spacing,
        monotone,
    })
}

/// Measure of `E Δ ρ(E)` for the reflection across `{x . e = mu}` and an
/// error estimate from a grid twice as coarse.
pub fn symmetric_difference_volume(
    model: &SetModel,
    e: &Vec3,
    mu: f64,
    resolution: usize,
) -> Result<(f64, f64)> {
    asymmetry(model, e, mu, resolution, |c, r, _| {
        let inter: f64 = intersect(c, r).iter().map(|(a, b)| b - a).sum();
        let own: f64 = c.iter().map(|(a, b)| b - a).sum();
        2.0 * (own - inter)
    })
    .map(|(v, err)| (v.max(0.0), err))
}

/// `int_{E Δ ρ(E)} dist(x, plane)` with an error estimate as above.
pub fn weighted_asymmetry(
    model: &SetModel,
    e: &Vec3,
    mu: f64,
    resolution: usize,
) -> Result<(f64, f64)> {
    asymmetry(model, e, mu, resolution, |c, r, mu| {
        let inter: f64 = intersect(c, r)
            .iter()
            .map(|&(a, b)| abs_moment(a, b, mu))
            .sum();
        let own: f64 = c.iter().map(|&(a, b)| abs_moment(a, b, mu)).sum();
        2.0 * (own - inter)
    })
    .map(|(v, err)| (v.max(0.0), err))
}

fn asymmetry<F>(
    model: &SetModel,
    e: &Vec3,
    mu: f64,
    resolution: usize,
    per_line: F,
) -> Result<(f64, f64)>
where
    F: Fn(&[(f64, f64)], &[(f64, f64)], f64) -> f64 + Sync,
{
    if resolution == 0 {
        return Err(Error::InvalidConfig("resolution must be positive".into()));
    }
    let cell = model.diameter() / resolution as f64;
    let total = |cell: f64| -> Result<f64> {
        let family = LineFamily::new(model, e, cell)?;
        let parts: Vec<f64> = family
            .lines
            .par_iter()
            .map(|l| l.weight * per_line(&l.chords, &reflect(&l.chords, mu), mu))
            .collect();
        Ok(csum(parts))
    };
    let fine = total(cell)?;
    let coarse = total(2.0 * cell)?;
    Ok((fine, (fine - coarse).abs()))
}
