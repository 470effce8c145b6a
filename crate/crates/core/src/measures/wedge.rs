//! Wedge constants `c(n, s, sigma) = q_n^s H_J^s(q)`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{pv_curvature_integral, QuadratureConfig, Wedge};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeConstant {
    pub n: usize,
    pub s: f64,
    pub sigma: f64,
    pub c: f64,
    pub error_estimate: f64,
}

/// Curvature of the wedge with contact cosine `sigma`, at the point of its
/// tilted face at height 1 (so no rescaling is needed).
pub fn wedge_constant(
    n: usize,
    s: f64,
    sigma: f64,
    cfg: &QuadratureConfig,
) -> Result<WedgeConstant> {
    if !(sigma > -1.0 && sigma < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "contact cosine {sigma} outside (-1, 1)"
        )));
    }
    if !(n == 2 || n == 3) {
        return Err(Error::InvalidConfig(format!("dimension {n}")));
    }
    let w = Wedge::new(n, sigma);
    let r = pv_curvature_integral(&w, &w.face_point(1.0), s, cfg)?;
    Ok(WedgeConstant {
        n,
        s,
        sigma,
        c: r.value,
        error_estimate: r.error_estimate,
    })
}

/// `q_n^s H_J^s(q)` at an arbitrary height of the tilted face.
pub fn wedge_scaled_curvature(
    n: usize,
    s: f64,
    sigma: f64,
    height: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let w = Wedge::new(n, sigma);
    let r = pv_curvature_integral(&w, &w.face_point(height), s, cfg)?;
    let f = height.powf(s);
    Ok((f * r.value, f * r.error_estimate))
}

fn rounded_sigma(sigma: f64) -> f64 {
    (sigma * 1e4).round() / 1e4
}

/// Table of wedge constants keyed by `(n, s, sigma rounded to 1e-4)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WedgeCache {
    entries: BTreeMap<String, WedgeConstant>,
}

impl WedgeCache {
    fn key(n: usize, s: f64, sigma: f64) -> String {
        format!("n={n};s={s};sigma={:.4}", rounded_sigma(sigma))
    }

    /// Loads the table, or an empty one if the file does not exist.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Ok(Self::default());
        }
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn get(&self, n: usize, s: f64, sigma: f64) -> Option<&WedgeConstant> {
        self.entries.get(&Self::key(n, s, sigma))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Cached value, computing it at the rounded `sigma` on a miss.
    pub fn get_or_compute(
        &mut self,
        n: usize,
        s: f64,
        sigma: f64,
        cfg: &QuadratureConfig,
    ) -> Result<WedgeConstant> {
        let key = Self::key(n, s, sigma);
        if let Some(c) = self.entries.get(&key) {
            return Ok(*c);
        }
        let c = wedge_constant(n, s, rounded_sigma(sigma), cfg)?;
        self.entries.insert(key, c);
        Ok(c)
    }
}
