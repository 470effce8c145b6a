use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::measures::NormalSpeed;
use crate::quadrature::QuadratureConfig;
use crate::shapes::{build_shape, SetModel, ShapeDocument, ShapeSpec};
use crate::verify::AuditOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ladder {
    /// Largest height of the dyadic ladder `h0 2^{-k}`.
    pub h0: f64,
    pub count: usize,
}

impl Default for Ladder {
    fn default() -> Self {
        Ladder { h0: 1e-3, count: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedConfig {
    Zero,
    Constant { value: f64 },
    Translation { vector: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationConfig {
    pub speed: SpeedConfig,
    pub step: f64,
    /// Largest accepted relative mismatch.
    pub tolerance: f64,
}

impl Default for VariationConfig {
    fn default() -> Self {
        VariationConfig {
            speed: SpeedConfig::Constant { value: 1.0 },
            step: 0.05,
            tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupTolerances {
    pub slope: f64,
    pub prefactor: f64,
}

impl Default for BlowupTolerances {
    fn default() -> Self {
        BlowupTolerances {
            slope: 0.05,
            prefactor: 0.1,
        }
    }
}

/// Everything a command reads from its configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub shape: Option<ShapeSpec>,
    pub allow_disconnected: bool,
    pub s: f64,
    pub quadrature: QuadratureConfig,
    /// Boundary sampling resolution (`diam / spacing`).
    pub resolution: usize,
    /// Horizontal directions, given by their first `n - 1` components.
    pub directions: Option<Vec<Vec<f64>>>,
    pub heights: Option<Vec<f64>>,
    pub ladder: Ladder,
    pub gamma: f64,
    pub sigma: Option<f64>,
    pub audit: AuditOptions,
    pub variation: VariationConfig,
    pub blowup: BlowupTolerances,
    pub output_path: Option<String>,
    pub format: Option<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 2,
            shape: None,
            allow_disconnected: false,
            s: 0.5,
            quadrature: QuadratureConfig::default(),
            resolution: 48,
            directions: None,
            heights: None,
            ladder: Ladder::default(),
            gamma: 0.0,
            sigma: None,
            audit: AuditOptions::default(),
            variation: VariationConfig::default(),
            blowup: BlowupTolerances::default(),
            output_path: None,
            format: None,
        }
    }
}

fn horizontal_vector(n: usize, v: &[f64], what: &str) -> Result<Vec3> {
    let bad = || {
        Error::InvalidConfig(format!(
            "{what} {v:?} is not a horizontal vector in dimension {n}"
        ))
    };
    let h = match v.len() {
        l if l == n - 1 => v,
        l if l == n && v[n - 1] == 0.0 => &v[..n - 1],
        _ => return Err(bad()),
    };
    Ok(if n == 2 {
        Vec3::new(h[0], 0.0, 0.0)
    } else {
        Vec3::new(h[0], h[1], 0.0)
    })
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n == 2 || self.n == 3) {
            return Err(Error::InvalidConfig(format!(
                "dimension {} not supported",
                self.n
            )));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "order s = {} outside (0, 1)",
                self.s
            )));
        }
        if self.resolution == 0 {
            return Err(Error::InvalidConfig("resolution must be positive".into()));
        }
        if !(self.gamma > -1.0 && self.gamma < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma = {} outside (-1, 1)",
                self.gamma
            )));
        }
        if !(self.ladder.h0 > 0.0) || self.ladder.count < 2 {
            return Err(Error::InvalidConfig(
                "ladder needs h0 > 0 and at least two heights".into(),
            ));
        }
        self.quadrature.validate()?;
        self.directions()?;
        self.speed()?;
        Ok(())
    }

    /// Builds the shape; a config error when it is missing or invalid.
    pub fn model(&self) -> Result<SetModel> {
        let shape = self
            .shape
            .clone()
            .ok_or_else(|| Error::InvalidConfig("this command needs a `shape`".into()))?;
        build_shape(&ShapeDocument {
            n: self.n,
            shape,
            allow_disconnected: self.allow_disconnected,
        })
    }

    pub fn directions(&self) -> Result<Option<Vec<Vec3>>> {
        self.directions
            .as_ref()
            .map(|ds| {
                ds.iter()
                    .map(|d| {
                        let v = horizontal_vector(self.n, d, "direction")?;
                        let norm = v.norm();
                        if !(norm > 0.0) || !norm.is_finite() {
                            return Err(Error::InvalidConfig(format!(
                                "direction {d:?} has no length"
                            )));
                        }
                        Ok(v / norm)
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn speed(&self) -> Result<NormalSpeed> {
        Ok(match &self.variation.speed {
            SpeedConfig::Zero => NormalSpeed::Zero,
            SpeedConfig::Constant { value } => NormalSpeed::Constant(*value),
            SpeedConfig::Translation { vector } => {
                if vector.len() != self.n {
                    return Err(Error::InvalidConfig(format!(
                        "translation needs {} components",
                        self.n
                    )));
                }
                let mut v = Vec3::zeros();
                v.x = vector[0];
                if self.n == 3 {
                    v.y = vector[1];
                }
                v.z = vector[self.n - 1];
                NormalSpeed::Translation(v)
            }
        })
    }
}
