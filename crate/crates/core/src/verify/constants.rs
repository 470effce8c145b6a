use serde::Serialize;

use crate::error::{Error, Result};

/// Constants of the almost-symmetry estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Constants {
    pub n: usize,
    pub s: f64,
    /// `3 sqrt(5 / (2(n+s)))`, from the Chebyshev step.
    pub c1: f64,
    /// `4 (n+1) C1`.
    pub c2: f64,
    /// `(1/3) min{1/2, 1/(n-1)} sqrt(2(n+s)/5) |E| / diam^n`.
    pub delta0: f64,
}

impl Constants {
    pub fn new(n: usize, s: f64, volume: f64, diameter: f64) -> Result<Self> {
        if n < 2 || !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "need n >= 2 and s in (0, 1), got n = {n}, s = {s}"
            )));
        }
        if !(volume > 0.0 && diameter > 0.0) {
            return Err(Error::InvalidConfig(
                "volume and diameter must be positive".into(),
            ));
        }
        let ns = n as f64 + s;
        let c1 = 3.0 * (5.0 / (2.0 * ns)).sqrt();
        let c2 = 4.0 * (n as f64 + 1.0) * c1;
        let delta0 = (0.5f64).min(1.0 / (n as f64 - 1.0)) / 3.0 * (2.0 * ns / 5.0).sqrt() * volume
            / diameter.powi(n as i32);
        Ok(Constants {
            n,
            s,
            c1,
            c2,
            delta0,
        })
    }

    /// `(5 / (2(n+s)))`, the factor of the weighted asymmetry bound.
    pub fn weighted_factor(&self) -> f64 {
        5.0 / (2.0 * (self.n as f64 + self.s))
    }
}
