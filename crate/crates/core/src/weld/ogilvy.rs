//! Closed-form grain-orientation law for V-butt welds.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the analytical orientation law. `d` and `alpha_deg` describe
/// the chamfer geometry, `t` and `eta` the evolution of the grain angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OgilvyParams {
    /// Half-width of the weld root, mm.
    #[serde(rename = "D")]
    pub d: f64,
    /// Chamfer angle, degrees.
    pub alpha_deg: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub eta: f64,
}

impl OgilvyParams {
    /// D = 4.25 mm, α = 17.8°, T = 0.75, η = 1.
    pub const REFERENCE: OgilvyParams = OgilvyParams {
        d: 4.25,
        alpha_deg: 17.8,
        t: 0.75,
        eta: 1.0,
    };

    pub fn new(d: f64, alpha_deg: f64, t: f64, eta: f64) -> Result<Self> {
        let p = OgilvyParams { d, alpha_deg, t, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) {
            return Err(Error::param("D", format!("{} must be > 0", self.d)));
        }
        if !(self.alpha_deg > 0.0 && self.alpha_deg < 90.0) {
            return Err(Error::param("alpha_deg", format!("{} must lie in (0, 90)", self.alpha_deg)));
        }
        if !(self.t > 0.0) {
            return Err(Error::param("T", format!("{} must be > 0", self.t)));
        }
        if !(self.eta > 0.0) {
            return Err(Error::param("eta", format!("{} must be > 0", self.eta)));
        }
        Ok(())
    }

    /// Weld half-width at height `z` above the root.
    pub fn half_width(&self, z: f64) -> f64 {
        self.d + z * self.alpha_deg.to_radians().tan()
    }

    /// Grain angle θ (rad) at (x, z), measured from +x.
    pub fn angle(&self, x: f64, z: f64) -> f64 {
        let num = self.t * self.half_width(z);
        if x > 0.0 {
            (num / x.powf(self.eta)).atan()
        } else if x < 0.0 {
            -(num / (-x).powf(self.eta)).atan()
        } else {
            -FRAC_PI_2
        }
    }
}

pub fn ogilvy_angle(params: &OgilvyParams, x: f64, z: f64) -> f64 {
    params.angle(x, z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centerline_is_vertical() {
        let p = OgilvyParams::REFERENCE;
        for z in [0.0, 3.0, 17.5, 30.0] {
            assert_eq!(p.angle(0.0, z), -FRAC_PI_2);
        }
    }

    #[test]
    fn spot_value() {
        let expected = (0.75 * (4.25 + 10.0 * 17.8_f64.to_radians().tan()) / 5.0).atan();
        let got = OgilvyParams::REFERENCE.angle(5.0, 10.0);
        assert_eq!(got, expected);
        assert!((got - 0.841).abs() < 1e-3);
        assert!((got.to_degrees() - 48.2).abs() < 0.05);
    }

    #[test]
    fn antisymmetric_and_decreasing() {
        let p = OgilvyParams::REFERENCE;
        let mut prev = f64::INFINITY;
        for i in 1..200 {
            let x = i as f64 * 0.25;
            assert_eq!(p.angle(-x, 7.0), -p.angle(x, 7.0));
            let a = p.angle(x, 7.0);
            assert!(a < prev && a > 0.0);
            prev = a;
        }
        assert!(p.angle(1e9, 7.0) < 1e-8);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(OgilvyParams::new(0.0, 17.8, 0.75, 1.0).is_err());
        assert!(OgilvyParams::new(4.25, 90.0, 0.75, 1.0).is_err());
        assert!(OgilvyParams::new(4.25, 17.8, -1.0, 1.0).is_err());
        assert!(OgilvyParams::new(4.25, 17.8, 0.75, 0.0).is_err());
    }
}
