use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::stiffness::Stiffness;
use crate::error::{Error, Result};

const GPA: f64 = 1e9;

/// Elastic material: Voigt stiffness in GPa, density in kg·m⁻³ and a qL
/// attenuation table in dB·mm⁻¹ keyed by frequency in MHz.
#[derive(Debug, Clone, PartialEq)]
pub struct ElasticMaterial {
    pub name: String,
    pub stiffness: Stiffness,
    pub density: f64,
    attenuation: Vec<(f64, f64)>,
    /// Power-law exponent used when a frequency is not tabulated.
    pub attenuation_exponent: f64,
}

impl ElasticMaterial {
    pub fn new(name: impl Into<String>, stiffness: Stiffness, density: f64) -> Result<Self> {
        let m = ElasticMaterial {
            name: name.into(),
            stiffness,
            density,
            attenuation: Vec::new(),
            attenuation_exponent: 0.0,
        };
        m.validate()?;
        Ok(m)
    }

    /// Isotropic material from longitudinal and shear velocities (m/s).
    pub fn isotropic(name: impl Into<String>, v_l: f64, v_s: f64, density: f64) -> Result<Self> {
        let c11 = density * v_l * v_l / GPA;
        let c44 = density * v_s * v_s / GPA;
        Self::new(name, Stiffness::isotropic(c11, c44), density)
    }

    /// Table-1 alloy 182 constants, with the welded-zone attenuation at 2 MHz.
    pub fn alloy_182() -> Self {
        let c = Stiffness::orthotropic(&[236.1, 255.8, 255.8, 130.5, 137.9, 135.4, 81.4, 111.4, 111.9]);
        Self::new("alloy 182", c, 8260.0)
            .expect("alloy 182 constants are valid")
            .with_attenuation(2.0, 0.292)
            .expect("non-negative")
    }

    pub fn with_attenuation(mut self, freq_mhz: f64, db_per_mm: f64) -> Result<Self> {
        if !(db_per_mm >= 0.0 && db_per_mm.is_finite()) || !(freq_mhz > 0.0) {
            return Err(Error::InvalidMaterial {
                name: self.name.clone(),
                reason: format!("attenuation {db_per_mm} dB/mm at {freq_mhz} MHz"),
            });
        }
        self.attenuation.retain(|&(f, _)| f != freq_mhz);
        self.attenuation.push((freq_mhz, db_per_mm));
        self.attenuation.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(self)
    }

    /// Replaces the whole attenuation table.
    pub fn with_attenuation_table(mut self, table: &[(f64, f64)]) -> Result<Self> {
        self.attenuation.clear();
        for &(f, a) in table {
            self = self.with_attenuation(f, a)?;
        }
        Ok(self)
    }

    pub fn attenuation_table(&self) -> &[(f64, f64)] {
        &self.attenuation
    }

    /// qL attenuation (dB/mm) at `freq_mhz`: the tabulated value at the nearest
    /// tabulated frequency, scaled by (f / f_ref)^exponent.
    pub fn attenuation_db_per_mm(&self, freq_mhz: f64) -> f64 {
        let nearest = self
            .attenuation
            .iter()
            .min_by(|a, b| (a.0 - freq_mhz).abs().total_cmp(&(b.0 - freq_mhz).abs()));
        match nearest {
            None => 0.0,
            Some(&(f_ref, a)) if f_ref == freq_mhz || self.attenuation_exponent == 0.0 => a,
            Some(&(f_ref, a)) => a * (freq_mhz / f_ref).powf(self.attenuation_exponent),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidMaterial {
            name: self.name.clone(),
            reason,
        };
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(bad(format!("density {} must be positive", self.density)));
        }
        if self.stiffness.0.iter().flatten().any(|v| !v.is_finite()) {
            return Err(bad("non-finite stiffness constant".into()));
        }
        if self.stiffness.asymmetry() > 1e-12 {
            return Err(bad("stiffness matrix is not symmetric".into()));
        }
        if !self.stiffness.is_positive_definite() {
            return Err(bad("stiffness matrix is not positive definite".into()));
        }
        Ok(())
    }

    /// Density-normalized stiffness a = C/ρ in (m/s)², rotated by the grain angle.
    pub fn normalized_stiffness(&self, theta: f64) -> Stiffness {
        self.stiffness.rotated(theta).scaled(GPA / self.density)
    }

    pub fn is_isotropic(&self) -> bool {
        let c = &self.stiffness;
        let c11 = c[(0, 0)];
        let c44 = c[(3, 3)];
        let iso = Stiffness::isotropic(c11, c44);
        c.max_diff(&iso) <= 1e-9 * c.max_abs()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: MaterialFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        file.into_material().map_err(|e| match e {
            Error::InvalidParameter { param, reason } => Error::Parse {
                path: path.to_path_buf(),
                message: format!("field `{param}`: {reason}"),
            },
            other => other,
        })
    }
}

/// On-disk JSON form of a material.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialFile {
    pub name: String,
    /// 21 upper-triangle constants or 9 orthotropic constants (C11 C22 C33 C23 C13 C12 C44 C55 C66), GPa.
    pub voigt: Vec<f64>,
    pub density_kg_m3: f64,
    #[serde(default)]
    pub attenuation_db_per_mm: BTreeMap<String, f64>,
    #[serde(default)]
    pub attenuation_frequency_exponent: f64,
}

impl MaterialFile {
    pub fn into_material(self) -> Result<ElasticMaterial> {
        let stiffness = match self.voigt.len() {
            21 => Stiffness::from_upper21(self.voigt.as_slice().try_into().expect("length checked")),
            9 => Stiffness::orthotropic(self.voigt.as_slice().try_into().expect("length checked")),
            n => return Err(Error::param("voigt", format!("expected 21 or 9 constants, got {n}"))),
        };
        let mut table = Vec::new();
        for (k, v) in &self.attenuation_db_per_mm {
            let f: f64 = k
                .parse()
                .map_err(|_| Error::param("attenuation_db_per_mm", format!("key `{k}` is not a frequency in MHz")))?;
            table.push((f, *v));
        }
        let mut m = ElasticMaterial::new(self.name, stiffness, self.density_kg_m3)?.with_attenuation_table(&table)?;
        m.attenuation_exponent = self.attenuation_frequency_exponent;
        Ok(m)
    }
}
