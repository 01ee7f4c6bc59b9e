//! Specimen: ordered planar regions with materials and orientation sources.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::geometry::{Point, Polygon, Segment};
use super::grid::OrientationGrid;
use super::ogilvy::OgilvyParams;
use crate::elastodynamics::{ElasticMaterial, MaterialFile, Stiffness};
use crate::error::{Error, Result};

/// Default central-difference step for stiffness gradients, mm.
pub const DEFAULT_GRADIENT_STEP: f64 = 0.05;

/// (m/s)² → (mm/µs)².
const SI_TO_MM_US2: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Ferritic,
    Stainless,
    Buttering,
    Weld,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OrientationSource {
    /// Fixed grain angle, rad.
    Constant(f64),
    Ogilvy(OgilvyParams),
    Grid(Arc<OrientationGrid>),
}

impl OrientationSource {
    /// Grain angle at (x, z). Analytic sources are evaluated everywhere; grids
    /// are clamped onto their hull.
    pub fn angle(&self, x: f64, z: f64) -> f64 {
        match self {
            OrientationSource::Constant(t) => *t,
            OrientationSource::Ogilvy(p) => p.angle(x, z),
            OrientationSource::Grid(g) => g.angle_clamped(x, z),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, OrientationSource::Constant(_))
    }
}

#[derive(Debug, Clone)]
pub struct Region {
    pub name: String,
    pub kind: RegionKind,
    pub polygon: Polygon,
    pub material: ElasticMaterial,
    pub orientation: OrientationSource,
    /// Unrotated density-normalized stiffness, (mm/µs)².
    normalized: Stiffness,
    isotropic: bool,
}

impl Region {
    pub fn new(name: impl Into<String>, kind: RegionKind, polygon: Polygon, material: ElasticMaterial, orientation: OrientationSource) -> Self {
        let normalized = material.normalized_stiffness(0.0).scaled(SI_TO_MM_US2);
        let isotropic = material.is_isotropic();
        Region {
            name: name.into(),
            kind,
            polygon,
            material,
            orientation,
            normalized,
            isotropic,
        }
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }

    /// Material properties do not vary inside the region.
    pub fn is_homogeneous(&self) -> bool {
        self.isotropic || self.orientation.is_constant()
    }

    /// Grain angle; isotropic regions report 0.
    pub fn theta_at(&self, x: f64, z: f64) -> f64 {
        if self.isotropic {
            0.0
        } else {
            self.orientation.angle(x, z)
        }
    }

    /// Density-normalized stiffness in (mm/µs)² at (x, z), using the region's
    /// own field even slightly outside its polygon.
    pub fn stiffness_at(&self, x: f64, z: f64) -> Stiffness {
        if self.isotropic {
            return self.normalized;
        }
        self.normalized.rotated(self.theta_at(x, z))
    }

    pub fn stiffness_for_angle(&self, theta: f64) -> Stiffness {
        if self.isotropic {
            self.normalized
        } else {
            self.normalized.rotated(theta)
        }
    }

    pub fn attenuation_db_per_mm(&self, freq_mhz: f64) -> f64 {
        self.material.attenuation_db_per_mm(freq_mhz)
    }
}

#[derive(Debug, Clone)]
pub struct OrientationSample<'a> {
    pub region: usize,
    pub kind: RegionKind,
    pub material: &'a ElasticMaterial,
    pub theta: f64,
}

/// Which part of the specimen's outer boundary an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SurfaceKind {
    Inner,
    Outer,
    Side,
}

#[derive(Debug, Clone)]
pub struct Specimen {
    pub name: String,
    pub regions: Vec<Region>,
    /// z of the inner (root-side) surface, mm.
    pub inner_z: f64,
    /// z of the outer (probe-side) surface, mm.
    pub outer_z: f64,
}

impl Specimen {
    pub fn new(name: impl Into<String>, regions: Vec<Region>, inner_z: f64, outer_z: f64) -> Result<Self> {
        let s = Specimen {
            name: name.into(),
            regions,
            inner_z,
            outer_z,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn thickness(&self) -> f64 {
        self.outer_z - self.inner_z
    }

    fn validate(&self) -> Result<()> {
        if self.regions.is_empty() {
            return Err(Error::param("regions", "specimen has no regions"));
        }
        if !(self.outer_z > self.inner_z) {
            return Err(Error::param("outer_z_mm", "outer surface must lie above the inner surface"));
        }
        for (i, r) in self.regions.iter().enumerate() {
            if !r.polygon.is_simple() {
                return Err(Error::param(format!("regions[{i}].polygon"), "polygon is not simple"));
            }
            for (j, o) in self.regions.iter().enumerate().skip(i + 1) {
                if r.polygon.overlaps(&o.polygon) {
                    return Err(Error::param(format!("regions[{i}]"), format!("overlaps regions[{j}] ({})", o.name)));
                }
            }
            if let OrientationSource::Ogilvy(p) = &r.orientation {
                p.validate().map_err(|e| Error::param(format!("regions[{i}].orientation"), e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Lowest-index region containing the point (edges inclusive).
    pub fn region_at(&self, x: f64, z: f64) -> Option<usize> {
        self.regions.iter().position(|r| r.polygon.contains([x, z]))
    }

    pub fn orientation_at(&self, x: f64, z: f64) -> Result<OrientationSample<'_>> {
        let idx = self.region_at(x, z).ok_or_else(|| Error::OutOfDomain {
            what: format!("specimen `{}`", self.name),
            x,
            z,
        })?;
        let r = &self.regions[idx];
        Ok(OrientationSample {
            region: idx,
            kind: r.kind,
            material: &r.material,
            theta: r.theta_at(x, z),
        })
    }

    /// ∂a/∂x and ∂a/∂z of the density-normalized rotated stiffness, (m/s)²/mm,
    /// by central differences of step `h`. Fails when the stencil leaves the
    /// region that owns (x, z).
    pub fn stiffness_gradient(&self, x: f64, z: f64, h: f64) -> Result<[Stiffness; 2]> {
        if !(h > 0.0) {
            return Err(Error::param("h", "finite-difference step must be positive"));
        }
        let idx = self.orientation_at(x, z)?.region;
        let stencil = [[x + h, z], [x - h, z], [x, z + h], [x, z - h]];
        if stencil.iter().any(|p| self.region_at(p[0], p[1]) != Some(idx)) {
            return Err(Error::GradientUnavailable { x, z });
        }
        let r = &self.regions[idx];
        let grad = region_gradient(r, x, z, h);
        Ok(grad.map(|g| g.scaled(1.0 / SI_TO_MM_US2)))
    }

    /// Which outer-boundary surface `edge` belongs to, if any.
    pub fn classify_surface(&self, edge: &Segment) -> SurfaceKind {
        let tol = 1e-9;
        let flat = (edge.a[1] - edge.b[1]).abs() < tol;
        if flat && (edge.a[1] - self.outer_z).abs() < tol {
            SurfaceKind::Outer
        } else if flat && (edge.a[1] - self.inner_z).abs() < tol {
            SurfaceKind::Inner
        } else {
            SurfaceKind::Side
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for r in &self.regions {
            let (l, h) = r.polygon.bounding_box();
            for k in 0..2 {
                lo[k] = lo[k].min(l[k]);
                hi[k] = hi[k].max(h[k]);
            }
        }
        (lo, hi)
    }

    /// Returns a copy whose attenuation tables are all multiplied by `factor`.
    pub fn with_scaled_attenuation(&self, factor: f64) -> Result<Self> {
        let mut s = self.clone();
        for r in &mut s.regions {
            let table: Vec<(f64, f64)> = r.material.attenuation_table().iter().map(|&(f, a)| (f, a * factor)).collect();
            r.material = r.material.clone().with_attenuation_table(&table)?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: SpecimenFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        file.build(base).map_err(|e| match e {
            Error::InvalidParameter { param, reason } => Error::Parse {
                path: path.to_path_buf(),
                message: format!("field `{param}`: {reason}"),
            },
            other => other,
        })
    }
}

/// Central differences of a region's normalized stiffness in (mm/µs)²/mm,
/// evaluated on the region's own (extended) field.
pub(crate) fn region_gradient(r: &Region, x: f64, z: f64, h: f64) -> [Stiffness; 2] {
    if r.is_homogeneous() {
        return [Stiffness::ZERO; 2];
    }
    let diff = |p: Stiffness, m: Stiffness| {
        let mut out = Stiffness::ZERO;
        for i in 0..6 {
            for j in 0..6 {
                out.0[i][j] = (p.0[i][j] - m.0[i][j]) / (2.0 * h);
            }
        }
        out
    };
    [
        diff(r.stiffness_at(x + h, z), r.stiffness_at(x - h, z)),
        diff(r.stiffness_at(x, z + h), r.stiffness_at(x, z - h)),
    ]
}

/// Orientation source as written in a specimen file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrientationSpec {
    Constant {
        /// degrees
        constant: f64,
    },
    Ogilvy {
        ogilvy: OgilvyParams,
    },
    Grid {
        grid: PathBuf,
        #[serde(default)]
        smooth_mm: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFile {
    pub name: String,
    pub kind: RegionKind,
    pub polygon: Vec<[f64; 2]>,
    /// Material file, relative to the specimen file.
    pub material: PathBuf,
    pub orientation: OrientationSpec,
    /// Overrides the material's attenuation table for this region.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attenuation_db_per_mm: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecimenFile {
    pub name: String,
    pub inner_z_mm: f64,
    pub outer_z_mm: f64,
    pub regions: Vec<RegionFile>,
}

impl SpecimenFile {
    pub fn build(&self, base: &Path) -> Result<Specimen> {
        let mut materials: BTreeMap<PathBuf, ElasticMaterial> = BTreeMap::new();
        let mut grids: BTreeMap<(PathBuf, u64), Arc<OrientationGrid>> = BTreeMap::new();
        let mut regions = Vec::new();
        for (i, rf) in self.regions.iter().enumerate() {
            let mpath = base.join(&rf.material);
            let mut material = match materials.get(&mpath) {
                Some(m) => m.clone(),
                None => {
                    let m = ElasticMaterial::load(&mpath)?;
                    materials.insert(mpath.clone(), m.clone());
                    m
                }
            };
            if let Some(table) = &rf.attenuation_db_per_mm {
                let parsed = MaterialFile {
                    name: material.name.clone(),
                    voigt: material.stiffness.upper21().to_vec(),
                    density_kg_m3: material.density,
                    attenuation_db_per_mm: table.clone(),
                    attenuation_frequency_exponent: material.attenuation_exponent,
                }
                .into_material()
                .map_err(|e| Error::param(format!("regions[{i}].attenuation_db_per_mm"), e.to_string()))?;
                material = parsed;
            }
            let orientation = match &rf.orientation {
                OrientationSpec::Constant { constant } => OrientationSource::Constant(constant.to_radians()),
                OrientationSpec::Ogilvy { ogilvy } => OrientationSource::Ogilvy(*ogilvy),
                OrientationSpec::Grid { grid, smooth_mm } => {
                    let gpath = base.join(grid);
                    let key = (gpath.clone(), smooth_mm.to_bits());
                    match grids.get(&key) {
                        Some(g) => OrientationSource::Grid(g.clone()),
                        None => {
                            let g = Arc::new(OrientationGrid::load_csv(&gpath)?.smoothed(*smooth_mm)?);
                            grids.insert(key, g.clone());
                            OrientationSource::Grid(g)
                        }
                    }
                }
            };
            regions.push(Region::new(&rf.name, rf.kind, Polygon::new(rf.polygon.clone()), material, orientation));
        }
        Specimen::new(&self.name, regions, self.inner_z_mm, self.outer_z_mm)
    }
}

pub fn orientation_at(specimen: &Specimen, x: f64, z: f64) -> Result<OrientationSample<'_>> {
    specimen.orientation_at(x, z)
}

pub fn stiffness_gradient(specimen: &Specimen, x: f64, z: f64, h: f64) -> Result<[Stiffness; 2]> {
    specimen.stiffness_gradient(x, z, h)
}
