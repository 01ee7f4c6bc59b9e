//! JSON run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inspection::{Defect, FanConfig, ProbeConfig, ScanConfig, Side};
use crate::ray::Scheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    Trace,
    OrientationMap,
    Bscan,
    TiltSweep,
    Validate,
}

impl std::str::FromStr for Study {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown study `{s}` (trace, orientation-map, bscan, tilt-sweep, validate)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceStudy {
    /// Source points (x, z), mm.
    pub sources: Vec<[f64; 2]>,
    pub gamma_start_deg: f64,
    pub gamma_stop_deg: f64,
    pub ray_count: usize,
    pub frequency_mhz: f64,
    pub scheme: Scheme,
    pub dt_us: f64,
    pub max_time_us: f64,
    pub max_events: usize,
    pub stop_at_outer_surface: bool,
    pub positive_paraxial_sign: bool,
}

impl Default for TraceStudy {
    fn default() -> Self {
        TraceStudy {
            sources: vec![[30.0, 30.0]],
            gamma_start_deg: 100.0,
            gamma_stop_deg: 160.0,
            ray_count: 31,
            frequency_mhz: 2.0,
            scheme: Scheme::Rk4,
            dt_us: 0.01,
            max_time_us: 20.0,
            max_events: 20,
            stop_at_outer_surface: false,
            positive_paraxial_sign: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MapStudy {
    pub x_min_mm: f64,
    pub x_max_mm: f64,
    pub z_min_mm: f64,
    pub z_max_mm: f64,
    pub step_mm: f64,
}

impl Default for MapStudy {
    fn default() -> Self {
        MapStudy { x_min_mm: -20.0, x_max_mm: 20.0, z_min_mm: 0.0, z_max_mm: 30.0, step_mm: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanStudy {
    pub sides: Vec<Side>,
    pub frequencies_mhz: Vec<f64>,
    pub positions: ScanConfig,
    pub write_pgm: bool,
}

impl Default for ScanStudy {
    fn default() -> Self {
        ScanStudy {
            sides: vec![Side::Stainless, Side::Ferritic],
            frequencies_mhz: vec![1.0, 2.0],
            positions: ScanConfig::default(),
            write_pgm: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TiltStudy {
    pub tilts_deg: Vec<f64>,
    pub side: Side,
    pub frequency_mhz: f64,
}

impl Default for TiltStudy {
    fn default() -> Self {
        TiltStudy { tilts_deg: vec![0.0, 5.0, 10.0, 15.0, 20.0], side: Side::Stainless, frequency_mhz: 2.0 }
    }
}

/// Reciprocal-fan settings used for beam computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FanSettings {
    pub step_deg: f64,
    pub capture_radius_mm: f64,
    pub scheme: Scheme,
    pub dt_us: f64,
}

impl Default for FanSettings {
    fn default() -> Self {
        let f = FanConfig::default();
        FanSettings { step_deg: f.step_deg, capture_radius_mm: f.capture_radius_mm, scheme: f.scheme, dt_us: f.dt_us }
    }
}

impl FanSettings {
    pub fn to_fan_config(&self) -> FanConfig {
        FanConfig {
            step_deg: self.step_deg,
            capture_radius_mm: self.capture_radius_mm,
            scheme: self.scheme,
            dt_us: self.dt_us,
            ..FanConfig::default()
        }
    }
}

fn default_true() -> bool {
    true
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub study: Study,
    /// Specimen file, relative to the config file.
    pub specimen: PathBuf,
    /// Extra material files checked before running.
    #[serde(default)]
    pub materials: Vec<PathBuf>,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defect: Option<Defect>,
    #[serde(default)]
    pub trace: TraceStudy,
    #[serde(default)]
    pub orientation_map: MapStudy,
    #[serde(default)]
    pub scan: ScanStudy,
    #[serde(default)]
    pub tilt: TiltStudy,
    #[serde(default)]
    pub fan: FanSettings,
    /// Results never depend on scheduling; kept for the record.
    #[serde(default = "default_true")]
    pub deterministic: bool,
    /// Output directory, relative to the config file.
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {} column {}: {e}", e.line(), e.column()),
        })?;
        cfg.validate().map_err(|e| match e {
            Error::InvalidParameter { param, reason } => Error::Parse {
                path: path.to_path_buf(),
                message: format!("field `{param}`: {reason}"),
            },
            other => other,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Range checks that do not need the referenced files.
    pub fn validate(&self) -> Result<()> {
        self.probe.validate().map_err(|e| prefix("probe", e))?;
        let t = &self.trace;
        if t.ray_count == 0 || t.sources.is_empty() {
            return Err(Error::param("trace.ray_count", "need at least one source and one ray"));
        }
        if !(t.dt_us > 0.0 && t.max_time_us > 0.0 && t.frequency_mhz > 0.0) {
            return Err(Error::param("trace", "dt_us, max_time_us and frequency_mhz must be positive"));
        }
        let m = &self.orientation_map;
        if !(m.step_mm > 0.0 && m.x_max_mm >= m.x_min_mm && m.z_max_mm >= m.z_min_mm) {
            return Err(Error::param("orientation_map", "need a positive step and ordered bounds"));
        }
        self.scan.positions.validate().map_err(|e| prefix("scan.positions", e))?;
        if self.scan.frequencies_mhz.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::param("scan.frequencies_mhz", "frequencies must be positive"));
        }
        if self.tilt.tilts_deg.iter().any(|t| !(t.abs() <= 45.0)) {
            return Err(Error::param("tilt.tilts_deg", "tilts must lie within ±45°"));
        }
        if !(self.tilt.frequency_mhz > 0.0) {
            return Err(Error::param("tilt.frequency_mhz", "must be positive"));
        }
        if !(self.fan.step_deg > 0.0 && self.fan.dt_us > 0.0 && self.fan.capture_radius_mm >= 0.0) {
            return Err(Error::param("fan", "step and dt must be positive"));
        }
        if matches!(self.study, Study::TiltSweep) && self.defect.is_none() {
            return Err(Error::param("defect", "the tilt-sweep study needs a defect template"));
        }
        Ok(())
    }
}

fn prefix(section: &str, e: Error) -> Error {
    match e {
        Error::InvalidParameter { param, reason } => Error::param(format!("{section}.{param}"), reason),
        other => other,
    }
}
