//! Root defects and their corner and tip echoes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::beam::{beam_from_fan, contact_velocity, Beam, Contribution, FanConfig, PointFan};
use super::probe::{delay_law, ProbeConfig};
use crate::error::{Error, Result};
use crate::ray::hamiltonian::ql_branch;
use crate::ray::V2;
use crate::weld::{Segment, Specimen};

/// Linear amplitude factor of a tip diffraction relative to a specular
/// reflector (−20 dB).
pub const TIP_PENALTY: f64 = 0.1;
/// Lower clamp of the corner reflectivity.
pub const MIN_CORNER_REFLECTIVITY: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defect {
    /// x of the foot on the inner surface, mm.
    pub foot_x_mm: f64,
    pub height_mm: f64,
    /// Tilt from vertical, degrees; positive leans the top towards +x.
    #[serde(default)]
    pub tilt_deg: f64,
    /// Optional polyline from the foot to the top, overriding height and tilt.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facets: Option<Vec<[f64; 2]>>,
}

impl Defect {
    pub fn notch(foot_x_mm: f64, height_mm: f64, tilt_deg: f64) -> Self {
        Defect { foot_x_mm, height_mm, tilt_deg, facets: None }
    }

    pub fn with_tilt(&self, tilt_deg: f64) -> Self {
        Defect { tilt_deg, facets: None, ..self.clone() }
    }

    pub fn validate(&self, specimen: &Specimen) -> Result<()> {
        if !(self.height_mm > 0.0) {
            return Err(Error::param("defect.height_mm", "must be positive"));
        }
        if !(self.tilt_deg.abs() < 90.0) {
            return Err(Error::param("defect.tilt_deg", "must be within ±90°"));
        }
        let foot = self.foot(specimen);
        if specimen.region_at(foot[0], foot[1]).is_none() {
            return Err(Error::OutOfDomain { what: "defect foot".into(), x: foot[0], z: foot[1] });
        }
        if let Some(f) = &self.facets {
            if f.len() < 2 || f[0] != foot {
                return Err(Error::param("defect.facets", "polyline must start at the foot and have a facet"));
            }
            if f.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::param("defect.facets", "zero-length facet"));
            }
        }
        let top = self.top(specimen);
        if specimen.region_at(top[0], top[1]).is_none() {
            return Err(Error::OutOfDomain { what: "defect top".into(), x: top[0], z: top[1] });
        }
        Ok(())
    }

    pub fn foot(&self, specimen: &Specimen) -> V2 {
        [self.foot_x_mm, specimen.inner_z]
    }

    pub fn polyline(&self, specimen: &Specimen) -> Vec<V2> {
        match &self.facets {
            Some(f) => f.clone(),
            None => {
                let t = self.tilt_deg.to_radians();
                let foot = self.foot(specimen);
                vec![foot, [foot[0] + self.height_mm * t.sin(), foot[1] + self.height_mm * t.cos()]]
            }
        }
    }

    pub fn top(&self, specimen: &Specimen) -> V2 {
        *self.polyline(specimen).last().expect("non-empty")
    }

    pub fn segments(&self, specimen: &Specimen) -> Vec<Segment> {
        self.polyline(specimen).windows(2).map(|w| Segment::new(w[0], w[1])).collect()
    }

    /// Tilt and length of the facet that forms the corner.
    pub fn corner_facet(&self, specimen: &Specimen) -> (f64, f64) {
        let p = self.polyline(specimen);
        let d = [p[1][0] - p[0][0], p[1][1] - p[0][1]];
        (d[0].atan2(d[1]), d[0].hypot(d[1]))
    }
}

/// Corner reflectivity cos²(tilt), clamped.
pub fn corner_reflectivity(tilt_rad: f64) -> f64 {
    tilt_rad.cos().powi(2).clamp(MIN_CORNER_REFLECTIVITY, 1.0)
}

/// qL wavelength (mm) for vertical propagation at `point`.
pub fn local_wavelength(specimen: &Specimen, point: V2, frequency_mhz: f64) -> Result<f64> {
    let r = specimen.region_at(point[0], point[1]).ok_or_else(|| Error::OutOfDomain {
        what: "wavelength point".into(),
        x: point[0],
        z: point[1],
    })?;
    let a = specimen.regions[r].stiffness_at(point[0], point[1]);
    Ok(ql_branch(&a, [0.0, 1.0]).0.sqrt() / frequency_mhz)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EchoKind {
    Corner,
    Tip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Echo {
    pub kind: EchoKind,
    /// Linear, uncalibrated.
    pub amplitude: f64,
    /// Round-trip time, µs.
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TipEcho {
    Present(Echo),
    BelowResolution { wavelength_mm: f64 },
    NoBeam,
}

fn reflect(v: V2, n: V2) -> V2 {
    let d = v[0] * n[0] + v[1] * n[1];
    [v[0] - 2.0 * d * n[0], v[1] - 2.0 * d * n[1]]
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Main lobe of sinc, zero beyond the first null so the weight falls
/// monotonically with the miss angle.
fn main_lobe(x: f64) -> f64 {
    if x.abs() >= std::f64::consts::PI {
        0.0
    } else {
        sinc(x)
    }
}

/// Specular return direction of the dihedral (inner surface then a face
/// tilted by `tilt`) for a wave travelling along `incident`.
pub fn corner_return(incident: V2, tilt: f64) -> V2 {
    let once = reflect(incident, [0.0, 1.0]);
    reflect(once, [tilt.cos(), -tilt.sin()])
}

/// Receive-side loss of a tilted corner: each element ray is weighted by the
/// far-field lobe |sinc(π h sin Δ / λ)| of a facet of length h, Δ being the
/// angle between the ray's departure from the corner and the specular
/// return. Normalized by the untilted value and averaged (geometric mean)
/// over both senses of the tilt, so the loss depends on |tilt| only.
pub fn facet_factor(beam: &Beam, tilt: f64, facet_mm: f64, wavelength_mm: f64, frequency_mhz: f64) -> f64 {
    if beam.is_null() {
        return 0.0;
    }
    let (mut mx, mut mz) = (0.0, 0.0);
    for c in &beam.contributions {
        let w = c.amplitude().powi(2);
        mx += w * c.arrival.depart[0];
        mz += w * c.arrival.depart[1];
    }
    let n = mx.hypot(mz);
    let incident = [-mx / n, -mz / n];
    let sum = |r: V2| {
        let items: Vec<(f64, f64)> = beam
            .contributions
            .iter()
            .map(|c: &Contribution| {
                let d = c.arrival.depart;
                let sin_delta = d[0] * r[1] - d[1] * r[0];
                let lobe = main_lobe(std::f64::consts::PI * facet_mm * sin_delta / wavelength_mm);
                (c.amplitude() * lobe, c.total_time())
            })
            .collect();
        super::beam::coherent_sum(&items, frequency_mhz).0
    };
    let reference = sum(corner_return(incident, 0.0));
    if reference == 0.0 {
        return 0.0;
    }
    (sum(corner_return(incident, tilt)) * sum(corner_return(incident, -tilt))).sqrt() / reference
}

type FanKey = (u64, u64, u64, u64);

/// Echo synthesis over one specimen, caching field-point fans.
pub struct Inspector<'a> {
    pub specimen: &'a Specimen,
    pub fan_config: FanConfig,
    cache: Mutex<HashMap<FanKey, Arc<PointFan>>>,
}

impl<'a> Inspector<'a> {
    pub fn new(specimen: &'a Specimen, fan_config: FanConfig) -> Self {
        Inspector { specimen, fan_config, cache: Mutex::new(HashMap::new()) }
    }

    pub fn fan(&self, point: V2, frequency_mhz: f64, obstacles: &[Segment]) -> Result<Arc<PointFan>> {
        let mut h = 0u64;
        for s in obstacles {
            for v in [s.a[0], s.a[1], s.b[0], s.b[1]] {
                h = h.rotate_left(7) ^ v.to_bits();
            }
        }
        let key = (point[0].to_bits(), point[1].to_bits(), frequency_mhz.to_bits(), h);
        if let Some(f) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(f.clone());
        }
        let cfg = FanConfig { obstacles: obstacles.to_vec(), ..self.fan_config.clone() };
        let fan = Arc::new(PointFan::trace(self.specimen, point, frequency_mhz, &cfg)?);
        self.cache.lock().expect("cache lock").insert(key, fan.clone());
        Ok(fan)
    }

    fn delays(&self, probe: &ProbeConfig) -> Result<Vec<f64>> {
        delay_law(probe, contact_velocity(self.specimen, probe))
    }

    pub fn beam(&self, probe: &ProbeConfig, point: V2, obstacles: &[Segment]) -> Result<Beam> {
        probe.validate()?;
        let fan = self.fan(point, probe.frequency_mhz, obstacles)?;
        Ok(beam_from_fan(probe, &fan, &self.delays(probe)?, |_| 1.0))
    }

    /// Pulse-echo corner echo: beam² × R_c × facet factor (the product clamped
    /// like R_c); `None` without beam.
    pub fn corner_echo(&self, probe: &ProbeConfig, defect: &Defect) -> Result<Option<Echo>> {
        defect.validate(self.specimen)?;
        let foot = defect.foot(self.specimen);
        let beam = self.beam(probe, foot, &defect.segments(self.specimen))?;
        if beam.is_null() {
            return Ok(None);
        }
        let (tilt, facet) = defect.corner_facet(self.specimen);
        let lambda = local_wavelength(self.specimen, foot, probe.frequency_mhz)?;
        let f = facet_factor(&beam, tilt, facet, lambda, probe.frequency_mhz);
        Ok(Some(Echo {
            kind: EchoKind::Corner,
            amplitude: beam.amplitude.powi(2) * (corner_reflectivity(tilt) * f).clamp(MIN_CORNER_REFLECTIVITY, 1.0),
            time: 2.0 * beam.time,
        }))
    }

    /// Tip diffraction from the defect top, gated by the local wavelength.
    pub fn tip_echo(&self, probe: &ProbeConfig, defect: &Defect) -> Result<TipEcho> {
        defect.validate(self.specimen)?;
        let foot = defect.foot(self.specimen);
        let lambda = local_wavelength(self.specimen, foot, probe.frequency_mhz)?;
        if defect.height_mm < lambda {
            return Ok(TipEcho::BelowResolution { wavelength_mm: lambda });
        }
        let beam = self.beam(probe, defect.top(self.specimen), &defect.segments(self.specimen))?;
        if beam.is_null() {
            return Ok(TipEcho::NoBeam);
        }
        Ok(TipEcho::Present(Echo {
            kind: EchoKind::Tip,
            amplitude: TIP_PENALTY * beam.amplitude.powi(2),
            time: 2.0 * beam.time,
        }))
    }
}
