//! Linear phased-array probe in contact with the outer surface.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ray::{trace, Ray, TraceOptions};
use crate::weld::Specimen;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub element_count: usize,
    pub pitch_mm: f64,
    pub element_width_mm: f64,
    /// Passive-direction size; recorded only, the model is 2D.
    pub elevation_mm: f64,
    pub frequency_mhz: f64,
    /// qL steering angle from the surface normal; positive steers towards +x.
    pub steering_deg: f64,
    /// Active elements, inclusive index range.
    pub aperture: [usize; 2],
    /// x of the array centre on the outer surface, mm.
    #[serde(default)]
    pub position_mm: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            element_count: 64,
            pitch_mm: 0.6,
            element_width_mm: 0.5,
            elevation_mm: 20.0,
            frequency_mhz: 2.0,
            steering_deg: 49.0,
            aperture: [0, 63],
            position_mm: 0.0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.element_count == 0 {
            return Err(Error::param("element_count", "must be at least 1"));
        }
        if !(self.element_width_mm > 0.0 && self.pitch_mm > self.element_width_mm) {
            return Err(Error::param("pitch_mm", "need pitch > element width > 0"));
        }
        if !(self.frequency_mhz > 0.0) {
            return Err(Error::param("frequency_mhz", "must be positive"));
        }
        if !(self.steering_deg.abs() < 90.0) {
            return Err(Error::param("steering_deg", "steering must stay below 90°"));
        }
        if self.aperture[0] > self.aperture[1] || self.aperture[1] >= self.element_count {
            return Err(Error::param("aperture", "index range outside the array"));
        }
        Ok(())
    }

    /// x of element `n`'s centre.
    pub fn element_x(&self, n: usize) -> f64 {
        self.position_mm + (n as f64 - (self.element_count as f64 - 1.0) / 2.0) * self.pitch_mm
    }

    pub fn active(&self) -> std::ops::RangeInclusive<usize> {
        self.aperture[0]..=self.aperture[1]
    }

    pub fn wavelength_mm(&self, velocity_mm_us: f64) -> f64 {
        velocity_mm_us / self.frequency_mhz
    }

    pub fn at(&self, position_mm: f64) -> Self {
        ProbeConfig { position_mm, ..self.clone() }
    }
}

/// Linear steering delays (µs) for all elements, shifted so the earliest
/// firing is at 0. `velocity` in m/s.
pub fn delay_law(probe: &ProbeConfig, velocity: f64) -> Result<Vec<f64>> {
    if !(probe.steering_deg.abs() < 90.0) {
        return Err(Error::param("steering_deg", "steering must stay below 90°"));
    }
    let v = velocity * 1e-3;
    let s = probe.steering_deg.to_radians().sin();
    let raw: Vec<f64> = (0..probe.element_count).map(|n| n as f64 * probe.pitch_mm * s / v).collect();
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(raw.into_iter().map(|t| t - min).collect())
}

/// Rays leaving element `n` over `span_deg` centred on the steering
/// direction. Each ray's times are offset by the element delay.
pub fn element_fan(
    probe: &ProbeConfig,
    element: usize,
    specimen: &Specimen,
    span_deg: f64,
    count: usize,
    velocity: f64,
    options: &TraceOptions,
) -> Result<Vec<Ray>> {
    probe.validate()?;
    if element >= probe.element_count {
        return Err(Error::param("element", format!("index {element} outside the array")));
    }
    let x = probe.element_x(element);
    let z = specimen.outer_z;
    if specimen.region_at(x, z).is_none() {
        return Err(Error::OutOfDomain { what: "probe footprint".into(), x, z });
    }
    let delay = delay_law(probe, velocity)?[element];
    // a downward ray at steering β has γ = 90° − β
    let centre = 90.0 - probe.steering_deg;
    (0..count)
        .map(|k| {
            let off = if count == 1 { 0.0 } else { -span_deg / 2.0 + span_deg * k as f64 / (count - 1) as f64 };
            let mut ray = trace(specimen, [x, z], (centre + off).to_radians(), probe.frequency_mhz, options)?;
            for s in &mut ray.states {
                s.t += delay;
            }
            for e in &mut ray.events {
                e.t += delay;
            }
            Ok(ray)
        })
        .collect()
}
