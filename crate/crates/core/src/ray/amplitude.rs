//! Ray amplitude from geometrical spreading, interface transmission and
//! attenuation.

use super::state::{Ray, RayState};
use crate::error::{Error, Result};
use crate::weld::Specimen;

/// Travel time at which the reference spreading is taken, µs.
pub const REFERENCE_TIME_US: f64 = 0.1;
/// Spreading below this (mm/rad) counts as a caustic.
pub const CAUSTIC_SPREADING: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitude {
    /// Amplitude relative to the source-side reference, linear.
    pub value: f64,
    /// |Q| at the evaluated state, mm/rad.
    pub spreading: f64,
    /// Number of caustics passed (sign changes of the signed ray-tube width).
    pub kmah: u32,
    /// The state sits on a caustic; a neighbouring sample was used instead.
    pub caustic: bool,
}

impl Amplitude {
    pub fn db(&self) -> f64 {
        20.0 * self.value.log10()
    }
}

fn kmah_up_to(ray: &Ray, t: f64, end: &RayState) -> u32 {
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for s in ray.states.iter().filter(|s| s.t > REFERENCE_TIME_US && s.t < t).chain(std::iter::once(end)) {
        let w = s.signed_spreading();
        if w.abs() < CAUSTIC_SPREADING {
            continue;
        }
        if let Some(p) = prev {
            if p.signum() != w.signum() {
                count += 1;
            }
        }
        prev = Some(w);
    }
    count
}

/// Amplitude of `ray` at `state`, a sample or interpolated state of it.
pub fn amplitude(ray: &Ray, specimen: &Specimen, state: &RayState) -> Result<Amplitude> {
    let reference = ray.state_at_time(REFERENCE_TIME_US).ok_or_else(|| {
        Error::contract(format!("ray is shorter than the reference time {REFERENCE_TIME_US} µs"))
    })?;
    if state.t < REFERENCE_TIME_US {
        return Err(Error::contract("amplitude requested before the reference time"));
    }
    let rho0 = specimen.regions[reference.region].material.density;
    let rho = specimen.regions[state.region].material.density;
    let j0 = reference.spreading();
    let mut j = state.spreading();
    let mut caustic = false;
    if j < CAUSTIC_SPREADING {
        caustic = true;
        let i = ray.states.partition_point(|s| s.t < state.t);
        let n = ray.states.len();
        j = (1..n)
            .flat_map(|d| [i.checked_sub(d), Some(i + d)])
            .flatten()
            .filter(|&k| k < n && ray.states[k].t >= REFERENCE_TIME_US)
            .map(|k| ray.states[k].spreading())
            .find(|&w| w >= CAUSTIC_SPREADING)
            .unwrap_or(CAUSTIC_SPREADING);
    }
    let geometric = (rho0 * reference.normal_velocity() * j0 / (rho * state.normal_velocity() * j)).sqrt();
    Ok(Amplitude {
        value: geometric * state.transmission * 10f64.powf(-state.atten_db / 20.0),
        spreading: state.spreading(),
        kmah: kmah_up_to(ray, state.t, state),
        caustic,
    })
}
