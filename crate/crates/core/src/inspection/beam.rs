//! Delay-and-sum beam at a field point.
//!
//! Element contributions are found reciprocally: one fan is traced upwards
//! from the field point to the outer surface, and each element picks up the
//! arrival interpolated between the two landing rays that bracket it. The
//! fan is independent of the probe position, so a whole scan reuses it.

use rayon::prelude::*;

use super::probe::{delay_law, ProbeConfig};
use crate::error::Result;
use crate::ray::hamiltonian::{ql_branch, velocity};
use crate::ray::{amplitude, trace, EventKind, Scheme, TerminalStatus, TraceOptions, V2};
use crate::weld::{Segment, Specimen};

#[derive(Debug, Clone, PartialEq)]
pub struct FanConfig {
    pub gamma_min_deg: f64,
    pub gamma_max_deg: f64,
    pub step_deg: f64,
    /// Largest gap to the nearest landing ray when no pair brackets an element, mm.
    pub capture_radius_mm: f64,
    pub scheme: Scheme,
    pub dt_us: f64,
    pub max_time_us: f64,
    /// Rays crossing these segments (other than at their start) are dropped.
    pub obstacles: Vec<Segment>,
}

impl Default for FanConfig {
    fn default() -> Self {
        FanConfig {
            gamma_min_deg: -170.0,
            gamma_max_deg: -10.0,
            step_deg: 0.25,
            capture_radius_mm: 0.3,
            scheme: Scheme::Rk4,
            dt_us: 0.02,
            max_time_us: 40.0,
            obstacles: Vec::new(),
        }
    }
}

/// A fan ray that reached the outer surface.
#[derive(Debug, Clone, PartialEq)]
pub struct Landing {
    pub index: usize,
    pub x: f64,
    /// One-way travel time, µs.
    pub t: f64,
    /// Linear amplitude at the surface.
    pub amplitude: f64,
    /// Slowness at the surface, µs/mm.
    pub p: V2,
    /// Unit energy-velocity direction at the field point.
    pub depart: V2,
    signature: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub t: f64,
    pub amplitude: f64,
    pub p: V2,
    pub depart: V2,
}

#[derive(Debug, Clone)]
pub struct PointFan {
    pub point: V2,
    pub frequency_mhz: f64,
    pub landings: Vec<Landing>,
    pub capture_radius_mm: f64,
}

fn unit(v: V2) -> V2 {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

impl PointFan {
    pub fn trace(specimen: &Specimen, point: V2, frequency_mhz: f64, config: &FanConfig) -> Result<Self> {
        let opts = TraceOptions {
            scheme: config.scheme,
            dt_us: config.dt_us,
            max_time_us: config.max_time_us,
            stop_at_outer_surface: true,
            targets: config.obstacles.clone(),
            ..TraceOptions::default()
        };
        let n = ((config.gamma_max_deg - config.gamma_min_deg) / config.step_deg).round() as usize + 1;
        let rays: Vec<_> = (0..n)
            .into_par_iter()
            .map(|k| {
                let g = (config.gamma_min_deg + config.step_deg * k as f64).to_radians();
                trace(specimen, point, g, frequency_mhz, &opts)
            })
            .collect::<Result<_>>()?;
        let mut landings = Vec::new();
        for (k, ray) in rays.iter().enumerate() {
            if ray.status != TerminalStatus::ReachedSurface || ray.last().t < crate::ray::REFERENCE_TIME_US {
                continue;
            }
            let blocked = ray
                .events
                .iter()
                .any(|e| matches!(e.kind, EventKind::DefectHit { .. }) && e.t > 1e-9);
            let bounced = ray.events.iter().any(|e| matches!(e.kind, EventKind::SurfaceReflection { .. }));
            if blocked || bounced {
                continue;
            }
            let last = ray.last();
            let first = &ray.states[0];
            let a = specimen.regions[first.region].stiffness_at(first.x[0], first.x[1]);
            let (_, g) = ql_branch(&a, first.p);
            let signature = ray
                .events
                .iter()
                .filter_map(|e| match e.kind {
                    EventKind::Interface { from, to, .. } => Some((from, to)),
                    EventKind::TotalReflection { region, into } => Some((region, usize::MAX - into)),
                    _ => None,
                })
                .collect();
            landings.push(Landing {
                index: k,
                x: last.x[0],
                t: last.t,
                amplitude: amplitude(ray, specimen, last)?.value,
                p: last.p,
                depart: unit(velocity(&a, first.p, &g)),
                signature,
            });
        }
        Ok(PointFan {
            point,
            frequency_mhz,
            landings,
            capture_radius_mm: config.capture_radius_mm,
        })
    }

    /// First arrival at surface abscissa `x`, if any ray reaches it.
    pub fn arrival(&self, x: f64) -> Option<Arrival> {
        let mut best: Option<Arrival> = None;
        for w in self.landings.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.index != a.index + 1 || a.signature != b.signature {
                continue;
            }
            let (lo, hi) = if a.x <= b.x { (a.x, b.x) } else { (b.x, a.x) };
            if x < lo || x > hi {
                continue;
            }
            let f = if b.x == a.x { 0.0 } else { (x - a.x) / (b.x - a.x) };
            let lerp = |u: f64, v: f64| u + f * (v - u);
            let cand = Arrival {
                t: lerp(a.t, b.t),
                amplitude: lerp(a.amplitude, b.amplitude),
                p: [lerp(a.p[0], b.p[0]), lerp(a.p[1], b.p[1])],
                depart: unit([lerp(a.depart[0], b.depart[0]), lerp(a.depart[1], b.depart[1])]),
            };
            if best.map_or(true, |b| cand.t < b.t) {
                best = Some(cand);
            }
        }
        if best.is_some() {
            return best;
        }
        self.landings
            .iter()
            .map(|l| ((l.x - x).abs(), l))
            .filter(|(d, _)| *d <= self.capture_radius_mm)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, l)| Arrival {
                t: l.t + l.p[0] * (x - l.x),
                amplitude: l.amplitude,
                p: l.p,
                depart: l.depart,
            })
    }
}

/// One element's share of a beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub element: usize,
    pub delay: f64,
    pub arrival: Arrival,
    /// Element directivity factor.
    pub directivity: f64,
}

impl Contribution {
    pub fn total_time(&self) -> f64 {
        self.delay + self.arrival.t
    }

    pub fn amplitude(&self) -> f64 {
        self.arrival.amplitude * self.directivity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    /// Envelope amplitude of the coherent sum, linear.
    pub amplitude: f64,
    /// Energy-weighted mean of delay + travel time, µs.
    pub time: f64,
    pub contributions: Vec<Contribution>,
}

impl Beam {
    pub fn null() -> Self {
        Beam { amplitude: 0.0, time: f64::NAN, contributions: Vec::new() }
    }

    pub fn is_null(&self) -> bool {
        self.contributions.is_empty() || self.amplitude == 0.0
    }
}

/// |Σ a e^{iωt}| and Σ a² t / Σ a² for (amplitude, time µs) pairs.
pub fn coherent_sum(items: &[(f64, f64)], frequency_mhz: f64) -> (f64, f64) {
    let w = 2.0 * std::f64::consts::PI * frequency_mhz;
    let (mut re, mut im, mut e, mut et) = (0.0, 0.0, 0.0, 0.0);
    for &(a, t) in items {
        re += a * (w * t).cos();
        im += a * (w * t).sin();
        e += a * a;
        et += a * a * t;
    }
    (re.hypot(im), if e > 0.0 { et / e } else { f64::NAN })
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Width directivity sinc(π w sin φ / λ) for a wave with surface slowness `p`.
pub fn element_directivity(width_mm: f64, frequency_mhz: f64, p: V2) -> f64 {
    let pn = p[0].hypot(p[1]);
    let lambda = 1.0 / (pn * frequency_mhz);
    sinc(std::f64::consts::PI * width_mm * (p[0] / pn) / lambda).abs()
}

/// qL velocity (m/s) straight down under the probe centre, used for delays.
pub fn contact_velocity(specimen: &Specimen, probe: &ProbeConfig) -> f64 {
    let (x, z) = (probe.position_mm, specimen.outer_z);
    let r = specimen
        .region_at(x, z)
        .map(|i| &specimen.regions[i])
        .unwrap_or(&specimen.regions[0]);
    let a = r.stiffness_at(x, z);
    ql_branch(&a, [0.0, -1.0]).0.sqrt() * 1e3
}

/// Beam of `probe` at the fan's field point, optionally reweighting each
/// contribution.
pub fn beam_from_fan(probe: &ProbeConfig, fan: &PointFan, delays: &[f64], weight: impl Fn(&Contribution) -> f64) -> Beam {
    let contributions: Vec<Contribution> = probe
        .active()
        .filter_map(|n| {
            let arrival = fan.arrival(probe.element_x(n))?;
            Some(Contribution {
                element: n,
                delay: delays[n],
                arrival,
                directivity: element_directivity(probe.element_width_mm, probe.frequency_mhz, arrival.p),
            })
        })
        .collect();
    if contributions.is_empty() {
        return Beam::null();
    }
    let items: Vec<(f64, f64)> = contributions.iter().map(|c| (c.amplitude() * weight(c), c.total_time())).collect();
    let (amplitude, time) = coherent_sum(&items, probe.frequency_mhz);
    Beam { amplitude, time, contributions }
}

/// Beam of `probe` at `point` (fresh fan, default settings).
pub fn beam_at(probe: &ProbeConfig, specimen: &Specimen, point: V2) -> Result<Beam> {
    probe.validate()?;
    let fan = PointFan::trace(specimen, point, probe.frequency_mhz, &FanConfig::default())?;
    let delays = delay_law(probe, contact_velocity(specimen, probe))?;
    Ok(beam_from_fan(probe, &fan, &delays, |_| 1.0))
}
