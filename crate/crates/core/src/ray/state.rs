use serde::{Deserialize, Serialize};

use super::hamiltonian::V2;
use crate::elastodynamics::Mode;
use crate::weld::{Segment, SurfaceKind};

/// One sample of a ray: axial unknowns (x, p, T), paraxial unknowns (Q, P)
/// for the take-off angle γ, and the amplitude bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayState {
    /// Position (x, z), mm.
    pub x: V2,
    /// Slowness, µs/mm.
    pub p: V2,
    /// Travel time, µs.
    pub t: f64,
    /// ∂x/∂γ, mm/rad.
    pub q: V2,
    /// ∂p/∂γ, µs/mm/rad.
    pub pp: V2,
    pub mode: Mode,
    /// Accumulated attenuation, dB.
    pub atten_db: f64,
    /// Product of interface transmission coefficients.
    pub transmission: f64,
    pub region: usize,
}

impl RayState {
    /// Signed ray-tube width: Q projected on the wavefront direction p̂⊥.
    pub fn signed_spreading(&self) -> f64 {
        let pn = self.p[0].hypot(self.p[1]);
        (self.q[0] * self.p[1] - self.q[1] * self.p[0]) / pn
    }

    pub fn spreading(&self) -> f64 {
        self.q[0].hypot(self.q[1])
    }

    /// Phase velocity along the wavefront normal, mm/µs.
    pub fn normal_velocity(&self) -> f64 {
        1.0 / self.p[0].hypot(self.p[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Transmission between two regions.
    Interface { from: usize, to: usize, coefficient: f64 },
    /// Beyond the critical angle: qL reflected back into `region`.
    TotalReflection { region: usize, into: usize },
    SurfaceReflection { surface: SurfaceKind },
    /// Arrival at the outer surface when tracing stops there.
    SurfaceArrival { surface: SurfaceKind },
    Exit,
    /// Crossing of a target segment (index into the trace targets).
    DefectHit { target: usize },
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::Interface { .. } => "interface",
            EventKind::TotalReflection { .. } => "total_reflection",
            EventKind::SurfaceReflection { .. } => "surface_reflection",
            EventKind::SurfaceArrival { .. } => "surface_arrival",
            EventKind::Exit => "exit",
            EventKind::DefectHit { .. } => "defect_hit",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayEvent {
    pub kind: EventKind,
    pub x: V2,
    pub t: f64,
    /// Index of the sample at (or just after) the event.
    pub sample: usize,
    pub p_in: V2,
    pub p_out: V2,
    /// Boundary unit normal, when the event happens on a boundary.
    pub normal: Option<V2>,
    /// State arriving at a boundary, before reflection or refraction
    /// replaced the sample.
    pub incident: Option<RayState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    TimeLimit,
    EventLimit,
    ReachedSurface,
    Exited,
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    /// Take-off angle, rad.
    pub gamma: f64,
    pub states: Vec<RayState>,
    pub events: Vec<RayEvent>,
    pub status: TerminalStatus,
    /// Density of the source medium, kg/m³.
    pub source_density: f64,
}

impl Ray {
    pub fn last(&self) -> &RayState {
        self.states.last().expect("a ray always has its initial state")
    }

    /// Closest approach of the sampled path to `point`: (distance, interpolated state index fraction).
    pub fn closest_approach(&self, point: V2) -> (f64, usize, f64) {
        let mut best = (f64::INFINITY, 0, 0.0);
        for (i, w) in self.states.windows(2).enumerate() {
            let seg = Segment::new(w[0].x, w[1].x);
            let d = seg.distance_to(point);
            if d < best.0 {
                let (dx, dz) = (w[1].x[0] - w[0].x[0], w[1].x[1] - w[0].x[1]);
                let len2 = dx * dx + dz * dz;
                let f = if len2 == 0.0 {
                    0.0
                } else {
                    (((point[0] - w[0].x[0]) * dx + (point[1] - w[0].x[1]) * dz) / len2).clamp(0.0, 1.0)
                };
                best = (d, i, f);
            }
        }
        best
    }

    /// Linear interpolation of the state between samples `i` and `i + 1`.
    pub fn interpolate(&self, i: usize, f: f64) -> RayState {
        let a = &self.states[i];
        let Some(mut b) = self.states.get(i + 1) else { return *a };
        if f < 1.0 {
            // the sample after a boundary holds the outgoing state
            if let Some(inc) = self.events.iter().find(|e| e.sample == i + 1).and_then(|e| e.incident.as_ref()) {
                b = inc;
            }
        }
        let lerp = |u: f64, v: f64| u + f * (v - u);
        let lerp2 = |u: V2, v: V2| [lerp(u[0], v[0]), lerp(u[1], v[1])];
        RayState {
            x: lerp2(a.x, b.x),
            p: lerp2(a.p, b.p),
            t: lerp(a.t, b.t),
            q: lerp2(a.q, b.q),
            pp: lerp2(a.pp, b.pp),
            atten_db: lerp(a.atten_db, b.atten_db),
            transmission: if f < 1.0 { a.transmission } else { b.transmission },
            ..*a
        }
    }

    /// State at travel time `t`, linearly interpolated.
    pub fn state_at_time(&self, t: f64) -> Option<RayState> {
        let i = self.states.partition_point(|s| s.t <= t);
        if i == 0 || i >= self.states.len() {
            return if i == self.states.len() && self.last().t == t { Some(*self.last()) } else { None };
        }
        let (a, b) = (&self.states[i - 1], &self.states[i]);
        let f = if b.t > a.t { (t - a.t) / (b.t - a.t) } else { 0.0 };
        Some(self.interpolate(i - 1, f))
    }
}
