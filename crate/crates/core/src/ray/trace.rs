//! Ray tracing through a piecewise specimen: exact straight legs in
//! homogeneous regions, Runge-Kutta in graded ones, and slowness matching at
//! every boundary crossing.

use super::hamiltonian::{ql_branch, velocity, Hamiltonian, V2};
use super::integrate::{advance, initial_state, Scheme, StepConfig, DEFAULT_DT_US};
use super::interface::{impedance, match_slowness, tangential, transfer_paraxial, transmission_coefficient};
use super::state::{EventKind, Ray, RayEvent, RayState, TerminalStatus};
use crate::error::{Error, Result};
use crate::weld::{cross, Segment, Specimen, SurfaceKind, DEFAULT_GRADIENT_STEP};

/// Offset used to find the region on the far side of a boundary, mm.
const PROBE_OFFSET: f64 = 1e-7;
/// Boundary location accuracy in graded regions, mm.
const BOUNDARY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    pub scheme: Scheme,
    /// Integration step in graded regions, µs.
    pub dt_us: f64,
    pub max_time_us: f64,
    /// Boundary events (refractions and reflections) before giving up.
    pub max_events: usize,
    pub max_steps: usize,
    /// End the ray when it reaches the outer surface instead of reflecting.
    pub stop_at_outer_surface: bool,
    pub gradient_step: f64,
    pub positive_paraxial_sign: bool,
    /// Segments whose crossings are reported as defect hits.
    pub targets: Vec<Segment>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            scheme: Scheme::Rk4,
            dt_us: DEFAULT_DT_US,
            max_time_us: 40.0,
            max_events: 20,
            max_steps: 200_000,
            stop_at_outer_surface: false,
            gradient_step: DEFAULT_GRADIENT_STEP,
            positive_paraxial_sign: false,
            targets: Vec::new(),
        }
    }
}

impl TraceOptions {
    fn step_config(&self, frequency_mhz: f64) -> StepConfig {
        StepConfig {
            scheme: self.scheme,
            gradient_step: self.gradient_step,
            positive_paraxial_sign: self.positive_paraxial_sign,
            frequency_mhz,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt_us > 0.0) || !(self.max_time_us > 0.0) || !(self.gradient_step > 0.0) {
            return Err(Error::param("trace options", "time step, time limit and gradient step must be positive"));
        }
        Ok(())
    }
}

fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Outward unit normal of an edge of a polygon with the given signed area.
fn outward(edge: &Segment, signed_area: f64) -> V2 {
    let n = edge.normal();
    if signed_area > 0.0 {
        [-n[0], -n[1]]
    } else {
        n
    }
}

/// First exit of the chord a → b through an edge of `region`'s polygon,
/// crossing outwards: (chord parameter, edge, outward normal).
fn first_exit(specimen: &Specimen, region: usize, a: V2, b: V2) -> Option<(f64, Segment, V2)> {
    let poly = &specimen.regions[region].polygon;
    let area = poly.signed_area();
    let chord = Segment::new(a, b);
    let dir = [b[0] - a[0], b[1] - a[1]];
    let mut best: Option<(f64, Segment, V2)> = None;
    for e in poly.edges() {
        let nu = outward(&e, area);
        if dot(dir, nu) <= 0.0 {
            continue;
        }
        if let Some((u, _)) = chord.intersect(&e) {
            if best.as_ref().map_or(true, |b| u < b.0) {
                best = Some((u.clamp(0.0, 1.0), e, nu));
            }
        }
    }
    best
}

/// Edge of `region` closest to `x`, with its outward normal.
fn nearest_edge(specimen: &Specimen, region: usize, x: V2) -> (Segment, V2) {
    let poly = &specimen.regions[region].polygon;
    let area = poly.signed_area();
    poly.edges()
        .map(|e| (e.distance_to(x), e))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, e)| (e, outward(&e, area)))
        .expect("polygons have edges")
}

/// Straight-line exit of a homogeneous region: time to the boundary along V.
fn straight_exit(specimen: &Specimen, region: usize, x: V2, v: V2) -> Option<(f64, Segment, V2)> {
    let poly = &specimen.regions[region].polygon;
    let area = poly.signed_area();
    let mut best: Option<(f64, Segment, V2)> = None;
    for e in poly.edges() {
        let nu = outward(&e, area);
        if dot(v, nu) <= 0.0 {
            continue;
        }
        let d = [e.b[0] - e.a[0], e.b[1] - e.a[1]];
        let den = cross(v, d);
        if den == 0.0 {
            continue;
        }
        let w = [e.a[0] - x[0], e.a[1] - x[1]];
        let t = cross(w, d) / den;
        let s = cross(w, v) / den;
        let tol = 1e-12;
        if t >= -1e-12 && (-tol..=1.0 + tol).contains(&s) && best.as_ref().map_or(true, |b| t < b.0) {
            best = Some((t.max(0.0), e, nu));
        }
    }
    best
}

/// Exact propagation over `dt` in a homogeneous region.
fn straight_leg(specimen: &Specimen, state: &RayState, dt: f64, config: &StepConfig) -> RayState {
    let region = &specimen.regions[state.region];
    let e = Hamiltonian::new(region, config.gradient_step).eval(state.x, state.p);
    let x = [state.x[0] + e.v[0] * dt, state.x[1] + e.v[1] * dt];
    let dq = [
        e.v_p[0][0] * state.pp[0] + e.v_p[0][1] * state.pp[1],
        e.v_p[1][0] * state.pp[0] + e.v_p[1][1] * state.pp[1],
    ];
    RayState {
        x,
        t: state.t + dt,
        q: [state.q[0] + dq[0] * dt, state.q[1] + dq[1] * dt],
        atten_db: state.atten_db + region.attenuation_db_per_mm(config.frequency_mhz) * e.v[0].hypot(e.v[1]) * dt,
        ..*state
    }
}

struct Tracer<'a> {
    specimen: &'a Specimen,
    opts: &'a TraceOptions,
    config: StepConfig,
    states: Vec<RayState>,
    events: Vec<RayEvent>,
    boundary_events: usize,
}

enum Boundary {
    Continue,
    Stop(TerminalStatus),
}

impl<'a> Tracer<'a> {
    fn push(&mut self, s: RayState) {
        let prev = *self.states.last().expect("initial state present");
        self.record_targets(&prev, &s);
        if s.t > prev.t {
            self.states.push(s);
        } else {
            *self.states.last_mut().unwrap() = s;
        }
    }

    fn record_targets(&mut self, a: &RayState, b: &RayState) {
        if self.opts.targets.is_empty() || a.x == b.x {
            return;
        }
        let chord = Segment::new(a.x, b.x);
        for (k, target) in self.opts.targets.iter().enumerate() {
            if let Some((u, _)) = chord.intersect(target) {
                let x = [a.x[0] + u * (b.x[0] - a.x[0]), a.x[1] + u * (b.x[1] - a.x[1])];
                self.events.push(RayEvent {
                    kind: EventKind::DefectHit { target: k },
                    x,
                    t: a.t + u * (b.t - a.t),
                    sample: self.states.len(),
                    p_in: a.p,
                    p_out: a.p,
                    normal: None,
                    incident: None,
                });
            }
        }
    }

    fn event(&mut self, kind: EventKind, incident: RayState, normal: Option<V2>) {
        let last = *self.states.last().unwrap();
        self.events.push(RayEvent {
            kind,
            x: last.x,
            t: last.t,
            sample: self.states.len() - 1,
            p_in: incident.p,
            p_out: last.p,
            normal,
            incident: Some(incident),
        });
    }

    /// Handles the boundary the last state sits on.
    fn cross(&mut self, edge: Segment, nu: V2) -> Boundary {
        let s = *self.states.last().unwrap();
        let sp = self.specimen;
        let probe = [s.x[0] + PROBE_OFFSET * nu[0], s.x[1] + PROBE_OFFSET * nu[1]];
        let here = &sp.regions[s.region];
        let a_here = here.stiffness_at(s.x[0], s.x[1]);
        let pt = tangential(s.p, nu);
        let reflect = |tr: &mut Self, kind: EventKind| -> Boundary {
            let Some(p) = match_slowness(&a_here, pt, nu, false) else {
                return Boundary::Stop(TerminalStatus::Exited);
            };
            let (q, pp) = transfer_paraxial(here, here, tr.opts.gradient_step, s.x, s.p, p, s.q, s.pp, nu);
            *tr.states.last_mut().unwrap() = RayState { p, q, pp, ..s };
            tr.event(kind, s, Some(nu));
            Boundary::Continue
        };
        let outcome = match sp.region_at(probe[0], probe[1]).filter(|&j| j != s.region) {
            None => match sp.classify_surface(&edge) {
                SurfaceKind::Side => {
                    self.event(EventKind::Exit, s, Some(nu));
                    return Boundary::Stop(TerminalStatus::Exited);
                }
                SurfaceKind::Outer if self.opts.stop_at_outer_surface => {
                    self.event(EventKind::SurfaceArrival { surface: SurfaceKind::Outer }, s, Some(nu));
                    return Boundary::Stop(TerminalStatus::ReachedSurface);
                }
                surface => reflect(self, EventKind::SurfaceReflection { surface }),
            },
            Some(j) => {
                let there = &sp.regions[j];
                let a_there = there.stiffness_at(s.x[0], s.x[1]);
                match match_slowness(&a_there, pt, nu, true) {
                    None => reflect(self, EventKind::TotalReflection { region: s.region, into: j }),
                    Some(p) => {
                        let (q, pp) = transfer_paraxial(here, there, self.opts.gradient_step, s.x, s.p, p, s.q, s.pp, nu);
                        let c = transmission_coefficient(impedance(here, s.x, nu), impedance(there, s.x, nu));
                        *self.states.last_mut().unwrap() = RayState {
                            p,
                            q,
                            pp,
                            region: j,
                            transmission: s.transmission * c,
                            ..s
                        };
                        self.event(EventKind::Interface { from: s.region, to: j, coefficient: c }, s, Some(nu));
                        Boundary::Continue
                    }
                }
            }
        };
        self.boundary_events += 1;
        if self.boundary_events >= self.opts.max_events {
            return Boundary::Stop(TerminalStatus::EventLimit);
        }
        outcome
    }

    /// Advances one leg; returns the boundary hit at its end, if any.
    fn leg(&mut self) -> Option<(Segment, V2)> {
        let s = *self.states.last().unwrap();
        let sp = self.specimen;
        let region = &sp.regions[s.region];
        let remaining = self.opts.max_time_us - s.t;
        if region.is_homogeneous() {
            let a = region.stiffness_at(s.x[0], s.x[1]);
            let (_, g) = ql_branch(&a, s.p);
            let v = velocity(&a, s.p, &g);
            let hit = straight_exit(sp, s.region, s.x, v);
            match hit {
                Some((t, e, nu)) if t <= remaining => {
                    let mut next = straight_leg(sp, &s, t, &self.config);
                    let u = ((next.x[0] - e.a[0]) * (e.b[0] - e.a[0]) + (next.x[1] - e.a[1]) * (e.b[1] - e.a[1])) / (e.length() * e.length());
                    let u = u.clamp(0.0, 1.0);
                    next.x = [e.a[0] + u * (e.b[0] - e.a[0]), e.a[1] + u * (e.b[1] - e.a[1])];
                    self.push(next);
                    Some((e, nu))
                }
                _ => {
                    let next = straight_leg(sp, &s, remaining, &self.config);
                    self.push(next);
                    None
                }
            }
        } else {
            let dt = self.opts.dt_us.min(remaining);
            let next = advance(sp, &s, dt, &self.config);
            if region.polygon.contains(next.x) {
                self.push(next);
                return None;
            }
            let speed = (next.x[0] - s.x[0]).hypot(next.x[1] - s.x[1]) / dt;
            let (mut lo, mut hi) = (0.0, dt);
            let mut hi_state = next;
            let mut lo_state = s;
            while (hi - lo) * speed > BOUNDARY_TOL {
                let mid = 0.5 * (lo + hi);
                let m = advance(sp, &s, mid, &self.config);
                if region.polygon.contains(m.x) {
                    lo = mid;
                    lo_state = m;
                } else {
                    hi = mid;
                    hi_state = m;
                }
            }
            let (e, nu, xb) = match first_exit(sp, s.region, lo_state.x, hi_state.x) {
                Some((u, e, nu)) => {
                    let xb = [
                        lo_state.x[0] + u * (hi_state.x[0] - lo_state.x[0]),
                        lo_state.x[1] + u * (hi_state.x[1] - lo_state.x[1]),
                    ];
                    (e, nu, xb)
                }
                None => {
                    let (e, nu) = nearest_edge(sp, s.region, hi_state.x);
                    (e, nu, lo_state.x)
                }
            };
            if lo == 0.0 {
                // already on the boundary and heading out
                let mut cur = s;
                cur.x = xb;
                *self.states.last_mut().unwrap() = cur;
            } else {
                lo_state.x = xb;
                self.push(lo_state);
            }
            Some((e, nu))
        }
    }
}

/// Traces the qL ray leaving `source` (mm) with take-off angle `gamma` (rad,
/// measured from +x towards −z) at frequency `frequency_mhz`.
pub fn trace(specimen: &Specimen, source: V2, gamma: f64, frequency_mhz: f64, opts: &TraceOptions) -> Result<Ray> {
    opts.validate()?;
    let init = initial_state(source, gamma, specimen, frequency_mhz)?;
    trace_from(specimen, init, gamma, frequency_mhz, opts)
}

/// Traces from an arbitrary initial state.
pub fn trace_from(specimen: &Specimen, init: RayState, gamma: f64, frequency_mhz: f64, opts: &TraceOptions) -> Result<Ray> {
    opts.validate()?;
    let mut tr = Tracer {
        specimen,
        opts,
        config: opts.step_config(frequency_mhz),
        states: vec![init],
        events: Vec::new(),
        boundary_events: 0,
    };
    let mut steps = 0usize;
    let status = loop {
        if tr.states.last().unwrap().t >= opts.max_time_us - 1e-12 {
            break TerminalStatus::TimeLimit;
        }
        if steps >= opts.max_steps {
            break TerminalStatus::StepLimit;
        }
        steps += 1;
        if let Some((edge, nu)) = tr.leg() {
            if let Boundary::Stop(status) = tr.cross(edge, nu) {
                break status;
            }
        }
    };
    Ok(Ray {
        gamma,
        source_density: specimen.regions[init.region].material.density,
        states: tr.states,
        events: tr.events,
        status,
    })
}
