//! Initial conditions and single integration steps of the axial + paraxial
//! ray system.

use serde::{Deserialize, Serialize};

use super::hamiltonian::{ql_branch, Derivatives, Hamiltonian, V2};
use super::state::RayState;
use crate::elastodynamics::Mode;
use crate::error::{Error, Result};
use crate::weld::{Specimen, DEFAULT_GRADIENT_STEP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    #[default]
    Rk4,
}

/// Default travel-time step, µs.
pub const DEFAULT_DT_US: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub scheme: Scheme,
    /// Stiffness-gradient stencil step, mm.
    pub gradient_step: f64,
    /// Flip dP/dT to +(H_xx Q + H_xp P); the default is the minus sign.
    pub positive_paraxial_sign: bool,
    /// Frequency used for attenuation, MHz.
    pub frequency_mhz: f64,
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig {
            scheme: Scheme::Rk4,
            gradient_step: DEFAULT_GRADIENT_STEP,
            positive_paraxial_sign: false,
            frequency_mhz: 2.0,
        }
    }
}

/// Unit direction of take-off angle γ, measured from +x towards −z.
pub fn takeoff_direction(gamma: f64) -> V2 {
    [gamma.cos(), -gamma.sin()]
}

/// Point-source initial state: p on the local qL slowness curve, Q = 0 and
/// P = dp/dγ.
pub fn initial_state(source: V2, gamma: f64, specimen: &Specimen, _frequency_mhz: f64) -> Result<RayState> {
    let region = specimen.region_at(source[0], source[1]).ok_or_else(|| Error::OutOfDomain {
        what: format!("specimen `{}` (ray source)", specimen.name),
        x: source[0],
        z: source[1],
    })?;
    Ok(initial_state_in(specimen, region, source, gamma))
}

pub(crate) fn initial_state_in(specimen: &Specimen, region: usize, source: V2, gamma: f64) -> RayState {
    let a = specimen.regions[region].stiffness_at(source[0], source[1]);
    let n = takeoff_direction(gamma);
    let dn = [-gamma.sin(), -gamma.cos()];
    let (lambda, g) = ql_branch(&a, n);
    let v = lambda.sqrt();
    // dλ/dγ = 2 a_ijkl g_i g_k n'_j n_l
    let mut dl = 0.0;
    for i in 0..3 {
        for k in 0..3 {
            let gik = g[i] * g[k];
            if gik == 0.0 {
                continue;
            }
            for (j, nj) in [(0usize, dn[0]), (2, dn[1])] {
                for (l, nl) in [(0usize, n[0]), (2, n[1])] {
                    dl += 2.0 * a.tensor(i, j, k, l) * gik * nj * nl;
                }
            }
        }
    }
    let dv = dl / (2.0 * v);
    RayState {
        x: source,
        p: [n[0] / v, n[1] / v],
        t: 0.0,
        q: [0.0, 0.0],
        pp: [dn[0] / v - n[0] * dv / (v * v), dn[1] / v - n[1] * dv / (v * v)],
        mode: Mode::QL,
        atten_db: 0.0,
        transmission: 1.0,
        region,
    }
}

/// Right-hand side of the ray system at `state`. Fails when the gradient
/// stencil around the state leaves its region (an interface must be handled
/// instead).
pub fn derivatives(state: &RayState, specimen: &Specimen, config: &StepConfig) -> Result<Derivatives> {
    let region = &specimen.regions[state.region];
    let h = config.gradient_step;
    let [x, z] = state.x;
    if !region.is_homogeneous() {
        let stencil = [[x + h, z], [x - h, z], [x, z + h], [x, z - h]];
        if stencil.iter().any(|s| !region.polygon.contains(*s)) {
            return Err(Error::GradientUnavailable { x, z });
        }
    } else if !region.polygon.contains(state.x) {
        return Err(Error::GradientUnavailable { x, z });
    }
    Ok(rhs(specimen, state.region, config, state.x, state.p, state.q, state.pp))
}

fn rhs(specimen: &Specimen, region: usize, config: &StepConfig, x: V2, p: V2, q: V2, pp: V2) -> Derivatives {
    Hamiltonian::new(&specimen.regions[region], config.gradient_step)
        .eval(x, p)
        .derivatives(q, pp, config.positive_paraxial_sign)
}

/// One integration step without any boundary check. p is rescaled onto
/// G = 1 afterwards and attenuation accumulates over the chord length.
pub(crate) fn advance(specimen: &Specimen, state: &RayState, dt: f64, config: &StepConfig) -> RayState {
    let f = |x: V2, p: V2, q: V2, pp: V2| rhs(specimen, state.region, config, x, p, q, pp);
    let add = |a: V2, b: V2, s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let (x, p, q, pp) = (state.x, state.p, state.q, state.pp);
    let (nx, np, nq, npp) = match config.scheme {
        Scheme::Euler => {
            let k = f(x, p, q, pp);
            (add(x, k.dx, dt), add(p, k.dp, dt), add(q, k.dq, dt), add(pp, k.dpp, dt))
        }
        Scheme::Rk4 => {
            let h = dt / 2.0;
            let k1 = f(x, p, q, pp);
            let k2 = f(add(x, k1.dx, h), add(p, k1.dp, h), add(q, k1.dq, h), add(pp, k1.dpp, h));
            let k3 = f(add(x, k2.dx, h), add(p, k2.dp, h), add(q, k2.dq, h), add(pp, k2.dpp, h));
            let k4 = f(add(x, k3.dx, dt), add(p, k3.dp, dt), add(q, k3.dq, dt), add(pp, k3.dpp, dt));
            let comb = |a: V2, b1: V2, b2: V2, b3: V2, b4: V2| {
                [
                    a[0] + dt / 6.0 * (b1[0] + 2.0 * b2[0] + 2.0 * b3[0] + b4[0]),
                    a[1] + dt / 6.0 * (b1[1] + 2.0 * b2[1] + 2.0 * b3[1] + b4[1]),
                ]
            };
            (
                comb(x, k1.dx, k2.dx, k3.dx, k4.dx),
                comb(p, k1.dp, k2.dp, k3.dp, k4.dp),
                comb(q, k1.dq, k2.dq, k3.dq, k4.dq),
                comb(pp, k1.dpp, k2.dpp, k3.dpp, k4.dpp),
            )
        }
    };
    let region = &specimen.regions[state.region];
    let g = ql_branch(&region.stiffness_at(nx[0], nx[1]), np).0;
    let s = g.sqrt();
    let arc = (nx[0] - x[0]).hypot(nx[1] - x[1]);
    RayState {
        x: nx,
        p: [np[0] / s, np[1] / s],
        t: state.t + dt,
        q: nq,
        pp: npp,
        atten_db: state.atten_db + region.attenuation_db_per_mm(config.frequency_mhz) * arc,
        ..*state
    }
}

/// One step of length `dt` (µs). Errors if the step would leave the region.
pub fn step(specimen: &Specimen, state: &RayState, dt: f64, config: &StepConfig) -> Result<RayState> {
    if !(dt > 0.0) {
        return Err(Error::contract(format!("time step must be positive, got {dt}")));
    }
    let next = advance(specimen, state, dt, config);
    if !specimen.regions[state.region].polygon.contains(next.x) {
        return Err(Error::OutOfDomain {
            what: format!("region `{}` (shorten the step to the boundary)", specimen.regions[state.region].name),
            x: next.x[0],
            z: next.x[1],
        });
    }
    Ok(next)
}

/// |G(x, p) − 1| for a state.
pub fn eikonal_residual(specimen: &Specimen, state: &RayState) -> f64 {
    let r = &specimen.regions[state.region];
    (ql_branch(&r.stiffness_at(state.x[0], state.x[1]), state.p).0 - 1.0).abs()
}
