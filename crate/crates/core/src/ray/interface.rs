//! Slowness matching at region boundaries and the associated paraxial
//! transformation.

use super::hamiltonian::{ql_branch, velocity, Hamiltonian, V2};
use crate::elastodynamics::Stiffness;
use crate::weld::Region;

fn dot(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn along(pt: V2, nu: V2, s: f64) -> V2 {
    [pt[0] + s * nu[0], pt[1] + s * nu[1]]
}

/// d G(pt + s ν)/ds up to a factor 2, i.e. V·ν.
fn slope(a: &Stiffness, pt: V2, nu: V2, s: f64) -> f64 {
    let p = along(pt, nu, s);
    let (_, g) = ql_branch(a, p);
    dot(velocity(a, p, &g), nu)
}

/// Solves G(p_t + s ν) = 1 for s on the branch whose energy velocity points
/// along +ν (`forward`) or −ν. G is convex in s, so the two roots straddle
/// its minimum. Returns `None` when the line misses the slowness curve.
pub fn match_slowness(a: &Stiffness, pt: V2, nu: V2, forward: bool) -> Option<V2> {
    let g = |s: f64| ql_branch(a, along(pt, nu, s)).0 - 1.0;
    let mut span = 1.0 + 2.0 * pt[0].hypot(pt[1]);
    while slope(a, pt, nu, span) <= 0.0 || slope(a, pt, nu, -span) >= 0.0 {
        span *= 2.0;
        if span > 1e6 {
            return None;
        }
    }
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(a, pt, nu, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s_min = 0.5 * (lo + hi);
    if g(s_min) > 0.0 {
        return None;
    }
    let mut far = if forward { span } else { -span };
    while g(far) <= 0.0 {
        far *= 2.0;
    }
    // bracket with g(inner) <= 0 < g(outer)
    let (mut inner, mut outer) = (s_min, far);
    for _ in 0..200 {
        let mid = 0.5 * (inner + outer);
        if mid == inner || mid == outer {
            break;
        }
        if g(mid) <= 0.0 {
            inner = mid;
        } else {
            outer = mid;
        }
    }
    let s = if g(inner).abs() <= g(outer).abs() { inner } else { outer };
    Some(along(pt, nu, s))
}

/// Tangential part of p relative to the unit normal ν.
pub fn tangential(p: V2, nu: V2) -> V2 {
    let pn = dot(p, nu);
    [p[0] - pn * nu[0], p[1] - pn * nu[1]]
}

/// Normal-incidence impedance ρ·V_phase(ν), in kg/m³ · mm/µs.
pub fn impedance(region: &Region, x: V2, nu: V2) -> f64 {
    let a = region.stiffness_at(x[0], x[1]);
    region.material.density * ql_branch(&a, nu).0.sqrt()
}

/// Plane-wave normal-incidence transmission coefficient 2Z₂/(Z₁ + Z₂).
pub fn transmission_coefficient(z1: f64, z2: f64) -> f64 {
    2.0 * z2 / (z1 + z2)
}

/// Maps (Q, P) across a flat boundary with unit normal ν at `x`. The
/// neighbouring ray meets the boundary dT* later; its position and
/// tangential slowness are continuous there and its normal slowness follows
/// from the linearized eikonal on the outgoing side.
#[allow(clippy::too_many_arguments)]
pub fn transfer_paraxial(
    incoming: &Region,
    outgoing: &Region,
    gradient_step: f64,
    x: V2,
    p_in: V2,
    p_out: V2,
    q: V2,
    pp: V2,
    nu: V2,
) -> (V2, V2) {
    let (_, _, v, hx) = Hamiltonian::new(incoming, gradient_step).first(x, p_in);
    let (_, _, v2, hx2) = Hamiltonian::new(outgoing, gradient_step).first(x, p_out);
    let dt = -dot(nu, q) / dot(nu, v);
    let dx = [q[0] + v[0] * dt, q[1] + v[1] * dt];
    let dp = [pp[0] - hx[0] * dt, pp[1] - hx[1] * dt];
    let tau = [nu[1], -nu[0]];
    let dpt = dot(tau, dp);
    let sigma = -(dot(hx2, dx) + dot(v2, tau) * dpt) / dot(v2, nu);
    let dp2 = [tau[0] * dpt + sigma * nu[0], tau[1] * dpt + sigma * nu[1]];
    (
        [dx[0] - v2[0] * dt, dx[1] - v2[1] * dt],
        [dp2[0] + hx2[0] * dt, dp2[1] + hx2[1] * dt],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elastodynamics::ElasticMaterial;

    fn iso(v_l: f64, v_s: f64) -> Stiffness {
        let rho = 1.0;
        Stiffness::isotropic(rho * v_l * v_l, rho * v_s * v_s)
    }

    #[test]
    fn snell_isotropic() {
        let (v1, v2) = (5.9, 5.8 * 0.7);
        let a2 = iso(v2, 2.0);
        let theta1: f64 = 0.4;
        let p = [theta1.sin() / v1, theta1.cos() / v1];
        let nu = [0.0, 1.0];
        let p2 = match_slowness(&a2, tangential(p, nu), nu, true).unwrap();
        let theta2 = p2[0].atan2(p2[1]);
        assert!((theta2.sin() / v2 - theta1.sin() / v1).abs() < 1e-12);
        let back = match_slowness(&a2, tangential(p, nu), nu, false).unwrap();
        assert!((back[1] + p2[1]).abs() < 1e-12);
    }

    #[test]
    fn critical_angle_gives_none() {
        let a2 = iso(8.0, 4.0);
        let v1 = 5.9;
        let theta1 = (v1 / 8.0f64).asin() + 0.01;
        let p = [theta1.sin() / v1, theta1.cos() / v1];
        let pt = tangential(p, [0.0, 1.0]);
        assert!(pt[0] > 1.0 / 8.0);
        assert!(match_slowness(&a2, pt, [0.0, 1.0], true).is_none());
    }

    #[test]
    fn impedance_and_coefficient() {
        let m = ElasticMaterial::isotropic("x", 5900.0, 3230.0, 7850.0).unwrap();
        let r = Region::new(
            "r",
            crate::weld::RegionKind::Ferritic,
            crate::weld::Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            m,
            crate::weld::OrientationSource::Constant(0.0),
        );
        let z = impedance(&r, [0.5, 0.5], [0.0, 1.0]);
        assert!((z - 7850.0 * 5.9).abs() < 1e-6 * z);
        assert_eq!(transmission_coefficient(z, z), 1.0);
    }
}
