//! Local ray Hamiltonian H = G/2 of the qL branch and its derivatives in a
//! single region. Units: mm, µs, slowness µs/mm, stiffness (mm/µs)².

use crate::elastodynamics::{christoffel, eigen::symmetric3, Stiffness, Vec3};
use crate::weld::specimen::region_gradient;
use crate::weld::Region;

pub type V2 = [f64; 2];
pub type M2 = [[f64; 2]; 2];

/// Relative slowness step of the paraxial finite differences.
pub const SLOWNESS_FD_REL: f64 = 1e-6;
/// Position step of the paraxial finite differences, mm.
pub const POSITION_FD_STEP: f64 = 1e-5;

#[inline]
pub(crate) fn lift(p: V2) -> Vec3 {
    [p[0], 0.0, p[1]]
}

/// Largest eigenvalue G of Γ(p) and its polarization.
pub fn ql_branch(a: &Stiffness, p: V2) -> (f64, Vec3) {
    let (vals, vecs) = symmetric3(&christoffel(a, &lift(p)));
    (vals[0], vecs[0])
}

/// In-plane energy velocity a_ijkl p_l g_j g_k.
pub fn velocity(a: &Stiffness, p: V2, g: &Vec3) -> V2 {
    let mut v = [0.0; 2];
    for (slot, i) in [(0usize, 0usize), (1, 2)] {
        let mut s = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                let gjk = g[j] * g[k];
                if gjk == 0.0 {
                    continue;
                }
                s += (a.tensor(i, j, k, 0) * p[0] + a.tensor(i, j, k, 2) * p[1]) * gjk;
            }
        }
        v[slot] = s;
    }
    v
}

/// ½ ∂G/∂x_n = ½ (∂a_ijkl/∂x_n) p_j p_l g_i g_k.
pub fn half_grad_x(grad: &[Stiffness; 2], p: V2, g: &Vec3) -> V2 {
    let p3 = lift(p);
    let mut out = [0.0; 2];
    for (n, da) in grad.iter().enumerate() {
        let gamma = christoffel(da, &p3);
        let mut s = 0.0;
        for i in 0..3 {
            for k in 0..3 {
                s += gamma[i][k] * g[i] * g[k];
            }
        }
        out[n] = 0.5 * s;
    }
    out
}

/// Phase velocity (mm/µs) of the qL branch along the unit in-plane direction `n`.
pub fn phase_velocity(a: &Stiffness, n: V2) -> f64 {
    ql_branch(a, n).0.sqrt()
}

/// Right-hand side of the axial + paraxial system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub dx: V2,
    pub dp: V2,
    pub dq: V2,
    pub dpp: V2,
}

/// First and second derivatives of H at one (x, p).
#[derive(Debug, Clone, Copy)]
pub struct LocalEval {
    pub g_value: f64,
    pub polarization: Vec3,
    /// ∂H/∂p, the energy velocity.
    pub v: V2,
    /// ∂H/∂x.
    pub hx: V2,
    /// ∂²H/∂p_n∂p_m as ∂V_i/∂p_n.
    pub v_p: M2,
    /// ∂V_i/∂x_n.
    pub v_x: M2,
    /// ∂H_x,i/∂x_n.
    pub hx_x: M2,
    /// ∂H_x,i/∂p_n.
    pub hx_p: M2,
}

impl LocalEval {
    pub fn derivatives(&self, q: V2, pp: V2, positive_sign: bool) -> Derivatives {
        let mv = |m: &M2, v: V2| [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
        let a = mv(&self.v_x, q);
        let b = mv(&self.v_p, pp);
        let c = mv(&self.hx_x, q);
        let d = mv(&self.hx_p, pp);
        let sign = if positive_sign { 1.0 } else { -1.0 };
        Derivatives {
            dx: self.v,
            dp: [-self.hx[0], -self.hx[1]],
            dq: [a[0] + b[0], a[1] + b[1]],
            dpp: [sign * (c[0] + d[0]), sign * (c[1] + d[1])],
        }
    }
}

/// Evaluates H and its derivatives inside one region.
#[derive(Clone, Copy)]
pub struct Hamiltonian<'a> {
    pub region: &'a Region,
    /// Central-difference step for the stiffness gradient, mm.
    pub gradient_step: f64,
}

impl<'a> Hamiltonian<'a> {
    pub fn new(region: &'a Region, gradient_step: f64) -> Self {
        Hamiltonian { region, gradient_step }
    }

    pub fn stiffness(&self, x: V2) -> Stiffness {
        self.region.stiffness_at(x[0], x[1])
    }

    pub fn gradient(&self, x: V2) -> [Stiffness; 2] {
        region_gradient(self.region, x[0], x[1], self.gradient_step)
    }

    pub fn g_value(&self, x: V2, p: V2) -> f64 {
        ql_branch(&self.stiffness(x), p).0
    }

    /// First derivatives only: (G, g, V, H_x).
    pub fn first(&self, x: V2, p: V2) -> (f64, Vec3, V2, V2) {
        let a = self.stiffness(x);
        let (gv, g) = ql_branch(&a, p);
        let v = velocity(&a, p, &g);
        let hx = if self.region.is_homogeneous() {
            [0.0; 2]
        } else {
            half_grad_x(&self.gradient(x), p, &g)
        };
        (gv, g, v, hx)
    }

    pub fn eval(&self, x: V2, p: V2) -> LocalEval {
        let a = self.stiffness(x);
        let (g_value, pol) = ql_branch(&a, p);
        let v = velocity(&a, p, &pol);
        let homogeneous = self.region.is_homogeneous();
        let grad = if homogeneous { [Stiffness::ZERO; 2] } else { self.gradient(x) };
        let hx = if homogeneous { [0.0; 2] } else { half_grad_x(&grad, p, &pol) };

        let dp = SLOWNESS_FD_REL * p[0].hypot(p[1]);
        let mut v_p = [[0.0; 2]; 2];
        let mut hx_p = [[0.0; 2]; 2];
        for n in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[n] += dp;
            pm[n] -= dp;
            let (_, gp) = ql_branch(&a, pp);
            let (_, gm) = ql_branch(&a, pm);
            let vp = velocity(&a, pp, &gp);
            let vm = velocity(&a, pm, &gm);
            for i in 0..2 {
                v_p[i][n] = (vp[i] - vm[i]) / (2.0 * dp);
            }
            if !homogeneous {
                let hp = half_grad_x(&grad, pp, &gp);
                let hm = half_grad_x(&grad, pm, &gm);
                for i in 0..2 {
                    hx_p[i][n] = (hp[i] - hm[i]) / (2.0 * dp);
                }
            }
        }

        let mut v_x = [[0.0; 2]; 2];
        let mut hx_x = [[0.0; 2]; 2];
        if !homogeneous {
            let dx = POSITION_FD_STEP;
            for n in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[n] += dx;
                xm[n] -= dx;
                let (_, _, vp, hp) = self.first(xp, p);
                let (_, _, vm, hm) = self.first(xm, p);
                for i in 0..2 {
                    v_x[i][n] = (vp[i] - vm[i]) / (2.0 * dx);
                    hx_x[i][n] = (hp[i] - hm[i]) / (2.0 * dx);
                }
            }
        }
        LocalEval {
            g_value,
            polarization: pol,
            v,
            hx,
            v_p,
            v_x,
            hx_x,
            hx_p,
        }
    }
}
