//! Christoffel tensor, its eigen-solution, and the energy (group) velocity.

use super::eigen::symmetric3;
use super::material::ElasticMaterial;
use super::stiffness::Stiffness;
use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Relative eigenvalue gap below which two branches are flagged degenerate.
pub const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    #[serde(rename = "qL")]
    QL,
    #[serde(rename = "qT1")]
    QT1,
    #[serde(rename = "qT2")]
    QT2,
}

impl Mode {
    pub fn index(self) -> usize {
        match self {
            Mode::QL => 0,
            Mode::QT1 => 1,
            Mode::QT2 => 2,
        }
    }
}

/// Γ_ik = a_ijkl n_j n_l. Works equally for unit directions and slowness vectors.
pub fn christoffel(a: &Stiffness, n: &Vec3) -> Mat3 {
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in i..3 {
            let mut s = 0.0;
            for j in 0..3 {
                if n[j] == 0.0 {
                    continue;
                }
                for l in 0..3 {
                    s += a.tensor(i, j, k, l) * n[j] * n[l];
                }
            }
            g[i][k] = s;
            g[k][i] = s;
        }
    }
    g
}

/// Eigen-solution of the Christoffel tensor for one propagation direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelSolution {
    pub direction: Vec3,
    /// Squared phase velocities, descending (qL first).
    pub eigenvalues: [f64; 3],
    /// Polarization of each branch, orthonormal.
    pub polarizations: [Vec3; 3],
    /// `degenerate[0]`: qL/qT1 pair, `degenerate[1]`: qT1/qT2 pair.
    pub degenerate: [bool; 2],
}

impl ChristoffelSolution {
    pub fn phase_velocity(&self, mode: Mode) -> f64 {
        self.eigenvalues[mode.index()].sqrt()
    }

    pub fn polarization(&self, mode: Mode) -> Vec3 {
        self.polarizations[mode.index()]
    }
}

fn check_unit(n: &Vec3) -> Result<()> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!("direction must be unit length, |n| = {norm}")));
    }
    Ok(())
}

/// Christoffel matrix in (m/s)² for a material rotated by `theta`.
pub fn christoffel_matrix(material: &ElasticMaterial, theta: f64, n: &Vec3) -> Result<Mat3> {
    check_unit(n)?;
    Ok(christoffel(&material.normalized_stiffness(theta), n))
}

/// Decompose an already-assembled Christoffel matrix.
pub fn decompose(gamma: &Mat3, direction: Vec3) -> ChristoffelSolution {
    let (eigenvalues, polarizations) = symmetric3(gamma);
    let gap = |a: f64, b: f64| (a - b).abs() <= DEGENERACY_TOL * a.abs().max(b.abs());
    ChristoffelSolution {
        direction,
        eigenvalues,
        polarizations,
        degenerate: [
            gap(eigenvalues[0], eigenvalues[1]),
            gap(eigenvalues[1], eigenvalues[2]),
        ],
    }
}

pub fn solve_christoffel(material: &ElasticMaterial, theta: f64, n: &Vec3) -> Result<ChristoffelSolution> {
    let gamma = christoffel_matrix(material, theta, n)?;
    Ok(decompose(&gamma, *n))
}

/// V_i = a_ijkl p_l g_j g_k for normalized stiffness `a`.
pub fn energy_velocity_raw(a: &Stiffness, p: &Vec3, g: &Vec3) -> Vec3 {
    let mut v = [0.0; 3];
    for (i, vi) in v.iter_mut().enumerate() {
        let mut s = 0.0;
        for j in 0..3 {
            for k in 0..3 {
                let gjk = g[j] * g[k];
                if gjk == 0.0 {
                    continue;
                }
                for l in 0..3 {
                    s += a.tensor(i, j, k, l) * p[l] * gjk;
                }
            }
        }
        *vi = s;
    }
    v
}

/// G = a_ijkl p_j p_l g_i g_k.
pub fn normalized_eigenvalue(a: &Stiffness, p: &Vec3, g: &Vec3) -> f64 {
    let gamma = christoffel(a, p);
    let mut s = 0.0;
    for i in 0..3 {
        for k in 0..3 {
            s += gamma[i][k] * g[i] * g[k];
        }
    }
    s
}

/// Energy velocity (m/s) for slowness `p` (s/m) and polarization `g`.
/// The pair must satisfy G(p) = 1 within 1e-6.
pub fn energy_velocity(material: &ElasticMaterial, theta: f64, p: &Vec3, g: &Vec3) -> Result<Vec3> {
    let a = material.normalized_stiffness(theta);
    let gnorm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
    if (gnorm - 1.0).abs() > 1e-6 {
        return Err(Error::contract(format!("polarization must be unit length, |g| = {gnorm}")));
    }
    let big_g = normalized_eigenvalue(&a, p, g);
    if (big_g - 1.0).abs() > 1e-6 {
        return Err(Error::contract(format!("slowness/polarization pair violates G = 1 (G = {big_g})")));
    }
    Ok(energy_velocity_raw(&a, p, g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iso() -> ElasticMaterial {
        ElasticMaterial::isotropic("iso", 5900.0, 3230.0, 7850.0).unwrap()
    }

    fn dot(a: &Vec3, b: &Vec3) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    #[test]
    fn axis_aligned_diagonal_entries() {
        let m = ElasticMaterial::alloy_182();
        let g = christoffel_matrix(&m, 0.0, &[1.0, 0.0, 0.0]).unwrap();
        assert!((g[0][0] - 236.1e9 / 8260.0).abs() < 1e-6);
        assert!((g[0][0] - 2.858e7).abs() / 2.858e7 < 1e-3);
        let g = christoffel_matrix(&m, 0.0, &[0.0, 1.0, 0.0]).unwrap();
        assert!((g[1][1] - 255.8e9 / 8260.0).abs() < 1e-6);
        assert!((g[1][1] - 3.097e7).abs() / 3.097e7 < 1e-3);
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        let m = ElasticMaterial::alloy_182();
        assert!(matches!(christoffel_matrix(&m, 0.0, &[1.0, 0.1, 0.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn isotropic_eigenvalues() {
        let m = iso();
        let c11 = m.stiffness[(0, 0)] * 1e9 / m.density;
        let c44 = m.stiffness[(3, 3)] * 1e9 / m.density;
        for deg in [0.0_f64, 17.0, 63.0, 135.0] {
            let t = deg.to_radians();
            let n = [t.cos(), 0.0, t.sin()];
            let s = solve_christoffel(&m, 0.0, &n).unwrap();
            assert!((s.eigenvalues[0] - c11).abs() / c11 < 1e-12);
            assert!((s.eigenvalues[1] - c44).abs() / c44 < 1e-12);
            assert!((s.eigenvalues[2] - c44).abs() / c44 < 1e-12);
            assert!(s.degenerate[1]);
            let g = s.polarization(Mode::QL);
            assert!((dot(&g, &n).abs() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn alloy_182_ql_along_x() {
        let s = solve_christoffel(&ElasticMaterial::alloy_182(), 0.0, &[1.0, 0.0, 0.0]).unwrap();
        assert!((s.phase_velocity(Mode::QL) - 5346.4).abs() < 1.0);
        let g = s.polarization(Mode::QL);
        assert!((g[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polarization_sign_convention() {
        let s = solve_christoffel(&ElasticMaterial::alloy_182(), 0.7, &[0.6, 0.0, -0.8]).unwrap();
        for g in s.polarizations {
            let first = g.iter().find(|c| c.abs() > 1e-12).unwrap();
            assert!(*first > 0.0);
        }
    }

    #[test]
    fn isotropic_energy_velocity_is_phase_velocity() {
        let m = iso();
        let n = [0.6, 0.0, 0.8];
        let p = n.map(|c| c / 5900.0);
        let v = energy_velocity(&m, 0.0, &p, &n).unwrap();
        for i in 0..3 {
            assert!((v[i] - 5900.0 * n[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn alloy_182_energy_velocity_on_axis() {
        let m = ElasticMaterial::alloy_182();
        let s = solve_christoffel(&m, 0.0, &[1.0, 0.0, 0.0]).unwrap();
        let vp = s.phase_velocity(Mode::QL);
        let p = [1.0 / vp, 0.0, 0.0];
        let v = energy_velocity(&m, 0.0, &p, &s.polarization(Mode::QL)).unwrap();
        assert!((v[0] - vp).abs() < 1e-6 && v[1].abs() < 1e-9 && v[2].abs() < 1e-9);
        assert!((v[0] - 5346.0).abs() < 1.0);
    }

    #[test]
    fn inconsistent_pair_is_rejected() {
        let m = ElasticMaterial::alloy_182();
        let p = [1.0 / 5000.0, 0.0, 0.0];
        assert!(energy_velocity(&m, 0.0, &p, &[1.0, 0.0, 0.0]).is_err());
    }
}
