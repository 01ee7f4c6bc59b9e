//! 6×6 Voigt stiffness matrices and their rotation about the weld-bead axis.

use std::ops::{Index, IndexMut};

/// Voigt index of the symmetric tensor pair (i, j).
#[inline]
pub const fn voigt(i: usize, j: usize) -> usize {
    const MAP: [[usize; 3]; 3] = [[0, 5, 4], [5, 1, 3], [4, 3, 2]];
    MAP[i][j]
}

/// Symmetric 6×6 stiffness in Voigt notation. Units are whatever the caller
/// stores: GPa for material data, (m/s)² or (mm/µs)² once density-normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stiffness(pub [[f64; 6]; 6]);

impl Index<(usize, usize)> for Stiffness {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.0[r][c]
    }
}

impl IndexMut<(usize, usize)> for Stiffness {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.0[r][c]
    }
}

impl Stiffness {
    pub const ZERO: Stiffness = Stiffness([[0.0; 6]; 6]);

    /// From the 21 upper-triangle constants, row-major (C11, C12, …, C16, C22, …, C66).
    pub fn from_upper21(c: &[f64; 21]) -> Self {
        let mut m = Self::ZERO;
        let mut k = 0;
        for r in 0..6 {
            for col in r..6 {
                m.0[r][col] = c[k];
                m.0[col][r] = c[k];
                k += 1;
            }
        }
        m
    }

    /// Orthotropic constants in the order C11, C22, C33, C23, C13, C12, C44, C55, C66.
    pub fn orthotropic(c: &[f64; 9]) -> Self {
        let mut m = Self::ZERO;
        m.0[0][0] = c[0];
        m.0[1][1] = c[1];
        m.0[2][2] = c[2];
        m.0[1][2] = c[3];
        m.0[2][1] = c[3];
        m.0[0][2] = c[4];
        m.0[2][0] = c[4];
        m.0[0][1] = c[5];
        m.0[1][0] = c[5];
        m.0[3][3] = c[6];
        m.0[4][4] = c[7];
        m.0[5][5] = c[8];
        m
    }

    /// Isotropic stiffness from C11 = λ + 2µ and C44 = µ.
    pub fn isotropic(c11: f64, c44: f64) -> Self {
        let c12 = c11 - 2.0 * c44;
        Self::orthotropic(&[c11, c11, c11, c12, c12, c12, c44, c44, c44])
    }

    pub fn upper21(&self) -> [f64; 21] {
        let mut out = [0.0; 21];
        let mut k = 0;
        for r in 0..6 {
            for c in r..6 {
                out[k] = self.0[r][c];
                k += 1;
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|v| *v *= s);
        m
    }

    /// Component a_ijkl of the underlying 4th-rank tensor.
    #[inline]
    pub fn tensor(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[voigt(i, j)][voigt(k, l)]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()))
    }

    /// Largest |C_rc − C_cr| relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..6 {
            for c in 0..6 {
                worst = worst.max((self.0[r][c] - self.0[c][r]).abs());
            }
        }
        worst / self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// Eigenvalues of the 6×6 matrix (ascending).
    pub fn eigenvalues(&self) -> [f64; 6] {
        let mut a = self.0;
        super::eigen::jacobi_eigenvalues(&mut a)
    }

    pub fn is_positive_definite(&self) -> bool {
        let scale = self.max_abs();
        self.eigenvalues().iter().all(|&l| l > 1e-12 * scale)
    }

    /// Largest absolute entry-wise difference.
    pub fn max_diff(&self, other: &Stiffness) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Rotate by the grain angle `theta` about the weld-bead (y) axis, so that
    /// material axis 1 ends up along (cos θ, 0, sin θ) in the (x, y, z) frame.
    pub fn rotated(&self, theta: f64) -> Self {
        self.rotated_by(&rotation_about_y(theta))
    }

    /// C' = M C Mᵀ with M the Bond stress-transformation matrix of `r`.
    pub fn rotated_by(&self, r: &[[f64; 3]; 3]) -> Self {
        let m = bond_matrix(r);
        let mut tmp = [[0.0; 6]; 6];
        for i in 0..6 {
            for j in 0..6 {
                let mut s = 0.0;
                for k in 0..6 {
                    s += m[i][k] * self.0[k][j];
                }
                tmp[i][j] = s;
            }
        }
        let mut out = Self::ZERO;
        for i in 0..6 {
            for j in i..6 {
                let mut s = 0.0;
                for k in 0..6 {
                    s += tmp[i][k] * m[j][k];
                }
                out.0[i][j] = s;
                out.0[j][i] = s;
            }
        }
        out
    }
}

/// Rotation matrix mapping e₁ to (cos θ, 0, sin θ).
pub fn rotation_about_y(theta: f64) -> [[f64; 3]; 3] {
    let (s, c) = theta.sin_cos();
    [[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]]
}

/// Bond (stress) transformation matrix for the rotation `r`.
pub fn bond_matrix(r: &[[f64; 3]; 3]) -> [[f64; 6]; 6] {
    // Voigt pairs in order 11, 22, 33, 23, 13, 12.
    const PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (1, 2), (0, 2), (0, 1)];
    let mut m = [[0.0; 6]; 6];
    for (row, &(i, j)) in PAIRS.iter().enumerate() {
        for (col, &(k, l)) in PAIRS.iter().enumerate() {
            m[row][col] = if k == l {
                r[i][k] * r[j][k]
            } else {
                r[i][k] * r[j][l] + r[i][l] * r[j][k]
            };
        }
    }
    m
}
