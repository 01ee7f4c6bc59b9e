//! Stiffness-tensor algebra, the Christoffel eigenproblem, and phase/energy
//! velocities for locally rotated anisotropic media.

mod christoffel;
pub mod eigen;
mod material;
mod stiffness;

pub use christoffel::{
    christoffel, christoffel_matrix, decompose, energy_velocity, energy_velocity_raw, normalized_eigenvalue,
    solve_christoffel, ChristoffelSolution, Mat3, Mode, Vec3, DEGENERACY_TOL,
};
pub use material::{ElasticMaterial, MaterialFile};
pub use stiffness::{bond_matrix, rotation_about_y, voigt, Stiffness};

/// Rotate a material's stiffness by the grain angle `theta` (rad) about the weld-bead axis.
pub fn rotate_stiffness(material: &ElasticMaterial, theta: f64) -> Stiffness {
    material.stiffness.rotated(theta)
}
