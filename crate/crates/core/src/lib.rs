//! Dynamic (paraxial) ray tracing through anisotropic, inhomogeneous
//! dissimilar-metal welds, and phased-array pulse-echo synthesis of
//! weld-root defect echoes.
//!
//! Module map:
//! - [`elastodynamics`]: stiffness algebra, Christoffel eigenproblem, energy velocity.
//! - [`weld`]: grain-orientation fields and the planar specimen geometry.
//! - [`ray`]: axial + paraxial ray integration, interfaces, amplitudes.
//! - [`inspection`]: probe model, beams, corner/tip echoes, B-scans, tilt sweeps.
//! - [`runner`]: JSON-configured studies and file emission.

pub mod elastodynamics;
pub mod error;
pub mod inspection;
pub mod ray;
pub mod runner;
pub mod weld;

pub use error::{Error, Result};
