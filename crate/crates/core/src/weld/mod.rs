//! Grain-orientation fields (closed-form law and smoothed grid cartography)
//! and the planar region geometry of the specimen.

pub mod geometry;
pub mod grid;
pub mod ogilvy;
pub mod block;
pub mod specimen;

pub use geometry::{cross, Point, Polygon, Segment};
pub use grid::{grid_angle, smooth_grid, wrap_axial, OrientationGrid};
pub use ogilvy::{ogilvy_angle, OgilvyParams};
pub use block::{dmw_block, WeldDescription};
pub use specimen::{
    orientation_at, stiffness_gradient, OrientationSample, OrientationSource, OrientationSpec, Region, RegionFile, RegionKind,
    Specimen, SpecimenFile, SurfaceKind, DEFAULT_GRADIENT_STEP,
};
