//! Phased-array inspection: probe and delay laws, reciprocal beam
//! computation, corner and tip echoes, B-scans and tilt sweeps.

pub mod beam;
pub mod defect;
pub mod probe;
pub mod scan;

pub use beam::{beam_at, beam_from_fan, coherent_sum, Beam, FanConfig, PointFan};
pub use defect::{corner_reflectivity, Defect, Echo, EchoKind, Inspector, TipEcho, TIP_PENALTY};
pub use probe::{delay_law, element_fan, ProbeConfig};
pub use scan::{calibrate, peak_corner, scan, tilt_sweep, write_tilt_csv, Annotation, BScan, Calibration, ScanConfig, Side};

#[cfg(test)]
mod tests;
