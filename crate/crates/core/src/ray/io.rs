//! CSV dumps of traced rays.

use std::io::Write;

use super::state::Ray;
use crate::error::{Error, Result};
use crate::weld::Specimen;

/// µs/mm to s/mm.
const SLOWNESS_TO_S_PER_MM: f64 = 1e-6;

pub fn write_rays<W: Write>(out: W, rays: &[Ray], specimen: &Specimen) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Parse { path: "<ray dump>".into(), message: e.to_string() };
    w.write_record(["ray_id", "T_us", "x_mm", "z_mm", "px_s_per_mm", "pz_s_per_mm", "Qx", "Qz", "Px", "Pz", "atten_db", "region"])
        .map_err(err)?;
    for (id, ray) in rays.iter().enumerate() {
        for s in &ray.states {
            w.write_record([
                id.to_string(),
                format!("{:.6}", s.t),
                format!("{:.6}", s.x[0]),
                format!("{:.6}", s.x[1]),
                format!("{:.6e}", s.p[0] * SLOWNESS_TO_S_PER_MM),
                format!("{:.6e}", s.p[1] * SLOWNESS_TO_S_PER_MM),
                format!("{:.6e}", s.q[0]),
                format!("{:.6e}", s.q[1]),
                format!("{:.6e}", s.pp[0]),
                format!("{:.6e}", s.pp[1]),
                format!("{:.6}", s.atten_db),
                specimen.regions[s.region].name.clone(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Parse { path: "<ray dump>".into(), message: e.to_string() })
}

pub fn write_events<W: Write>(out: W, rays: &[Ray]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Parse { path: "<event dump>".into(), message: e.to_string() };
    w.write_record(["ray_id", "event_type", "T_us", "x_mm", "z_mm"]).map_err(err)?;
    for (id, ray) in rays.iter().enumerate() {
        for e in &ray.events {
            w.write_record([
                id.to_string(),
                e.kind.label().to_string(),
                format!("{:.6}", e.t),
                format!("{:.6}", e.x[0]),
                format!("{:.6}", e.x[1]),
            ])
            .map_err(err)?;
        }
    }
    w.flush().map_err(|e| Error::Parse { path: "<event dump>".into(), message: e.to_string() })
}
