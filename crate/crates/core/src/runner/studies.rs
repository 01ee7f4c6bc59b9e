//! Study implementations; each writes its files through an [`OutputDir`].

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::output::OutputDir;
use crate::error::{Error, Result};
use crate::inspection::{calibrate, scan, tilt_sweep, write_tilt_csv, EchoKind, Inspector, ProbeConfig};
use crate::ray::io::{write_events, write_rays};
use crate::ray::{eikonal_residual, trace, EventKind, Ray, TraceOptions};
use crate::weld::{OrientationSource, Specimen};

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn freq_tag(f: f64) -> String {
    format!("{f}").replace('.', "p")
}

pub fn trace_study(cfg: &RunConfig, specimen: &Specimen, out: &mut OutputDir) -> Result<()> {
    let t = &cfg.trace;
    let opts = TraceOptions {
        scheme: t.scheme,
        dt_us: t.dt_us,
        max_time_us: t.max_time_us,
        max_events: t.max_events,
        stop_at_outer_surface: t.stop_at_outer_surface,
        positive_paraxial_sign: t.positive_paraxial_sign,
        ..TraceOptions::default()
    };
    let mut jobs = Vec::new();
    for src in &t.sources {
        for k in 0..t.ray_count {
            let g = if t.ray_count == 1 {
                t.gamma_start_deg
            } else {
                t.gamma_start_deg + (t.gamma_stop_deg - t.gamma_start_deg) * k as f64 / (t.ray_count - 1) as f64
            };
            jobs.push((*src, g));
        }
    }
    let rays: Vec<Ray> = jobs
        .par_iter()
        .map(|(src, g)| {
            trace(specimen, *src, g.to_radians(), t.frequency_mhz, &opts).map_err(|e| match e {
                Error::OutOfDomain { x, z, .. } => Error::param("trace.sources", format!("source ({x}, {z}) mm lies outside the specimen")),
                other => other,
            })
        })
        .collect::<Result<_>>()?;
    out.write("rays.csv", &csv_bytes(|b| write_rays(b, &rays, specimen))?)?;
    out.write("events.csv", &csv_bytes(|b| write_events(b, &rays))?)?;
    Ok(())
}

pub fn orientation_map_study(cfg: &RunConfig, specimen: &Specimen, out: &mut OutputDir) -> Result<()> {
    let m = &cfg.orientation_map;
    let nx = ((m.x_max_mm - m.x_min_mm) / m.step_mm + 1e-9).floor() as usize + 1;
    let nz = ((m.z_max_mm - m.z_min_mm) / m.step_mm + 1e-9).floor() as usize + 1;
    let (lo, hi) = specimen.bounding_box();
    if m.x_min_mm < lo[0] - 1e-9 || m.x_max_mm > hi[0] + 1e-9 || m.z_min_mm < lo[1] - 1e-9 || m.z_max_mm > hi[1] + 1e-9 {
        return Err(Error::param("orientation_map", "lattice must lie inside the specimen bounding box"));
    }
    let mut text = String::from("x_mm,z_mm,theta_deg\n");
    let mut pixels = vec![0u8; nx * nz];
    for iz in 0..nz {
        let z = m.z_min_mm + iz as f64 * m.step_mm;
        for ix in 0..nx {
            let x = m.x_min_mm + ix as f64 * m.step_mm;
            let Ok(sample) = specimen.orientation_at(x, z) else { continue };
            let deg = sample.theta.to_degrees();
            text.push_str(&format!("{x:.4},{z:.4},{deg:.6}\n"));
            // top row of the image is the outer surface
            pixels[(nz - 1 - iz) * nx + ix] = (((deg + 90.0) / 180.0) * 255.0).round().clamp(0.0, 255.0) as u8;
        }
    }
    out.write("orientation_map.csv", text.as_bytes())?;
    let mut pgm = format!("P5\n{nx} {nz}\n255\n").into_bytes();
    pgm.extend(pixels);
    out.write("orientation_map.pgm", &pgm)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ScanSummary {
    side: crate::inspection::Side,
    frequency_mhz: f64,
    calibration_reference: f64,
    corner_present: bool,
    tip_present: bool,
    peak_corner_db: Option<f64>,
    peak_tip_db: Option<f64>,
}

fn defect_or_err(cfg: &RunConfig) -> Result<&crate::inspection::Defect> {
    cfg.defect.as_ref().ok_or_else(|| Error::param("defect", "this study needs a defect"))
}

pub fn bscan_study(cfg: &RunConfig, specimen: &Specimen, out: &mut OutputDir) -> Result<()> {
    let insp = Inspector::new(specimen, cfg.fan.to_fan_config());
    let defect = cfg.defect.as_ref();
    let foot = defect.map_or(0.0, |d| d.foot_x_mm);
    let mut summary = Vec::new();
    for &f in &cfg.scan.frequencies_mhz {
        let probe = ProbeConfig { frequency_mhz: f, ..cfg.probe.clone() };
        for &side in &cfg.scan.sides {
            let cal = calibrate(&probe, specimen, side, foot, &cfg.scan.positions, &insp.fan_config)?;
            let b = scan(&insp, &probe, defect, side, &cfg.scan.positions, &cal)?;
            let stem = format!("bscan_{}_{}mhz", side_name(side), freq_tag(f));
            out.write(&format!("{stem}.csv"), &csv_bytes(|buf| b.write_csv(buf))?)?;
            out.write(&format!("{stem}_echoes.json"), (b.annotations_json()? + "\n").as_bytes())?;
            if cfg.scan.write_pgm {
                out.write(&format!("{stem}.pgm"), &b.to_pgm())?;
            }
            summary.push(ScanSummary {
                side,
                frequency_mhz: f,
                calibration_reference: cal.reference,
                corner_present: b.has(EchoKind::Corner),
                tip_present: b.has(EchoKind::Tip),
                peak_corner_db: b.peak_db(EchoKind::Corner),
                peak_tip_db: b.peak_db(EchoKind::Tip),
            });
        }
    }
    out.write("bscan_summary.json", &json_bytes(&summary))?;
    Ok(())
}

fn side_name(side: crate::inspection::Side) -> &'static str {
    match side {
        crate::inspection::Side::Stainless => "stainless",
        crate::inspection::Side::Ferritic => "ferritic",
    }
}

pub fn tilt_study(cfg: &RunConfig, specimen: &Specimen, out: &mut OutputDir) -> Result<()> {
    let template = defect_or_err(cfg)?;
    let t = &cfg.tilt;
    let probe = ProbeConfig { frequency_mhz: t.frequency_mhz, ..cfg.probe.clone() };
    let insp = Inspector::new(specimen, cfg.fan.to_fan_config());
    let cal = calibrate(&probe, specimen, t.side, template.foot_x_mm, &cfg.scan.positions, &insp.fan_config)?;
    let rows = tilt_sweep(&insp, &probe, template, &t.tilts_deg, t.side, &cfg.scan.positions, &cal)?;
    out.write("tilt_sweep.csv", &csv_bytes(|b| write_tilt_csv(b, &rows))?)?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub specimen: String,
    pub all_passed: bool,
    pub checks: Vec<Check>,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.to_string(), passed, detail }
}

/// Invariant checks on the configured specimen.
pub fn validation_report(specimen: &Specimen) -> Result<ValidationReport> {
    let mut checks = Vec::new();
    for r in &specimen.regions {
        let (lo, hi) = r.polygon.bounding_box();
        let mut worst = f64::INFINITY;
        for i in 0..=4 {
            for j in 0..=4 {
                let x = lo[0] + (hi[0] - lo[0]) * i as f64 / 4.0;
                let z = lo[1] + (hi[1] - lo[1]) * j as f64 / 4.0;
                let ev = r.stiffness_at(x, z).eigenvalues();
                worst = worst.min(ev.iter().copied().fold(f64::INFINITY, f64::min));
            }
        }
        checks.push(check(&format!("positive definite stiffness: {}", r.name), worst > 0.0, format!("smallest eigenvalue {worst:.6e} (mm/µs)²")));
        if let OrientationSource::Ogilvy(p) = &r.orientation {
            let (_, hi) = r.polygon.bounding_box();
            let mut centre = 0.0f64;
            let mut anti = 0.0f64;
            for k in 0..=30 {
                let z = hi[1] * k as f64 / 30.0;
                centre = centre.max((p.angle(0.0, z).to_degrees() + 90.0).abs());
                for x in [0.5, 2.0, 5.0, 9.0] {
                    anti = anti.max((p.angle(-x, z) + p.angle(x, z)).abs());
                }
            }
            checks.push(check(&format!("centreline orientation −90°: {}", r.name), centre == 0.0, format!("max deviation {centre:e}°")));
            checks.push(check(&format!("orientation antisymmetry: {}", r.name), anti <= 1e-12, format!("max |θ(−x)+θ(x)| {anti:e} rad")));
        }
    }
    for r in specimen.regions.iter().filter(|r| matches!(r.kind, crate::weld::RegionKind::Buttering)) {
        let (lo, hi) = r.polygon.bounding_box();
        let c = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let theta = r.theta_at(c[0], c[1]).to_degrees();
        checks.push(check(&format!("buttering orientation 90°: {}", r.name), (theta - 90.0).abs() < 1e-12, format!("{theta}°")));
    }

    let (lo, hi) = specimen.bounding_box();
    let opts = TraceOptions { max_time_us: 25.0, ..TraceOptions::default() };
    let sources: Vec<(f64, f64)> = [-25.0, -12.0, 0.0, 12.0, 25.0]
        .iter()
        .flat_map(|&x| [60.0, 80.0, 100.0, 120.0].map(|g| (x, g)))
        .filter(|(x, _)| *x > lo[0] && *x < hi[0])
        .collect();
    let rays: Vec<Ray> = sources
        .par_iter()
        .map(|&(x, g)| trace(specimen, [x, specimen.outer_z], f64::to_radians(g), 2.0, &opts))
        .collect::<Result<_>>()?;
    let mut eik = 0.0f64;
    let mut tang = 0.0f64;
    let mut monotone = true;
    let mut interfaces = 0;
    for ray in &rays {
        for s in &ray.states {
            eik = eik.max(eikonal_residual(specimen, s));
        }
        monotone &= ray.states.windows(2).all(|w| w[1].t > w[0].t);
        for e in &ray.events {
            if let (Some(n), EventKind::Interface { .. } | EventKind::TotalReflection { .. } | EventKind::SurfaceReflection { .. }) = (e.normal, e.kind) {
                let tau = [n[1], -n[0]];
                let d = (e.p_out[0] - e.p_in[0]) * tau[0] + (e.p_out[1] - e.p_in[1]) * tau[1];
                tang = tang.max(d.abs());
                interfaces += 1;
            }
        }
    }
    checks.push(check("eikonal residual |G − 1| ≤ 1e-5", eik <= 1e-5, format!("max {eik:.3e} over {} rays", rays.len())));
    checks.push(check("tangential slowness continuity ≤ 1e-10", tang <= 1e-10, format!("max {tang:.3e} µs/mm over {interfaces} boundary events")));
    checks.push(check("travel time strictly increasing", monotone, String::new()));

    for r in &specimen.regions {
        let table = r.material.attenuation_table();
        if let Some(&(f, a)) = table.first() {
            let got = r.attenuation_db_per_mm(f);
            checks.push(check(&format!("attenuation lookup: {}", r.name), got == a, format!("{got} dB/mm at {f} MHz")));
        }
    }
    let all_passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport { specimen: specimen.name.clone(), all_passed, checks })
}

pub fn validate_study(specimen: &Specimen, out: &mut OutputDir) -> Result<()> {
    let report = validation_report(specimen)?;
    out.write("validation.json", &json_bytes(&report))?;
    if !report.all_passed {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(Error::contract(format!("invariant checks failed: {failed:?}")));
    }
    Ok(())
}
