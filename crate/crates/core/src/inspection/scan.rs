//! Mechanical scans, B-scan assembly and tilt sweeps.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::beam::FanConfig;
use super::defect::{Defect, EchoKind, Inspector, TipEcho};
use super::probe::ProbeConfig;
use crate::error::{Error, Result};
use crate::weld::block::stainless_steel;
use crate::weld::{OrientationSource, Polygon, Region, RegionKind, Specimen};

/// Height of the calibration notch, mm.
pub const CALIBRATION_NOTCH_MM: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Probe on x > 0.
    Stainless,
    /// Probe on x < 0.
    Ferritic,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Stainless => 1.0,
            Side::Ferritic => -1.0,
        }
    }

    /// Probe at distance `d` from the centreline, steered back towards it.
    pub fn probe(self, base: &ProbeConfig, d: f64) -> ProbeConfig {
        ProbeConfig {
            position_mm: self.sign() * d,
            steering_deg: -self.sign() * base.steering_deg.abs(),
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    /// Distances of the probe centre from the weld centreline, mm.
    pub start_mm: f64,
    pub stop_mm: f64,
    pub step_mm: f64,
    pub time_max_us: f64,
    pub time_step_us: f64,
    pub floor_db: f64,
    /// −6 dB pulse length in periods.
    pub pulse_periods: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            start_mm: 0.0,
            stop_mm: 40.0,
            step_mm: 1.0,
            time_max_us: 40.0,
            time_step_us: 0.02,
            floor_db: -60.0,
            pulse_periods: 1.5,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_mm > 0.0 && self.stop_mm >= self.start_mm && self.start_mm >= 0.0) {
            return Err(Error::param("scan", "need 0 ≤ start ≤ stop and step > 0"));
        }
        if !(self.time_step_us > 0.0 && self.time_max_us > 0.0) {
            return Err(Error::param("scan", "time axis must be positive"));
        }
        if !(self.floor_db < 0.0) || !(self.pulse_periods > 0.0) {
            return Err(Error::param("scan", "floor must be negative and pulse length positive"));
        }
        Ok(())
    }

    pub fn distances(&self) -> Vec<f64> {
        let n = ((self.stop_mm - self.start_mm) / self.step_mm + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start_mm + k as f64 * self.step_mm).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        let n = (self.time_max_us / self.time_step_us + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.time_step_us).collect()
    }
}

/// Reference amplitude that maps to 0 dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub reference: f64,
}

impl Calibration {
    pub fn db(&self, amplitude: f64) -> f64 {
        20.0 * (amplitude / self.reference).log10()
    }
}

/// Peak corner echo of a 10 mm vertical notch in an isotropic stainless
/// block of the same thickness, over the same probe positions.
pub fn calibrate(probe: &ProbeConfig, specimen: &Specimen, side: Side, foot_x_mm: f64, scan: &ScanConfig, fan: &FanConfig) -> Result<Calibration> {
    let (lo, hi) = specimen.bounding_box();
    let region = Region::new(
        "calibration block",
        RegionKind::Stainless,
        Polygon::new(vec![[lo[0], specimen.inner_z], [hi[0], specimen.inner_z], [hi[0], specimen.outer_z], [lo[0], specimen.outer_z]]),
        stainless_steel(),
        OrientationSource::Constant(0.0),
    );
    let block = Specimen::new("calibration block", vec![region], specimen.inner_z, specimen.outer_z)?;
    let insp = Inspector::new(&block, fan.clone());
    let notch = Defect::notch(foot_x_mm, CALIBRATION_NOTCH_MM.min(0.9 * block.thickness()), 0.0);
    let peak = peak_corner(&insp, probe, &notch, side, scan)?;
    match peak {
        Some((a, _)) if a > 0.0 => Ok(Calibration { reference: a }),
        _ => Err(Error::param("probe", "calibration notch is not insonified at any scan position")),
    }
}

/// Largest corner-echo amplitude over the scan and its probe distance.
pub fn peak_corner(insp: &Inspector<'_>, probe: &ProbeConfig, defect: &Defect, side: Side, scan: &ScanConfig) -> Result<Option<(f64, f64)>> {
    let dists = scan.distances();
    // warm the fan cache once before fanning out over positions
    if let Some(&d) = dists.first() {
        insp.corner_echo(&side.probe(probe, d), defect)?;
    }
    let echoes: Vec<Option<(f64, f64)>> = dists
        .par_iter()
        .map(|&d| {
            Ok(insp.corner_echo(&side.probe(probe, d), defect)?.map(|e| (e.amplitude, d)))
        })
        .collect::<Result<_>>()?;
    Ok(echoes.into_iter().flatten().fold(None, |best, e| match best {
        Some(b) if b.0 >= e.0 => Some(b),
        _ => Some(e),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub kind: EchoKind,
    pub position_mm: f64,
    pub time_us: f64,
    pub peak_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BScan {
    /// Probe-centre x, mm.
    pub positions: Vec<f64>,
    pub times: Vec<f64>,
    /// dB, one row per position.
    pub grid: Vec<Vec<f64>>,
    pub annotations: Vec<Annotation>,
    pub floor_db: f64,
}

fn envelope(t: f64, t0: f64, fwhm: f64) -> f64 {
    (-4.0 * std::f64::consts::LN_2 * ((t - t0) / fwhm).powi(2)).exp()
}

/// B-scan of `defect` (or of the sound specimen) from one side.
pub fn scan(
    insp: &Inspector<'_>,
    probe: &ProbeConfig,
    defect: Option<&Defect>,
    side: Side,
    cfg: &ScanConfig,
    calibration: &Calibration,
) -> Result<BScan> {
    cfg.validate()?;
    probe.validate()?;
    let dists = cfg.distances();
    let times = cfg.times();
    if let (Some(d), Some(&first)) = (defect, dists.first()) {
        let p = side.probe(probe, first);
        insp.corner_echo(&p, d)?;
        insp.tip_echo(&p, d)?;
    }
    let rows: Vec<(Vec<f64>, Vec<Annotation>)> = dists
        .par_iter()
        .map(|&dist| {
            let p = side.probe(probe, dist);
            let mut echoes = Vec::new();
            if let Some(d) = defect {
                if let Some(e) = insp.corner_echo(&p, d)? {
                    echoes.push(e);
                }
                if let TipEcho::Present(e) = insp.tip_echo(&p, d)? {
                    echoes.push(e);
                }
            }
            let fwhm = cfg.pulse_periods / probe.frequency_mhz;
            let row = times
                .iter()
                .map(|&t| {
                    let env: f64 = echoes.iter().map(|e| e.amplitude / calibration.reference * envelope(t, e.time, fwhm)).sum();
                    if env > 0.0 {
                        (20.0 * env.log10()).max(cfg.floor_db)
                    } else {
                        cfg.floor_db
                    }
                })
                .collect();
            let notes = echoes
                .iter()
                .filter(|e| e.amplitude > 0.0 && calibration.db(e.amplitude) > cfg.floor_db)
                .map(|e| Annotation {
                    kind: e.kind,
                    position_mm: p.position_mm,
                    time_us: e.time,
                    peak_db: calibration.db(e.amplitude),
                })
                .collect();
            Ok((row, notes))
        })
        .collect::<Result<_>>()?;
    let positions = dists.iter().map(|d| side.sign() * d).collect();
    let mut grid = Vec::with_capacity(rows.len());
    let mut annotations = Vec::new();
    for (row, notes) in rows {
        grid.push(row);
        annotations.extend(notes);
    }
    Ok(BScan { positions, times, grid, annotations, floor_db: cfg.floor_db })
}

impl BScan {
    pub fn peak_db(&self, kind: EchoKind) -> Option<f64> {
        self.annotations
            .iter()
            .filter(|a| a.kind == kind)
            .map(|a| a.peak_db)
            .fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
    }

    pub fn has(&self, kind: EchoKind) -> bool {
        self.annotations.iter().any(|a| a.kind == kind)
    }

    /// CSV: first row is the time axis, first column the probe position.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Parse { path: "<b-scan>".into(), message: e.to_string() };
        let mut header = vec!["position_mm\\time_us".to_string()];
        header.extend(self.times.iter().map(|t| format!("{t:.4}")));
        w.write_record(&header).map_err(err)?;
        for (x, row) in self.positions.iter().zip(&self.grid) {
            let mut rec = vec![format!("{x:.4}")];
            rec.extend(row.iter().map(|v| format!("{v:.3}")));
            w.write_record(&rec).map_err(err)?;
        }
        w.flush().map_err(|e| Error::Parse { path: "<b-scan>".into(), message: e.to_string() })
    }

    pub fn annotations_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.annotations).map_err(|e| Error::contract(e.to_string()))
    }

    /// Binary PGM, dB mapped linearly from the floor (0) to the grid max (255).
    pub fn to_pgm(&self) -> Vec<u8> {
        let max = self.grid.iter().flatten().copied().fold(self.floor_db, f64::max);
        let span = (max - self.floor_db).max(1e-12);
        let (w, h) = (self.times.len(), self.positions.len());
        let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
        for row in &self.grid {
            out.extend(row.iter().map(|v| (((v - self.floor_db) / span) * 255.0).round().clamp(0.0, 255.0) as u8));
        }
        out
    }
}

/// Peak corner-echo dB over the scan for each tilt of `template`.
pub fn tilt_sweep(
    insp: &Inspector<'_>,
    probe: &ProbeConfig,
    template: &Defect,
    tilts_deg: &[f64],
    side: Side,
    cfg: &ScanConfig,
    calibration: &Calibration,
) -> Result<Vec<(f64, f64)>> {
    for &t in tilts_deg {
        if !(t.abs() <= 45.0) {
            return Err(Error::param("tilts_deg", format!("{t}° is outside ±45°")));
        }
    }
    tilts_deg
        .iter()
        .map(|&t| {
            let peak = peak_corner(insp, probe, &template.with_tilt(t), side, cfg)?;
            Ok((t, peak.map_or(cfg.floor_db, |(a, _)| calibration.db(a).max(cfg.floor_db))))
        })
        .collect()
}

pub fn write_tilt_csv<W: Write>(out: W, rows: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Parse { path: "<tilt sweep>".into(), message: e.to_string() };
    w.write_record(["tilt_deg", "peak_db"]).map_err(err)?;
    for (t, db) in rows {
        w.write_record([format!("{t}"), format!("{db:.4}")]).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Parse { path: "<tilt sweep>".into(), message: e.to_string() })
}
