use super::*;
use crate::elastodynamics::ElasticMaterial;
use crate::ray::TraceOptions;
use crate::weld::block::{homogeneous_block, stainless_steel};
use crate::weld::{OrientationSource, Polygon, Region, RegionKind, Specimen};

fn block() -> Specimen {
    homogeneous_block(stainless_steel(), RegionKind::Stainless, 100.0, 30.0)
}

fn coarse() -> FanConfig {
    FanConfig { step_deg: 0.5, ..FanConfig::default() }
}

fn quick_scan() -> ScanConfig {
    ScanConfig { start_mm: 20.0, stop_mm: 40.0, step_mm: 2.0, ..ScanConfig::default() }
}

#[test]
fn delay_law_examples() {
    let mut p = ProbeConfig { steering_deg: 0.0, ..ProbeConfig::default() };
    assert!(delay_law(&p, 5900.0).unwrap().iter().all(|&d| d == 0.0));
    p.steering_deg = 49.0;
    let d = delay_law(&p, 5900.0).unwrap();
    let step = 0.6 * 49f64.to_radians().sin() / 5.9;
    assert!((step - 0.0768).abs() < 5e-5);
    assert!(d.windows(2).all(|w| (w[1] - w[0] - step).abs() < 1e-12));
    assert_eq!(d[0], 0.0);
    p.steering_deg = -49.0;
    let m = delay_law(&p, 5900.0).unwrap();
    for n in 0..64 {
        assert!((m[n] - d[63 - n]).abs() < 1e-12);
    }
}

#[test]
fn probe_validation() {
    assert!(ProbeConfig { pitch_mm: 0.4, ..ProbeConfig::default() }.validate().is_err());
    assert!(ProbeConfig { element_count: 0, ..ProbeConfig::default() }.validate().is_err());
    assert!(ProbeConfig { frequency_mhz: 0.0, ..ProbeConfig::default() }.validate().is_err());
    assert!(ProbeConfig { aperture: [0, 64], ..ProbeConfig::default() }.validate().is_err());
    ProbeConfig::default().validate().unwrap();
}

#[test]
fn element_fan_times_follow_slant_depth() {
    let s = block();
    let probe = ProbeConfig { steering_deg: 30.0, position_mm: -20.0, ..ProbeConfig::default() };
    let opts = TraceOptions { max_time_us: 12.0, ..TraceOptions::default() };
    let single = element_fan(&probe, 5, &s, 0.0, 1, 5800.0, &opts).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].states[0].x, [probe.element_x(5), 30.0]);
    let delay = delay_law(&probe, 5800.0).unwrap()[5];
    let fan = element_fan(&probe, 5, &s, 10.0, 11, 5800.0, &opts).unwrap();
    for (k, ray) in fan.iter().enumerate() {
        let from_vertical = (30.0 + 5.0 - k as f64).to_radians();
        let hit = &ray.events[0];
        let expected = delay + 30.0 / (5.8 * from_vertical.cos());
        assert!((hit.t - expected).abs() < 1e-9, "ray {k}: {} vs {expected}", hit.t);
    }
    assert_eq!(fan, element_fan(&probe, 5, &s, 10.0, 11, 5800.0, &opts).unwrap());
    assert!(element_fan(&ProbeConfig { position_mm: 200.0, ..probe.clone() }, 5, &s, 0.0, 1, 5800.0, &opts).is_err());
}

#[test]
fn coherent_sum_examples() {
    let (a, t) = coherent_sum(&[(0.7, 3.0)], 2.0);
    assert!((a - 0.7).abs() < 1e-12 && (t - 3.0).abs() < 1e-12);
    let (a, _) = coherent_sum(&[(0.7, 3.0), (0.7, 3.0)], 2.0);
    assert!((a - 1.4).abs() < 1e-12);
    let (a, _) = coherent_sum(&[(0.7, 3.0), (0.7, 3.25)], 2.0);
    assert!(a <= 0.05 * 0.7);
}

#[test]
fn single_element_beam_is_its_ray() {
    let s = block();
    let probe = ProbeConfig { element_count: 1, aperture: [0, 0], steering_deg: 0.0, position_mm: 10.0, ..ProbeConfig::default() };
    let beam = beam_at(&probe, &s, [0.0, 0.0]).unwrap();
    assert_eq!(beam.contributions.len(), 1);
    let c = beam.contributions[0];
    assert!((beam.amplitude - c.amplitude()).abs() < 1e-12);
    assert!((beam.time - c.arrival.t).abs() < 1e-12);
    // straight path in the isotropic block, interpolated between fan rays
    assert!((c.arrival.t - (10f64.hypot(30.0)) / 5.8).abs() < 1e-3);
}

#[test]
fn unreachable_point_gives_null_beam() {
    let s = block();
    let probe = ProbeConfig { position_mm: 95.0, aperture: [60, 63], ..ProbeConfig::default() };
    let fan = PointFan::trace(&s, [-99.0, 0.0], 2.0, &FanConfig { gamma_min_deg: -170.0, gamma_max_deg: -160.0, ..coarse() }).unwrap();
    let beam = beam_from_fan(&probe, &fan, &vec![0.0; 64], |_| 1.0);
    assert!(beam.is_null() && beam.amplitude == 0.0);
}

#[test]
fn calibration_reference_reads_zero_db() {
    let s = block();
    let probe = ProbeConfig::default();
    let scan_cfg = quick_scan();
    let cal = calibrate(&probe, &s, Side::Stainless, 0.0, &scan_cfg, &coarse()).unwrap();
    let again = calibrate(&probe, &s, Side::Stainless, 0.0, &scan_cfg, &coarse()).unwrap();
    assert_eq!(cal, again);
    let insp = Inspector::new(&s, coarse());
    let (peak, _) = peak_corner(&insp, &probe, &Defect::notch(0.0, 10.0, 0.0), Side::Stainless, &scan_cfg).unwrap().unwrap();
    assert!(cal.db(peak).abs() < 1e-9);
    assert!((cal.db(cal.reference / 10f64.powf(6.0 / 20.0)) + 6.0).abs() < 1e-12);
}

#[test]
fn sound_specimen_scan_is_at_floor() {
    let s = block();
    let insp = Inspector::new(&s, coarse());
    let b = scan(&insp, &ProbeConfig::default(), None, Side::Stainless, &quick_scan(), &Calibration { reference: 1.0 }).unwrap();
    assert!(b.annotations.is_empty());
    assert!(b.grid.iter().flatten().all(|&v| v == -60.0));
    assert_eq!(b.grid.len(), b.positions.len());
    assert!(b.grid.iter().all(|r| r.len() == b.times.len()));
}

#[test]
fn scan_rows_are_deterministic_and_times_match_beam() {
    let s = block();
    let insp = Inspector::new(&s, coarse());
    let probe = ProbeConfig::default();
    let cfg = ScanConfig { start_mm: 30.0, stop_mm: 30.0, ..quick_scan() };
    let d = Defect::notch(0.0, 3.1, 0.0);
    let cal = Calibration { reference: 1.0 };
    let a = scan(&insp, &probe, Some(&d), Side::Stainless, &cfg, &cal).unwrap();
    let b = scan(&insp, &probe, Some(&d), Side::Stainless, &cfg, &cal).unwrap();
    assert_eq!(a, b);
    let corner = a.annotations.iter().find(|n| n.kind == EchoKind::Corner).unwrap();
    let tip = a.annotations.iter().find(|n| n.kind == EchoKind::Tip).unwrap();
    assert!(tip.time_us < corner.time_us);
    let beam = insp.beam(&Side::Stainless.probe(&probe, 30.0), [0.0, 0.0], &d.segments(&s)).unwrap();
    assert!((corner.time_us - 2.0 * beam.time).abs() < cfg.time_step_us);
    // the annotated peak is a local maximum of its row
    let k = (corner.time_us / cfg.time_step_us).round() as usize;
    let row = &a.grid[0];
    assert!(row[k] >= row[k - 1] && row[k] >= row[k + 1]);
}

#[test]
fn tilt_response_is_symmetric_and_monotone() {
    let s = block();
    let insp = Inspector::new(&s, coarse());
    let probe = ProbeConfig::default();
    let cfg = quick_scan();
    let cal = Calibration { reference: 1.0 };
    let tilts = [-10.0, 0.0, 5.0, 10.0, 20.0, 30.0, 45.0];
    let rows = tilt_sweep(&insp, &probe, &Defect::notch(0.0, 3.1, 0.0), &tilts, Side::Stainless, &cfg, &cal).unwrap();
    assert!((rows[0].1 - rows[3].1).abs() < 1e-9);
    for w in rows[1..].windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-12, "{rows:?}");
    }
    assert!(rows[3].1 < rows[1].1);
    assert!(tilt_sweep(&insp, &probe, &Defect::notch(0.0, 3.1, 0.0), &[50.0], Side::Stainless, &cfg, &cal).is_err());
}

#[test]
fn more_attenuation_never_raises_echoes() {
    let m = ElasticMaterial::alloy_182();
    let region = Region::new(
        "weld metal",
        RegionKind::Weld,
        Polygon::new(vec![[-100.0, 0.0], [100.0, 0.0], [100.0, 30.0], [-100.0, 30.0]]),
        m,
        OrientationSource::Constant(1.2),
    );
    let s = Specimen::new("block", vec![region], 0.0, 30.0).unwrap();
    let s2 = s.with_scaled_attenuation(2.0).unwrap();
    let d = Defect::notch(0.0, 3.1, 0.0);
    let cal = Calibration { reference: 1.0 };
    let cfg = quick_scan();
    let a = scan(&Inspector::new(&s, coarse()), &ProbeConfig::default(), Some(&d), Side::Stainless, &cfg, &cal).unwrap();
    let b = scan(&Inspector::new(&s2, coarse()), &ProbeConfig::default(), Some(&d), Side::Stainless, &cfg, &cal).unwrap();
    assert!(!a.annotations.is_empty());
    assert!(b.annotations.len() <= a.annotations.len());
    for y in &b.annotations {
        let x = a.annotations.iter().find(|x| (x.kind, x.position_mm) == (y.kind, y.position_mm)).unwrap();
        assert!(y.peak_db < x.peak_db);
    }
}

#[test]
fn bscan_file_formats() {
    let b = BScan {
        positions: vec![1.0, 2.0],
        times: vec![0.0, 0.5, 1.0],
        grid: vec![vec![-60.0, -10.0, -60.0], vec![-60.0, 0.0, -30.0]],
        annotations: vec![Annotation { kind: EchoKind::Corner, position_mm: 2.0, time_us: 0.5, peak_db: 0.0 }],
        floor_db: -60.0,
    };
    let mut csv = Vec::new();
    b.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let first = text.lines().next().unwrap();
    assert_eq!(first, "position_mm\\time_us,0.0000,0.5000,1.0000");
    assert!(text.lines().nth(2).unwrap().starts_with("2.0000,-60.000,0.000,-30.000"));
    let pgm = b.to_pgm();
    let header = b"P5\n3 2\n255\n";
    assert_eq!(&pgm[..header.len()], header);
    assert_eq!(&pgm[header.len()..], &[0, 213, 0, 0, 255, 128]);
    assert!(b.annotations_json().unwrap().contains("\"corner\""));
    let mut t = Vec::new();
    write_tilt_csv(&mut t, &[(0.0, -1.5), (10.0, -4.0)]).unwrap();
    assert_eq!(String::from_utf8(t).unwrap(), "tilt_deg,peak_db\n0,-1.5000\n10,-4.0000\n");
}

#[test]
fn sides_steer_towards_the_weld() {
    let p = ProbeConfig::default();
    let s = Side::Stainless.probe(&p, 30.0);
    let f = Side::Ferritic.probe(&p, 30.0);
    assert_eq!((s.position_mm, s.steering_deg), (30.0, -49.0));
    assert_eq!((f.position_mm, f.steering_deg), (-30.0, 49.0));
}
