use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, SymmetricEigen};

use super::*;
use crate::elastodynamics::{ElasticMaterial, Stiffness};
use crate::weld::block::{ferritic_steel, homogeneous_block, dmw_block};
use crate::weld::{OgilvyParams, OrientationSource, Polygon, Region, RegionKind, Specimen, WeldDescription};

fn block(v_l: f64) -> Specimen {
    let m = ElasticMaterial::isotropic("iso", v_l * 1000.0, v_l * 550.0, 7800.0).unwrap();
    homogeneous_block(m, RegionKind::Ferritic, 100.0, 30.0)
}

fn rect(x0: f64, x1: f64, z0: f64, z1: f64) -> Polygon {
    Polygon::new(vec![[x0, z0], [x1, z0], [x1, z1], [x0, z1]])
}

fn layered(top: ElasticMaterial, bottom: ElasticMaterial, bottom_theta: f64) -> Specimen {
    let regions = vec![
        Region::new("top", RegionKind::Ferritic, rect(-100.0, 100.0, 15.0, 30.0), top, OrientationSource::Constant(0.0)),
        Region::new("bottom", RegionKind::Weld, rect(-100.0, 100.0, 0.0, 15.0), bottom, OrientationSource::Constant(bottom_theta)),
    ];
    Specimen::new("layers", regions, 0.0, 30.0).unwrap()
}

fn weld_only() -> Specimen {
    let p = OgilvyParams::REFERENCE;
    let top = p.d + 30.0 * p.alpha_deg.to_radians().tan();
    let region = Region::new(
        "weld",
        RegionKind::Weld,
        Polygon::new(vec![[-p.d, 0.0], [p.d, 0.0], [top, 30.0], [-top, 30.0]]),
        ElasticMaterial::alloy_182(),
        OrientationSource::Ogilvy(p),
    );
    Specimen::new("weld", vec![region], 0.0, 30.0).unwrap()
}

fn opts(max_time: f64) -> TraceOptions {
    TraceOptions { max_time_us: max_time, ..TraceOptions::default() }
}

/// Independent qL eigen-solve: normalized stiffness in (mm/µs)², slowness in µs/mm.
fn oracle_ql(a: &Stiffness, p: [f64; 2]) -> (f64, [f64; 3]) {
    let p3 = [p[0], 0.0, p[1]];
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for k in 0..3 {
            let mut s = 0.0;
            for j in 0..3 {
                for l in 0..3 {
                    s += a.tensor(i, j, k, l) * p3[j] * p3[l];
                }
            }
            m[(i, k)] = s;
        }
    }
    let e = SymmetricEigen::new(m);
    let i = e.eigenvalues.imax();
    let v = e.eigenvectors.column(i);
    (e.eigenvalues[i], [v[0], v[1], v[2]])
}

fn oracle_group(a: &Stiffness, p: [f64; 2]) -> [f64; 2] {
    let (_, g) = oracle_ql(a, p);
    let p3 = [p[0], 0.0, p[1]];
    let mut v = [0.0; 2];
    for (slot, i) in [(0, 0), (1, 2)] {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    v[slot] += a.tensor(i, j, k, l) * p3[l] * g[j] * g[k];
                }
            }
        }
    }
    v
}

#[test]
fn isotropic_ray_is_straight_at_constant_speed() {
    let s = block(5.9);
    let g = 30f64.to_radians();
    let ray = trace(&s, [0.0, 25.0], g, 2.0, &opts(3.0)).unwrap();
    assert_eq!(ray.status, TerminalStatus::TimeLimit);
    for st in &ray.states {
        let d = 5.9 * st.t;
        assert!((st.x[0] - d * g.cos()).abs() < 1e-9);
        assert!((st.x[1] - (25.0 - d * g.sin())).abs() < 1e-9);
    }
}

#[test]
fn pulse_echo_time_is_twice_thickness_over_speed() {
    let s = block(5.9);
    let o = TraceOptions { stop_at_outer_surface: true, ..opts(40.0) };
    let ray = trace(&s, [0.0, 30.0], FRAC_PI_2, 2.0, &o).unwrap();
    assert_eq!(ray.status, TerminalStatus::ReachedSurface);
    assert!((ray.last().t - 60.0 / 5.9).abs() < 1e-9);
    assert_eq!(ray.events[0].kind.label(), "surface_reflection");
}

#[test]
fn travel_time_is_strictly_increasing() {
    let s = dmw_block(WeldDescription::Analytical);
    for gdeg in [20.0, 45.0, 60.0, 120.0, 150.0] {
        let ray = trace(&s, [-20.0, 30.0], f64::to_radians(gdeg), 2.0, &opts(20.0)).unwrap();
        assert!(ray.states.windows(2).all(|w| w[1].t > w[0].t), "γ = {gdeg}");
    }
}

#[test]
fn line_source_spreading_doubles_with_distance() {
    let s = block(5.9);
    let ray = trace(&s, [0.0, 29.0], 1.0, 2.0, &opts(4.0)).unwrap();
    let near = ray.state_at_time(1.0).unwrap();
    let far = ray.state_at_time(2.0).unwrap();
    let a1 = amplitude(&ray, &s, &near).unwrap().value;
    let a2 = amplitude(&ray, &s, &far).unwrap().value;
    assert!((a1 / a2 - 2f64.sqrt()).abs() < 1e-6);
    let q = far.spreading();
    assert!((q - 5.9 * 2.0).abs() < 1e-6, "|Q| = r for an isotropic point source, got {q}");
}

#[test]
fn interpolation_before_a_boundary_uses_the_incident_state() {
    let top = ElasticMaterial::isotropic("a", 5900.0, 3230.0, 7850.0).unwrap();
    let bottom = ElasticMaterial::isotropic("b", 4500.0, 2400.0, 7850.0).unwrap();
    let s = layered(top, bottom, 0.0);
    let ray = trace(&s, [0.0, 29.0], 50f64.to_radians(), 2.0, &opts(4.0)).unwrap();
    let ev = ray.events.iter().find(|e| e.kind.label() == "interface").expect("crosses");
    for f in [0.25, 0.5, 0.9] {
        let st = ray.state_at_time(f * ev.t).unwrap();
        assert!((st.spreading() - 5.9 * st.t).abs() < 1e-9, "|Q| = r on the incident leg");
        assert_eq!(st.pp, ray.states[0].pp);
    }
}

#[test]
fn snell_law_at_isotropic_interface() {
    let top = ElasticMaterial::isotropic("a", 5900.0, 3230.0, 7850.0).unwrap();
    let bottom = ElasticMaterial::isotropic("b", 4500.0, 2400.0, 7850.0).unwrap();
    let s = layered(top, bottom, 0.0);
    let g = 50f64.to_radians();
    let ray = trace(&s, [0.0, 29.0], g, 2.0, &opts(4.0)).unwrap();
    let ev = ray.events.iter().find(|e| e.kind.label() == "interface").expect("crosses");
    let sin1 = g.cos();
    let p = ev.p_out;
    let sin2 = p[0] / p[0].hypot(p[1]);
    assert!((sin1 / 5.9 - sin2 / 4.5).abs() < 1e-12);
    // transmitted ray continues straight at the new speed
    let after = ray.last();
    let dx = after.x[0] - ev.x[0];
    let dz = after.x[1] - ev.x[1];
    assert!((dx.hypot(dz) - 4.5 * (after.t - ev.t)).abs() < 1e-9);
}

#[test]
fn anisotropic_refraction_matches_slowness_curve_scan() {
    let s = layered(ferritic_steel(), ElasticMaterial::alloy_182(), 0.6);
    let a = s.regions[1].stiffness_at(0.0, 5.0);
    for gdeg in [40.0, 65.0, 90.0, 110.0, 135.0] {
        let ray = trace(&s, [0.0, 29.0], f64::to_radians(gdeg), 2.0, &opts(5.0)).unwrap();
        let Some(ev) = ray.events.iter().find(|e| e.kind.label() == "interface") else { continue };
        let pt = ev.p_in[0];
        // scan the slowness curve for the downward-going point with this p_x
        let n = 720_000;
        let mut best: Option<(f64, f64)> = None;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=n {
            let phi = PI + PI * k as f64 / n as f64; // directions with n_z < 0
            let dir = [phi.cos(), phi.sin()];
            let v = oracle_ql(&a, dir).0.sqrt();
            let px = dir[0] / v;
            let vz = oracle_group(&a, [dir[0] / v, dir[1] / v])[1];
            if let Some((pphi, ppx)) = prev {
                if (ppx - pt) * (px - pt) <= 0.0 && vz < 0.0 {
                    let f = (pt - ppx) / (px - ppx);
                    best = Some((pphi + f * (phi - pphi), 0.0));
                }
            }
            prev = Some((phi, px));
        }
        let (phi, _) = best.expect("oracle finds the transmitted point");
        let got = ev.p_out[1].atan2(ev.p_out[0]).rem_euclid(2.0 * PI);
        assert!((got - phi).abs().to_degrees() < 0.01, "γ = {gdeg}: {} vs {}", got.to_degrees(), phi.to_degrees());
    }
}

#[test]
fn mirror_symmetry_about_weld_centerline() {
    let s = weld_only();
    let o = opts(3.0);
    let a = trace(&s, [2.0, 28.0], 100f64.to_radians(), 2.0, &o).unwrap();
    let b = trace(&s, [-2.0, 28.0], 80f64.to_radians(), 2.0, &o).unwrap();
    for t in [0.5, 1.5, 2.5] {
        let (sa, sb) = (a.state_at_time(t).unwrap(), b.state_at_time(t).unwrap());
        assert!((sa.x[0] + sb.x[0]).abs() < 1e-6 && (sa.x[1] - sb.x[1]).abs() < 1e-6, "t = {t}");
    }
}

#[test]
fn paraxial_q_matches_neighbouring_rays() {
    let s = dmw_block(WeldDescription::Analytical);
    let o = opts(6.0);
    let g = 100f64.to_radians();
    let d = 1e-4;
    let c = trace(&s, [0.5, 28.0], g, 2.0, &o).unwrap();
    let p = trace(&s, [0.5, 28.0], g + d, 2.0, &o).unwrap();
    let m = trace(&s, [0.5, 28.0], g - d, 2.0, &o).unwrap();
    for t in [1.0, 2.5, 4.0, 5.5] {
        let sc = c.state_at_time(t).unwrap();
        let (sp, sm) = (p.state_at_time(t).unwrap(), m.state_at_time(t).unwrap());
        let fd = [(sp.x[0] - sm.x[0]) / (2.0 * d), (sp.x[1] - sm.x[1]) / (2.0 * d)];
        let err = (sc.q[0] - fd[0]).hypot(sc.q[1] - fd[1]) / fd[0].hypot(fd[1]);
        assert!(err < 0.02, "t = {t}: Q = {:?}, fd = {fd:?}", sc.q);
    }
}

fn integrate_weld(scheme: Scheme, dt: f64, total: f64) -> RayState {
    let s = weld_only();
    let cfg = StepConfig { scheme, ..StepConfig::default() };
    let mut st = initial_state([1.0, 25.0], 95f64.to_radians(), &s, 2.0).unwrap();
    let n = (total / dt).round() as usize;
    for _ in 0..n {
        st = step(&s, &st, dt, &cfg).unwrap();
    }
    st
}

fn order(scheme: Scheme, dts: [f64; 3]) -> f64 {
    let reference = integrate_weld(Scheme::Rk4, 0.0025, 1.0);
    let err = |dt: f64| {
        let s = integrate_weld(scheme, dt, 1.0);
        (s.x[0] - reference.x[0]).hypot(s.x[1] - reference.x[1])
    };
    let (e1, e2) = (err(dts[0]), err(dts[1]));
    (e1 / e2).log2()
}

#[test]
fn euler_is_first_order() {
    let k = order(Scheme::Euler, [0.02, 0.01, 0.005]);
    assert!((0.8..1.3).contains(&k), "order {k}");
}

#[test]
fn rk4_is_at_least_third_order() {
    let k = order(Scheme::Rk4, [0.2, 0.1, 0.05]);
    assert!(k >= 3.0, "order {k}");
}

#[test]
fn attenuation_over_ten_millimetres() {
    let m = ElasticMaterial::alloy_182();
    let region = Region::new("b", RegionKind::Weld, rect(-50.0, 50.0, 0.0, 30.0), m, OrientationSource::Constant(0.3));
    let s = Specimen::new("b", vec![region], 0.0, 30.0).unwrap();
    let ray = trace(&s, [0.0, 29.0], 1.2, 2.0, &opts(5.0)).unwrap();
    let st = ray
        .states
        .iter()
        .find(|st| (st.x[0]).hypot(st.x[1] - 29.0) >= 10.0)
        .copied()
        .unwrap_or(*ray.last());
    let x = ray.states[0].x;
    let dist = (st.x[0] - x[0]).hypot(st.x[1] - x[1]);
    assert!((st.atten_db / dist * 10.0 - 2.92).abs() < 1e-9);
}

#[test]
fn eikonal_holds_along_weld_rays() {
    let s = dmw_block(WeldDescription::Analytical);
    for gdeg in [60.0, 90.0, 120.0] {
        let ray = trace(&s, [-1.0, 29.0], f64::to_radians(gdeg), 2.0, &opts(15.0)).unwrap();
        for st in &ray.states {
            assert!(eikonal_residual(&s, st) <= 1e-5, "{}", eikonal_residual(&s, st));
        }
    }
}

#[test]
fn slowness_rate_matches_gradient_contraction() {
    let s = dmw_block(WeldDescription::Analytical);
    let st = initial_state([1.5, 12.0], 1.1, &s, 2.0).unwrap();
    let d = derivatives(&st, &s, &StepConfig::default()).unwrap();
    let grad = s.stiffness_gradient(1.5, 12.0, 0.05).unwrap();
    let a = s.regions[st.region].stiffness_at(1.5, 12.0);
    let (_, g) = oracle_ql(&a, st.p);
    let p3 = [st.p[0], 0.0, st.p[1]];
    for n in 0..2 {
        let mut c = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        c += grad[n].tensor(i, j, k, l) * 1e-6 * p3[j] * p3[l] * g[i] * g[k];
                    }
                }
            }
        }
        assert!((d.dp[n] + 0.5 * c).abs() < 1e-9 + 1e-6 * c.abs(), "{n}: {} vs {}", d.dp[n], -0.5 * c);
    }
}

#[test]
fn homogeneous_anisotropic_spreading_matches_group_velocity_fan() {
    let m = ElasticMaterial::alloy_182();
    let region = Region::new("b", RegionKind::Weld, rect(-50.0, 50.0, 0.0, 30.0), m, OrientationSource::Constant(0.7));
    let s = Specimen::new("b", vec![region], 0.0, 30.0).unwrap();
    let a = s.regions[0].stiffness_at(0.0, 0.0);
    let g = 1.3;
    let group = |gm: f64| {
        let n = takeoff_direction(gm);
        let v = oracle_ql(&a, n).0.sqrt();
        oracle_group(&a, [n[0] / v, n[1] / v])
    };
    let h = 1e-5;
    let (vp, vm) = (group(g + h), group(g - h));
    let dv = [(vp[0] - vm[0]) / (2.0 * h), (vp[1] - vm[1]) / (2.0 * h)];
    let ray = trace(&s, [0.0, 29.0], g, 2.0, &opts(3.0)).unwrap();
    let st = ray.state_at_time(2.0).unwrap();
    for k in 0..2 {
        assert!((st.q[k] - 2.0 * dv[k]).abs() < 1e-4 * dv[0].hypot(dv[1]), "{k}: {} vs {}", st.q[k], 2.0 * dv[k]);
    }
}

/// Time of the ray from `from` passing through `to`, by bracketing the miss.
fn shoot(s: &Specimen, from: [f64; 2], to: [f64; 2], lo: f64, hi: f64) -> f64 {
    let o = opts(20.0);
    let miss = |g: f64| {
        let r = trace(s, from, g, 2.0, &o).unwrap();
        let (_, i, f) = r.closest_approach(to);
        let st = r.interpolate(i, f);
        let v = r.states[i + 1].x;
        let dir = [v[0] - r.states[i].x[0], v[1] - r.states[i].x[1]];
        let side = dir[0] * (to[1] - st.x[1]) - dir[1] * (to[0] - st.x[0]);
        (side, st.t)
    };
    let n = 200;
    let mut prev = (lo, miss(lo).0);
    for k in 1..=n {
        let g = lo + (hi - lo) * k as f64 / n as f64;
        let m = miss(g).0;
        if m.signum() != prev.1.signum() {
            let (mut a, mut b) = (prev.0, g);
            let fa = prev.1;
            for _ in 0..60 {
                let c = 0.5 * (a + b);
                if miss(c).0.signum() == fa.signum() {
                    a = c;
                } else {
                    b = c;
                }
            }
            return miss(0.5 * (a + b)).1;
        }
        prev = (g, m);
    }
    panic!("no ray connects the points");
}

#[test]
fn travel_time_is_reciprocal() {
    let s = dmw_block(WeldDescription::Analytical);
    let a = [-14.0, 29.0];
    let b = [4.0, 4.0];
    let t_ab = shoot(&s, a, b, 0.2, 1.4);
    let t_ba = shoot(&s, b, a, -3.0, -1.8);
    assert!((t_ab - t_ba).abs() < 2e-3, "{t_ab} vs {t_ba}");
}

#[test]
fn step_refuses_to_leave_region() {
    let s = block(5.9);
    let st = initial_state([0.0, 29.9], -FRAC_PI_2, &s, 2.0).unwrap();
    assert!(step(&s, &st, 0.1, &StepConfig::default()).is_err());
    assert!(step(&s, &st, 0.01, &StepConfig::default()).is_ok());
}

#[test]
fn gradient_stencil_at_border_is_reported() {
    let s = dmw_block(WeldDescription::Analytical);
    let st = initial_state([4.40, 0.5], 1.0, &s, 2.0).unwrap();
    assert!(matches!(derivatives(&st, &s, &StepConfig::default()), Err(crate::Error::GradientUnavailable { .. })));
}

#[test]
fn source_outside_specimen_is_rejected() {
    assert!(initial_state([0.0, 31.0], 1.0, &block(5.9), 2.0).is_err());
}

#[test]
fn sign_convention_flag_changes_paraxial_slowness() {
    let s = weld_only();
    let st = initial_state([1.0, 20.0], 1.3, &s, 2.0).unwrap();
    let st = RayState { q: [0.3, 0.1], ..st };
    let a = derivatives(&st, &s, &StepConfig::default()).unwrap();
    let b = derivatives(&st, &s, &StepConfig { positive_paraxial_sign: true, ..StepConfig::default() }).unwrap();
    assert!((a.dpp[0] + b.dpp[0]).abs() < 1e-15 && a.dpp[0] != 0.0);
}

#[test]
fn ray_dump_has_expected_columns() {
    let s = block(5.9);
    let ray = trace(&s, [0.0, 29.0], 1.0, 2.0, &opts(1.0)).unwrap();
    let mut buf = Vec::new();
    io::write_rays(&mut buf, &[ray.clone()], &s).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("ray_id,T_us,x_mm,z_mm,px_s_per_mm,pz_s_per_mm,Qx,Qz,Px,Pz,atten_db,region\n"));
    let mut ev = Vec::new();
    io::write_events(&mut ev, &[ray]).unwrap();
    assert!(String::from_utf8(ev).unwrap().starts_with("ray_id,event_type,T_us,x_mm,z_mm"));
}
