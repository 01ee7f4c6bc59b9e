use proptest::prelude::*;
use weldray::elastodynamics::{solve_christoffel, ElasticMaterial, Mode};
use weldray::inspection::{delay_law, ProbeConfig};
use weldray::weld::{ogilvy_angle, OgilvyParams};

fn ql_speed(theta: f64, phi: f64) -> f64 {
    let n = [phi.cos(), 0.0, phi.sin()];
    solve_christoffel(&ElasticMaterial::alloy_182(), theta, &n).unwrap().phase_velocity(Mode::QL)
}

proptest! {
    #[test]
    fn orientation_law_is_antisymmetric(x in 0.01f64..40.0, z in 0.0f64..30.0) {
        let p = OgilvyParams::REFERENCE;
        prop_assert_eq!(ogilvy_angle(&p, -x, z), -ogilvy_angle(&p, x, z));
        prop_assert!(ogilvy_angle(&p, x, z) > 0.0 && ogilvy_angle(&p, x, z) < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn phase_speed_depends_on_angle_to_grain_only(theta in -1.5f64..1.5, phi in -3.1f64..3.1, shift in -1.0f64..1.0) {
        let a = ql_speed(theta, phi);
        prop_assert!((a - ql_speed(theta + shift, phi + shift)).abs() < 1e-9 * a);
        prop_assert!((a - ql_speed(theta + std::f64::consts::PI, phi)).abs() < 1e-9 * a);
    }

    #[test]
    fn mirrored_steering_reverses_delays(steer in -80.0f64..80.0, pitch in 0.1f64..2.0, n in 2usize..128) {
        let probe = ProbeConfig { element_count: n, pitch_mm: pitch, element_width_mm: 0.9 * pitch, steering_deg: steer, aperture: [0, n - 1], ..ProbeConfig::default() };
        let mirror = ProbeConfig { steering_deg: -steer, ..probe.clone() };
        let d = delay_law(&probe, 5900.0).unwrap();
        let m = delay_law(&mirror, 5900.0).unwrap();
        prop_assert_eq!(d.iter().copied().fold(f64::INFINITY, f64::min), 0.0);
        for (a, b) in d.iter().zip(m.iter().rev()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
