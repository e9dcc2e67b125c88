use proptest::prelude::*;

use triland::design::{boundary_radius, DEFAULT_PHASE_LIMIT};
use triland::detection::{
    code_to_volts, detect, quantize, AdcModel, DetectorModel, Noiseless, VoltageTriplet,
};
use triland::geometry::{ArrayGeometry, RelativePose, Vec3};
use triland::guidance::{classify, geometric_sector, invert_frame, Frame, GuidanceConfig, Sector};
use triland::sim::{run, Scenario};

const CASES: u32 = 1000;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        ..ProptestConfig::default()
    }
}

fn lp_offset() -> impl Strategy<Value = Vec3> {
    (-2.0..2.0f64, -2.0..2.0f64, 0.05..20.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, -z))
}

fn geometry() -> impl Strategy<Value = ArrayGeometry> {
    (0.02..0.3f64, 0.5e9..6e9f64).prop_map(|(d, f)| ArrayGeometry::new(d, f).unwrap())
}

fn far_field_phases(g: &ArrayGeometry, lp: Vec3) -> [f64; 3] {
    // Plane-wave limit: dd_ij = (P_j - P_i) . u for unit vector u towards the LP.
    let u = lp * (1.0 / lp.norm());
    let p = g.antenna_positions();
    let k = g.degrees_per_metre();
    [(0, 1), (1, 2), (2, 0)].map(|(i, j)| k * (p[j] - p[i]).dot(u))
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn triplet_sums_to_zero(g in geometry(), lp in lp_offset()) {
        prop_assert!(g.path_differences_to(lp).sum().abs() <= 1e-12);
        prop_assert!(g.phase_shifts_to(lp).sum().abs() <= 1e-9);
    }

    #[test]
    fn rotation_by_120_permutes_cyclically(lp in lp_offset(), k in -3i32..3) {
        let g = ArrayGeometry::default();
        let t = g.phase_shifts_to(lp);
        let expected = match k.rem_euclid(3) {
            0 => [t.th12, t.th23, t.th31],
            1 => [t.th23, t.th31, t.th12],
            _ => [t.th31, t.th12, t.th23],
        };
        let r = g.phase_shifts_to(lp.rotate_z(120.0 * k as f64)).as_array();
        for (a, b) in r.iter().zip(expected) {
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn mirror_across_forward_axis(lp in lp_offset()) {
        // x -> -x swaps antennas 1 and 2: th12 flips sign, th23 <-> -th31.
        let g = ArrayGeometry::default();
        let t = g.phase_shifts_to(lp);
        let m = g.phase_shifts_to(Vec3::new(-lp.x, lp.y, lp.z));
        prop_assert!((m.th12 + t.th12).abs() <= 1e-9);
        prop_assert!((m.th23 + t.th31).abs() <= 1e-9);
        prop_assert!((m.th31 + t.th23).abs() <= 1e-9);
    }

    #[test]
    fn phase_is_linear_in_frequency(lp in lp_offset(), d in 0.02..0.3f64, f in 0.5e9..3e9f64) {
        let a = ArrayGeometry::new(d, f).unwrap().phase_shifts_to(lp);
        let b = ArrayGeometry::new(d, 2.0 * f).unwrap().phase_shifts_to(lp);
        for (x, y) in a.as_array().iter().zip(b.as_array()) {
            prop_assert!((2.0 * x - y).abs() <= 1e-9 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn far_field_limit_agrees(g in geometry(), az in 0.0..360.0f64, tilt in 0.0..60.0f64) {
        let z = 1000.0 * g.spacing_d();
        let r = z * tilt.to_radians().tan();
        let lp = Vec3::new(r * az.to_radians().cos(), r * az.to_radians().sin(), -z);
        let exact = g.phase_shifts_to(lp).as_array();
        let approx = far_field_phases(&g, lp);
        let scale = g.degrees_per_metre() * g.spacing_d();
        for (a, b) in exact.iter().zip(approx) {
            prop_assert!((a - b).abs() <= 2e-3 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn yaw_leaves_phases_unchanged(lp in lp_offset(), yaw in -360.0..360.0f64) {
        let g = ArrayGeometry::default();
        let a = RelativePose::new(lp, 0.0).unwrap();
        let b = RelativePose::new(lp, yaw).unwrap();
        prop_assert_eq!(
            triland::geometry::phase_shifts(&g, &a),
            triland::geometry::phase_shifts(&g, &b)
        );
    }

    #[test]
    fn boundary_scales_with_altitude(z in 0.3..20.0f64, az in 0.0..360.0f64, k in 1.5..4.0f64) {
        let g = ArrayGeometry::default();
        // Linear once the array is a few spacings away; near-field bends it below that.
        let a = boundary_radius(&g, z, az, DEFAULT_PHASE_LIMIT).unwrap();
        let b = boundary_radius(&g, k * z, az, DEFAULT_PHASE_LIMIT).unwrap();
        prop_assert!((b / a - k).abs() <= 0.02 * k, "{a} {b}");
        let edge = Vec3::new(a * az.to_radians().cos(), a * az.to_radians().sin(), -z);
        prop_assert!((g.max_abs_phase_to(edge) - DEFAULT_PHASE_LIMIT).abs() <= 1e-6);
    }

    #[test]
    fn detector_monotone(a in -80.0..80.0f64, b in -80.0..80.0f64) {
        let m = DetectorModel::noiseless();
        let (va, vb) = (detect(a, 0.0, &m, &mut Noiseless), detect(b, 0.0, &m, &mut Noiseless));
        if a < b {
            prop_assert!(va < vb);
        } else if a > b {
            prop_assert!(va > vb);
        }
    }

    #[test]
    fn detector_odd_about_center(t in -80.0..80.0f64) {
        let m = DetectorModel::noiseless();
        let s = detect(t, 0.0, &m, &mut Noiseless) + detect(-t, 0.0, &m, &mut Noiseless);
        prop_assert!((s - 2.0 * m.v_center).abs() <= 1e-12);
    }

    #[test]
    fn detector_stays_in_rails(t in -720.0..720.0f64) {
        let m = DetectorModel::noiseless();
        let v = detect(t, 0.0, &m, &mut Noiseless);
        prop_assert!((m.v_min..=m.v_max).contains(&v));
    }

    #[test]
    fn quantizer_half_lsb(bits in 4u32..16, v in 0.0..1.0f64) {
        let adc = AdcModel { bits, ..AdcModel::default() };
        let x = v * adc.full_scale;
        let code = quantize(x, &adc);
        let back = code_to_volts(code, &adc).unwrap();
        prop_assert!((back - x).abs() <= adc.lsb() / 2.0 + 1e-12);
    }

    #[test]
    fn classifier_scale_invariant(
        v12 in -1.3..1.3f64, v23 in -1.3..1.3f64, v31 in -1.3..1.3f64, k in 0.1..10.0f64
    ) {
        let cfg = GuidanceConfig::default();
        let v = VoltageTriplet::new(v12, v23, v31);
        let scaled = GuidanceConfig { lock_threshold: cfg.lock_threshold * k, ..cfg };
        prop_assert_eq!(classify(&v, &cfg), classify(&v.scale(k), &scaled));
    }

    #[test]
    fn classifier_total(v12 in -3.0..3.0f64, v23 in -3.0..3.0f64, v31 in -3.0..3.0f64) {
        let v = VoltageTriplet::new(v12, v23, v31);
        let d = classify(&v, &GuidanceConfig::default());
        prop_assert_eq!(d.locked, d.sector == Sector::Center);
        prop_assert_eq!(d.locked, v.max_abs() <= 0.1);
        let drone = classify(&v, &GuidanceConfig { frame: Frame::DroneMoves, ..GuidanceConfig::default() });
        prop_assert_eq!(drone, invert_frame(d));
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn simulation_is_deterministic(r in 0.0..0.18f64, az in 0.0..360.0f64, seed in any::<u64>()) {
        let pose = RelativePose::from_polar(r, az, 0.46, 0.0).unwrap();
        let s = Scenario { rng_seed: seed, max_time: 0.3, ..Scenario::new(pose) };
        prop_assert_eq!(run(&s).unwrap(), run(&s).unwrap());
    }

    #[test]
    fn frames_conserve_relative_trajectory(r in 0.0..0.18f64, az in 0.0..360.0f64, seed in any::<u64>()) {
        let pose = RelativePose::from_polar(r, az, 0.46, 0.0).unwrap();
        let lp = Scenario { rng_seed: seed, max_time: 0.3, ..Scenario::new(pose) };
        let mut drone = lp.clone();
        drone.guidance.frame = Frame::DroneMoves;
        let (a, b) = (run(&lp).unwrap(), run(&drone).unwrap());
        prop_assert_eq!(a.trace.len(), b.trace.len());
        for (x, y) in a.trace.iter().zip(&b.trace) {
            prop_assert!((x.pose.lp_offset() - y.pose.lp_offset()).norm() <= 1e-12);
            prop_assert_eq!(invert_frame(x.decision), y.decision);
        }
    }
}

#[test]
fn classifier_matches_geometric_wedges() {
    // Noiseless detector voltages on a polar grid at 0.46 m, away from wedge
    // edges where the measured and geometric sectors legitimately differ.
    let g = ArrayGeometry::default();
    let m = DetectorModel::noiseless();
    let cfg = GuidanceConfig::default();
    let z = 0.46;
    let mut checked = 0;
    for ir in 1..=100 {
        let r = 0.04 + 0.15 * ir as f64 / 100.0;
        for ia in 0..120 {
            let az = 0.5 + ia as f64 * 3.0;
            if (az.rem_euclid(60.0) - 30.0).abs() > 27.0 {
                continue;
            }
            let lp = Vec3::new(r * az.to_radians().cos(), r * az.to_radians().sin(), -z);
            let th = g.phase_shifts_to(lp);
            // Detector sees the carrier phase difference, the negative of th_ij.
            let v = VoltageTriplet::from_array(
                th.as_array()
                    .map(|t| detect(-t, 0.0, &m, &mut Noiseless) - m.v_center),
            );
            let d = classify(&v, &cfg);
            assert_eq!(d.sector, geometric_sector(az), "r = {r}, az = {az}");
            checked += 1;
        }
    }
    assert!(checked >= 10_000, "{checked}");
}
