use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use triland_ffi::*;

fn last_error() -> String {
    let p = triland_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(toml: &str) -> *mut TrilandScenario {
    let text = CString::new(toml).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { triland_scenario_from_toml(text.as_ptr(), &mut s) },
        TrilandStatus::Ok
    );
    assert!(!s.is_null());
    s
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(triland_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn design_functions() {
    let mut ext = TrilandRadiusExtremes::default();
    assert_eq!(
        unsafe { triland_min_max_radius(0.07, 2.46e9, 10.0, 80.0, &mut ext) },
        TrilandStatus::Ok
    );
    assert!((ext.r_min - 4.19).abs() <= 0.02 && (ext.r_max - 4.99).abs() <= 0.02);

    let mut r = 0.0;
    assert_eq!(
        unsafe { triland_boundary_radius(0.07, 2.46e9, 0.46, 90.0, 80.0, &mut r) },
        TrilandStatus::Ok
    );
    assert!((r - 0.228).abs() <= 0.005);

    let mut cone = 0.0;
    assert_eq!(
        unsafe { triland_cone_half_angle(0.07, 2.45e9, 80.0, &mut cone) },
        TrilandStatus::Ok
    );
    assert!((cone - 26.52).abs() <= 0.15);

    let mut sens = 0.0;
    assert_eq!(
        unsafe { triland_sensitivity(0.07, 2.46e9, 10.0, 2.6, &mut sens) },
        TrilandStatus::Ok
    );
    assert!((sens - 2.605).abs() <= 0.02);
}

#[test]
fn phase_triplet_sums_to_zero() {
    let mut t = TrilandPhaseTriplet::default();
    let lp = TrilandVec3 {
        x: 0.3,
        y: -0.1,
        z: -1.0,
    };
    assert_eq!(
        unsafe { triland_phase_shifts(0.07, 2.46e9, lp, &mut t) },
        TrilandStatus::Ok
    );
    assert!((t.th12 + t.th23 + t.th31).abs() < 1e-9);
    assert!(t.th12 != 0.0);
}

#[test]
fn errors_carry_status_and_message() {
    let mut r = 0.0;
    let s = unsafe { triland_boundary_radius(0.07, 2.46e9, -1.0, 0.0, 80.0, &mut r) };
    assert_eq!(s, TrilandStatus::Domain);
    assert!(last_error().contains("altitude"));
    assert_eq!(r, 0.0, "output untouched on failure");

    let s = unsafe { triland_boundary_radius(0.02, 2.46e9, 1.0, 0.0, 80.0, &mut r) };
    assert_eq!(s, TrilandStatus::Unbounded);

    let s = unsafe { triland_sensitivity(0.07, 2.46e9, 10.0, 2.6, ptr::null_mut()) };
    assert_eq!(s, TrilandStatus::NullPointer);

    let mut h = ptr::null_mut();
    let s = unsafe { triland_scenario_from_toml(ptr::null(), &mut h) };
    assert_eq!(s, TrilandStatus::NullPointer);
    assert!(h.is_null());

    let bad = CString::new("[geometry]\nspacing = 1\n").unwrap();
    assert_eq!(
        unsafe { triland_scenario_from_toml(bad.as_ptr(), &mut h) },
        TrilandStatus::Scenario
    );
    assert!(h.is_null());

    let missing = CString::new("/no/such/scenario.toml").unwrap();
    assert_eq!(
        unsafe { triland_scenario_load(missing.as_ptr(), &mut h) },
        TrilandStatus::Io
    );
}

#[test]
fn classify_golden_rows() {
    let mut d = TrilandDecision {
        sector: TrilandSector::Center,
        rotation: TrilandRotation::None,
        translation: TrilandTranslation::None,
        locked: false,
    };
    let v = TrilandVoltages {
        v12: -0.18,
        v23: -0.45,
        v31: 0.62,
    };
    assert_eq!(
        unsafe { triland_classify(v, 0.1, false, &mut d) },
        TrilandStatus::Ok
    );
    assert_eq!(
        (d.sector, d.rotation, d.translation),
        (
            TrilandSector::S1a,
            TrilandRotation::Right,
            TrilandTranslation::Backward
        )
    );
    assert_eq!(
        unsafe { triland_classify(v, 0.1, true, &mut d) },
        TrilandStatus::Ok
    );
    assert_eq!(
        (d.rotation, d.translation),
        (TrilandRotation::Left, TrilandTranslation::Forward)
    );
    let lock = TrilandVoltages {
        v12: -0.02,
        v23: -0.04,
        v31: 0.05,
    };
    assert_eq!(
        unsafe { triland_classify(lock, 0.1, false, &mut d) },
        TrilandStatus::Ok
    );
    assert!(d.locked && d.sector == TrilandSector::Center);
    assert_eq!(
        unsafe { triland_classify(lock, 0.0, false, &mut d) },
        TrilandStatus::InvalidArgument
    );
}

#[test]
fn episode_lifecycle() {
    let s = scenario("[initial_pose]\nx_m = -0.10\ny_m = 0.12\naltitude_m = 0.46\n");
    assert_eq!(
        unsafe { triland_scenario_set_seed(s, 3) },
        TrilandStatus::Ok
    );

    let mut refs = TrilandVoltages::default();
    assert_eq!(
        unsafe { triland_calibrate_fixture(s, 50, &mut refs) },
        TrilandStatus::Ok
    );
    assert!((refs.v12 - 1.5).abs() < 0.02);

    let mut e = ptr::null_mut();
    assert_eq!(unsafe { triland_simulate(s, &mut e) }, TrilandStatus::Ok);
    let mut m = TrilandMetrics::default();
    assert_eq!(
        unsafe { triland_episode_metrics(e, &mut m) },
        TrilandStatus::Ok
    );
    assert!(m.locked && m.on_target && m.has_first_lock && !m.left_tracking_area);
    assert!(m.count_right60 > 0);

    let mut n = 0usize;
    assert_eq!(
        unsafe { triland_episode_trace_len(e, &mut n) },
        TrilandStatus::Ok
    );
    assert_eq!(n as u64, m.ticks);
    let mut last = None;
    for i in 0..n {
        let mut r = std::mem::MaybeUninit::<TrilandTraceRecord>::uninit();
        assert_eq!(
            unsafe { triland_episode_trace_record(e, i, r.as_mut_ptr()) },
            TrilandStatus::Ok
        );
        let r = unsafe { r.assume_init() };
        if let Some(t) = last {
            assert!(r.time > t);
        }
        last = Some(r.time);
        if i + 1 == n {
            assert!(r.decision.locked);
        }
    }
    let mut r = std::mem::MaybeUninit::<TrilandTraceRecord>::uninit();
    assert_eq!(
        unsafe { triland_episode_trace_record(e, n, r.as_mut_ptr()) },
        TrilandStatus::OutOfRange
    );

    unsafe {
        triland_episode_free(e);
        triland_scenario_free(s);
        triland_episode_free(ptr::null_mut());
        triland_scenario_free(ptr::null_mut());
    }
    assert_eq!(
        unsafe { triland_scenario_set_seed(ptr::null_mut(), 1) },
        TrilandStatus::NullPointer
    );
}

#[test]
fn same_seed_same_episode() {
    let s = scenario("[initial_pose]\nx_m = 0.05\ny_m = -0.1\naltitude_m = 0.31\n");
    let run = || {
        let mut e = ptr::null_mut();
        assert_eq!(unsafe { triland_simulate(s, &mut e) }, TrilandStatus::Ok);
        let mut m = TrilandMetrics::default();
        unsafe { triland_episode_metrics(e, &mut m) };
        unsafe { triland_episode_free(e) };
        m
    };
    assert_eq!(run(), run());
    unsafe { triland_scenario_free(s) };
}

#[test]
fn header_compiles_and_links_from_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("triland.h").exists());
    let Some(cc) = which_cc() else {
        eprintln!("no C compiler found; header check skipped");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use_header.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "triland.h"
int main(void) {
    TrilandRadiusExtremes e;
    if (triland_min_max_radius(0.07, 2.46e9, 10.0, 80.0, &e) != TRILAND_STATUS_OK) return 1;
    double r;
    if (triland_boundary_radius(0.07, 2.46e9, -1.0, 0.0, 80.0, &r) != TRILAND_STATUS_DOMAIN) return 2;
    if (triland_last_error_message() == NULL) return 3;
    TrilandScenario *sc = NULL;
    if (triland_scenario_from_toml("[initial_pose]\naltitude_m = 0.46\n", &sc) != TRILAND_STATUS_OK) return 4;
    TrilandEpisode *ep = NULL;
    if (triland_simulate(sc, &ep) != TRILAND_STATUS_OK) return 5;
    TrilandMetrics m;
    triland_episode_metrics(ep, &m);
    triland_episode_free(ep);
    triland_scenario_free(sc);
    printf("%.2f %.2f %d\n", e.r_min * 100.0, e.r_max * 100.0, (int)m.locked);
    return m.locked ? 0 : 6;
}
"#,
    )
    .unwrap();
    let check = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        check.status.success(),
        "{}",
        String::from_utf8_lossy(&check.stderr)
    );

    // The static library sits next to the deps directory holding this test.
    let exe = std::env::current_exe().unwrap();
    let lib = exe
        .parent()
        .and_then(Path::parent)
        .map(|d| d.join("libtriland_ffi.a"));
    let Some(lib) = lib.filter(|l| l.exists()) else {
        eprintln!("static library not built; link check skipped");
        return;
    };
    let bin = dir.path().join("use_header");
    let link = Command::new(cc)
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        link.status.success(),
        "{}",
        String::from_utf8_lossy(&link.stderr)
    );
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "419.55 499.08 1\n");
}

fn which_cc() -> Option<&'static str> {
    ["cc", "gcc", "clang"].into_iter().find(|c| {
        Command::new(c)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
    })
}
