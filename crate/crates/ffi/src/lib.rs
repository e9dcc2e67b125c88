//! C ABI over `triland`.
//!
//! Every fallible function returns a [`TrilandStatus`] and writes its result
//! through an out-pointer that is left untouched on failure. The message for
//! the most recent failure on the calling thread is available from
//! [`triland_last_error_message`]. Panics never cross the boundary.
//!
//! Handles (`TrilandScenario`, `TrilandEpisode`) are opaque; release them with
//! the matching `_free` function. Freeing NULL is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use triland::design;
use triland::detection::VoltageTriplet;
use triland::geometry::{ArrayGeometry, Vec3};
use triland::guidance::{
    self, Frame, GuidanceConfig, Rotation, Sector, SectorDecision, Translation,
};
use triland::scenario::ScenarioFile;
use triland::sim::{self, Episode, EpisodeMetrics, Scenario, TraceRecord};
use triland::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrilandStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Unbounded = 4,
    Scenario = 5,
    Io = 6,
    Invariant = 7,
    OutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrilandVec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrilandPhaseTriplet {
    pub th12: f64,
    pub th23: f64,
    pub th31: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrilandVoltages {
    pub v12: f64,
    pub v23: f64,
    pub v31: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrilandRadiusExtremes {
    pub r_min: f64,
    pub phi_min: f64,
    /// On the forward axis.
    pub r_max: f64,
    pub r_peak: f64,
    pub phi_peak: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrilandSector {
    S1a = 0,
    S1b = 1,
    S2a = 2,
    S2b = 3,
    S3a = 4,
    S3b = 5,
    Center = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrilandRotation {
    None = 0,
    Left = 1,
    Right = 2,
    Left60 = 3,
    Right60 = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrilandTranslation {
    None = 0,
    Forward = 1,
    Backward = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrilandDecision {
    pub sector: TrilandSector,
    pub rotation: TrilandRotation,
    pub translation: TrilandTranslation,
    pub locked: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TrilandMetrics {
    pub locked: bool,
    pub on_target: bool,
    pub left_tracking_area: bool,
    /// False when the episode never locked; `time_to_first_lock` is then 0.
    pub has_first_lock: bool,
    pub time_to_first_lock: f64,
    pub final_horizontal_error: f64,
    pub final_altitude: f64,
    pub path_length: f64,
    pub duration: f64,
    pub ticks: u64,
    pub count_left: u64,
    pub count_right: u64,
    pub count_left60: u64,
    pub count_right60: u64,
    pub count_forward: u64,
    pub count_backward: u64,
    pub count_lock: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrilandTraceRecord {
    pub time: f64,
    pub lp_offset: TrilandVec3,
    pub yaw_deg: f64,
    pub raw: TrilandVoltages,
    pub zeroed: TrilandVoltages,
    pub codes: [u32; 3],
    pub decision: TrilandDecision,
}

/// Opaque simulation scenario.
pub struct TrilandScenario(Scenario);

/// Opaque finished episode.
pub struct TrilandEpisode(Episode);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TrilandStatus {
    match e {
        Error::Domain(_) => TrilandStatus::Domain,
        Error::InvalidParameter(_) => TrilandStatus::InvalidArgument,
        Error::Unbounded { .. } => TrilandStatus::Unbounded,
        Error::Scenario(_) => TrilandStatus::Scenario,
        Error::Io(_) => TrilandStatus::Io,
        Error::Invariant(_) | Error::EmptyCalibration => TrilandStatus::Invariant,
    }
}

struct Failure(TrilandStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(TrilandStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, writes its value to `out` on success and records failures.
fn guarded<T>(out: *mut T, f: impl FnOnce() -> Result<T, Failure>) -> TrilandStatus {
    if out.is_null() {
        set_last_error("output pointer is NULL".into());
        return TrilandStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            // SAFETY: `out` is non-null and the caller guarantees it is valid for writes.
            unsafe { out.write(v) };
            TrilandStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            TrilandStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            TrilandStatus::InvalidArgument,
            format!("{what} is not UTF-8"),
        )
    })
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn sector(s: Sector) -> TrilandSector {
    match s {
        Sector::S1a => TrilandSector::S1a,
        Sector::S1b => TrilandSector::S1b,
        Sector::S2a => TrilandSector::S2a,
        Sector::S2b => TrilandSector::S2b,
        Sector::S3a => TrilandSector::S3a,
        Sector::S3b => TrilandSector::S3b,
        Sector::Center => TrilandSector::Center,
    }
}

fn rotation(r: Rotation) -> TrilandRotation {
    match r {
        Rotation::None => TrilandRotation::None,
        Rotation::Left => TrilandRotation::Left,
        Rotation::Right => TrilandRotation::Right,
        Rotation::Left60 => TrilandRotation::Left60,
        Rotation::Right60 => TrilandRotation::Right60,
    }
}

fn translation(t: Translation) -> TrilandTranslation {
    match t {
        Translation::None => TrilandTranslation::None,
        Translation::Forward => TrilandTranslation::Forward,
        Translation::Backward => TrilandTranslation::Backward,
    }
}

fn decision(d: &SectorDecision) -> TrilandDecision {
    TrilandDecision {
        sector: sector(d.sector),
        rotation: rotation(d.rotation),
        translation: translation(d.translation),
        locked: d.locked,
    }
}

fn voltages(v: &VoltageTriplet) -> TrilandVoltages {
    TrilandVoltages {
        v12: v.v12,
        v23: v.v23,
        v31: v.v31,
    }
}

fn metrics(m: &EpisodeMetrics) -> TrilandMetrics {
    let c = &m.command_counts;
    TrilandMetrics {
        locked: m.locked,
        on_target: m.on_target,
        left_tracking_area: m.left_tracking_area,
        has_first_lock: m.time_to_first_lock.is_some(),
        time_to_first_lock: m.time_to_first_lock.unwrap_or(0.0),
        final_horizontal_error: m.final_horizontal_error,
        final_altitude: m.final_altitude,
        path_length: m.path_length,
        duration: m.duration,
        ticks: m.ticks,
        count_left: c.left,
        count_right: c.right,
        count_left60: c.left60,
        count_right60: c.right60,
        count_forward: c.forward,
        count_backward: c.backward,
        count_lock: c.lock,
    }
}

fn trace_record(r: &TraceRecord) -> TrilandTraceRecord {
    let lp = r.pose.lp_offset();
    TrilandTraceRecord {
        time: r.time,
        lp_offset: TrilandVec3 {
            x: lp.x,
            y: lp.y,
            z: lp.z,
        },
        yaw_deg: r.pose.drone_yaw(),
        raw: voltages(&r.raw),
        zeroed: voltages(&r.zeroed),
        codes: r.codes,
        decision: decision(&r.decision),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn triland_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn triland_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Phase shifts (deg, unwrapped) at the array for an LP offset in metres.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_phase_shifts(
    spacing_m: f64,
    frequency_hz: f64,
    lp_offset: TrilandVec3,
    out: *mut TrilandPhaseTriplet,
) -> TrilandStatus {
    guarded(out, || {
        let g = ArrayGeometry::new(spacing_m, frequency_hz)?;
        let lp = Vec3::new(lp_offset.x, lp_offset.y, lp_offset.z);
        if !lp.is_finite() {
            return Err(Failure(
                TrilandStatus::InvalidArgument,
                "LP offset must be finite".into(),
            ));
        }
        let t = g.phase_shifts_to(lp);
        Ok(TrilandPhaseTriplet {
            th12: t.th12,
            th23: t.th23,
            th31: t.th31,
        })
    })
}

/// Tracking-boundary radius, m, along LP azimuth `phi_deg`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_boundary_radius(
    spacing_m: f64,
    frequency_hz: f64,
    altitude_m: f64,
    phi_deg: f64,
    phase_limit_deg: f64,
    out: *mut f64,
) -> TrilandStatus {
    guarded(out, || {
        let g = ArrayGeometry::new(spacing_m, frequency_hz)?;
        Ok(design::boundary_radius(
            &g,
            altitude_m,
            phi_deg,
            phase_limit_deg,
        )?)
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_min_max_radius(
    spacing_m: f64,
    frequency_hz: f64,
    altitude_m: f64,
    phase_limit_deg: f64,
    out: *mut TrilandRadiusExtremes,
) -> TrilandStatus {
    guarded(out, || {
        let g = ArrayGeometry::new(spacing_m, frequency_hz)?;
        let e = design::min_max_radius(&g, altitude_m, phase_limit_deg)?;
        Ok(TrilandRadiusExtremes {
            r_min: e.r_min,
            phi_min: e.phi_min,
            r_max: e.r_max,
            r_peak: e.r_peak,
            phi_peak: e.phi_peak,
        })
    })
}

/// Cone half angle, deg.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_cone_half_angle(
    spacing_m: f64,
    frequency_hz: f64,
    phase_limit_deg: f64,
    out: *mut f64,
) -> TrilandStatus {
    guarded(out, || {
        let g = ArrayGeometry::new(spacing_m, frequency_hz)?;
        Ok(design::cone_half_angle(&g, phase_limit_deg)?)
    })
}

/// Sensitivity, mV/cm.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_sensitivity(
    spacing_m: f64,
    frequency_hz: f64,
    altitude_m: f64,
    delta_vd: f64,
    out: *mut f64,
) -> TrilandStatus {
    guarded(out, || {
        let g = ArrayGeometry::new(spacing_m, frequency_hz)?;
        Ok(design::sensitivity(&g, altitude_m, delta_vd)?)
    })
}

/// Sector decision for zeroed voltages.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_classify(
    zeroed: TrilandVoltages,
    lock_threshold: f64,
    drone_frame: bool,
    out: *mut TrilandDecision,
) -> TrilandStatus {
    guarded(out, || {
        let config = GuidanceConfig {
            lock_threshold,
            frame: if drone_frame {
                Frame::DroneMoves
            } else {
                Frame::LpMoves
            },
        };
        config.validate()?;
        let v = VoltageTriplet::new(zeroed.v12, zeroed.v23, zeroed.v31);
        if !v.as_array().iter().all(|x| x.is_finite()) {
            return Err(Failure(
                TrilandStatus::InvalidArgument,
                "voltages must be finite".into(),
            ));
        }
        Ok(decision(&guidance::classify(&v, &config)))
    })
}

/// Parses a TOML scenario.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_scenario_from_toml(
    toml: *const c_char,
    out: *mut *mut TrilandScenario,
) -> TrilandStatus {
    guarded(out, || {
        let text = c_str(toml, "toml")?;
        let s = ScenarioFile::parse(text)?.to_scenario()?;
        Ok(Box::into_raw(Box::new(TrilandScenario(s))))
    })
}

/// Loads a TOML scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_scenario_load(
    path: *const c_char,
    out: *mut *mut TrilandScenario,
) -> TrilandStatus {
    guarded(out, || {
        let p = c_str(path, "path")?;
        let s = ScenarioFile::load(Path::new(p))?.to_scenario()?;
        Ok(Box::into_raw(Box::new(TrilandScenario(s))))
    })
}

/// # Safety
/// `scenario` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn triland_scenario_set_seed(
    scenario: *mut TrilandScenario,
    seed: u64,
) -> TrilandStatus {
    match scenario.as_mut() {
        Some(s) => {
            s.0.rng_seed = seed;
            TrilandStatus::Ok
        }
        None => {
            set_last_error("scenario is NULL".into());
            TrilandStatus::NullPointer
        }
    }
}

/// # Safety
/// `scenario` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn triland_scenario_free(scenario: *mut TrilandScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Zeroing references from `cycles` centred acquisitions.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_calibrate_fixture(
    scenario: *const TrilandScenario,
    cycles: u32,
    out: *mut TrilandVoltages,
) -> TrilandStatus {
    guarded(out, || {
        let s = handle(scenario, "scenario")?;
        let r = sim::calibrate_fixture(&s.0, cycles)?;
        Ok(TrilandVoltages {
            v12: r.ref12,
            v23: r.ref23,
            v31: r.ref31,
        })
    })
}

/// Runs one episode.
///
/// # Safety
/// `scenario` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_simulate(
    scenario: *const TrilandScenario,
    out: *mut *mut TrilandEpisode,
) -> TrilandStatus {
    guarded(out, || {
        let s = handle(scenario, "scenario")?;
        Ok(Box::into_raw(Box::new(TrilandEpisode(sim::run(&s.0)?))))
    })
}

/// # Safety
/// `episode` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_episode_metrics(
    episode: *const TrilandEpisode,
    out: *mut TrilandMetrics,
) -> TrilandStatus {
    guarded(out, || Ok(metrics(&handle(episode, "episode")?.0.metrics)))
}

/// # Safety
/// `episode` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_episode_trace_len(
    episode: *const TrilandEpisode,
    out: *mut usize,
) -> TrilandStatus {
    guarded(out, || Ok(handle(episode, "episode")?.0.trace.len()))
}

/// # Safety
/// `episode` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn triland_episode_trace_record(
    episode: *const TrilandEpisode,
    index: usize,
    out: *mut TrilandTraceRecord,
) -> TrilandStatus {
    guarded(out, || {
        let trace = &handle(episode, "episode")?.0.trace;
        trace.get(index).map(trace_record).ok_or_else(|| {
            Failure(
                TrilandStatus::OutOfRange,
                format!("trace index {index} >= length {}", trace.len()),
            )
        })
    })
}

/// # Safety
/// `episode` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn triland_episode_free(episode: *mut TrilandEpisode) {
    if !episode.is_null() {
        drop(Box::from_raw(episode));
    }
}
