//! Tracking-boundary solver and array design curves.
//!
//! The tracking boundary at a given altitude is, for each azimuth, the
//! smallest horizontal range at which the first receiver pair reaches the
//! phase limit. Inside it all three phases are unambiguous.
//!
//! With exact path lengths the boundary has 120 deg symmetry plus a mirror
//! about the forward (`+y`) axis. The six lobes alternate slightly in size
//! when the array is not small compared with the altitude: lobes centred on
//! an antenna direction (90, 210, 330 deg) are a little shorter than those
//! between (30, 150, 270 deg). [`RadiusExtremes::r_max`] is the forward-axis
//! lobe, which is the design maximum quoted for the array; the largest lobe
//! is reported separately as [`RadiusExtremes::r_peak`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detection::AdcModel;
use crate::error::{ensure, Error, Result};
use crate::geometry::{ArrayGeometry, Vec3};

/// Practical unambiguous phase range of the detector, deg.
pub const DEFAULT_PHASE_LIMIT: f64 = 80.0;
/// Detector swing over +-80 deg, V.
pub const DEFAULT_DELTA_VD: f64 = 2.6;
/// Altitude-invariant quantities are evaluated at this multiple of the spacing.
pub const FAR_FIELD_ALTITUDE_FACTOR: f64 = 100.0;
/// Azimuth of the forward axis (towards antenna 3), deg.
pub const FORWARD_AZIMUTH: f64 = 90.0;

/// Bisection stops when the bracket is narrower than this fraction of the altitude.
const RADIUS_REL_TOL: f64 = 1e-9;
/// Pointing-angle step of the outward scan that brackets the first crossing, deg.
const SCAN_STEP_DEG: f64 = 0.25;
/// Search ceiling: ranges beyond `altitude * MAX_RANGE_FACTOR` count as unbounded.
const MAX_RANGE_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingBoundary {
    pub altitude: f64,
    pub phase_limit: f64,
    /// `(phi_deg, r_max_m)`, ascending in phi over [0, 360).
    pub samples: Vec<(f64, f64)>,
}

impl TrackingBoundary {
    /// Boundary radius at `phi_deg`, linearly interpolated between samples.
    pub fn radius_at(&self, phi_deg: f64) -> f64 {
        let n = self.samples.len();
        let phi = phi_deg.rem_euclid(360.0);
        let i = self.samples.partition_point(|&(p, _)| p <= phi);
        let (p0, r0) = if i == 0 {
            (self.samples[n - 1].0 - 360.0, self.samples[n - 1].1)
        } else {
            self.samples[i - 1]
        };
        let (p1, r1) = if i == n {
            (self.samples[0].0 + 360.0, self.samples[0].1)
        } else {
            self.samples[i]
        };
        if p1 == p0 {
            return r0;
        }
        r0 + (r1 - r0) * (phi - p0) / (p1 - p0)
    }

    pub fn contains(&self, lp: Vec3) -> bool {
        let phi = lp.y.atan2(lp.x).to_degrees();
        lp.horizontal_norm() <= self.radius_at(phi)
    }
}

/// Extremes of the tracking boundary over azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusExtremes {
    pub r_min: f64,
    pub phi_min: f64,
    /// Boundary radius along the forward axis.
    pub r_max: f64,
    /// Largest boundary radius over all azimuths.
    pub r_peak: f64,
    pub phi_peak: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub spacing_d: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// mV/cm
    pub sensitivity: f64,
    /// `(bits, cm per ADC step)` in the requested order.
    pub adc_step_distance: Vec<(u32, f64)>,
}

fn check_inputs(altitude: f64, phase_limit: f64) -> Result<()> {
    if !altitude.is_finite() || altitude <= 0.0 {
        return Err(Error::Domain(format!(
            "altitude must be positive, got {altitude}"
        )));
    }
    if !(phase_limit > 0.0 && phase_limit <= 90.0) {
        return Err(Error::Domain(format!(
            "phase limit must lie in (0, 90], got {phase_limit}"
        )));
    }
    Ok(())
}

fn lp_at(r: f64, phi_deg: f64, altitude: f64) -> Vec3 {
    let (s, c) = phi_deg.to_radians().sin_cos();
    Vec3::new(r * c, r * s, -altitude)
}

/// Smallest horizontal range at azimuth `phi` where a pair reaches `phase_limit`.
pub fn boundary_radius(
    geom: &ArrayGeometry,
    altitude: f64,
    phi: f64,
    phase_limit: f64,
) -> Result<f64> {
    check_inputs(altitude, phase_limit)?;
    let exceeds = |r: f64| geom.max_abs_phase_to(lp_at(r, phi, altitude)) >= phase_limit;
    let r_ceiling = MAX_RANGE_FACTOR * altitude;
    let theta_ceiling = MAX_RANGE_FACTOR.atan().to_degrees();

    // Walk outward in pointing angle so the first crossing is bracketed.
    let mut lo = 0.0;
    let mut hi = None;
    let mut theta = SCAN_STEP_DEG;
    while theta < theta_ceiling + SCAN_STEP_DEG {
        let r = (altitude * theta.min(theta_ceiling).to_radians().tan()).min(r_ceiling);
        if exceeds(r) {
            hi = Some(r);
            break;
        }
        lo = r;
        theta += SCAN_STEP_DEG;
    }
    let mut hi = hi.ok_or(Error::Unbounded {
        altitude,
        phi_deg: phi,
    })?;
    let tol = RADIUS_REL_TOL * altitude;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if exceeds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Boundary sampled every `step_deg` over [0, 360).
pub fn tracking_boundary(
    geom: &ArrayGeometry,
    altitude: f64,
    phase_limit: f64,
    step_deg: f64,
) -> Result<TrackingBoundary> {
    if !(step_deg > 0.0 && step_deg <= 360.0) {
        return Err(Error::Domain(format!(
            "azimuth step must lie in (0, 360], got {step_deg}"
        )));
    }
    let n = (360.0 / step_deg).round().max(1.0) as usize;
    let samples = (0..n)
        .map(|i| {
            let phi = i as f64 * step_deg;
            boundary_radius(geom, altitude, phi, phase_limit).map(|r| (phi, r))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackingBoundary {
        altitude,
        phase_limit,
        samples,
    })
}

/// Golden-section search for an extremum of `f` inside `[a, b]`.
fn golden_section(
    mut a: f64,
    mut b: f64,
    maximize: bool,
    f: impl Fn(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let sign = if maximize { -1.0 } else { 1.0 };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = sign * f(c)?;
    let mut fd = sign * f(d)?;
    while b - a > 1e-6 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = sign * f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = sign * f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

pub fn min_max_radius(
    geom: &ArrayGeometry,
    altitude: f64,
    phase_limit: f64,
) -> Result<RadiusExtremes> {
    let coarse = tracking_boundary(geom, altitude, phase_limit, 1.0)?;
    let radius = |phi: f64| boundary_radius(geom, altitude, phi, phase_limit);
    let by_r = |a: &&(f64, f64), b: &&(f64, f64)| a.1.total_cmp(&b.1);
    let &(phi_lo, _) = coarse
        .samples
        .iter()
        .min_by(by_r)
        .expect("non-empty boundary");
    let &(phi_hi, _) = coarse
        .samples
        .iter()
        .max_by(by_r)
        .expect("non-empty boundary");
    let (phi_min, r_min) = golden_section(phi_lo - 1.0, phi_lo + 1.0, false, radius)?;
    let (phi_peak, r_peak) = golden_section(phi_hi - 1.0, phi_hi + 1.0, true, radius)?;
    Ok(RadiusExtremes {
        r_min,
        phi_min: phi_min.rem_euclid(360.0),
        r_max: radius(FORWARD_AZIMUTH)?,
        r_peak,
        phi_peak: phi_peak.rem_euclid(360.0),
    })
}

/// Semi-vertical angle of the tracking cone at a given altitude, deg.
pub fn cone_half_angle_at(geom: &ArrayGeometry, phase_limit: f64, altitude: f64) -> Result<f64> {
    let r = boundary_radius(geom, altitude, FORWARD_AZIMUTH, phase_limit)?;
    Ok((r / altitude).atan().to_degrees())
}

/// Semi-vertical angle of the tracking cone in the far field, deg.
pub fn cone_half_angle(geom: &ArrayGeometry, phase_limit: f64) -> Result<f64> {
    cone_half_angle_at(
        geom,
        phase_limit,
        FAR_FIELD_ALTITUDE_FACTOR * geom.spacing_d(),
    )
}

/// Detector swing across the full tracking diameter, mV/cm.
pub fn sensitivity(geom: &ArrayGeometry, altitude: f64, delta_vd: f64) -> Result<f64> {
    if delta_vd.is_nan() || delta_vd <= 0.0 {
        return Err(Error::Domain(format!(
            "detector swing must be positive, got {delta_vd}"
        )));
    }
    let r_max = boundary_radius(geom, altitude, FORWARD_AZIMUTH, DEFAULT_PHASE_LIMIT)?;
    Ok(delta_vd * 1e3 / (2.0 * r_max * 1e2))
}

/// Horizontal radius, m, over which a `lock_threshold` V window spans at the
/// given altitude's sensitivity.
pub fn lock_region_radius(
    geom: &ArrayGeometry,
    altitude: f64,
    lock_threshold: f64,
    delta_vd: f64,
) -> Result<f64> {
    let volts_per_metre = sensitivity(geom, altitude, delta_vd)? * 0.1;
    Ok(lock_threshold / volts_per_metre)
}

/// Horizontal travel per ADC code change, cm/step.
pub fn adc_step_distance(sensitivity: f64, adc: &AdcModel) -> f64 {
    adc.lsb() * 1e3 / sensitivity
}

pub fn design_point(
    spacing_d: f64,
    altitude: f64,
    frequency: f64,
    bit_depths: &[u32],
) -> Result<DesignPoint> {
    let geom = ArrayGeometry::new(spacing_d, frequency)?;
    let ext = min_max_radius(&geom, altitude, DEFAULT_PHASE_LIMIT)?;
    let sens = DEFAULT_DELTA_VD * 1e3 / (2.0 * ext.r_max * 1e2);
    let adc_step_distance = bit_depths
        .iter()
        .map(|&bits| {
            let adc = AdcModel {
                bits,
                ..AdcModel::default()
            };
            adc.validate()
                .map(|_| (bits, self::adc_step_distance(sens, &adc)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DesignPoint {
        spacing_d,
        r_min: ext.r_min,
        r_max: ext.r_max,
        sensitivity: sens,
        adc_step_distance,
    })
}

/// One design point per spacing, in input order.
pub fn design_table(
    d_values: &[f64],
    altitude: f64,
    frequency: f64,
    bit_depths: &[u32],
) -> Result<Vec<DesignPoint>> {
    ensure(!d_values.is_empty(), || "spacing range is empty".into())?;
    ensure(d_values.windows(2).all(|w| w[1] > w[0]), || {
        "spacing range must be ascending".into()
    })?;
    d_values
        .par_iter()
        .map(|&d| design_point(d, altitude, frequency, bit_depths))
        .collect()
}
