//! Geometry of the equilateral tri-antenna and the landing point.
//!
//! Body frame: right-handed, array incenter at the origin, antennas in the
//! `z = 0` plane, `+y` pointing from the incenter towards antenna 3 (the
//! "forward" direction), `+z` up. The LP sits below the array (`z < 0`).
//! Azimuths are measured counterclockwise from `+x`, in degrees.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Receiver pairs in triplet order: (1,2), (2,3), (3,1), zero-based.
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn horizontal_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counterclockwise rotation about `+z`.
    pub fn rotate_z(self, angle_deg: f64) -> Vec3 {
        let (s, c) = angle_deg.to_radians().sin_cos();
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

/// Antenna spacing, carrier frequency and propagation speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    spacing_d: f64,
    frequency: f64,
    propagation_speed: f64,
}

impl Default for ArrayGeometry {
    /// 7 cm spacing at 2.46 GHz.
    fn default() -> Self {
        Self {
            spacing_d: 0.07,
            frequency: 2.46e9,
            propagation_speed: SPEED_OF_LIGHT,
        }
    }
}

impl ArrayGeometry {
    pub fn new(spacing_d: f64, frequency: f64) -> Result<Self> {
        Self::with_speed(spacing_d, frequency, SPEED_OF_LIGHT)
    }

    pub fn with_speed(spacing_d: f64, frequency: f64, propagation_speed: f64) -> Result<Self> {
        ensure(spacing_d.is_finite() && spacing_d > 0.0, || {
            format!("spacing must be positive, got {spacing_d}")
        })?;
        ensure(frequency.is_finite() && frequency > 0.0, || {
            format!("frequency must be positive, got {frequency}")
        })?;
        ensure(
            propagation_speed.is_finite() && propagation_speed > 0.0,
            || format!("propagation speed must be positive, got {propagation_speed}"),
        )?;
        Ok(Self {
            spacing_d,
            frequency,
            propagation_speed,
        })
    }

    pub fn spacing_d(&self) -> f64 {
        self.spacing_d
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn propagation_speed(&self) -> f64 {
        self.propagation_speed
    }

    pub fn wavelength(&self) -> f64 {
        self.propagation_speed / self.frequency
    }

    /// Degrees of carrier phase per metre of path length.
    pub fn degrees_per_metre(&self) -> f64 {
        360.0 * self.frequency / self.propagation_speed
    }

    /// Antenna positions P1, P2, P3 on the triangle of side `spacing_d`.
    pub fn antenna_positions(&self) -> [Vec3; 3] {
        let half = self.spacing_d / 2.0;
        let t30 = std::f64::consts::FRAC_PI_6.tan();
        let c30 = std::f64::consts::FRAC_PI_6.cos();
        [
            Vec3::new(half, -half * t30, 0.0),
            Vec3::new(-half, -half * t30, 0.0),
            Vec3::new(0.0, self.spacing_d / (2.0 * c30), 0.0),
        ]
    }

    /// Exact Euclidean path differences for a transmitter at `lp`.
    pub fn path_differences_to(&self, lp: Vec3) -> PathDiffTriplet {
        let d = self.antenna_positions().map(|p| (lp - p).norm());
        PathDiffTriplet {
            dd12: d[0] - d[1],
            dd23: d[1] - d[2],
            dd31: d[2] - d[0],
        }
    }

    pub fn phase_shifts_to(&self, lp: Vec3) -> PhaseTriplet {
        let k = self.degrees_per_metre();
        let dd = self.path_differences_to(lp);
        PhaseTriplet {
            th12: k * dd.dd12,
            th23: k * dd.dd23,
            th31: k * dd.dd31,
        }
    }

    /// Largest |phase shift| over the three pairs for a transmitter at `lp`.
    pub fn max_abs_phase_to(&self, lp: Vec3) -> f64 {
        self.phase_shifts_to(lp).max_abs()
    }
}

/// Landing point position in the drone body frame, plus drone yaw.
///
/// `drone_yaw` is a heading: positive is a clockwise turn seen from above,
/// so a positive yaw change rotates the body-frame LP counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativePose {
    lp_offset: Vec3,
    drone_yaw: f64,
}

impl RelativePose {
    pub fn new(lp_offset: Vec3, drone_yaw: f64) -> Result<Self> {
        if !lp_offset.is_finite() || !drone_yaw.is_finite() {
            return Err(Error::Domain("pose components must be finite".into()));
        }
        if lp_offset.z >= 0.0 {
            return Err(Error::Domain(format!(
                "landing point must be below the array plane, got z = {}",
                lp_offset.z
            )));
        }
        Ok(Self {
            lp_offset,
            drone_yaw,
        })
    }

    /// LP at horizontal range `r` and azimuth `phi_deg`, `altitude` below the array.
    pub fn from_polar(r: f64, phi_deg: f64, altitude: f64, drone_yaw: f64) -> Result<Self> {
        let (s, c) = phi_deg.to_radians().sin_cos();
        Self::new(Vec3::new(r * c, r * s, -altitude), drone_yaw)
    }

    pub fn lp_offset(&self) -> Vec3 {
        self.lp_offset
    }

    pub fn drone_yaw(&self) -> f64 {
        self.drone_yaw
    }

    pub fn drone_altitude(&self) -> f64 {
        -self.lp_offset.z
    }

    pub fn horizontal_range(&self) -> f64 {
        self.lp_offset.horizontal_norm()
    }

    /// LP azimuth in [0, 360).
    pub fn azimuth_deg(&self) -> f64 {
        self.lp_offset
            .y
            .atan2(self.lp_offset.x)
            .to_degrees()
            .rem_euclid(360.0)
    }

    pub(crate) fn with_parts(lp_offset: Vec3, drone_yaw: f64) -> Self {
        debug_assert!(lp_offset.z < 0.0);
        Self {
            lp_offset,
            drone_yaw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathDiffTriplet {
    pub dd12: f64,
    pub dd23: f64,
    pub dd31: f64,
}

impl PathDiffTriplet {
    pub fn sum(&self) -> f64 {
        self.dd12 + self.dd23 + self.dd31
    }
}

/// Signed, unwrapped pairwise phase shifts in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTriplet {
    pub th12: f64,
    pub th23: f64,
    pub th31: f64,
}

impl PhaseTriplet {
    pub fn as_array(&self) -> [f64; 3] {
        [self.th12, self.th23, self.th31]
    }

    pub fn sum(&self) -> f64 {
        self.th12 + self.th23 + self.th31
    }

    pub fn max_abs(&self) -> f64 {
        self.th12.abs().max(self.th23.abs()).max(self.th31.abs())
    }

    pub fn wrapped(&self) -> PhaseTriplet {
        PhaseTriplet {
            th12: wrap_phase(self.th12),
            th23: wrap_phase(self.th23),
            th31: wrap_phase(self.th31),
        }
    }
}

pub fn antenna_positions(geom: &ArrayGeometry) -> [Vec3; 3] {
    geom.antenna_positions()
}

pub fn path_differences(geom: &ArrayGeometry, pose: &RelativePose) -> PathDiffTriplet {
    geom.path_differences_to(pose.lp_offset)
}

pub fn phase_shifts(geom: &ArrayGeometry, pose: &RelativePose) -> PhaseTriplet {
    geom.phase_shifts_to(pose.lp_offset)
}

/// Maps any finite angle to (-180, 180].
pub fn wrap_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(360.0);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(a: Vec3, b: Vec3) -> f64 {
        ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
    }

    #[test]
    fn antenna_positions_for_seven_cm() {
        let p = ArrayGeometry::default().antenna_positions();
        assert!((p[0].x - 0.0350).abs() < 1e-12);
        assert!((p[0].y + 0.020207).abs() < 1e-6);
        assert!((p[2].y - 0.040415).abs() < 1e-6);
        assert_eq!(p[2].x, 0.0);
        let centroid = (p[0] + p[1] + p[2]) * (1.0 / 3.0);
        assert!(centroid.norm() < 1e-15);
    }

    #[test]
    fn antennas_are_equilateral() {
        for d in [0.01, 0.07, 0.35, 2.0] {
            let p = ArrayGeometry::new(d, 2.46e9).unwrap().antenna_positions();
            for (i, j) in PAIRS {
                assert!((dist(p[i], p[j]) - d).abs() < 1e-12 * d.max(1.0));
            }
        }
    }

    #[test]
    fn centered_lp_has_no_path_difference() {
        let g = ArrayGeometry::default();
        for z in [0.018, 0.46, 10.0] {
            let dd = g.path_differences_to(Vec3::new(0.0, 0.0, -z));
            assert!(dd.dd12.abs() < 1e-15 && dd.dd23.abs() < 1e-15 && dd.dd31.abs() < 1e-15);
        }
    }

    #[test]
    fn lp_on_y_axis_balances_pair_12() {
        let g = ArrayGeometry::default();
        for y in [-3.0, -0.2, 0.1, 1.7] {
            assert!(g.path_differences_to(Vec3::new(0.0, y, -2.2)).dd12.abs() < 1e-15);
        }
    }

    #[test]
    fn path_difference_hand_value() {
        // Oracle: two square roots evaluated directly from the coordinates.
        let g = ArrayGeometry::default();
        let h = 0.035_f64;
        let yoff = h * (30f64.to_radians()).tan();
        let d1 = ((0.8 - h).powi(2) + yoff.powi(2) + 2.2f64.powi(2)).sqrt();
        let d2 = ((0.8 + h).powi(2) + yoff.powi(2) + 2.2f64.powi(2)).sqrt();
        let dd = g.path_differences_to(Vec3::new(0.8, 0.0, -2.2));
        assert!((dd.dd12 - (d1 - d2)).abs() < 1e-15);
        assert!((dd.dd12 + 0.02392).abs() < 5e-6);
        let th = g.phase_shifts_to(Vec3::new(0.8, 0.0, -2.2));
        assert!((th.th12 + 70.7).abs() < 0.2);
    }

    #[test]
    fn phase_is_zero_without_path_difference() {
        let th = ArrayGeometry::default().phase_shifts_to(Vec3::new(0.0, 0.0, -1.0));
        assert_eq!(th.max_abs(), 0.0);
    }

    #[test]
    fn wrap_phase_conventions() {
        assert_eq!(wrap_phase(0.0), 0.0);
        assert_eq!(wrap_phase(190.0), -170.0);
        assert_eq!(wrap_phase(-180.0), 180.0);
        assert_eq!(wrap_phase(180.0), 180.0);
        assert!((wrap_phase(-190.0) - 170.0).abs() < 1e-12);
        assert!((wrap_phase(725.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(ArrayGeometry::new(0.0, 2.46e9).is_err());
        assert!(ArrayGeometry::new(0.07, -1.0).is_err());
        assert!(RelativePose::new(Vec3::new(0.0, 0.0, 0.0), 0.0).is_err());
        assert!(RelativePose::new(Vec3::new(0.0, f64::NAN, -1.0), 0.0).is_err());
        assert_eq!(
            RelativePose::from_polar(0.1, 30.0, 0.46, 0.0)
                .unwrap()
                .drone_altitude(),
            0.46
        );
    }
}
