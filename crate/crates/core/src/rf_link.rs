//! Amplitude side of the link: transmit power, free-space spreading, antenna
//! gains and the circular-to-linear polarization loss.
//!
//! The LP antenna is circularly polarized and the three drone antennas are
//! linear with a common orientation. A perfect circular wave couples the same
//! power into a linear antenna at any yaw; a finite axial ratio makes the
//! coupling ripple with twice the yaw angle. The axial ratio itself grows
//! with the pointing angle off the LP antenna's boresight.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::geometry::{wrap_phase, ArrayGeometry, RelativePose, SPEED_OF_LIGHT};

/// Axial ratio versus pointing angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialRatioProfile {
    ar0_db: f64,
    quad_coeff: f64,
    table_override: Option<Vec<(f64, f64)>>,
}

/// Boresight axial ratio of the default profile, dB.
pub const DEFAULT_AR0_DB: f64 = 0.5;
/// The default profile reaches this axial ratio...
pub const AR_ANCHOR_DB: f64 = 2.0;
/// ...at this pointing angle.
pub const AR_ANCHOR_DEG: f64 = 70.0;

impl Default for AxialRatioProfile {
    fn default() -> Self {
        Self {
            ar0_db: DEFAULT_AR0_DB,
            quad_coeff: (AR_ANCHOR_DB - DEFAULT_AR0_DB) / (AR_ANCHOR_DEG * AR_ANCHOR_DEG),
            table_override: None,
        }
    }
}

impl AxialRatioProfile {
    pub fn quadratic(ar0_db: f64, quad_coeff: f64) -> Result<Self> {
        ensure(ar0_db.is_finite() && ar0_db >= 0.0, || {
            format!("boresight axial ratio must be >= 0 dB, got {ar0_db}")
        })?;
        ensure(quad_coeff.is_finite() && quad_coeff >= 0.0, || {
            format!("axial ratio growth must be >= 0, got {quad_coeff}")
        })?;
        Ok(Self {
            ar0_db,
            quad_coeff,
            table_override: None,
        })
    }

    /// Piecewise-linear profile from `(pointing angle deg, AR dB)` points.
    ///
    /// Angles must be strictly increasing from 0 and values non-decreasing and
    /// non-negative. Beyond the last point the last value is held.
    pub fn from_table(points: Vec<(f64, f64)>) -> Result<Self> {
        ensure(!points.is_empty(), || "axial ratio table is empty".into())?;
        ensure(points[0].0 == 0.0, || {
            "axial ratio table must start at 0 deg".into()
        })?;
        for w in points.windows(2) {
            ensure(w[1].0 > w[0].0, || {
                "axial ratio table angles must increase".into()
            })?;
            ensure(w[1].1 >= w[0].1, || {
                "axial ratio must not decrease with angle".into()
            })?;
        }
        ensure(
            points
                .iter()
                .all(|&(a, v)| a.is_finite() && v.is_finite() && v >= 0.0),
            || "axial ratio table values must be finite and >= 0 dB".into(),
        )?;
        Ok(Self {
            ar0_db: points[0].1,
            quad_coeff: 0.0,
            table_override: Some(points),
        })
    }

    pub fn ar0_db(&self) -> f64 {
        self.ar0_db
    }

    pub fn quad_coeff(&self) -> f64 {
        self.quad_coeff
    }

    pub fn table(&self) -> Option<&[(f64, f64)]> {
        self.table_override.as_deref()
    }
}

/// Transmit power, gains and polarization loss.
/// Highest transmit power the beacon can be driven to, dBm.
pub const MAX_TX_POWER: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetModel {
    pub tx_power: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub pol_mismatch_mean: f64,
    pub ar_profile: AxialRatioProfile,
}

impl Default for LinkBudgetModel {
    fn default() -> Self {
        Self {
            tx_power: 0.0,
            tx_gain: 5.0,
            rx_gain: 5.0,
            pol_mismatch_mean: 3.0,
            ar_profile: AxialRatioProfile::default(),
        }
    }
}

impl LinkBudgetModel {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.tx_power.is_finite() && self.tx_power <= MAX_TX_POWER,
            || format!("transmit power must be finite and <= {MAX_TX_POWER} dBm"),
        )?;
        ensure(self.tx_gain.is_finite() && self.rx_gain.is_finite(), || {
            "antenna gains must be finite".into()
        })?;
        ensure(
            self.pol_mismatch_mean.is_finite() && self.pol_mismatch_mean >= 0.0,
            || "mean polarization mismatch must be >= 0 dB".into(),
        )
    }
}

/// Per-antenna amplitude (dBm) and carrier phase (deg, wrapped).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceivedSignal {
    pub amplitude: [f64; 3],
    pub phase: [f64; 3],
}

pub fn free_space_loss(distance: f64, frequency: f64) -> Result<f64> {
    if !distance.is_finite() || distance <= 0.0 {
        return Err(Error::Domain(format!(
            "distance must be positive, got {distance}"
        )));
    }
    if frequency.is_nan() || frequency <= 0.0 {
        return Err(Error::Domain(format!(
            "frequency must be positive, got {frequency}"
        )));
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * distance * frequency / SPEED_OF_LIGHT).log10())
}

pub fn axial_ratio(profile: &AxialRatioProfile, pointing_angle: f64) -> Result<f64> {
    if pointing_angle.is_nan() || pointing_angle.abs() > 90.0 {
        return Err(Error::Domain(format!(
            "pointing angle must be within +-90 deg, got {pointing_angle}"
        )));
    }
    let a = pointing_angle.abs();
    let ar = match &profile.table_override {
        Some(t) => interpolate(t, a),
        None => profile.ar0_db + profile.quad_coeff * a * a,
    };
    Ok(ar.max(0.0))
}

fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let i = table.partition_point(|&(a, _)| a <= x);
    if i == 0 {
        return table[0].1;
    }
    if i == table.len() {
        return table[table.len() - 1].1;
    }
    let (x0, y0) = table[i - 1];
    let (x1, y1) = table[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Signed deviation (dB) of the CP-to-LP coupling loss from its mean.
pub fn polarization_ripple(ar_db: f64, yaw: f64) -> f64 {
    0.5 * ar_db * (2.0 * yaw.to_radians()).cos()
}

/// Pointing angle (deg) from the LP antenna's boresight to `antenna`.
fn pointing_angle(lp: crate::geometry::Vec3, antenna: crate::geometry::Vec3) -> f64 {
    let v = antenna - lp;
    (v.z / v.norm()).clamp(-1.0, 1.0).acos().to_degrees()
}

pub fn received_signal(
    geom: &ArrayGeometry,
    pose: &RelativePose,
    budget: &LinkBudgetModel,
) -> Result<ReceivedSignal> {
    let lp = pose.lp_offset();
    let k = geom.degrees_per_metre();
    let mut amplitude = [0.0; 3];
    let mut phase = [0.0; 3];
    for (i, p) in geom.antenna_positions().into_iter().enumerate() {
        let d = (lp - p).norm();
        let ar = axial_ratio(&budget.ar_profile, pointing_angle(lp, p))?;
        amplitude[i] = budget.tx_power + budget.tx_gain + budget.rx_gain
            - free_space_loss(d, geom.frequency())?
            - budget.pol_mismatch_mean
            - polarization_ripple(ar, pose.drone_yaw());
        // Carrier phase lags with path length.
        phase[i] = wrap_phase(-k * d);
    }
    Ok(ReceivedSignal { amplitude, phase })
}
