//! Calibration zeroing, LOCK detection and sector classification.
//!
//! [`classify`] is a fixed decision tree over the zeroed triplet. Its native
//! commands move the LP: "turn LP left" moves the LP counterclockwise around
//! the array, "forward" moves it along `+y`. [`invert_frame`] converts to
//! drone motion.
//!
//! Sector wedges (LP azimuth, counterclockwise from `+x`):
//!
//! | wedge       | sector | native command        |
//! |-------------|--------|-----------------------|
//! | [0, 60)     | S3b    | LEFT60                |
//! | [60, 120)   | S1a    | LEFT/RIGHT + BACKWARD |
//! | [120, 180)  | S2b    | RIGHT60               |
//! | [180, 240)  | S3a    | LEFT60                |
//! | [240, 300)  | S1b    | LEFT/RIGHT + FORWARD  |
//! | [300, 360)  | S2a    | RIGHT60               |
//!
//! S1a is centred on the forward axis (towards antenna 3).

use serde::{Deserialize, Serialize};

use crate::detection::VoltageTriplet;
use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRefs {
    pub ref12: f64,
    pub ref23: f64,
    pub ref31: f64,
}

impl CalibrationRefs {
    pub fn as_triplet(&self) -> VoltageTriplet {
        VoltageTriplet::new(self.ref12, self.ref23, self.ref31)
    }

    pub fn validate(&self, full_scale: f64) -> Result<()> {
        ensure(
            [self.ref12, self.ref23, self.ref31]
                .iter()
                .all(|r| (0.0..=full_scale).contains(r)),
            || format!("calibration refs must lie in [0, {full_scale}] V"),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    S1a,
    S1b,
    S2a,
    S2b,
    S3a,
    S3b,
    #[serde(rename = "CENTER")]
    Center,
}

impl Sector {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sector::S1a => "S1a",
            Sector::S1b => "S1b",
            Sector::S2a => "S2a",
            Sector::S2b => "S2b",
            Sector::S3a => "S3a",
            Sector::S3b => "S3b",
            Sector::Center => "CENTER",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Rotation {
    Left,
    Right,
    Left60,
    Right60,
    None,
}

impl Rotation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rotation::Left => "LEFT",
            Rotation::Right => "RIGHT",
            Rotation::Left60 => "LEFT60",
            Rotation::Right60 => "RIGHT60",
            Rotation::None => "NONE",
        }
    }

    pub fn mirrored(self) -> Rotation {
        match self {
            Rotation::Left => Rotation::Right,
            Rotation::Right => Rotation::Left,
            Rotation::Left60 => Rotation::Right60,
            Rotation::Right60 => Rotation::Left60,
            Rotation::None => Rotation::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Translation {
    Forward,
    Backward,
    None,
}

impl Translation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Translation::Forward => "FORWARD",
            Translation::Backward => "BACKWARD",
            Translation::None => "NONE",
        }
    }

    pub fn mirrored(self) -> Translation {
        match self {
            Translation::Forward => Translation::Backward,
            Translation::Backward => Translation::Forward,
            Translation::None => Translation::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorDecision {
    pub sector: Sector,
    pub rotation: Rotation,
    pub translation: Translation,
    pub locked: bool,
}

impl SectorDecision {
    pub const LOCK: SectorDecision = SectorDecision {
        sector: Sector::Center,
        rotation: Rotation::None,
        translation: Translation::None,
        locked: true,
    };
}

/// Which body the commands move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// Commands move the landing point.
    #[default]
    LpMoves,
    /// Commands move the drone.
    DroneMoves,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceConfig {
    /// V
    pub lock_threshold: f64,
    pub frame: Frame,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        Self {
            lock_threshold: 0.1,
            frame: Frame::LpMoves,
        }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.lock_threshold > 0.0 && self.lock_threshold.is_finite(),
            || "lock threshold must be > 0".into(),
        )
    }
}

/// Per-channel mean of readings taken with the array centred over the LP.
pub fn calibrate(samples: &[VoltageTriplet]) -> Result<CalibrationRefs> {
    if samples.is_empty() {
        return Err(Error::EmptyCalibration);
    }
    let n = samples.len() as f64;
    let sum = samples.iter().fold([0.0; 3], |acc, s| {
        [acc[0] + s.v12, acc[1] + s.v23, acc[2] + s.v31]
    });
    Ok(CalibrationRefs {
        ref12: sum[0] / n,
        ref23: sum[1] / n,
        ref31: sum[2] / n,
    })
}

pub fn zero(raw: &VoltageTriplet, refs: &CalibrationRefs) -> VoltageTriplet {
    VoltageTriplet::new(
        raw.v12 - refs.ref12,
        raw.v23 - refs.ref23,
        raw.v31 - refs.ref31,
    )
}

/// LOCK test, then the sector branches.
pub fn classify(zeroed: &VoltageTriplet, config: &GuidanceConfig) -> SectorDecision {
    let native = classify_lp_frame(zeroed, config.lock_threshold);
    match config.frame {
        Frame::LpMoves => native,
        Frame::DroneMoves => invert_frame(native),
    }
}

fn classify_lp_frame(v: &VoltageTriplet, lock_threshold: f64) -> SectorDecision {
    if v.max_abs() <= lock_threshold {
        return SectorDecision::LOCK;
    }
    let (a12, a23, a31) = (v.v12.abs(), v.v23.abs(), v.v31.abs());
    if a12 <= a23 && a12 <= a31 {
        let rotation = if v.v12 * v.v23 < 0.0 {
            Rotation::Left
        } else {
            Rotation::Right
        };
        let (sector, translation) = if v.v23 > 0.0 {
            (Sector::S1b, Translation::Forward)
        } else {
            (Sector::S1a, Translation::Backward)
        };
        return SectorDecision {
            sector,
            rotation,
            translation,
            locked: false,
        };
    }
    // Sectors 2 and 3: v12 never changes sign inside either wedge pair.
    let (sector, rotation) = if a23 < a31 {
        (
            if v.v12 > 0.0 {
                Sector::S2a
            } else {
                Sector::S2b
            },
            Rotation::Right60,
        )
    } else {
        (
            if v.v12 < 0.0 {
                Sector::S3a
            } else {
                Sector::S3b
            },
            Rotation::Left60,
        )
    };
    SectorDecision {
        sector,
        rotation,
        translation: Translation::None,
        locked: false,
    }
}

/// Sector of the 60 deg wedge containing LP azimuth `phi_l`.
pub fn geometric_sector(phi_l: f64) -> Sector {
    const WEDGES: [Sector; 6] = [
        Sector::S3b,
        Sector::S1a,
        Sector::S2b,
        Sector::S3a,
        Sector::S1b,
        Sector::S2a,
    ];
    let idx = (phi_l.rem_euclid(360.0) / 60.0).floor() as usize;
    WEDGES[idx.min(5)]
}

/// Re-expresses a decision for the other body: LEFT<->RIGHT, FORWARD<->BACKWARD.
pub fn invert_frame(decision: SectorDecision) -> SectorDecision {
    SectorDecision {
        rotation: decision.rotation.mirrored(),
        translation: decision.translation.mirrored(),
        ..decision
    }
}
