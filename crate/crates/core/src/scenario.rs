//! Scenario files.
//!
//! TOML with one table per subsystem. Every table and key is optional and
//! falls back to the library default; unknown keys are rejected.
//!
//! ```toml
//! [geometry]
//! spacing_m = 0.07
//! frequency_hz = 2.46e9
//!
//! [link]
//! tx_power_dbm = 0.0
//!
//! [initial_pose]
//! x_m = 0.10
//! y_m = -0.05
//! altitude_m = 0.46
//!
//! [run]
//! seed = 7
//! max_time_s = 30.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detection::{AdcModel, DetectorModel, SamplerConfig};
use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, RelativePose, Vec3, SPEED_OF_LIGHT};
use crate::guidance::{CalibrationRefs, Frame, GuidanceConfig};
use crate::rf_link::{AxialRatioProfile, LinkBudgetModel};
use crate::sim::{DescentPolicy, Scenario};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub geometry: GeometrySection,
    pub link: LinkSection,
    pub detector: DetectorSection,
    pub adc: AdcSection,
    pub sampler: SamplerSection,
    pub guidance: GuidanceSection,
    pub calibration: CalibrationSection,
    pub initial_pose: PoseSection,
    pub motion: MotionSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub spacing_m: f64,
    pub frequency_hz: f64,
    pub propagation_speed_mps: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        let g = ArrayGeometry::default();
        Self {
            spacing_m: g.spacing_d(),
            frequency_hz: g.frequency(),
            propagation_speed_mps: SPEED_OF_LIGHT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub pol_mismatch_mean_db: f64,
    pub axial_ratio: AxialRatioSection,
}

impl Default for LinkSection {
    fn default() -> Self {
        let b = LinkBudgetModel::default();
        Self {
            tx_power_dbm: b.tx_power,
            tx_gain_dbi: b.tx_gain,
            rx_gain_dbi: b.rx_gain,
            pol_mismatch_mean_db: b.pol_mismatch_mean,
            axial_ratio: AxialRatioSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxialRatioSection {
    pub ar0_db: f64,
    pub quad_coeff_db_per_deg2: f64,
    /// `[[deg, dB], ...]`; overrides the quadratic when present.
    pub table: Option<Vec<[f64; 2]>>,
}

impl Default for AxialRatioSection {
    fn default() -> Self {
        let p = AxialRatioProfile::default();
        Self {
            ar0_db: p.ar0_db(),
            quad_coeff_db_per_deg2: p.quad_coeff(),
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub v_center: f64,
    pub slope_v_per_deg: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub usable_range_deg: f64,
    pub min_input_power_dbm: f64,
    pub noise_floor_sigma_v: f64,
    pub low_power_noise_slope_v_per_db: f64,
    pub channel_offsets_v: [f64; 3],
}

impl Default for DetectorSection {
    fn default() -> Self {
        let d = DetectorModel::default();
        Self {
            v_center: d.v_center,
            slope_v_per_deg: d.slope,
            v_min: d.v_min,
            v_max: d.v_max,
            usable_range_deg: d.usable_range,
            min_input_power_dbm: d.min_input_power,
            noise_floor_sigma_v: d.noise_floor_sigma,
            low_power_noise_slope_v_per_db: d.low_power_noise_slope,
            channel_offsets_v: d.channel_offsets,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcSection {
    pub bits: u32,
    pub full_scale_v: f64,
    pub sample_period_s: f64,
}

impl Default for AdcSection {
    fn default() -> Self {
        let a = AdcModel::default();
        Self {
            bits: a.bits,
            full_scale_v: a.full_scale,
            sample_period_s: a.sample_period,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSection {
    pub samples_per_channel: u32,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            samples_per_channel: SamplerConfig::default().samples_per_channel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GuidanceSection {
    pub lock_threshold_v: f64,
    pub frame: Frame,
}

impl Default for GuidanceSection {
    fn default() -> Self {
        let g = GuidanceConfig::default();
        Self {
            lock_threshold_v: g.lock_threshold,
            frame: g.frame,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    /// Fixed zeroing references `[v12, v23, v31]`.
    pub refs_v: Option<[f64; 3]>,
    pub cycles: u32,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            refs_v: None,
            cycles: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoseSection {
    pub x_m: f64,
    pub y_m: f64,
    pub altitude_m: f64,
    pub yaw_deg: f64,
}

impl Default for PoseSection {
    fn default() -> Self {
        Self {
            x_m: 0.0,
            y_m: 0.0,
            altitude_m: 0.46,
            yaw_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotionSection {
    pub yaw_rate_dps: f64,
    pub speed_mps: f64,
    pub descent_rate_mps: f64,
    pub descent_policy: DescentPolicy,
    pub pose_jitter_sigma_m: f64,
}

impl Default for MotionSection {
    fn default() -> Self {
        Self {
            yaw_rate_dps: 30.0,
            speed_mps: 0.2,
            descent_rate_mps: 0.1,
            descent_policy: DescentPolicy::Hold,
            pose_jitter_sigma_m: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub decision_period_s: f64,
    pub max_time_s: f64,
    pub seed: u64,
    pub min_altitude_m: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            decision_period_s: 0.003,
            max_time_s: 60.0,
            seed: 0,
            min_altitude_m: 0.05,
        }
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Builds and validates the simulation scenario.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let g = &self.geometry;
        let geometry =
            ArrayGeometry::with_speed(g.spacing_m, g.frequency_hz, g.propagation_speed_mps)?;
        let ar = &self.link.axial_ratio;
        let ar_profile = match &ar.table {
            Some(t) => AxialRatioProfile::from_table(t.iter().map(|p| (p[0], p[1])).collect())?,
            None => AxialRatioProfile::quadratic(ar.ar0_db, ar.quad_coeff_db_per_deg2)?,
        };
        let budget = LinkBudgetModel {
            tx_power: self.link.tx_power_dbm,
            tx_gain: self.link.tx_gain_dbi,
            rx_gain: self.link.rx_gain_dbi,
            pol_mismatch_mean: self.link.pol_mismatch_mean_db,
            ar_profile,
        };
        let d = &self.detector;
        let detector = DetectorModel {
            v_center: d.v_center,
            slope: d.slope_v_per_deg,
            v_min: d.v_min,
            v_max: d.v_max,
            usable_range: d.usable_range_deg,
            min_input_power: d.min_input_power_dbm,
            noise_floor_sigma: d.noise_floor_sigma_v,
            low_power_noise_slope: d.low_power_noise_slope_v_per_db,
            channel_offsets: d.channel_offsets_v,
        };
        let adc = AdcModel {
            bits: self.adc.bits,
            full_scale: self.adc.full_scale_v,
            sample_period: self.adc.sample_period_s,
        };
        let p = &self.initial_pose;
        let initial_pose = RelativePose::new(Vec3::new(p.x_m, p.y_m, -p.altitude_m), p.yaw_deg)?;
        let m = &self.motion;
        let scenario = Scenario {
            geometry,
            budget,
            detector,
            adc,
            sampler: SamplerConfig {
                samples_per_channel: self.sampler.samples_per_channel,
            },
            guidance: GuidanceConfig {
                lock_threshold: self.guidance.lock_threshold_v,
                frame: self.guidance.frame,
            },
            calibration: self.calibration.refs_v.map(|r| CalibrationRefs {
                ref12: r[0],
                ref23: r[1],
                ref31: r[2],
            }),
            calibration_cycles: self.calibration.cycles,
            initial_pose,
            yaw_rate: m.yaw_rate_dps,
            speed: m.speed_mps,
            descent_rate: m.descent_rate_mps,
            descent_policy: m.descent_policy,
            pose_jitter_sigma: m.pose_jitter_sigma_m,
            decision_period: self.run.decision_period_s,
            max_time: self.run.max_time_s,
            rng_seed: self.run.seed,
            min_altitude: self.run.min_altitude_m,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    ScenarioFile::load(path)?.to_scenario()
}
