//! Closed-loop landing episodes.
//!
//! Each decision tick runs the full chain: geometry and link budget give the
//! received signal, the detector/ADC produce an averaged voltage triplet, it
//! is zeroed and classified, and the resulting command moves the drone (or
//! the LP) for one decision period.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{lock_region_radius, tracking_boundary, TrackingBoundary, DEFAULT_PHASE_LIMIT};
use crate::detection::{
    acquire_cycle, AdcModel, DetectorModel, NoiseSource, SamplerConfig, SeededNoise, VoltageTriplet,
};
use crate::error::{ensure, Error, Result};
use crate::geometry::{ArrayGeometry, RelativePose, Vec3};
use crate::guidance::{
    calibrate, classify, invert_frame, zero, CalibrationRefs, Frame, GuidanceConfig, Rotation,
    SectorDecision, Translation,
};
use crate::rf_link::{received_signal, LinkBudgetModel};

/// Size of the committed turn issued by sectors 2 and 3, deg.
pub const COMMITTED_TURN_DEG: f64 = 60.0;
/// Altitude band width of the tracking-boundary cache, m.
pub const BOUNDARY_BAND: f64 = 0.01;

const CALIBRATION_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;
const JITTER_STREAM: u64 = 0xd1b5_4a32_d192_ed03;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentPolicy {
    /// Altitude is fixed; the episode ends at the first LOCK.
    #[default]
    Hold,
    /// Descend while locked; the episode ends locked at `min_altitude`.
    DescendOnLock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub geometry: ArrayGeometry,
    pub budget: LinkBudgetModel,
    pub detector: DetectorModel,
    pub adc: AdcModel,
    pub sampler: SamplerConfig,
    pub guidance: GuidanceConfig,
    /// Fixed zeroing references; measured with a centred fixture when absent.
    pub calibration: Option<CalibrationRefs>,
    pub calibration_cycles: u32,
    pub initial_pose: RelativePose,
    /// deg/s
    pub yaw_rate: f64,
    /// m/s
    pub speed: f64,
    /// m/s
    pub descent_rate: f64,
    pub descent_policy: DescentPolicy,
    /// Per-tick horizontal pose jitter, m (0 disables).
    pub pose_jitter_sigma: f64,
    /// s
    pub decision_period: f64,
    /// s
    pub max_time: f64,
    pub rng_seed: u64,
    /// m
    pub min_altitude: f64,
}

impl Scenario {
    /// Default models with the LP at `initial_pose`.
    pub fn new(initial_pose: RelativePose) -> Self {
        Self {
            geometry: ArrayGeometry::default(),
            budget: LinkBudgetModel::default(),
            detector: DetectorModel::default(),
            adc: AdcModel::default(),
            sampler: SamplerConfig::default(),
            guidance: GuidanceConfig::default(),
            calibration: None,
            calibration_cycles: 100,
            initial_pose,
            yaw_rate: 30.0,
            speed: 0.2,
            descent_rate: 0.1,
            descent_policy: DescentPolicy::Hold,
            pose_jitter_sigma: 0.0,
            decision_period: 0.003,
            max_time: 60.0,
            rng_seed: 0,
            min_altitude: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.budget.validate()?;
        self.detector.validate()?;
        self.adc.validate()?;
        self.sampler.validate()?;
        self.guidance.validate()?;
        if let Some(refs) = &self.calibration {
            refs.validate(self.adc.full_scale)?;
        }
        ensure(self.calibration_cycles >= 1, || {
            "calibration needs at least one cycle".into()
        })?;
        for (name, v) in [
            ("yaw_rate", self.yaw_rate),
            ("speed", self.speed),
            ("descent_rate", self.descent_rate),
        ] {
            ensure(v > 0.0 && v.is_finite(), || {
                format!("{name} must be > 0, got {v}")
            })?;
        }
        ensure(self.pose_jitter_sigma >= 0.0, || {
            "pose jitter must be >= 0".into()
        })?;
        let acq = self.sampler.cycle_time(&self.adc);
        ensure(self.decision_period >= acq * (1.0 - 1e-12), || {
            format!(
                "decision period {} s is shorter than one acquisition ({acq} s)",
                self.decision_period
            )
        })?;
        ensure(self.max_time > 0.0 && self.max_time.is_finite(), || {
            "max_time must be > 0".into()
        })?;
        ensure(self.min_altitude > 0.0, || {
            "min_altitude must be > 0".into()
        })
    }
}

/// One decision tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// End of the acquisition that produced this decision, s.
    pub time: f64,
    /// Pose during the acquisition.
    pub pose: RelativePose,
    pub raw: VoltageTriplet,
    pub zeroed: VoltageTriplet,
    pub codes: [u32; 3],
    pub decision: SectorDecision,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CommandCounts {
    pub left: u64,
    pub right: u64,
    pub left60: u64,
    pub right60: u64,
    pub forward: u64,
    pub backward: u64,
    pub lock: u64,
}

impl CommandCounts {
    fn record(&mut self, d: &SectorDecision) {
        match d.rotation {
            Rotation::Left => self.left += 1,
            Rotation::Right => self.right += 1,
            Rotation::Left60 => self.left60 += 1,
            Rotation::Right60 => self.right60 += 1,
            Rotation::None => {}
        }
        match d.translation {
            Translation::Forward => self.forward += 1,
            Translation::Backward => self.backward += 1,
            Translation::None => {}
        }
        if d.locked {
            self.lock += 1;
        }
    }

    /// Decisions that asked for motion.
    pub fn maneuvers(&self) -> u64 {
        self.left + self.right + self.left60 + self.right60 + self.forward + self.backward
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    /// The episode ended in LOCK.
    pub locked: bool,
    /// Ended in LOCK within the lock-region radius of the LP.
    pub on_target: bool,
    pub time_to_first_lock: Option<f64>,
    /// m
    pub final_horizontal_error: f64,
    pub final_altitude: f64,
    /// Relative LP displacement accumulated over the episode, m.
    pub path_length: f64,
    pub command_counts: CommandCounts,
    pub left_tracking_area: bool,
    pub ticks: u64,
    /// s
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub refs: CalibrationRefs,
    pub trace: Vec<TraceRecord>,
    pub metrics: EpisodeMetrics,
}

#[derive(Debug, Clone, Copy)]
struct PendingTurn {
    per_tick: f64,
    ticks_left: u32,
}

/// Drone/LP kinematics with committed 60 deg turns.
#[derive(Debug, Clone)]
pub struct Kinematics<'a> {
    scenario: &'a Scenario,
    pending: Option<PendingTurn>,
}

impl<'a> Kinematics<'a> {
    pub fn new(scenario: &'a Scenario) -> Self {
        Self {
            scenario,
            pending: None,
        }
    }

    pub fn turning(&self) -> bool {
        self.pending.is_some()
    }

    /// Applies `decision` for `dt` seconds.
    ///
    /// The decision is read in the scenario's guidance frame. Drone yaw turns
    /// rotate the body-frame LP the opposite way; LP turns rotate it directly.
    pub fn step(
        &mut self,
        pose: &RelativePose,
        decision: &SectorDecision,
        dt: f64,
    ) -> RelativePose {
        let s = self.scenario;
        // Everything below is in drone terms.
        let drone = match s.guidance.frame {
            Frame::LpMoves => invert_frame(*decision),
            Frame::DroneMoves => *decision,
        };

        // Counterclockwise change of the LP azimuth in the body frame.
        let turn = if let Some(p) = self.pending.as_mut() {
            p.ticks_left -= 1;
            let t = p.per_tick;
            if p.ticks_left == 0 {
                self.pending = None;
            }
            t
        } else {
            let small = s.yaw_rate * dt;
            match drone.rotation {
                Rotation::Right => small,
                Rotation::Left => -small,
                Rotation::Right60 | Rotation::Left60 => {
                    let sign = if drone.rotation == Rotation::Right60 {
                        1.0
                    } else {
                        -1.0
                    };
                    let ticks = (COMMITTED_TURN_DEG / small).ceil().max(1.0) as u32;
                    let per_tick = sign * COMMITTED_TURN_DEG / ticks as f64;
                    if ticks > 1 {
                        self.pending = Some(PendingTurn {
                            per_tick,
                            ticks_left: ticks - 1,
                        });
                    }
                    per_tick
                }
                Rotation::None => 0.0,
            }
        };

        let mut lp = pose.lp_offset().rotate_z(turn);
        lp.y -= match drone.translation {
            Translation::Forward => s.speed * dt,
            Translation::Backward => -s.speed * dt,
            Translation::None => 0.0,
        };
        if s.descent_policy == DescentPolicy::DescendOnLock && decision.locked {
            lp.z = (lp.z + s.descent_rate * dt).min(-s.min_altitude);
        }
        let yaw = match s.guidance.frame {
            Frame::DroneMoves => pose.drone_yaw() + turn,
            Frame::LpMoves => pose.drone_yaw(),
        };
        RelativePose::with_parts(lp, yaw)
    }
}

/// Single-tick kinematics without turn bookkeeping across calls.
pub fn step(
    pose: &RelativePose,
    decision: &SectorDecision,
    scenario: &Scenario,
    dt: f64,
) -> RelativePose {
    Kinematics::new(scenario).step(pose, decision, dt)
}

/// Tracking boundaries per 1 cm altitude band.
#[derive(Debug, Clone)]
pub struct BoundaryCache {
    geometry: ArrayGeometry,
    phase_limit: f64,
    bands: HashMap<i64, TrackingBoundary>,
}

impl BoundaryCache {
    pub fn new(geometry: ArrayGeometry, phase_limit: f64) -> Self {
        Self {
            geometry,
            phase_limit,
            bands: HashMap::new(),
        }
    }

    pub fn boundary(&mut self, altitude: f64) -> Result<&TrackingBoundary> {
        let band = (altitude / BOUNDARY_BAND).round().max(1.0) as i64;
        if !self.bands.contains_key(&band) {
            let b = tracking_boundary(
                &self.geometry,
                band as f64 * BOUNDARY_BAND,
                self.phase_limit,
                1.0,
            )?;
            self.bands.insert(band, b);
        }
        Ok(&self.bands[&band])
    }

    pub fn contains(&mut self, pose: &RelativePose) -> Result<bool> {
        let lp = pose.lp_offset();
        Ok(self.boundary(pose.drone_altitude())?.contains(lp))
    }
}

/// Zeroing references from `cycles` acquisitions with the array centred over the LP.
pub fn calibrate_fixture(scenario: &Scenario, cycles: u32) -> Result<CalibrationRefs> {
    let pose = RelativePose::new(
        Vec3::new(0.0, 0.0, -scenario.initial_pose.drone_altitude()),
        scenario.initial_pose.drone_yaw(),
    )?;
    let signal = received_signal(&scenario.geometry, &pose, &scenario.budget)?;
    let mut noise = SeededNoise::new(scenario.rng_seed ^ CALIBRATION_STREAM);
    let samples: Vec<VoltageTriplet> = (0..cycles)
        .map(|_| {
            acquire_cycle(
                &signal,
                &scenario.detector,
                &scenario.adc,
                &scenario.sampler,
                &mut noise,
            )
            .volts
        })
        .collect();
    calibrate(&samples)
}

/// Runs one episode, handing each record to `sink` as it is produced.
pub fn run_with(
    scenario: &Scenario,
    mut sink: impl FnMut(&TraceRecord),
) -> Result<(CalibrationRefs, EpisodeMetrics)> {
    scenario.validate()?;
    let refs = match scenario.calibration {
        Some(r) => r,
        None => calibrate_fixture(scenario, scenario.calibration_cycles)?,
    };
    let dt = scenario.decision_period;
    let fs = scenario.adc.full_scale;
    let mut noise = SeededNoise::new(scenario.rng_seed);
    let mut jitter = SeededNoise::new(scenario.rng_seed ^ JITTER_STREAM);
    let mut cache = BoundaryCache::new(scenario.geometry, DEFAULT_PHASE_LIMIT);
    let mut kin = Kinematics::new(scenario);

    let mut pose = scenario.initial_pose;
    let started_inside = cache.contains(&pose)?;
    let mut counts = CommandCounts::default();
    let mut left_area = !started_inside;
    let mut first_lock = None;
    let mut path_length = 0.0;
    let mut locked = false;
    let max_ticks = (scenario.max_time / dt - 1e-9).ceil().max(1.0) as u64;
    let mut ticks = 0;

    while ticks < max_ticks {
        ticks += 1;
        let time = ticks as f64 * dt;
        let signal = received_signal(&scenario.geometry, &pose, &scenario.budget)?;
        let acq = acquire_cycle(
            &signal,
            &scenario.detector,
            &scenario.adc,
            &scenario.sampler,
            &mut noise,
        );
        if acq.volts.as_array().iter().any(|v| !(0.0..=fs).contains(v)) {
            return Err(Error::Invariant(format!(
                "raw voltage {:?} outside [0, {fs}] V",
                acq.volts
            )));
        }
        let zeroed = zero(&acq.volts, &refs);
        let decision = classify(&zeroed, &scenario.guidance);
        counts.record(&decision);
        locked = decision.locked;
        if locked && first_lock.is_none() {
            first_lock = Some(time);
        }
        sink(&TraceRecord {
            time,
            pose,
            raw: acq.volts,
            zeroed,
            codes: acq.codes,
            decision,
        });

        let done = match scenario.descent_policy {
            DescentPolicy::Hold => locked,
            DescentPolicy::DescendOnLock => {
                locked && pose.drone_altitude() <= scenario.min_altitude + 1e-12
            }
        };
        if done || ticks == max_ticks {
            break;
        }

        let mut next = kin.step(&pose, &decision, dt);
        if scenario.pose_jitter_sigma > 0.0 {
            let mut lp = next.lp_offset();
            lp.x += scenario.pose_jitter_sigma * jitter.standard_normal();
            lp.y += scenario.pose_jitter_sigma * jitter.standard_normal();
            next = RelativePose::with_parts(lp, next.drone_yaw());
        }
        path_length += (next.lp_offset() - pose.lp_offset()).norm();
        pose = next;
        // Transients inside a committed turn are not judged.
        if started_inside && !kin.turning() && !cache.contains(&pose)? {
            left_area = true;
            locked = false;
            break;
        }
    }

    let final_error = pose.horizontal_range();
    let on_target = locked
        && final_error
            <= lock_region_radius(
                &scenario.geometry,
                pose.drone_altitude(),
                scenario.guidance.lock_threshold,
                scenario.detector.v_max - scenario.detector.v_min,
            )?;
    let metrics = EpisodeMetrics {
        locked,
        on_target,
        time_to_first_lock: first_lock,
        final_horizontal_error: final_error,
        final_altitude: pose.drone_altitude(),
        path_length,
        command_counts: counts,
        left_tracking_area: left_area,
        ticks,
        duration: ticks as f64 * dt,
    };
    Ok((refs, metrics))
}

pub fn run(scenario: &Scenario) -> Result<Episode> {
    let mut trace = Vec::new();
    let (refs, metrics) = run_with(scenario, |r| trace.push(*r))?;
    Ok(Episode {
        refs,
        trace,
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub episodes: usize,
    pub locked: usize,
    pub lock_rate: f64,
    pub on_target: usize,
    pub on_target_rate: f64,
    pub mean_time_to_lock: Option<f64>,
    pub median_time_to_lock: Option<f64>,
    pub p90_time_to_lock: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchReport {
    pub metrics: Vec<EpisodeMetrics>,
    pub summary: BatchSummary,
}

fn percentile(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    Some(sorted[idx])
}

pub fn summarize(metrics: &[EpisodeMetrics]) -> BatchSummary {
    let mut times: Vec<f64> = metrics
        .iter()
        .filter(|m| m.locked)
        .filter_map(|m| m.time_to_first_lock)
        .collect();
    times.sort_by(f64::total_cmp);
    let locked = metrics.iter().filter(|m| m.locked).count();
    let on_target = metrics.iter().filter(|m| m.on_target).count();
    let rate = |n: usize| {
        if metrics.is_empty() {
            0.0
        } else {
            n as f64 / metrics.len() as f64
        }
    };
    BatchSummary {
        episodes: metrics.len(),
        locked,
        lock_rate: rate(locked),
        on_target,
        on_target_rate: rate(on_target),
        mean_time_to_lock: (!times.is_empty())
            .then(|| times.iter().sum::<f64>() / times.len() as f64),
        median_time_to_lock: percentile(&times, 0.5),
        p90_time_to_lock: percentile(&times, 0.9),
    }
}

/// Independent episodes, run in parallel, reported in input order.
pub fn run_batch(scenarios: &[Scenario]) -> Result<BatchReport> {
    ensure(!scenarios.is_empty(), || {
        "batch needs at least one episode".into()
    })?;
    let metrics = scenarios
        .par_iter()
        .map(|s| run_with(s, |_| {}).map(|(_, m)| m))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(&metrics);
    Ok(BatchReport { metrics, summary })
}

/// The same scenario under each seed.
pub fn run_seeds(base: &Scenario, seeds: &[u64]) -> Result<BatchReport> {
    let scenarios: Vec<Scenario> = seeds
        .iter()
        .map(|&rng_seed| Scenario {
            rng_seed,
            ..base.clone()
        })
        .collect();
    run_batch(&scenarios)
}
