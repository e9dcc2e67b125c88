//! Phase detector, ADC and the averaged acquisition cycle.
//!
//! The detector is modelled as a signed linear transfer around `v_center`,
//! folded triangularly outside +-90 deg (period 360 deg) and clipped to the
//! output swing. Each channel compares the carrier phases of two antennas,
//! `phase_i - phase_j`, which is the negative of the path-based shift
//! `360 f (d_i - d_j) / c`: the antenna further away lags.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::geometry::{wrap_phase, PAIRS};
use crate::rf_link::ReceivedSignal;

/// Number of detector channels (pairs 12, 23, 31).
pub const CHANNELS: usize = 3;

/// Receive level below which detector noise starts to grow, dBm.
///
/// Together with [`DEFAULT_LOW_POWER_NOISE_SLOPE`] this places the LOCK
/// failure boundary between -9 and -8 dBm transmit at 2.2 m with the default
/// link budget.
pub const DEFAULT_MIN_INPUT_POWER: f64 = -48.6;
/// Noise growth per dB of input-power deficit, V/dB.
pub const DEFAULT_LOW_POWER_NOISE_SLOPE: f64 = 0.3;
/// Detector noise at comfortable input levels, V.
pub const DEFAULT_NOISE_FLOOR_SIGMA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub v_center: f64,
    /// V/deg
    pub slope: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Half-width of the usable phase range, deg.
    pub usable_range: f64,
    /// dBm
    pub min_input_power: f64,
    pub noise_floor_sigma: f64,
    /// V/dB
    pub low_power_noise_slope: f64,
    /// Per-channel shift of `v_center` (detector mismatch), V.
    pub channel_offsets: [f64; CHANNELS],
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            v_center: 1.5,
            slope: 1.3 / 80.0,
            v_min: 0.2,
            v_max: 2.8,
            usable_range: 80.0,
            min_input_power: DEFAULT_MIN_INPUT_POWER,
            noise_floor_sigma: DEFAULT_NOISE_FLOOR_SIGMA,
            low_power_noise_slope: DEFAULT_LOW_POWER_NOISE_SLOPE,
            channel_offsets: [0.0; CHANNELS],
        }
    }
}

impl DetectorModel {
    /// Default transfer with all noise switched off.
    pub fn noiseless() -> Self {
        Self {
            noise_floor_sigma: 0.0,
            low_power_noise_slope: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.v_min < self.v_center && self.v_center < self.v_max,
            || {
                format!(
                    "detector needs v_min < v_center < v_max, got {} / {} / {}",
                    self.v_min, self.v_center, self.v_max
                )
            },
        )?;
        ensure(self.slope > 0.0 && self.slope.is_finite(), || {
            "detector slope must be > 0".into()
        })?;
        ensure(self.usable_range > 0.0 && self.usable_range <= 90.0, || {
            "usable range must lie in (0, 90] deg".into()
        })?;
        ensure(self.min_input_power.is_finite(), || {
            "min input power must be finite".into()
        })?;
        ensure(
            self.noise_floor_sigma >= 0.0 && self.low_power_noise_slope >= 0.0,
            || "noise coefficients must be >= 0".into(),
        )?;
        ensure(self.channel_offsets.iter().all(|o| o.is_finite()), || {
            "channel offsets must be finite".into()
        })
    }

    /// The same detector with `v_center` shifted by the channel's offset.
    pub fn for_channel(&self, channel: usize) -> DetectorModel {
        DetectorModel {
            v_center: self.v_center + self.channel_offsets[channel],
            channel_offsets: [0.0; CHANNELS],
            ..self.clone()
        }
    }

    /// Output swing over the usable range, `2 * slope * usable_range`.
    pub fn delta_vd(&self) -> f64 {
        2.0 * self.slope * self.usable_range
    }

    pub fn noise_sigma(&self, input_power: f64) -> f64 {
        self.noise_floor_sigma
            + self.low_power_noise_slope * (self.min_input_power - input_power).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdcModel {
    pub bits: u32,
    pub full_scale: f64,
    /// s
    pub sample_period: f64,
}

impl Default for AdcModel {
    /// 10 bit over 5 V at 10 kHz.
    fn default() -> Self {
        Self {
            bits: 10,
            full_scale: 5.0,
            sample_period: 100e-6,
        }
    }
}

impl AdcModel {
    pub fn validate(&self) -> Result<()> {
        ensure((1..=24).contains(&self.bits), || {
            format!("ADC bits must be 1..=24, got {}", self.bits)
        })?;
        ensure(self.full_scale > 0.0 && self.full_scale.is_finite(), || {
            "ADC full scale must be > 0".into()
        })?;
        ensure(
            self.sample_period > 0.0 && self.sample_period.is_finite(),
            || "ADC sample period must be > 0".into(),
        )
    }

    pub fn levels(&self) -> u32 {
        1 << self.bits
    }

    /// Volts per code.
    pub fn lsb(&self) -> f64 {
        self.full_scale / self.levels() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub samples_per_channel: u32,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            samples_per_channel: 10,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.samples_per_channel >= 1, || {
            "need at least one sample per channel".into()
        })
    }

    /// Duration of one full acquisition cycle, s.
    pub fn cycle_time(&self, adc: &AdcModel) -> f64 {
        (CHANNELS as u32 * self.samples_per_channel) as f64 * adc.sample_period
    }

    /// Output data rate, Hz.
    pub fn output_data_rate(&self, adc: &AdcModel) -> f64 {
        1.0 / self.cycle_time(adc)
    }
}

/// Detector voltages for pairs 12, 23, 31.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VoltageTriplet {
    pub v12: f64,
    pub v23: f64,
    pub v31: f64,
}

impl VoltageTriplet {
    pub const fn new(v12: f64, v23: f64, v31: f64) -> Self {
        Self { v12, v23, v31 }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.v12, self.v23, self.v31]
    }

    pub fn max_abs(&self) -> f64 {
        self.v12.abs().max(self.v23.abs()).max(self.v31.abs())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.v12 * k, self.v23 * k, self.v31 * k)
    }
}

/// Source of standard-normal draws for detector noise.
pub trait NoiseSource {
    fn standard_normal(&mut self) -> f64;
}

/// Always returns zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct Noiseless;

impl NoiseSource for Noiseless {
    fn standard_normal(&mut self) -> f64 {
        0.0
    }
}

/// Reproducible Gaussian stream.
#[derive(Debug, Clone)]
pub struct SeededNoise {
    rng: ChaCha8Rng,
}

impl SeededNoise {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl NoiseSource for SeededNoise {
    fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// Triangular extension of the identity: period 360, slope +-1, peaks at +-90.
fn fold(theta: f64) -> f64 {
    if theta.abs() <= 90.0 {
        theta
    } else {
        theta.signum() * (180.0 - theta.abs())
    }
}

/// One detector reading for a (pre-wrapped) phase difference.
pub fn detect(
    delta_theta: f64,
    input_power: f64,
    model: &DetectorModel,
    noise: &mut dyn NoiseSource,
) -> f64 {
    let clean = (model.v_center + model.slope * fold(delta_theta)).clamp(model.v_min, model.v_max);
    let sigma = model.noise_sigma(input_power);
    if sigma > 0.0 {
        clean + sigma * noise.standard_normal()
    } else {
        clean
    }
}

/// Truncating quantizer; out-of-range inputs clamp to the end codes.
pub fn quantize(v: f64, adc: &AdcModel) -> u32 {
    let levels = adc.levels();
    let x = (v.clamp(0.0, adc.full_scale) / adc.full_scale * levels as f64).floor();
    (x as u32).min(levels - 1)
}

/// Mid-tread reconstruction of a code.
pub fn code_to_volts(code: u32, adc: &AdcModel) -> Result<f64> {
    if code >= adc.levels() {
        return Err(Error::Domain(format!(
            "code {code} exceeds {}-bit range",
            adc.bits
        )));
    }
    Ok((code as f64 + 0.5) * adc.lsb())
}

/// Averaged voltages and codes from one acquisition cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    pub volts: VoltageTriplet,
    /// Mean code per channel, rounded to the nearest integer.
    pub codes: [u32; CHANNELS],
    /// s
    pub elapsed: f64,
}

impl Acquisition {
    pub fn output_data_rate(&self) -> f64 {
        1.0 / self.elapsed
    }
}

/// Samples the three channels sequentially and averages each one.
pub fn acquire_cycle(
    signal: &ReceivedSignal,
    detector: &DetectorModel,
    adc: &AdcModel,
    sampler: &SamplerConfig,
    noise: &mut dyn NoiseSource,
) -> Acquisition {
    let n = sampler.samples_per_channel;
    let mut volts = [0.0; CHANNELS];
    let mut codes = [0; CHANNELS];
    for (ch, &(i, j)) in PAIRS.iter().enumerate() {
        let model = detector.for_channel(ch);
        let delta = wrap_phase(signal.phase[i] - signal.phase[j]);
        let power = signal.amplitude[i].min(signal.amplitude[j]);
        let mut code_sum = 0u64;
        for _ in 0..n {
            code_sum += quantize(detect(delta, power, &model, noise), adc) as u64;
        }
        let mean_code = code_sum as f64 / n as f64;
        volts[ch] = (mean_code + 0.5) * adc.lsb();
        codes[ch] = mean_code.round() as u32;
    }
    Acquisition {
        volts: VoltageTriplet::from_array(volts),
        codes,
        elapsed: sampler.cycle_time(adc),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> DetectorModel {
        DetectorModel::noiseless()
    }

    #[test]
    fn detector_reference_points() {
        let m = quiet();
        assert_eq!(detect(0.0, 0.0, &m, &mut Noiseless), 1.5);
        assert_eq!(detect(80.0, 0.0, &m, &mut Noiseless), 2.8);
        assert_eq!(detect(-80.0, 0.0, &m, &mut Noiseless), 0.2);
        assert!((detect(-40.0, 0.0, &m, &mut Noiseless) - 0.85).abs() < 1e-12);
    }

    #[test]
    fn detector_folds_beyond_ninety() {
        let m = DetectorModel {
            v_min: 0.0,
            v_max: 3.0,
            ..quiet()
        };
        let a = detect(100.0, 0.0, &m, &mut Noiseless);
        let b = detect(80.0, 0.0, &m, &mut Noiseless);
        assert!((a - b).abs() < 1e-12);
        let c = detect(-170.0, 0.0, &m, &mut Noiseless);
        assert!((c - (1.5 - 10.0 * m.slope)).abs() < 1e-12);
    }

    #[test]
    fn noise_grows_below_min_power() {
        let m = DetectorModel::default();
        assert_eq!(m.noise_sigma(0.0), m.noise_floor_sigma);
        let deficit = m.noise_sigma(m.min_input_power - 2.0);
        assert!((deficit - (m.noise_floor_sigma + 2.0 * m.low_power_noise_slope)).abs() < 1e-12);
    }

    #[test]
    fn quantizer_codes() {
        let adc = AdcModel::default();
        assert_eq!(quantize(0.0, &adc), 0);
        assert_eq!(quantize(5.0, &adc), 1023);
        assert_eq!(quantize(7.0, &adc), 1023);
        assert_eq!(quantize(-1.0, &adc), 0);
        // floor(1.378 / 5 * 1024) = floor(282.21)
        assert_eq!(quantize(1.378, &adc), 282);
    }

    #[test]
    fn reconstruction() {
        let adc = AdcModel::default();
        assert!((code_to_volts(0, &adc).unwrap() - 2.44140625e-3).abs() < 1e-15);
        assert!((code_to_volts(282, &adc).unwrap() - 1.3794).abs() < 1e-4);
        assert!(code_to_volts(1024, &adc).is_err());
        for c in 0..adc.levels() {
            assert_eq!(quantize(code_to_volts(c, &adc).unwrap(), &adc), c);
        }
    }

    #[test]
    fn cycle_timing() {
        let adc = AdcModel::default();
        let s = SamplerConfig::default();
        assert!((s.cycle_time(&adc) - 3.0e-3).abs() < 1e-15);
        assert!((s.output_data_rate(&adc) - 333.333).abs() < 1e-3);
        let one = SamplerConfig {
            samples_per_channel: 1,
        };
        assert!((one.output_data_rate(&adc) - 3333.333).abs() < 1e-2);
    }

    #[test]
    fn averaging_without_noise_is_single_sample() {
        let sig = ReceivedSignal {
            amplitude: [-30.0; 3],
            phase: [10.0, -20.0, 5.0],
        };
        let adc = AdcModel::default();
        let many = acquire_cycle(
            &sig,
            &quiet(),
            &adc,
            &SamplerConfig::default(),
            &mut Noiseless,
        );
        let one = acquire_cycle(
            &sig,
            &quiet(),
            &adc,
            &SamplerConfig {
                samples_per_channel: 1,
            },
            &mut Noiseless,
        );
        assert_eq!(many.volts, one.volts);
        assert_eq!(many.codes, one.codes);
        assert!((many.elapsed - 10.0 * one.elapsed).abs() < 1e-15);
    }

    #[test]
    fn channel_sees_carrier_phase_difference() {
        // Antenna 1 lags antenna 2 by 30 deg: channel 12 reads -30 deg.
        let sig = ReceivedSignal {
            amplitude: [-30.0; 3],
            phase: [-30.0, 0.0, 0.0],
        };
        let adc = AdcModel {
            bits: 24,
            ..AdcModel::default()
        };
        let a = acquire_cycle(
            &sig,
            &quiet(),
            &adc,
            &SamplerConfig::default(),
            &mut Noiseless,
        );
        assert!((a.volts.v12 - (1.5 - 30.0 * 1.3 / 80.0)).abs() < 1e-6);
        assert!((a.volts.v23 - 1.5).abs() < 1e-6);
        assert!((a.volts.v31 - (1.5 + 30.0 * 1.3 / 80.0)).abs() < 1e-6);
    }

    #[test]
    fn averaging_reduces_noise_by_sqrt_n() {
        // 1e5 averaged draws at sigma = 0.05 V on a 24-bit ADC so that
        // quantization does not mask the noise.
        let m = DetectorModel {
            noise_floor_sigma: 0.05,
            low_power_noise_slope: 0.0,
            ..Default::default()
        };
        let adc = AdcModel {
            bits: 24,
            ..AdcModel::default()
        };
        let sig = ReceivedSignal {
            amplitude: [-30.0; 3],
            phase: [0.0; 3],
        };
        let trials = 100_000;
        for n in [1u32, 10] {
            let mut noise = SeededNoise::new(7 + n as u64);
            let sampler = SamplerConfig {
                samples_per_channel: n,
            };
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..trials {
                let v = acquire_cycle(&sig, &m, &adc, &sampler, &mut noise)
                    .volts
                    .v12;
                s += v;
                s2 += v * v;
            }
            let mean = s / trials as f64;
            let sd = (s2 / trials as f64 - mean * mean).sqrt();
            let expected = 0.05 / (n as f64).sqrt();
            // Standard error of a sample SD is sd / sqrt(2 N).
            let band = 3.0 * expected / (2.0 * trials as f64).sqrt();
            assert!(
                (sd - expected).abs() < band,
                "n={n} sd={sd} expected={expected}"
            );
        }
    }

    #[test]
    fn model_validation() {
        assert!(DetectorModel::default().validate().is_ok());
        assert!(DetectorModel {
            v_center: 3.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(DetectorModel {
            usable_range: 95.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AdcModel {
            bits: 0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(AdcModel {
            bits: 25,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(SamplerConfig {
            samples_per_channel: 0
        }
        .validate()
        .is_err());
    }
}
