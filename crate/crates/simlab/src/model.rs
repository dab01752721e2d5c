//! Operating points and the noisy observation path shared by experiments.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use vlc_core::channel::{gain_matrix_at, total_received_power, GainMatrix};
use vlc_core::frontend::{
    noise_variances, synthesize_observation, Calibration, LedModel, NoiseMode, NoiseModel,
    ObservationVector,
};
use vlc_core::ofdm::{clipping_noise_variance, tone_scaling_factor, Mode, OfdmConfig};
use vlc_core::scene::{build_scenario, Scenario};
use vlc_core::Vec3;

use crate::config::SimConfig;
use crate::error::SimResult;

/// Filter gain, pilot attenuation and clipping distortion for one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub ofdm: OfdmConfig,
    pub calibration: Calibration,
    /// Clipping distortion referred to the receiver noise, A².
    pub clip_variance: f64,
}

impl OperatingPoint {
    pub fn new(ofdm: OfdmConfig, responsivity: f64, conversion: f64) -> SimResult<Self> {
        let calibration = ofdm.calibration(responsivity, conversion)?;
        let gamma = ofdm.clipping_factor;
        let clip_variance = match ofdm.mode {
            Mode::Lcm => clipping_noise_variance(gamma, ofdm.upper, ofdm.lower),
            Mode::Lom => tone_clip_variance(gamma, (ofdm.upper - ofdm.lower) / 2.0),
        };
        Ok(Self {
            ofdm,
            calibration,
            clip_variance,
        })
    }

    /// Std of one normalized observation for photocurrent noise `variance`.
    pub fn omega_sigma(&self, variance: f64) -> f64 {
        self.calibration.omega_sigma(variance + self.clip_variance)
    }
}

/// Distortion power left after clipping a sinusoid at `half_range`, with
/// `gamma` relative to the tone's RMS value.
pub fn tone_clip_variance(gamma: f64, half_range: f64) -> f64 {
    if gamma >= SQRT_2 {
        return 0.0;
    }
    let amp = half_range * SQRT_2 / gamma;
    let n = 4096;
    let power = (0..n)
        .map(|i| {
            let v = (amp * (2.0 * PI * (i as f64 + 0.5) / n as f64).cos()).clamp(-half_range, half_range);
            v * v
        })
        .sum::<f64>()
        / n as f64;
    let fundamental = tone_scaling_factor(gamma) * amp;
    (power - fundamental * fundamental / 2.0).max(0.0)
}

/// Immutable context shared by every realization of an experiment.
#[derive(Debug, Clone)]
pub struct World {
    pub cfg: SimConfig,
    pub scenario: Scenario,
    pub led: LedModel,
    pub noise: NoiseModel,
    pub noise_mode: NoiseMode,
    pub transmit_power: f64,
    pub conversion: f64,
}

impl World {
    pub fn new(cfg: &SimConfig) -> SimResult<Self> {
        cfg.validate()?;
        let scenario = build_scenario(&cfg.scenario_config())?;
        let led = cfg.led_model();
        let conversion = led.conversion_factor()?;
        Ok(Self {
            cfg: cfg.clone(),
            scenario,
            transmit_power: led.transmit_power(),
            led,
            noise: cfg.noise_model(),
            noise_mode: cfg.noise_mode(),
            conversion,
        })
    }

    pub fn operating_point(&self, mode: Mode) -> SimResult<OperatingPoint> {
        self.operating_point_at(mode, None)
    }

    /// Operating point with the clipping factor optionally overridden.
    pub fn operating_point_at(&self, mode: Mode, gamma: Option<f64>) -> SimResult<OperatingPoint> {
        let mut ofdm = self.cfg.ofdm(mode);
        if let Some(g) = gamma {
            ofdm.clipping_factor = g;
        }
        OperatingPoint::new(ofdm, self.scenario.receiver.responsivity, self.conversion)
    }

    pub fn gains(&self, position: &Vec3) -> SimResult<GainMatrix> {
        Ok(gain_matrix_at(&self.scenario, position)?)
    }

    /// Receiver noise variance with the signal shot noise of `gm`, A².
    pub fn noise_variance(&self, gm: &GainMatrix) -> f64 {
        let p_r = total_received_power(gm, self.transmit_power);
        noise_variances(&self.noise, &self.scenario.receiver, p_r).total()
    }

    pub fn observe<R: Rng + ?Sized>(&self, gm: &GainMatrix, sigma: f64, rng: &mut R) -> ObservationVector {
        synthesize_observation(gm, sigma, rng, self.noise_mode)
    }

    /// Uniform point inside the room.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R, z_max: f64) -> Vec3 {
        let room = self.scenario.room;
        Vec3::new(
            rng.random::<f64>() * room.x,
            rng.random::<f64>() * room.y,
            rng.random::<f64>() * z_max.min(room.z),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lom_tone_is_unclipped_at_full_scale() {
        let w = World::new(&SimConfig::default()).unwrap();
        let op = w.operating_point(Mode::Lom).unwrap();
        assert!((op.calibration.h - 16.0).abs() < 1e-12);
        assert_eq!(op.calibration.scaling, 1.0);
        assert_eq!(op.clip_variance, 0.0);
    }

    #[test]
    fn lcm_point_defaults() {
        let w = World::new(&SimConfig::default()).unwrap();
        let op = w.operating_point(Mode::Lcm).unwrap();
        let sigma_m = 1.0 / 7.4;
        assert!((op.calibration.h - sigma_m * (1024.0f64 / 246.0).sqrt()).abs() < 1e-12);
        assert!(op.clip_variance >= 0.0 && op.clip_variance < 1e-13);
        assert!(op.omega_sigma(4e-15) > w.operating_point(Mode::Lom).unwrap().omega_sigma(4e-15));
    }

    #[test]
    fn clipped_tone_distortion_grows_as_gamma_falls() {
        let a = tone_clip_variance(1.2, 1.0);
        let b = tone_clip_variance(0.8, 1.0);
        assert!(a > 0.0 && b > a);
    }

    #[test]
    fn noise_includes_signal_shot_term() {
        let w = World::new(&SimConfig::default()).unwrap();
        let gm = w.gains(&Vec3::new(1.25, 1.0, 1.0)).unwrap();
        let v = w.noise_variance(&gm);
        let floor = noise_variances(&w.noise, &w.scenario.receiver, 0.0).total();
        assert!(v > floor);
        assert!(v < floor * 1.1);
    }
}
