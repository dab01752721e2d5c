//! LED electro-optics, receiver noise and synthetic RSS observations.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::GainMatrix;
use crate::error::{Error, Result};
use crate::scene::ReceiverPose;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Quadratic luminous-flux curve of the LED plus drive limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedModel {
    /// Flux coefficients (c2, c1, c0) in lm/A², lm/A, lm.
    pub flux_coefficients: [f64; 3],
    /// Radiometric conversion, W/lm.
    pub radiometric: f64,
    pub upper: f64,
    pub lower: f64,
    pub bias: f64,
}

impl Default for LedModel {
    fn default() -> Self {
        Self {
            flux_coefficients: [-31.29, 705.35, 20.7],
            radiometric: 2.1e-3,
            upper: 1.0,
            lower: -1.0,
            bias: 1.5,
        }
    }
}

impl LedModel {
    pub fn luminous_flux(&self, current: f64) -> f64 {
        let [c2, c1, c0] = self.flux_coefficients;
        (c2 * current + c1) * current + c0
    }

    /// Slope of optical power versus modulation current, W/A.
    pub fn conversion_factor(&self) -> Result<f64> {
        let span = self.upper - self.lower;
        if !(span.abs() > 0.0) {
            return Err(Error::Domain(
                "conversion factor needs distinct modulation limits".into(),
            ));
        }
        Ok(self.radiometric * (self.luminous_flux(self.upper) - self.luminous_flux(self.lower))
            / span)
    }

    /// Mean optical power emitted at the bias point, W.
    pub fn transmit_power(&self) -> f64 {
        self.radiometric * self.luminous_flux(self.bias)
    }

    /// Drive current that makes the optical output linear in `x`.
    ///
    /// Solves `phi(I) = phi(I_bias) + S_led x / radiometric` on the rising
    /// branch of the flux curve. `x` must already be clipped.
    pub fn predistort(&self, x: f64) -> Result<f64> {
        if !(x >= self.lower && x <= self.upper) {
            return Err(Error::Domain(format!(
                "predistortion input {x} outside [{}, {}]",
                self.lower, self.upper
            )));
        }
        let s_led = self.conversion_factor()?;
        let [c2, c1, c0] = self.flux_coefficients;
        let target = self.luminous_flux(self.bias) + s_led * x / self.radiometric;
        let rhs = target - c0;
        let disc = c1 * c1 + 4.0 * c2 * rhs;
        if disc < 0.0 {
            return Err(Error::Domain(format!(
                "flux {target} lm is beyond the LED's peak"
            )));
        }
        // rationalized root, stable as c2 -> 0
        Ok(2.0 * rhs / (c1 + disc.sqrt()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower < self.upper) {
            return Err(Error::Config("LED lower limit must be below the upper limit".into()));
        }
        if !(self.radiometric > 0.0) {
            return Err(Error::Config("radiometric factor must be positive".into()));
        }
        let [c2, c1, _] = self.flux_coefficients;
        // derivative c1 + 2 c2 I must stay positive over the drive range
        for i in [self.bias + self.lower, self.bias + self.upper] {
            if !(c1 + 2.0 * c2 * i > 0.0) {
                return Err(Error::Config(format!(
                    "flux curve is not increasing at drive current {i} A"
                )));
            }
        }
        Ok(())
    }
}

/// Receiver noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Absolute temperature, K.
    pub temperature: f64,
    /// TIA open-loop gain.
    pub open_loop_gain: f64,
    /// FET transconductance, S.
    pub transconductance: f64,
    /// FET channel noise factor.
    pub channel_noise_factor: f64,
    pub i2: f64,
    pub i3: f64,
    /// Noise bandwidth, Hz.
    pub bandwidth: f64,
    /// Optical filter bandwidth, nm.
    pub optical_bandwidth: f64,
    /// Background spectral irradiance, W/(cm² nm).
    pub background_irradiance: f64,
    /// Dark current, A.
    pub dark_current: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            temperature: 300.0,
            open_loop_gain: 10.0,
            transconductance: 30e-3,
            channel_noise_factor: 1.5,
            i2: 0.562,
            i3: 0.0868,
            bandwidth: 10e6,
            optical_bandwidth: 400.0,
            background_irradiance: 5.8e-6,
            dark_current: 5e-12,
        }
    }
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("temperature", self.temperature),
            ("open_loop_gain", self.open_loop_gain),
            ("transconductance", self.transconductance),
            ("channel_noise_factor", self.channel_noise_factor),
            ("i2", self.i2),
            ("i3", self.i3),
            ("bandwidth", self.bandwidth),
            ("optical_bandwidth", self.optical_bandwidth),
            ("background_irradiance", self.background_irradiance),
            ("dark_current", self.dark_current),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("noise parameter {name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Photocurrent noise variances, A².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseVariances {
    pub background: f64,
    pub signal: f64,
    pub dark: f64,
    /// Feedback-resistor part of the thermal noise.
    pub thermal_feedback: f64,
    /// FET-channel part of the thermal noise.
    pub thermal_fet: f64,
}

impl NoiseVariances {
    pub fn shot(&self) -> f64 {
        self.background + self.signal + self.dark
    }

    pub fn thermal(&self) -> f64 {
        self.thermal_feedback + self.thermal_fet
    }

    pub fn total(&self) -> f64 {
        self.shot() + self.thermal()
    }
}

/// Noise variances for a receiver collecting `received_power` watts.
pub fn noise_variances(nm: &NoiseModel, rp: &ReceiverPose, received_power: f64) -> NoiseVariances {
    let q = ELEMENTARY_CHARGE;
    let b = nm.bandwidth;
    let area_cm2 = rp.area * 1e4;
    let capacitance = rp.capacitance_per_area * rp.area;
    let kt = BOLTZMANN * nm.temperature;
    NoiseVariances {
        background: 2.0
            * q
            * rp.responsivity
            * area_cm2
            * nm.background_irradiance
            * nm.optical_bandwidth
            * b,
        signal: 2.0 * q * rp.responsivity * received_power.max(0.0) * b,
        dark: 2.0 * q * nm.dark_current * b,
        thermal_feedback: 8.0 * PI * kt / nm.open_loop_gain * capacitance * nm.i2 * b * b,
        thermal_fet: 16.0 * PI * PI * kt * nm.channel_noise_factor / nm.transconductance
            * capacitance
            * capacitance
            * nm.i3
            * b
            * b
            * b,
    }
}

/// Receiver normalization constants that map a pilot magnitude onto Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub h: f64,
    pub scaling: f64,
    pub responsivity: f64,
    pub conversion: f64,
}

impl Calibration {
    pub fn divisor(&self) -> f64 {
        self.h * self.scaling * self.responsivity * self.conversion
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.scaling > 0.0 && self.responsivity > 0.0 && self.conversion > 0.0)
        {
            return Err(Error::Config("calibration constants must be positive".into()));
        }
        Ok(())
    }

    /// Standard deviation in Ω units of a pilot magnitude disturbed by
    /// complex bin noise of total variance `variance` (A²).
    ///
    /// Only the component in phase with the pilot moves the magnitude to
    /// first order, which carries half the variance.
    pub fn omega_sigma(&self, variance: f64) -> f64 {
        (variance.max(0.0) / 2.0).sqrt() / self.divisor()
    }
}

/// Normalized RSS observations laid out `vap * M + led`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationVector {
    pub leds_per_vap: usize,
    pub vaps: usize,
    pub values: Vec<f64>,
}

impl ObservationVector {
    pub fn noise_free(gm: &GainMatrix) -> Self {
        Self {
            leds_per_vap: gm.leds_per_vap,
            vaps: gm.vaps,
            values: gm.values.clone(),
        }
    }

    pub fn get(&self, vap: usize, led: usize) -> f64 {
        self.values[vap * self.leds_per_vap + led]
    }

    pub fn vap(&self, vap: usize) -> &[f64] {
        let start = vap * self.leds_per_vap;
        &self.values[start..start + self.leds_per_vap]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseMode {
    /// Real Gaussian added to each normalized magnitude.
    #[default]
    GaussianOnMagnitude,
    /// Circular complex Gaussian added to the bin before taking |.|.
    ComplexAwgnOnBin,
}

/// Draws `s = p(θ) + n` with per-element noise std `sigma` (Ω units).
pub fn synthesize_observation<R: Rng + ?Sized>(
    gm: &GainMatrix,
    sigma: f64,
    rng: &mut R,
    mode: NoiseMode,
) -> ObservationVector {
    let values = gm
        .values
        .iter()
        .map(|&omega| {
            let a: f64 = StandardNormal.sample(rng);
            match mode {
                NoiseMode::GaussianOnMagnitude => omega + sigma * a,
                NoiseMode::ComplexAwgnOnBin => {
                    let b: f64 = StandardNormal.sample(rng);
                    (omega + sigma * a).hypot(sigma * b)
                }
            }
        })
        .collect();
    ObservationVector {
        leds_per_vap: gm.leds_per_vap,
        vaps: gm.vaps,
        values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::ScenarioConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn flux_values() {
        let led = LedModel::default();
        assert_eq!(led.luminous_flux(0.0), 20.7);
        assert!((led.luminous_flux(1.0) - 694.76).abs() < 1e-9);
        assert!((led.luminous_flux(1.5) - 1008.3225).abs() < 1e-9);
    }

    #[test]
    fn conversion_factor_values() {
        let led = LedModel::default();
        assert!((led.conversion_factor().unwrap() - 1.481235).abs() < 1e-9);
        let eps = LedModel {
            upper: 1e-6,
            lower: -1e-6,
            ..led
        };
        assert!((eps.conversion_factor().unwrap() - 0.0021 * 705.35).abs() < 1e-9);
        let half = LedModel { lower: 0.0, ..led };
        assert!((half.conversion_factor().unwrap() - 0.0021 * (694.76 - 20.7)).abs() < 1e-9);
        let flat = LedModel { lower: 1.0, ..led };
        assert!(flat.conversion_factor().is_err());
    }

    #[test]
    fn predistortion_fixed_point_and_range() {
        let led = LedModel::default();
        assert!((led.predistort(0.0).unwrap() - 1.5).abs() < 1e-12);
        assert!(led.predistort(1.01).is_err());
        assert!(led.predistort(-1.01).is_err());
        assert!(led.predistort(f64::NAN).is_err());
    }

    #[test]
    fn predistortion_linearizes_output() {
        let led = LedModel::default();
        let s = led.conversion_factor().unwrap();
        let p0 = led.radiometric * led.luminous_flux(led.bias);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut last = f64::NEG_INFINITY;
        let mut xs: Vec<f64> = (0..1000).map(|_| rng.random_range(-1.0..=1.0)).collect();
        xs.sort_by(f64::total_cmp);
        for x in xs {
            let i = led.predistort(x).unwrap();
            let p = led.radiometric * led.luminous_flux(i) - p0;
            assert!((p - s * x).abs() <= 1e-9 * (s * x).abs().max(1e-9));
            assert!(i >= last);
            last = i;
        }
    }

    #[test]
    fn transmit_power_default() {
        assert!((LedModel::default().transmit_power() - 2.117477).abs() < 1e-6);
    }

    #[test]
    fn led_validation() {
        assert!(LedModel::default().validate().is_ok());
        let bad = LedModel {
            bias: 20.0,
            ..LedModel::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn table_noise_variances() {
        let rx = ScenarioConfig::default().receiver;
        let v = noise_variances(&NoiseModel::default(), &rx, 0.0);
        assert!(rel(v.background, 4.0144e-15) < 1e-3);
        assert!(rel(v.dark, 1.6022e-23) < 1e-3);
        assert!(rel(v.thermal_feedback, 6.5631e-17) < 5e-3);
        assert!(rel(v.thermal_fet, 3.5608e-17) < 1e-3);
        assert_eq!(v.signal, 0.0);
        assert!(rel(v.total(), v.background + v.dark + v.thermal_feedback + v.thermal_fet) < 1e-15);
    }

    #[test]
    fn noise_grows_with_each_driver() {
        let rx = ScenarioConfig::default().receiver;
        let nm = NoiseModel::default();
        let base = noise_variances(&nm, &rx, 1e-5).total();
        let hot = NoiseModel {
            temperature: 310.0,
            ..nm
        };
        let wide = NoiseModel {
            bandwidth: 11e6,
            ..nm
        };
        assert!(noise_variances(&hot, &rx, 1e-5).total() > base);
        assert!(noise_variances(&wide, &rx, 1e-5).total() > base);
        assert!(noise_variances(&nm, &rx, 2e-5).total() > base);
    }

    fn gains() -> GainMatrix {
        GainMatrix {
            leds_per_vap: 2,
            vaps: 2,
            values: vec![1e-5, 2e-6, 0.0, 7e-7],
        }
    }

    #[test]
    fn zero_sigma_is_exact() {
        let gm = gains();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = synthesize_observation(&gm, 0.0, &mut rng, NoiseMode::GaussianOnMagnitude);
        assert_eq!(s.values, gm.values);
        assert_eq!(s, ObservationVector::noise_free(&gm));
    }

    #[test]
    fn sample_variance_matches_sigma() {
        let gm = GainMatrix {
            leds_per_vap: 1,
            vaps: 1,
            values: vec![3e-6],
        };
        let sigma = 1e-7;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let s = synthesize_observation(&gm, sigma, &mut rng, NoiseMode::GaussianOnMagnitude);
            let d = s.values[0] - 3e-6;
            acc += d * d;
        }
        let var = acc / n as f64;
        assert!(rel(var, sigma * sigma) < 0.02, "{var}");
    }

    #[test]
    fn same_seed_same_draw() {
        let gm = gains();
        for mode in [NoiseMode::GaussianOnMagnitude, NoiseMode::ComplexAwgnOnBin] {
            let a = synthesize_observation(&gm, 1e-6, &mut ChaCha8Rng::seed_from_u64(9), mode);
            let b = synthesize_observation(&gm, 1e-6, &mut ChaCha8Rng::seed_from_u64(9), mode);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rician_mode_is_nonnegative() {
        let gm = gains();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let s = synthesize_observation(&gm, 1e-5, &mut rng, NoiseMode::ComplexAwgnOnBin);
            assert!(s.values.iter().all(|v| *v >= 0.0));
        }
    }

    #[test]
    fn calibration_divisor() {
        let c = Calibration {
            h: 16.0,
            scaling: 1.0,
            responsivity: 0.54,
            conversion: 1.481235,
        };
        assert!((c.divisor() - 16.0 * 0.54 * 1.481235).abs() < 1e-12);
        assert!((c.omega_sigma(2.0) - 1.0 / c.divisor()).abs() < 1e-15);
        assert!(Calibration { h: 0.0, ..c }.validate().is_err());
    }
}
