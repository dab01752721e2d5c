//! Lambertian line-of-sight DC gain and its gradient.
//!
//! For an LED at `r_mk` with normal `n_mk` and a receiver at `r_R` with
//! normal `n_R`, let `v = r_R - r_mk`. Then
//!
//! ```text
//! Omega = kappa * rect(theta / fov) * rect(phi / (pi/2)) * f(v)
//! kappa = -(n_L + 1) A_pd / (2 pi)
//! f(v)  = (v.n_mk)^n_L (v.n_R) / |v|^(n_L + 3)
//! ```
//!
//! with `cos(phi) = v.n_mk / |v|` (emission) and `cos(theta) = -v.n_R / |v|`
//! (incidence). `kappa < 0` cancels the sign of `v.n_R`, so gains are
//! non-negative wherever both gates pass.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::scene::{incidence_vector, LedTx, ReceiverPose, Scenario};
use crate::Vec3;

fn kappa(n_l: f64, area: f64) -> f64 {
    -(n_l + 1.0) * area / (2.0 * PI)
}

/// Incidence geometry shared by the gain and its gradient.
struct Incidence {
    v: Vec3,
    dist: f64,
    /// v . n_mk
    along_led: f64,
    /// v . n_R
    along_rx: f64,
    gate: bool,
}

fn incidence(led: &LedTx, receiver: &ReceiverPose) -> Result<Incidence> {
    let v = incidence_vector(led, receiver);
    let dist = v.norm();
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(Error::Domain(format!(
            "receiver coincides with LED {} of VAP {}",
            led.led + 1,
            led.vap + 1
        )));
    }
    let along_led = v.dot(&led.normal);
    let along_rx = v.dot(&receiver.normal);
    let emission = (along_led / dist).clamp(-1.0, 1.0).acos();
    let arrival = (-along_rx / dist).clamp(-1.0, 1.0).acos();
    // rect(t) = 1 for |t| <= 1
    let gate = arrival <= receiver.fov && emission <= FRAC_PI_2;
    Ok(Incidence {
        v,
        dist,
        along_led,
        along_rx,
        gate,
    })
}

/// DC optical gain between one LED and the receiver.
pub fn channel_gain(led: &LedTx, receiver: &ReceiverPose, n_l: f64) -> Result<f64> {
    let inc = incidence(led, receiver)?;
    if !inc.gate || inc.along_led <= 0.0 {
        return Ok(0.0);
    }
    let f = inc.along_led.powf(n_l) * inc.along_rx / inc.dist.powf(n_l + 3.0);
    Ok(kappa(n_l, receiver.area) * f)
}

/// Gradient of `P_mk = Omega_mk * P_T` with respect to the receiver position.
///
/// The gates are held constant, so the row is zero wherever either gate is
/// closed and the gradient is one-sided at the gate boundaries.
pub fn jacobian_row(led: &LedTx, receiver: &ReceiverPose, n_l: f64, p_t: f64) -> Result<Vec3> {
    let inc = incidence(led, receiver)?;
    if !inc.gate || inc.along_led <= 0.0 {
        return Ok(Vec3::zeros());
    }
    let d2 = inc.dist * inc.dist;
    let base = inc.along_led.powf(n_l) / inc.dist.powf(n_l + 3.0);
    let df = (receiver.normal + led.normal * (n_l * inc.along_rx / inc.along_led)
        - inc.v * ((n_l + 3.0) * inc.along_rx / d2))
        * base;
    Ok(df * (kappa(n_l, receiver.area) * p_t))
}

/// Received optical power of one LED, W.
pub fn received_power(gain: f64, p_t: f64) -> f64 {
    gain * p_t
}

/// Electric gain from LED modulation current to photocurrent, A/A.
pub fn electric_gain(gain: f64, conversion: f64, responsivity: f64) -> f64 {
    conversion * gain * responsivity
}

/// DC gains for every LED of a scenario, stored `vap * M + led`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    pub leds_per_vap: usize,
    pub vaps: usize,
    pub values: Vec<f64>,
}

impl GainMatrix {
    pub fn get(&self, vap: usize, led: usize) -> f64 {
        self.values[self.index(vap, led)]
    }

    pub fn index(&self, vap: usize, led: usize) -> usize {
        vap * self.leds_per_vap + led
    }

    /// Inverse of [`GainMatrix::index`].
    pub fn position_of(&self, index: usize) -> (usize, usize) {
        (index / self.leds_per_vap, index % self.leds_per_vap)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Gains of one VAP's LEDs.
    pub fn vap(&self, vap: usize) -> &[f64] {
        let start = vap * self.leds_per_vap;
        &self.values[start..start + self.leds_per_vap]
    }
}

/// Gains at the scenario's receiver position.
pub fn gain_matrix(scenario: &Scenario) -> Result<GainMatrix> {
    gain_matrix_at(scenario, &scenario.receiver.position)
}

/// Gains with the receiver moved to `position`.
pub fn gain_matrix_at(scenario: &Scenario, position: &Vec3) -> Result<GainMatrix> {
    let rx = scenario.receiver.at(*position);
    let values = scenario
        .leds
        .iter()
        .map(|led| channel_gain(led, &rx, scenario.lambertian_mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(GainMatrix {
        leds_per_vap: scenario.leds_per_vap,
        vaps: scenario.vaps,
        values,
    })
}

/// Jacobian of the gain vector at `position`, one row per LED.
pub fn jacobian_at(scenario: &Scenario, position: &Vec3, p_t: f64) -> Result<Vec<Vec3>> {
    let rx = scenario.receiver.at(*position);
    scenario
        .leds
        .iter()
        .map(|led| jacobian_row(led, &rx, scenario.lambertian_mode, p_t))
        .collect()
}

pub fn total_received_power(gm: &GainMatrix, p_t: f64) -> f64 {
    gm.values.iter().map(|g| received_power(*g, p_t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build_scenario, ScenarioConfig};

    fn overhead_pair() -> (LedTx, ReceiverPose) {
        let led = LedTx {
            position: Vec3::new(0.0, 0.0, 3.0),
            normal: Vec3::new(0.0, 0.0, -1.0),
            vap: 0,
            led: 0,
        };
        let rx = ReceiverPose {
            position: Vec3::zeros(),
            normal: Vec3::new(0.0, 0.0, 1.0),
            area: 1e-4,
            fov: 85f64.to_radians(),
            responsivity: 0.54,
            capacitance_per_area: 1.12e-6,
        };
        (led, rx)
    }

    #[test]
    fn overhead_gain_by_hand() {
        let (led, rx) = overhead_pair();
        let g = channel_gain(&led, &rx, 10.0).unwrap();
        let expected = 11.0 * 1e-4 / (2.0 * PI) / 9.0;
        assert!((g - expected).abs() < 1e-18);
        assert!((g - 1.9452e-5).abs() < 1e-9);
    }

    #[test]
    fn incidence_beyond_fov_is_gated() {
        let (led, mut rx) = overhead_pair();
        // tilt the receiver 86 degrees away from the LED
        let a = 86f64.to_radians();
        rx.normal = Vec3::new(a.sin(), 0.0, a.cos());
        assert_eq!(channel_gain(&led, &rx, 10.0).unwrap(), 0.0);
        assert_eq!(jacobian_row(&led, &rx, 10.0, 1.0).unwrap(), Vec3::zeros());
    }

    #[test]
    fn receiver_behind_led_is_gated() {
        let (led, mut rx) = overhead_pair();
        rx.position = Vec3::new(0.0, 0.0, 3.5);
        assert_eq!(channel_gain(&led, &rx, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn fov_boundary_is_inclusive() {
        let (led, mut rx) = overhead_pair();
        rx.fov = 0.0f64.acos().min(rx.fov);
        // Straight overhead: incidence angle 0, always inside.
        rx.fov = 1e-9;
        assert!(channel_gain(&led, &rx, 10.0).unwrap() > 0.0);
    }

    #[test]
    fn coincident_positions_are_a_domain_error() {
        let (led, mut rx) = overhead_pair();
        rx.position = led.position;
        assert!(matches!(channel_gain(&led, &rx, 10.0), Err(Error::Domain(_))));
        assert!(jacobian_row(&led, &rx, 10.0, 1.0).is_err());
    }

    #[test]
    fn on_axis_inverse_square() {
        let (led, mut rx) = overhead_pair();
        rx.position = Vec3::new(0.0, 0.0, 2.0);
        let near = channel_gain(&led, &rx, 10.0).unwrap();
        rx.position = Vec3::new(0.0, 0.0, 1.0);
        let far = channel_gain(&led, &rx, 10.0).unwrap();
        assert!((near / far - 4.0).abs() < 4e-9);
    }

    #[test]
    fn power_and_electric_gain() {
        let g = 1.9452e-5;
        let p = received_power(g, 2.117);
        assert!((p - 4.118e-5).abs() < 1e-8);
        assert_eq!(received_power(g, 0.0), 0.0);
        let ge = electric_gain(g, 1.4812, 0.54);
        assert!((ge - 1.5558e-5).abs() < 1e-9);
        assert_eq!(electric_gain(0.0, 1.4812, 0.54), 0.0);
        assert!((electric_gain(2.0 * g, 1.4812, 0.54) - 2.0 * ge).abs() < 1e-20);
    }

    #[test]
    fn total_power_is_sum_of_parts() {
        let s = build_scenario(&ScenarioConfig::default()).unwrap();
        let gm = gain_matrix_at(&s, &Vec3::new(2.5, 2.0, 1.0)).unwrap();
        let total = total_received_power(&gm, 2.0);
        let parts: f64 = gm.values.iter().map(|g| received_power(*g, 2.0)).sum();
        assert_eq!(total, parts);
    }

    #[test]
    fn default_scenario_gains_are_finite_and_nonnegative() {
        let s = build_scenario(&ScenarioConfig::default()).unwrap();
        let gm = gain_matrix_at(&s, &Vec3::new(2.5, 2.0, 1.0)).unwrap();
        assert_eq!(gm.values.len(), 16);
        assert!(gm.values.iter().all(|g| g.is_finite() && *g >= 0.0));
        assert!(gm.values.iter().any(|g| *g > 0.0));
    }

    #[test]
    fn receiver_above_leds_sees_nothing() {
        let s = build_scenario(&ScenarioConfig::default()).unwrap();
        let gm = gain_matrix_at(&s, &Vec3::new(2.5, 2.0, 3.2)).unwrap();
        assert!(gm.values.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn center_gains_match_mirror_images() {
        let s = build_scenario(&ScenarioConfig::default()).unwrap();
        let gm = gain_matrix_at(&s, &Vec3::new(2.5, 2.0, 1.0)).unwrap();
        // Mirror x -> Lx - x maps VAP 0 <-> 1 and 2 <-> 3, and LED normals map
        // onto normals of the mirrored VAP (possibly with a different index).
        for k in 0..4 {
            let mirrored = k ^ 1;
            let mut a: Vec<f64> = gm.vap(k).to_vec();
            let mut b: Vec<f64> = gm.vap(mirrored).to_vec();
            a.sort_by(f64::total_cmp);
            b.sort_by(f64::total_cmp);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn vectorization_index_is_bijective() {
        let s = build_scenario(&ScenarioConfig::default()).unwrap();
        let gm = gain_matrix(&s).unwrap();
        let mut seen = vec![false; gm.values.len()];
        for k in 0..gm.vaps {
            for m in 0..gm.leds_per_vap {
                let i = gm.index(k, m);
                assert!(!seen[i]);
                seen[i] = true;
                assert_eq!(gm.position_of(i), (k, m));
            }
        }
        assert!(seen.iter().all(|v| *v));
    }
}
