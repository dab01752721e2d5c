//! TOML configuration. Every section and key is optional; missing keys take
//! the reference parameter values. Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;
use vlc_core::estimators::RssParams;
use vlc_core::frontend::{LedModel, NoiseMode, NoiseModel};
use vlc_core::ofdm::{Mode, OfdmConfig, TONE_FULL_SCALE_CLIPPING};
use vlc_core::scene::{DriveLimits, ReceiverPose, ScenarioConfig, VapGeometry};
use vlc_core::Vec3;

use crate::error::{SimError, SimResult};

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub room: RoomSection,
    pub vap: VapSection,
    pub led: LedSection,
    pub receiver: ReceiverSection,
    pub noise: NoiseSection,
    pub ofdm: OfdmSection,
    pub estimator: EstimatorSection,
    pub experiment: ExperimentSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomSection {
    /// Lx, Ly, Lz in meters.
    pub dimensions: [f64; 3],
}

impl Default for RoomSection {
    fn default() -> Self {
        Self {
            dimensions: [5.0, 4.0, 3.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VapSection {
    pub count: usize,
    pub leds_per_vap: usize,
    pub wall_angle_deg: f64,
    pub ceiling_angle_deg: f64,
    pub tilt_deg: f64,
    pub phase_deg: f64,
}

impl Default for VapSection {
    fn default() -> Self {
        Self {
            count: 4,
            leds_per_vap: 4,
            wall_angle_deg: 45.0,
            ceiling_angle_deg: 35.0,
            tilt_deg: 15.0,
            phase_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LedSection {
    pub lambertian_mode: f64,
    /// A.
    pub bias: f64,
    pub upper: f64,
    pub lower: f64,
    /// c2, c1, c0 of the luminous flux curve (lm/A², lm/A, lm).
    pub flux_coefficients: [f64; 3],
    /// W/lm.
    pub radiometric: f64,
}

impl Default for LedSection {
    fn default() -> Self {
        let led = LedModel::default();
        Self {
            lambertian_mode: 10.0,
            bias: led.bias,
            upper: led.upper,
            lower: led.lower,
            flux_coefficients: led.flux_coefficients,
            radiometric: led.radiometric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverSection {
    pub position: [f64; 3],
    pub normal: [f64; 3],
    pub area_cm2: f64,
    pub fov_deg: f64,
    /// A/W.
    pub responsivity: f64,
    pub capacitance_pf_per_cm2: f64,
}

impl Default for ReceiverSection {
    fn default() -> Self {
        Self {
            position: [1.25, 1.0, 1.0],
            normal: [0.0, 0.0, 1.0],
            area_cm2: 1.0,
            fov_deg: 85.0,
            responsivity: 0.54,
            capacitance_pf_per_cm2: 112.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModeKey {
    #[default]
    GaussianOnMagnitude,
    ComplexAwgnOnBin,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub temperature: f64,
    pub open_loop_gain: f64,
    /// S.
    pub transconductance: f64,
    pub channel_noise_factor: f64,
    pub i2: f64,
    pub i3: f64,
    /// Hz.
    pub bandwidth: f64,
    pub optical_bandwidth_nm: f64,
    /// W/(cm² nm).
    pub background_irradiance: f64,
    /// A.
    pub dark_current: f64,
    pub mode: NoiseModeKey,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let n = NoiseModel::default();
        Self {
            temperature: n.temperature,
            open_loop_gain: n.open_loop_gain,
            transconductance: n.transconductance,
            channel_noise_factor: n.channel_noise_factor,
            i2: n.i2,
            i3: n.i3,
            bandwidth: n.bandwidth,
            optical_bandwidth_nm: n.optical_bandwidth,
            background_irradiance: n.background_irradiance,
            dark_current: n.dark_current,
            mode: NoiseModeKey::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmSection {
    pub subcarriers: usize,
    /// Overrides the data length used by the capacity analytics.
    pub data_len: Option<usize>,
    /// Clipping factor of the LCM operating point.
    pub lcm_clipping_factor: f64,
    /// Clipping factor of the LOM pilot tone.
    pub lom_clipping_factor: f64,
    pub cp_len: usize,
}

impl Default for OfdmSection {
    fn default() -> Self {
        Self {
            subcarriers: 1024,
            data_len: None,
            lcm_clipping_factor: 7.4,
            lom_clipping_factor: TONE_FULL_SCALE_CLIPPING,
            cp_len: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorSection {
    pub step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Fixed iteration count of the surface and noise sweeps.
    pub surface_iterations: usize,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            step: 0.3,
            tolerance: 1e-5,
            max_iterations: 200,
            surface_iterations: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeKey {
    Lom,
    Lcm,
}

impl From<ModeKey> for Mode {
    fn from(m: ModeKey) -> Mode {
        match m {
            ModeKey::Lom => Mode::Lom,
            ModeKey::Lcm => Mode::Lcm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub seed: u64,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    /// Restricts experiments that cover both modes to one of them.
    pub mode: Option<ModeKey>,
    pub positions: Vec<[f64; 3]>,
    pub table2_realizations: usize,
    pub converge_realizations: usize,
    pub converge_z_max: f64,
    pub planes: Vec<f64>,
    pub pitch: f64,
    pub surface_realizations: usize,
    /// Radius of the central and corner regions in the x-y plane, m.
    pub region_radius: f64,
    pub noise_min: f64,
    pub noise_max: f64,
    pub noise_points: usize,
    pub noise_fit_min: f64,
    pub noise_fit_max: f64,
    pub noise_pitch: f64,
    pub noise_realizations: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_step: f64,
    pub capacity_step: f64,
    pub clip_position: [f64; 3],
    pub clip_realizations: usize,
    pub complexity_k_max: usize,
    pub complexity_m: Vec<usize>,
    pub complexity_n_l: Vec<f64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            seed: 20240101,
            threads: 0,
            mode: None,
            positions: vec![[1.25, 1.0, 1.0], [1.25, 2.0, 1.0], [2.5, 1.0, 1.0]],
            table2_realizations: 1000,
            converge_realizations: 10_000,
            converge_z_max: 2.0,
            planes: vec![0.1, 0.8, 2.0],
            pitch: 0.25,
            surface_realizations: 100,
            region_radius: 0.5,
            noise_min: 1e-20,
            noise_max: 1e-8,
            noise_points: 13,
            noise_fit_min: 1e-16,
            noise_fit_max: 1e-12,
            noise_pitch: 1.0,
            noise_realizations: 50,
            gamma_min: 1.0,
            gamma_max: 14.0,
            gamma_step: 0.5,
            capacity_step: 0.05,
            clip_position: [1.25, 1.0, 1.0],
            clip_realizations: 1000,
            complexity_k_max: 8,
            complexity_m: vec![2, 4, 8],
            complexity_n_l: vec![1.0, 5.0, 10.0, 20.0],
        }
    }
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn positive(name: &str, v: f64) -> SimResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::Config(format!("{name} must be positive, got {v}")))
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> SimResult<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| SimError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> SimResult<()> {
        self.scenario_config().receiver.validate()?;
        vlc_core::scene::build_scenario(&self.scenario_config())?;
        self.led_model().validate()?;
        self.noise_model().validate()?;
        self.ofdm(Mode::Lom).validate()?;
        self.ofdm(Mode::Lcm).validate()?;
        self.rss_params().validate()?;
        let e = &self.experiment;
        if e.positions.is_empty() {
            return Err(SimError::Config("at least one probe position is required".into()));
        }
        for (name, n) in [
            ("table2_realizations", e.table2_realizations),
            ("converge_realizations", e.converge_realizations),
            ("surface_realizations", e.surface_realizations),
            ("noise_realizations", e.noise_realizations),
            ("clip_realizations", e.clip_realizations),
            ("noise_points", e.noise_points),
            ("surface_iterations", self.estimator.surface_iterations),
        ] {
            if n == 0 {
                return Err(SimError::Config(format!("{name} must be at least 1")));
            }
        }
        positive("pitch", e.pitch)?;
        positive("noise_pitch", e.noise_pitch)?;
        positive("converge_z_max", e.converge_z_max)?;
        positive("region_radius", e.region_radius)?;
        positive("noise_min", e.noise_min)?;
        positive("gamma_min", e.gamma_min)?;
        positive("gamma_step", e.gamma_step)?;
        positive("capacity_step", e.capacity_step)?;
        if !(e.noise_min <= e.noise_max) || !(e.noise_fit_min < e.noise_fit_max) {
            return Err(SimError::Config("noise sweep bounds must be ordered".into()));
        }
        if !(e.gamma_min <= e.gamma_max) {
            return Err(SimError::Config("gamma sweep bounds must be ordered".into()));
        }
        if e.planes.is_empty() {
            return Err(SimError::Config("at least one plane height is required".into()));
        }
        if e.complexity_k_max == 0 || e.complexity_m.is_empty() || e.complexity_n_l.is_empty() {
            return Err(SimError::Config("complexity ranges must be non-empty".into()));
        }
        Ok(())
    }

    pub fn scenario_config(&self) -> ScenarioConfig {
        let v = &self.vap;
        let r = &self.receiver;
        let area = r.area_cm2 * 1e-4;
        ScenarioConfig {
            room: v3(self.room.dimensions),
            vaps: v.count,
            leds_per_vap: v.leds_per_vap,
            geometry: VapGeometry {
                wall_angle: v.wall_angle_deg.to_radians(),
                ceiling_angle: v.ceiling_angle_deg.to_radians(),
                tilt: v.tilt_deg.to_radians(),
                phase: v.phase_deg.to_radians(),
            },
            lambertian_mode: self.led.lambertian_mode,
            drive: DriveLimits {
                bias: self.led.bias,
                upper: self.led.upper,
                lower: self.led.lower,
            },
            receiver: ReceiverPose {
                position: v3(r.position),
                normal: v3(r.normal),
                area,
                fov: r.fov_deg.to_radians(),
                responsivity: r.responsivity,
                // pF/cm² -> F/m²
                capacitance_per_area: r.capacitance_pf_per_cm2 * 1e-12 / 1e-4,
            },
        }
    }

    pub fn led_model(&self) -> LedModel {
        LedModel {
            flux_coefficients: self.led.flux_coefficients,
            radiometric: self.led.radiometric,
            upper: self.led.upper,
            lower: self.led.lower,
            bias: self.led.bias,
        }
    }

    pub fn noise_model(&self) -> NoiseModel {
        let n = &self.noise;
        NoiseModel {
            temperature: n.temperature,
            open_loop_gain: n.open_loop_gain,
            transconductance: n.transconductance,
            channel_noise_factor: n.channel_noise_factor,
            i2: n.i2,
            i3: n.i3,
            bandwidth: n.bandwidth,
            optical_bandwidth: n.optical_bandwidth_nm,
            background_irradiance: n.background_irradiance,
            dark_current: n.dark_current,
        }
    }

    pub fn noise_mode(&self) -> NoiseMode {
        match self.noise.mode {
            NoiseModeKey::GaussianOnMagnitude => NoiseMode::GaussianOnMagnitude,
            NoiseModeKey::ComplexAwgnOnBin => NoiseMode::ComplexAwgnOnBin,
        }
    }

    /// OFDM settings of the operating point for `mode`.
    pub fn ofdm(&self, mode: Mode) -> OfdmConfig {
        let o = &self.ofdm;
        OfdmConfig {
            subcarriers: o.subcarriers,
            leds_per_vap: self.vap.leds_per_vap,
            vaps: self.vap.count,
            mode,
            clipping_factor: match mode {
                Mode::Lom => o.lom_clipping_factor,
                Mode::Lcm => o.lcm_clipping_factor,
            },
            upper: self.led.upper,
            lower: self.led.lower,
            bandwidth: self.noise.bandwidth,
            data_len_override: o.data_len,
            cp_len: o.cp_len,
        }
    }

    pub fn rss_params(&self) -> RssParams {
        RssParams {
            step: self.estimator.step,
            tolerance: self.estimator.tolerance,
            max_iterations: self.estimator.max_iterations,
            fixed_iterations: false,
        }
    }

    pub fn surface_params(&self) -> RssParams {
        RssParams {
            max_iterations: self.estimator.surface_iterations,
            fixed_iterations: true,
            ..self.rss_params()
        }
    }

    /// Modes covered by two-mode experiments, honoring the mode filter.
    pub fn modes(&self) -> Vec<Mode> {
        match self.experiment.mode {
            Some(m) => vec![m.into()],
            None => vec![Mode::Lcm, Mode::Lom],
        }
    }

    /// Mode of single-mode experiments (LOM unless set).
    pub fn single_mode(&self) -> Mode {
        self.experiment.mode.map(Into::into).unwrap_or(Mode::Lom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = SimConfig::from_toml("").unwrap();
        assert_eq!(cfg, SimConfig::default());
        let sc = cfg.scenario_config();
        assert!((sc.receiver.area - 1e-4).abs() < 1e-18);
        assert!((sc.receiver.capacitance_per_area * sc.receiver.area - 112e-12).abs() < 1e-22);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(SimConfig::from_toml("[room]\nwidth = 3\n").is_err());
        assert!(SimConfig::from_toml("[rooms]\n").is_err());
    }

    #[test]
    fn partial_override() {
        let cfg = SimConfig::from_toml("[vap]\ntilt_deg = 20\n[experiment]\nmode = \"lcm\"\n").unwrap();
        assert_eq!(cfg.vap.tilt_deg, 20.0);
        assert_eq!(cfg.vap.count, 4);
        assert_eq!(cfg.modes(), vec![Mode::Lcm]);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for text in [
            "[experiment]\ntable2_realizations = 0\n",
            "[receiver]\nfov_deg = 120\n",
            "[ofdm]\nsubcarriers = 1000\n",
            "[led]\nupper = -2\n",
            "[experiment]\npitch = 0\n",
            "[experiment]\nnoise_min = 1e-8\nnoise_max = 1e-20\n",
        ] {
            assert!(matches!(SimConfig::from_toml(text), Err(SimError::Config(_))), "{text}");
        }
    }
}
