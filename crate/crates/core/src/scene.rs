//! Room geometry: corner-mounted access points (VAPs), each carrying a
//! pyramid of LEDs, and the receiver pose.
//!
//! Indices are zero-based throughout the API (`vap` in `0..K`, `led` in
//! `0..M`). The flattened layout used by gain vectors and observations is
//! `vap * M + led`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{config_err, Result};
use crate::Vec3;

const VERSOR_TOL: f64 = 1e-12;

/// One LED transmitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedTx {
    pub position: Vec3,
    pub normal: Vec3,
    pub vap: usize,
    pub led: usize,
}

/// Photodiode receiver: pose plus device constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceiverPose {
    pub position: Vec3,
    pub normal: Vec3,
    /// Detector area, m².
    pub area: f64,
    /// Field of view half-angle, rad.
    pub fov: f64,
    /// Responsivity, A/W.
    pub responsivity: f64,
    /// Junction capacitance per unit area, F/m².
    pub capacitance_per_area: f64,
}

impl ReceiverPose {
    /// Same device, different position.
    pub fn at(&self, position: Vec3) -> Self {
        Self { position, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fov > 0.0 && self.fov <= FRAC_PI_2) {
            return Err(config_err("receiver field of view must lie in (0, pi/2]"));
        }
        if !(self.area > 0.0) {
            return Err(config_err("detector area must be positive"));
        }
        if !(self.responsivity > 0.0) {
            return Err(config_err("responsivity must be positive"));
        }
        if !(self.capacitance_per_area > 0.0) {
            return Err(config_err("capacitance per area must be positive"));
        }
        if !self.position.iter().all(|v| v.is_finite()) {
            return Err(config_err("receiver position must be finite"));
        }
        if (self.normal.norm() - 1.0).abs() > 1e-9 {
            return Err(config_err("receiver normal must be a unit vector"));
        }
        Ok(())
    }
}

/// LED drive limits around the bias point, A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveLimits {
    pub bias: f64,
    pub upper: f64,
    pub lower: f64,
}

/// Orientation of the corner access points and their LED pyramids (radians).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VapGeometry {
    /// Azimuth of the VAP axis measured from the wall running along x.
    pub wall_angle: f64,
    /// Depression of the VAP axis below the ceiling plane.
    pub ceiling_angle: f64,
    /// Tilt of every LED normal away from the VAP axis.
    pub tilt: f64,
    /// Azimuthal phase of the first LED around the VAP axis.
    pub phase: f64,
}

/// Declarative description of a scenario; [`build_scenario`] turns it into
/// geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub room: Vec3,
    pub vaps: usize,
    pub leds_per_vap: usize,
    pub geometry: VapGeometry,
    pub lambertian_mode: f64,
    pub drive: DriveLimits,
    pub receiver: ReceiverPose,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            room: Vec3::new(5.0, 4.0, 3.0),
            vaps: 4,
            leds_per_vap: 4,
            geometry: VapGeometry {
                wall_angle: 45f64.to_radians(),
                ceiling_angle: 35f64.to_radians(),
                tilt: 15f64.to_radians(),
                phase: 0.0,
            },
            lambertian_mode: 10.0,
            drive: DriveLimits {
                bias: 1.5,
                upper: 1.0,
                lower: -1.0,
            },
            receiver: ReceiverPose {
                position: Vec3::new(1.25, 1.0, 1.0),
                normal: Vec3::new(0.0, 0.0, 1.0),
                area: 1e-4,
                fov: 85f64.to_radians(),
                responsivity: 0.54,
                capacitance_per_area: 112e-12 / 1e-4,
            },
        }
    }
}

/// Immutable room + transmitters + receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub room: Vec3,
    pub vaps: usize,
    pub leds_per_vap: usize,
    pub leds: Vec<LedTx>,
    pub receiver: ReceiverPose,
    pub lambertian_mode: f64,
    pub drive: DriveLimits,
    pub geometry: VapGeometry,
    vap_axes: Vec<Vec3>,
}

impl Scenario {
    pub fn led_count(&self) -> usize {
        self.leds.len()
    }

    pub fn led(&self, vap: usize, led: usize) -> &LedTx {
        &self.leds[vap * self.leds_per_vap + led]
    }

    pub fn vap_axis(&self, vap: usize) -> Vec3 {
        self.vap_axes[vap]
    }

    pub fn vap_origin(&self, vap: usize) -> Vec3 {
        self.leds[vap * self.leds_per_vap].position
    }

    /// Geometric center of the room.
    pub fn centroid(&self) -> Vec3 {
        self.room * 0.5
    }

    /// Whether `p` lies within the room grown by `margin` on every side.
    pub fn contains(&self, p: &Vec3, margin: f64) -> bool {
        (0..3).all(|i| p[i] >= -margin && p[i] <= self.room[i] + margin)
    }

    /// Copy with the receiver moved to `position`.
    pub fn with_receiver_at(&self, position: Vec3) -> Self {
        let mut s = self.clone();
        s.receiver.position = position;
        s
    }
}

/// Corner `(x, y)` in room coordinates for VAP `k`, in the order
/// (0,0), (Lx,0), (0,Ly), (Lx,Ly).
fn corner(room: &Vec3, k: usize) -> (f64, f64) {
    let x = if k.is_multiple_of(2) { 0.0 } else { room.x };
    let y = if k / 2 == 0 { 0.0 } else { room.y };
    (x, y)
}

fn vap_axis(room: &Vec3, k: usize, g: &VapGeometry) -> (Vec3, f64) {
    let (cx, cy) = corner(room, k);
    let sx = if cx == 0.0 { 1.0 } else { -1.0 };
    let sy = if cy == 0.0 { 1.0 } else { -1.0 };
    let azimuth = (sy * g.wall_angle.sin()).atan2(sx * g.wall_angle.cos());
    let (sc, cc) = g.ceiling_angle.sin_cos();
    (
        Vec3::new(cc * azimuth.cos(), cc * azimuth.sin(), -sc),
        azimuth,
    )
}

/// Builds the scenario geometry from a validated configuration.
pub fn build_scenario(cfg: &ScenarioConfig) -> Result<Scenario> {
    if !cfg.room.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(config_err("room dimensions must be positive"));
    }
    if cfg.vaps == 0 || cfg.leds_per_vap == 0 {
        return Err(config_err("K and M must both be at least 1"));
    }
    if cfg.vaps > 4 {
        return Err(config_err("access points occupy the four upper corners; K <= 4"));
    }
    let g = &cfg.geometry;
    if !(0.0..=FRAC_PI_2).contains(&g.wall_angle) {
        return Err(config_err("wall angle must lie in [0, pi/2]"));
    }
    if !(g.ceiling_angle > 0.0 && g.ceiling_angle <= FRAC_PI_2) {
        return Err(config_err("ceiling angle must lie in (0, pi/2]"));
    }
    if !(0.0..FRAC_PI_2).contains(&g.tilt) {
        return Err(config_err("LED tilt must lie in [0, pi/2)"));
    }
    if !g.phase.is_finite() {
        return Err(config_err("pyramid phase must be finite"));
    }
    if !(cfg.lambertian_mode >= 1.0) {
        return Err(config_err("Lambertian mode number must be >= 1"));
    }
    if !(cfg.drive.lower < cfg.drive.upper) {
        return Err(config_err("lower modulation limit must be below the upper limit"));
    }
    cfg.receiver.validate()?;

    let m_count = cfg.leds_per_vap;
    let mut leds = Vec::with_capacity(cfg.vaps * m_count);
    let mut axes = Vec::with_capacity(cfg.vaps);
    let (st, ct) = g.tilt.sin_cos();
    for k in 0..cfg.vaps {
        let (axis, azimuth) = vap_axis(&cfg.room, k, g);
        // u is horizontal and orthogonal to the axis for any depression angle.
        let u = Vec3::new(-azimuth.sin(), azimuth.cos(), 0.0);
        let w = axis.cross(&u);
        let (cx, cy) = corner(&cfg.room, k);
        let origin = Vec3::new(cx, cy, cfg.room.z);
        for m in 0..m_count {
            let psi = m as f64 * 2.0 * PI / m_count as f64 + g.phase;
            let normal = ct * axis + st * (u * psi.cos() + w * psi.sin());
            assert!(
                (normal.norm() - 1.0).abs() < VERSOR_TOL,
                "LED normal lost unit length"
            );
            leds.push(LedTx {
                position: origin,
                normal,
                vap: k,
                led: m,
            });
        }
        axes.push(axis);
    }

    Ok(Scenario {
        room: cfg.room,
        vaps: cfg.vaps,
        leds_per_vap: m_count,
        leds,
        receiver: cfg.receiver,
        lambertian_mode: cfg.lambertian_mode,
        drive: cfg.drive,
        geometry: cfg.geometry,
        vap_axes: axes,
    })
}

/// Vector from the LED to the receiver.
pub fn incidence_vector(led: &LedTx, receiver: &ReceiverPose) -> Vec3 {
    receiver.position - led.position
}
