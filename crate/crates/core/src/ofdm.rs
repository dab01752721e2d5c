//! Spatial OFDM framing for per-LED pilot discrimination.
//!
//! Each VAP owns one frame of `N` subcarriers. The lower half is split into
//! `M` contiguous groups of `N/(2M)` bins, one per LED. Group `m` carries the
//! pilot of VAP `k` in bin `m N/(2M) + k + 1` (zero-based `m`, `k`), so every
//! LED of every VAP has its own bin. In LCM the VAP chosen for data also
//! fills bins `m N/(2M) + K + 1 .. (m+1) N/(2M) - 1` of every group.
//!
//! Transmit: allocate, extend Hermitian, mask per LED, inverse transform,
//! clip, predistort, add bias and cyclic prefix. Receive: strip the prefix,
//! forward transform, read pilot magnitudes and normalize onto Ω.

pub mod fft;

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::io::Write;

use num_complex::Complex64;
use statrs::function::erf::erfc;

use crate::channel::GainMatrix;
use crate::error::{Error, Result};
use crate::frontend::{Calibration, LedModel, ObservationVector};

pub use fft::{dft, dft_real, idft};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Clipping factor at which a full-scale pilot tone just touches the limits.
pub const TONE_FULL_SCALE_CLIPPING: f64 = SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// All modulation power goes to the pilots.
    #[default]
    Lom,
    /// Pilots share the groups with data subcarriers.
    Lcm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfdmConfig {
    pub subcarriers: usize,
    pub leds_per_vap: usize,
    pub vaps: usize,
    pub mode: Mode,
    pub clipping_factor: f64,
    pub upper: f64,
    pub lower: f64,
    /// Hz.
    pub bandwidth: f64,
    /// Data length used by the capacity analytics; `None` means the
    /// allocation's own count.
    pub data_len_override: Option<usize>,
    pub cp_len: usize,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            subcarriers: 1024,
            leds_per_vap: 4,
            vaps: 4,
            mode: Mode::Lom,
            clipping_factor: TONE_FULL_SCALE_CLIPPING,
            upper: 1.0,
            lower: -1.0,
            bandwidth: 10e6,
            data_len_override: None,
            cp_len: 64,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        let n = self.subcarriers;
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Config(format!("N = {n} must be a power of two >= 4")));
        }
        if self.leds_per_vap == 0 || self.vaps == 0 {
            return Err(Error::Config("K and M must be at least 1".into()));
        }
        if !(n / 2).is_multiple_of(self.leds_per_vap) {
            return Err(Error::Config(format!(
                "N/(2M) must be an integer (N = {n}, M = {})",
                self.leds_per_vap
            )));
        }
        // largest pilot offset inside a group is K, which must stay in the group
        if self.vaps + 1 > self.group_width() {
            return Err(Error::Config(format!(
                "{} pilots do not fit a group of {} bins",
                self.vaps,
                self.group_width()
            )));
        }
        if !(self.clipping_factor > 0.0) {
            return Err(Error::Config("clipping factor must be positive".into()));
        }
        if !(self.lower < self.upper) {
            return Err(Error::Config("I_l must be below I_u".into()));
        }
        if !(self.bandwidth > 0.0) {
            return Err(Error::Config("bandwidth must be positive".into()));
        }
        if self.cp_len > n {
            return Err(Error::Config("cyclic prefix longer than the symbol".into()));
        }
        Ok(())
    }

    pub fn half(&self) -> usize {
        self.subcarriers / 2
    }

    pub fn group_width(&self) -> usize {
        self.subcarriers / (2 * self.leds_per_vap)
    }

    /// Bin of the pilot for LED `m` of VAP `k`.
    pub fn pilot_bin(&self, m: usize, k: usize) -> usize {
        m * self.group_width() + k + 1
    }

    /// Data bins of group `m` in LCM.
    pub fn data_bins(&self, m: usize) -> std::ops::Range<usize> {
        let w = self.group_width();
        m * w + self.vaps + 1..(m + 1) * w
    }

    /// Data bins actually allocated in LCM, `N/2 - M(K+1)`.
    pub fn allocated_data_len(&self) -> usize {
        self.leds_per_vap * self.data_bins(0).len()
    }

    /// Data length used by the capacity analytics.
    pub fn data_len(&self) -> usize {
        self.data_len_override.unwrap_or_else(|| self.allocated_data_len())
    }

    /// Data capacity of a frame in the configured mode.
    pub fn data_capacity(&self) -> usize {
        match self.mode {
            Mode::Lom => 0,
            Mode::Lcm => self.allocated_data_len(),
        }
    }

    /// Active bins per group used to size the filter gain.
    pub fn active_bins(&self) -> usize {
        match self.mode {
            Mode::Lom => 1,
            Mode::Lcm => self.data_len() / self.leds_per_vap,
        }
    }

    /// Group standard deviation implied by the clipping factor.
    pub fn group_sigma(&self) -> f64 {
        (self.upper - self.lower) / (2.0 * self.clipping_factor)
    }

    /// Amplitude attenuation of a pilot after clipping.
    pub fn scaling(&self) -> f64 {
        match self.mode {
            Mode::Lom => tone_scaling_factor(self.clipping_factor),
            Mode::Lcm => scaling_factor(self.clipping_factor),
        }
    }

    pub fn calibration(&self, responsivity: f64, conversion: f64) -> Result<Calibration> {
        let cal = Calibration {
            h: solve_h(self)?,
            scaling: self.scaling(),
            responsivity,
            conversion,
        };
        cal.validate()?;
        Ok(cal)
    }
}

/// Frequency-domain frame of one VAP with its per-LED time signals.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmFrame {
    /// Lower half, `N/2` bins.
    pub x_dd: Vec<Complex64>,
    /// Hermitian-extended spectrum, `N` bins.
    pub spectrum: Vec<Complex64>,
    /// Group signals `x_m` before clipping.
    pub groups: Vec<Vec<f64>>,
    /// Clipped group signals `u_m`.
    pub clipped: Vec<Vec<f64>>,
    pub cp_len: usize,
}

/// Places unit-modulus pilots of VAP `k` (zero-based).
pub fn allocate_pilots(cfg: &OfdmConfig, k: usize, pilots: &[Complex64]) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    if k >= cfg.vaps {
        return Err(Error::Config(format!("VAP index {k} out of range")));
    }
    if pilots.len() != cfg.leds_per_vap {
        return Err(Error::Config(format!(
            "expected {} pilot symbols, got {}",
            cfg.leds_per_vap,
            pilots.len()
        )));
    }
    let mut x_dd = vec![ZERO; cfg.half()];
    for (m, p) in pilots.iter().enumerate() {
        x_dd[cfg.pilot_bin(m, k)] = *p;
    }
    Ok(x_dd)
}

/// Pilots of VAP `k` plus a data stream spread over the group data bins.
/// A short stream is zero-padded.
pub fn allocate_data(
    cfg: &OfdmConfig,
    k: usize,
    pilots: &[Complex64],
    data: &[Complex64],
) -> Result<Vec<Complex64>> {
    let mut x_dd = allocate_pilots(cfg, k, pilots)?;
    if data.len() > cfg.data_capacity() {
        return Err(Error::Config(format!(
            "{} data symbols exceed the frame capacity of {}",
            data.len(),
            cfg.data_capacity()
        )));
    }
    let bins = (0..cfg.leds_per_vap).flat_map(|m| cfg.data_bins(m));
    for (bin, d) in bins.zip(data) {
        x_dd[bin] = *d;
    }
    Ok(x_dd)
}

/// Gray-mapped unit-energy QPSK.
pub fn qpsk(b0: bool, b1: bool) -> Complex64 {
    let re = if b0 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    let im = if b1 { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
    Complex64::new(re, im)
}

pub fn hermitian_extend(x_dd: &[Complex64]) -> Result<Vec<Complex64>> {
    let half = x_dd.len();
    if half == 0 {
        return Err(Error::Config("empty frame".into()));
    }
    if x_dd[0] != ZERO {
        return Err(Error::Config("DC bin must be empty".into()));
    }
    let n = 2 * half;
    let mut x = vec![ZERO; n];
    x[..half].copy_from_slice(x_dd);
    for i in half + 1..n {
        x[i] = x_dd[n - i].conj();
    }
    Ok(x)
}

/// Unit-gain bin mask of LED group `m`, mirrored into the upper half.
pub fn filter_mask(cfg: &OfdmConfig, m: usize) -> Vec<f64> {
    let n = cfg.subcarriers;
    let w = cfg.group_width();
    let mut mask = vec![0.0; n];
    for i in m * w..(m + 1) * w {
        mask[i] = 1.0;
        if i > 0 {
            mask[n - i] = 1.0;
        }
    }
    mask
}

/// Filter-bank gain `H` from the clipping factor and active bin count.
pub fn solve_h(cfg: &OfdmConfig) -> Result<f64> {
    cfg.validate()?;
    let active = cfg.active_bins();
    if active == 0 {
        return Err(Error::Config("no active bins per group".into()));
    }
    Ok(cfg.group_sigma() * (cfg.subcarriers as f64 / (2.0 * active as f64)).sqrt())
}

pub fn hard_clip(x: &[f64], lower: f64, upper: f64) -> Vec<f64> {
    x.iter().map(|v| v.clamp(lower, upper)).collect()
}

pub fn add_cyclic_prefix(x: &[f64], cp_len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() + cp_len);
    out.extend_from_slice(&x[x.len() - cp_len..]);
    out.extend_from_slice(x);
    out
}

pub fn remove_cyclic_prefix(y: &[f64], cp_len: usize) -> Vec<f64> {
    y[cp_len..].to_vec()
}

/// Amplitude attenuation of a clipped Gaussian signal.
pub fn scaling_factor(gamma: f64) -> f64 {
    1.0 - erfc(gamma / SQRT_2)
}

/// Fundamental attenuation of a sinusoid clipped symmetrically, with
/// `gamma` relative to the tone's RMS value.
pub fn tone_scaling_factor(gamma: f64) -> f64 {
    let r = gamma / SQRT_2;
    if r >= 1.0 {
        1.0
    } else {
        2.0 / PI * (r.asin() + r * (1.0 - r * r).sqrt())
    }
}

fn q_function(v: f64) -> f64 {
    0.5 * erfc(v / SQRT_2)
}

fn gaussian_pdf(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * PI).sqrt()
}

/// `E[(z - t)^2; z > t]` for standard normal `z`, the second moment of
/// one clipped tail.
fn tail_moment(t: f64) -> f64 {
    (1.0 + t * t) * q_function(t) - t * gaussian_pdf(t)
}

/// Variance of the distortion left after clipping a zero-mean Gaussian of
/// std `sigma` to `[lower, upper]`, net of the attenuated signal.
///
/// Written in terms of the clipped tails so it keeps its relative accuracy
/// when the limits sit many deviations out.
pub fn clipping_noise_variance_general(sigma: f64, lower: f64, upper: f64) -> f64 {
    let a = -lower / sigma;
    let b = upper / sigma;
    let (qa, qb) = (q_function(a), q_function(b));
    let mean = (gaussian_pdf(a) - a * qa) - (gaussian_pdf(b) - b * qb);
    let v = tail_moment(a) + tail_moment(b) - (qa + qb) * (qa + qb) - mean * mean;
    sigma * sigma * v.max(0.0)
}

/// Symmetric-limit form with `gamma = upper / sigma`.
pub fn clipping_noise_variance_symmetric(gamma: f64, upper: f64) -> f64 {
    let sigma = upper / gamma;
    let q = q_function(gamma);
    sigma * sigma * (2.0 * tail_moment(gamma) - 4.0 * q * q).max(0.0)
}

/// Clipping noise variance for the configured limits at clipping factor `gamma`.
pub fn clipping_noise_variance(gamma: f64, upper: f64, lower: f64) -> f64 {
    let sigma = (upper - lower) / (2.0 * gamma);
    if upper == -lower {
        clipping_noise_variance_symmetric(gamma, upper)
    } else {
        clipping_noise_variance_general(sigma, lower, upper)
    }
}

/// Shannon capacity of one LED group, bit/s.
pub fn channel_capacity(cfg: &OfdmConfig, electric_gain: f64, noise_variance: f64, gamma: f64) -> f64 {
    let n = cfg.subcarriers as f64;
    let m = cfg.leds_per_vap as f64;
    let nd = cfg.data_len() as f64;
    let clip = clipping_noise_variance(gamma, cfg.upper, cfg.lower);
    let signal = cfg.upper * cfg.upper / (2.0 * gamma * gamma) * scaling_factor(gamma) * electric_gain;
    let noise = (noise_variance + clip) * nd / (n * m);
    cfg.bandwidth / n * nd / m * (1.0 + signal / noise).log2()
}

/// Builds the transmit frame of VAP `k` with filter gain `h`.
pub fn build_frame(
    cfg: &OfdmConfig,
    k: usize,
    h: f64,
    pilots: &[Complex64],
    data: &[Complex64],
) -> Result<OfdmFrame> {
    let x_dd = allocate_data(cfg, k, pilots, data)?;
    let spectrum = hermitian_extend(&x_dd)?;
    let mut groups = Vec::with_capacity(cfg.leds_per_vap);
    let mut clipped = Vec::with_capacity(cfg.leds_per_vap);
    for m in 0..cfg.leds_per_vap {
        let masked: Vec<Complex64> = spectrum
            .iter()
            .zip(filter_mask(cfg, m))
            .map(|(x, g)| x * (g * h))
            .collect();
        let x_m: Vec<f64> = idft(&masked)?.iter().map(|v| v.re).collect();
        clipped.push(hard_clip(&x_m, cfg.lower, cfg.upper));
        groups.push(x_m);
    }
    Ok(OfdmFrame {
        x_dd,
        spectrum,
        groups,
        clipped,
        cp_len: cfg.cp_len,
    })
}

impl OfdmFrame {
    /// LED drive currents (bias included) with cyclic prefix.
    pub fn drive_currents(&self, led: &LedModel) -> Result<Vec<Vec<f64>>> {
        self.clipped
            .iter()
            .map(|u| {
                let drive = u
                    .iter()
                    .map(|x| led.predistort(*x))
                    .collect::<Result<Vec<_>>>()?;
                Ok(add_cyclic_prefix(&drive, self.cp_len))
            })
            .collect()
    }

    /// Optical power of each LED above its bias level, W, with cyclic prefix.
    pub fn optical_output(&self, led: &LedModel) -> Result<Vec<Vec<f64>>> {
        let bias_power = led.transmit_power();
        Ok(self
            .drive_currents(led)?
            .into_iter()
            .map(|d| {
                d.iter()
                    .map(|i| led.radiometric * led.luminous_flux(*i) - bias_power)
                    .collect()
            })
            .collect())
    }

    /// Writes the spectrum as `bin,real,imag` rows.
    pub fn write_spectrum_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin,real,imag")?;
        for (i, v) in self.spectrum.iter().enumerate() {
            writeln!(w, "{i},{:.9e},{:.9e}", v.re, v.im)?;
        }
        Ok(())
    }
}

/// Photocurrent at the receiver from every VAP's frame, DC removed.
///
/// `outputs[k][m]` is the AC optical output of LED `m` of VAP `k`.
pub fn superpose(outputs: &[Vec<Vec<f64>>], gm: &GainMatrix, responsivity: f64) -> Result<Vec<f64>> {
    let len = outputs
        .first()
        .and_then(|v| v.first())
        .map(Vec::len)
        .ok_or_else(|| Error::Config("no transmit signals".into()))?;
    let mut y = vec![0.0; len];
    for (k, vap) in outputs.iter().enumerate() {
        for (m, p) in vap.iter().enumerate() {
            let g = gm.get(k, m) * responsivity;
            if g == 0.0 {
                continue;
            }
            for (acc, v) in y.iter_mut().zip(p) {
                *acc += g * v;
            }
        }
    }
    Ok(y)
}

/// Pilot magnitudes of one received symbol (prefix removed), normalized.
pub fn demodulate_rss(y: &[f64], cfg: &OfdmConfig, cal: &Calibration) -> Result<ObservationVector> {
    cal.validate()?;
    cfg.validate()?;
    if y.len() != cfg.subcarriers {
        return Err(Error::Config(format!(
            "received symbol has {} samples, expected {}",
            y.len(),
            cfg.subcarriers
        )));
    }
    let spectrum = dft_real(y)?;
    let d = cal.divisor();
    let mut values = Vec::with_capacity(cfg.vaps * cfg.leds_per_vap);
    for k in 0..cfg.vaps {
        for m in 0..cfg.leds_per_vap {
            values.push(spectrum[cfg.pilot_bin(m, k)].norm() / d);
        }
    }
    Ok(ObservationVector {
        leds_per_vap: cfg.leds_per_vap,
        vaps: cfg.vaps,
        values,
    })
}
