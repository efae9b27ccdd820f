//! Dechirped ADC frame synthesis.
//!
//! A frame is an `M x N` complex matrix: row `m` is slow time (chirp index),
//! column `n` is fast time (sample within the active part of the chirp), and
//! the absolute sample time is `m * T_PRI + n * T_s`.
//!
//! Targets are separable tones. Interference is computed by differencing the
//! interferer's sawtooth transmit phase against the victim reference chirp and
//! passing the product through an ideal low-pass gate: a sample survives only
//! if the instantaneous beat frequency lies within `+/- f_s / 2` and the
//! interferer is inside its active time.

use std::f64::consts::TAU;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix_io;
use crate::rfconfig::{RadarConfig, SPEED_OF_LIGHT};
use crate::scene::{Interferer, Scene, Target};

#[derive(Debug, Clone, PartialEq)]
pub struct AdcFrame {
    pub data: Array2<Complex64>,
    pub config: RadarConfig,
}

impl AdcFrame {
    pub fn zeros(config: &RadarConfig) -> Self {
        Self { data: Array2::zeros(config.shape()), config: *config }
    }

    pub fn from_data(config: &RadarConfig, data: Array2<Complex64>) -> Result<Self> {
        if data.dim() != config.shape() {
            return Err(Error::DimensionMismatch { expected: config.shape(), got: data.dim() });
        }
        Ok(Self { data, config: *config })
    }

    pub fn shape(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        matrix_io::write(path, &self.data, &self.config.config_hash())
    }
}

/// `exp(-j 2 pi cycles)` with the integer part of `cycles` removed first.
fn cis_neg_cycles(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.floor();
    Complex64::from_polar(1.0, -TAU * frac)
}

fn cis_cycles(cycles: f64) -> Complex64 {
    let frac = cycles - cycles.floor();
    Complex64::from_polar(1.0, TAU * frac)
}

fn check_target(cfg: &RadarConfig, target: &Target) -> Result<(f64, f64)> {
    let range_freq = cfg.range_frequency(target.range_m);
    if !(0.0..1.0).contains(&range_freq) {
        return Err(Error::AliasedTarget { range_freq });
    }
    Ok((range_freq, cfg.doppler_frequency(target.radial_velocity_mps)))
}

/// Adds one target's echo into `data`.
///
/// Doppler beyond `|f_d| >= 0.5` folds as the sampled slow-time phase does.
pub fn add_target(data: &mut Array2<Complex64>, cfg: &RadarConfig, target: &Target) -> Result<()> {
    let (range_freq, doppler_freq) = check_target(cfg, target)?;
    let (m_count, n_count) = cfg.shape();
    if data.dim() != (m_count, n_count) {
        return Err(Error::DimensionMismatch { expected: cfg.shape(), got: data.dim() });
    }
    let carrier = cis_neg_cycles(cfg.carrier_freq_hz * 2.0 * target.range_m / SPEED_OF_LIGHT);
    let head = target.amplitude * carrier;
    let fast: Vec<Complex64> = (0..n_count).map(|n| cis_neg_cycles(range_freq * n as f64)).collect();
    for (m, mut row) in data.rows_mut().into_iter().enumerate() {
        let slow = head * cis_neg_cycles(doppler_freq * m as f64);
        for (out, f) in row.iter_mut().zip(&fast) {
            *out += slow * f;
        }
    }
    Ok(())
}

pub fn synth_target(cfg: &RadarConfig, target: &Target) -> Result<AdcFrame> {
    let mut frame = AdcFrame::zeros(cfg);
    add_target(&mut frame.data, cfg, target)?;
    Ok(frame)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceFrame {
    pub frame: AdcFrame,
    /// Gate-open sample count per victim chirp.
    pub corrupted_per_chirp: Vec<usize>,
}

/// Adds one interferer's gated post-mix chirp into `data`; returns the
/// gate-open sample count per chirp.
pub fn add_interference(data: &mut Array2<Complex64>, cfg: &RadarConfig, interferer: &Interferer) -> Vec<usize> {
    let (m_count, n_count) = cfg.shape();
    assert_eq!(data.dim(), (m_count, n_count), "interference target buffer has wrong shape");
    let wf = &interferer.waveform;
    let alpha = cfg.chirp_slope();
    let alpha_i = wf.slope(cfg);
    let active_i = wf.active_time_s(cfg);
    let half_band = 0.5 * cfg.sample_rate_hz();
    let ts = cfg.sample_period_s;

    let mut counts = vec![0usize; m_count];
    for (m, mut row) in data.rows_mut().into_iter().enumerate() {
        let chirp_start = m as f64 * cfg.pri_s;
        for (n, out) in row.iter_mut().enumerate() {
            let tau_v = n as f64 * ts;
            let since_start = chirp_start + tau_v - wf.start_offset_s;
            // snap to the period boundary so sample-aligned timing doesn't lose
            // samples to rounding
            let q = since_start / wf.pri_s;
            let k = if (q - q.round()).abs() < 1e-9 { q.round() } else { q.floor() };
            let tau_i = (since_start - k * wf.pri_s).max(0.0);
            if !(0.0..active_i).contains(&tau_i) {
                continue;
            }
            let beat = alpha_i * tau_i - alpha * tau_v;
            if beat.abs() > half_band {
                continue;
            }
            let cycles = 0.5 * alpha_i * tau_i * tau_i - 0.5 * alpha * tau_v * tau_v;
            *out += interferer.amplitude * cis_cycles(cycles);
            counts[m] += 1;
        }
    }
    counts
}

pub fn synth_interference(cfg: &RadarConfig, interferer: &Interferer) -> InterferenceFrame {
    let mut frame = AdcFrame::zeros(cfg);
    let corrupted_per_chirp = add_interference(&mut frame.data, cfg, interferer);
    InterferenceFrame { frame, corrupted_per_chirp }
}

/// Circularly-symmetric complex white Gaussian noise of variance `sigma^2`.
pub fn synth_noise(cfg: &RadarConfig, rng_seed: u64) -> AdcFrame {
    let mut frame = AdcFrame::zeros(cfg);
    if cfg.noise_variance == 0.0 {
        return frame;
    }
    let scale = (cfg.noise_variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for z in frame.data.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *z = Complex64::new(re * scale, im * scale);
    }
    frame
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledFrame {
    /// `S_rx + S~_rx + E`.
    pub full: AdcFrame,
    /// `S_rx + E`: the interference-free reference.
    pub clean: AdcFrame,
    /// `S~_rx` alone.
    pub interference: AdcFrame,
}

fn check_shape(reference: &AdcFrame, other: &AdcFrame) -> Result<()> {
    if other.shape() != reference.shape() {
        return Err(Error::DimensionMismatch { expected: reference.shape(), got: other.shape() });
    }
    Ok(())
}

/// Entrywise sum in list order: targets, then noise, then interference.
pub fn assemble(targets: &[AdcFrame], interference: &[AdcFrame], noise: &AdcFrame) -> Result<AssembledFrame> {
    for f in targets.iter().chain(interference) {
        check_shape(noise, f)?;
    }
    let mut clean = Array2::<Complex64>::zeros(noise.shape());
    for t in targets {
        clean += &t.data;
    }
    clean += &noise.data;
    let mut intf = Array2::<Complex64>::zeros(noise.shape());
    for i in interference {
        intf += &i.data;
    }
    let full = &clean + &intf;
    let config = noise.config;
    Ok(AssembledFrame {
        full: AdcFrame { data: full, config },
        clean: AdcFrame { data: clean, config },
        interference: AdcFrame { data: intf, config },
    })
}

/// Synthesizes a whole scene without materializing per-target frames.
///
/// Summation order matches [`assemble`] with targets and interferers in scene
/// order, so the result is bit-identical to assembling the individual frames.
pub fn synthesize_scene(scene: &Scene, cfg: &RadarConfig, noise_seed: u64) -> Result<AssembledFrame> {
    let mut clean = Array2::<Complex64>::zeros(cfg.shape());
    let mut scratch = Array2::<Complex64>::zeros(cfg.shape());
    for t in &scene.targets {
        scratch.fill(Complex64::new(0.0, 0.0));
        add_target(&mut scratch, cfg, t)?;
        clean += &scratch;
    }
    clean += &synth_noise(cfg, noise_seed).data;
    let mut intf = Array2::<Complex64>::zeros(cfg.shape());
    for i in &scene.interferers {
        scratch.fill(Complex64::new(0.0, 0.0));
        add_interference(&mut scratch, cfg, i);
        intf += &scratch;
    }
    let full = &clean + &intf;
    Ok(AssembledFrame {
        full: AdcFrame { data: full, config: *cfg },
        clean: AdcFrame { data: clean, config: *cfg },
        interference: AdcFrame { data: intf, config: *cfg },
    })
}
