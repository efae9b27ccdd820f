//! Victim and interferer waveform parameters.
//!
//! The victim transmits a sawtooth sequence of linear chirps with slope
//! `B / T_a`, repeated every `T_PRI`. An interferer is described relative to
//! the victim through its decorrelation factor `gamma`, which fixes the slope
//! mismatch in units of `f_s^2 / N`. The post-mix chirp produced by such an
//! interferer sweeps `gamma * f_s` of IF bandwidth per victim chirp, so the
//! fraction of a chirp that lands inside the receiver passband is `1 / gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Lower (exclusive) and upper (inclusive) bound of the decorrelation factor.
pub const GAMMA_MIN: f64 = 0.1;
pub const GAMMA_MAX: f64 = 10.0;

/// Upper bound of the highly-correlated band (inclusive).
pub const HIGHLY_CORRELATED_MAX: f64 = 0.75;
/// Upper bound of the semi-correlated band (inclusive).
pub const SEMI_CORRELATED_MAX: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    pub carrier_freq_hz: f64,
    pub sweep_bandwidth_hz: f64,
    pub active_time_s: f64,
    pub pri_s: f64,
    pub sample_period_s: f64,
    pub samples_per_chirp: usize,
    pub chirps_per_frame: usize,
    /// Per complex sample, linear power.
    pub noise_variance: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self {
            carrier_freq_hz: 77e9,
            sweep_bandwidth_hz: 200e6,
            active_time_s: 25.6e-6,
            pri_s: 40e-6,
            sample_period_s: 50e-9,
            samples_per_chirp: 512,
            chirps_per_frame: 128,
            noise_variance: 1.0,
        }
    }
}

impl RadarConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("sweep_bandwidth_hz", self.sweep_bandwidth_hz),
            ("active_time_s", self.active_time_s),
            ("pri_s", self.pri_s),
            ("sample_period_s", self.sample_period_s),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and > 0, got {value}")));
            }
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise_variance must be finite and >= 0, got {}",
                self.noise_variance
            )));
        }
        if self.samples_per_chirp == 0 || self.chirps_per_frame == 0 {
            return Err(Error::InvalidConfig("samples_per_chirp and chirps_per_frame must be >= 1".into()));
        }
        if self.pri_s <= self.active_time_s {
            return Err(Error::InvalidConfig(format!(
                "pri_s ({}) must exceed active_time_s ({}): dead time must be positive",
                self.pri_s, self.active_time_s
            )));
        }
        let n = self.active_time_s / self.sample_period_s;
        let rel = (n - self.samples_per_chirp as f64).abs() / self.samples_per_chirp as f64;
        if rel > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "samples_per_chirp ({}) must equal active_time_s / sample_period_s ({n})",
                self.samples_per_chirp
            )));
        }
        Ok(())
    }

    pub fn sample_rate_hz(&self) -> f64 {
        1.0 / self.sample_period_s
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq_hz
    }

    pub fn dead_time_s(&self) -> f64 {
        self.pri_s - self.active_time_s
    }

    pub fn chirp_slope(&self) -> f64 {
        chirp_slope(self)
    }

    /// Normalized range frequency `2 r alpha T_s / c` (cycles per fast-time sample).
    pub fn range_frequency(&self, range_m: f64) -> f64 {
        2.0 * range_m * self.chirp_slope() * self.sample_period_s / SPEED_OF_LIGHT
    }

    /// Normalized Doppler frequency `2 v T_PRI / lambda` (cycles per chirp).
    pub fn doppler_frequency(&self, radial_velocity_mps: f64) -> f64 {
        2.0 * radial_velocity_mps * self.pri_s / self.wavelength_m()
    }

    /// Largest range whose beat frequency stays below one cycle per sample.
    pub fn max_unambiguous_range_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.chirp_slope() * self.sample_period_s)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.chirps_per_frame, self.samples_per_chirp)
    }

    /// Short content hash used to tag exported frames and maps.
    pub fn config_hash(&self) -> String {
        crate::matrix_io::short_hash(&serde_json::to_string(self).expect("config serializes"))
    }
}

/// Victim chirp slope `B / T_a` in Hz/s.
pub fn chirp_slope(cfg: &RadarConfig) -> f64 {
    cfg.sweep_bandwidth_hz / cfg.active_time_s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceCategory {
    Uncorrelated,
    SemiCorrelated,
    HighlyCorrelated,
}

impl InterferenceCategory {
    pub const ALL: [InterferenceCategory; 3] = [
        InterferenceCategory::Uncorrelated,
        InterferenceCategory::SemiCorrelated,
        InterferenceCategory::HighlyCorrelated,
    ];

    /// Half-open `(low, high]` band of decorrelation factors for this category.
    pub fn gamma_band(self) -> (f64, f64) {
        match self {
            InterferenceCategory::Uncorrelated => (SEMI_CORRELATED_MAX, GAMMA_MAX),
            InterferenceCategory::SemiCorrelated => (HIGHLY_CORRELATED_MAX, SEMI_CORRELATED_MAX),
            InterferenceCategory::HighlyCorrelated => (GAMMA_MIN, HIGHLY_CORRELATED_MAX),
        }
    }

    pub fn index(self) -> usize {
        match self {
            InterferenceCategory::Uncorrelated => 0,
            InterferenceCategory::SemiCorrelated => 1,
            InterferenceCategory::HighlyCorrelated => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeSign {
    Positive,
    Negative,
}

impl SlopeSign {
    pub fn value(self) -> f64 {
        match self {
            SlopeSign::Positive => 1.0,
            SlopeSign::Negative => -1.0,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > GAMMA_MIN && gamma <= GAMMA_MAX {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma))
    }
}

/// Interferer chirp slope `alpha +/- (f_s^2 / N) * gamma`.
pub fn interferer_slope(
    alpha: f64,
    gamma: f64,
    sign: SlopeSign,
    sample_rate_hz: f64,
    samples_per_chirp: usize,
) -> Result<f64> {
    check_gamma(gamma)?;
    if !(sample_rate_hz > 0.0) || samples_per_chirp == 0 {
        return Err(Error::InvalidConfig("sample rate and samples per chirp must be positive".into()));
    }
    Ok(alpha + sign.value() * sample_rate_hz * sample_rate_hz / samples_per_chirp as f64 * gamma)
}

/// Time the post-mix chirp spends inside the `f_s`-wide receiver passband.
///
/// Callers clip the result to the active time when counting corrupted samples.
pub fn interference_duration(slope_diff_abs: f64, sample_period_s: f64) -> Result<f64> {
    if slope_diff_abs == 0.0 {
        return Err(Error::ZeroSlopeDifference);
    }
    Ok(1.0 / (sample_period_s * slope_diff_abs.abs()))
}

/// Fraction of a victim chirp corrupted by a single post-mix chirp crossing.
pub fn corrupted_fraction(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok((1.0 / gamma).min(1.0))
}

/// Boundaries belong to the lower-gamma (more correlated) category.
pub fn classify_interference(gamma: f64) -> Result<InterferenceCategory> {
    check_gamma(gamma)?;
    Ok(if gamma <= HIGHLY_CORRELATED_MAX {
        InterferenceCategory::HighlyCorrelated
    } else if gamma <= SEMI_CORRELATED_MAX {
        InterferenceCategory::SemiCorrelated
    } else {
        InterferenceCategory::Uncorrelated
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterfererWaveform {
    pub gamma: f64,
    pub slope_sign: SlopeSign,
    pub pri_s: f64,
    /// Transmit time of the interferer's first chirp relative to the victim frame start.
    pub start_offset_s: f64,
    pub category: InterferenceCategory,
}

impl InterfererWaveform {
    pub fn new(radar: &RadarConfig, gamma: f64, slope_sign: SlopeSign, pri_s: f64, start_offset_s: f64) -> Result<Self> {
        let wf = Self {
            gamma,
            slope_sign,
            pri_s,
            start_offset_s,
            category: classify_interference(gamma)?,
        };
        wf.validate(radar)?;
        Ok(wf)
    }

    pub fn validate(&self, radar: &RadarConfig) -> Result<()> {
        if classify_interference(self.gamma)? != self.category {
            return Err(Error::InvalidConfig(format!(
                "interferer category {:?} inconsistent with gamma {}",
                self.category, self.gamma
            )));
        }
        if !(self.pri_s.is_finite() && self.pri_s > 0.0) {
            return Err(Error::InvalidConfig(format!("interferer pri_s must be > 0, got {}", self.pri_s)));
        }
        if self.pri_s < self.active_time_s(radar) {
            return Err(Error::InvalidConfig("interferer pri_s shorter than its active time".into()));
        }
        if !(self.start_offset_s >= 0.0 && self.start_offset_s < self.pri_s) {
            return Err(Error::InvalidConfig(format!(
                "interferer start_offset_s {} outside [0, pri_s)",
                self.start_offset_s
            )));
        }
        Ok(())
    }

    pub fn slope(&self, radar: &RadarConfig) -> f64 {
        radar.chirp_slope()
            + self.slope_sign.value() * radar.sample_rate_hz().powi(2) / radar.samples_per_chirp as f64 * self.gamma
    }

    /// Same duty cycle as the victim.
    pub fn active_time_s(&self, radar: &RadarConfig) -> f64 {
        self.pri_s * radar.active_time_s / radar.pri_s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn default_config_is_valid() {
        let cfg = RadarConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.sample_rate_hz(), 2e7);
    }

    #[test]
    fn slope_examples() {
        let cfg = RadarConfig::default();
        assert_eq!(chirp_slope(&cfg), 7.8125e12);
        let unit = RadarConfig { sweep_bandwidth_hz: 1e-5, active_time_s: 1e-5, ..cfg };
        assert_eq!(chirp_slope(&unit), 1.0);
        let doubled = RadarConfig { sweep_bandwidth_hz: 4e8, ..cfg };
        assert_eq!(chirp_slope(&doubled), 2.0 * chirp_slope(&cfg));
    }

    #[test]
    fn interferer_slope_examples() {
        let up = interferer_slope(7.8125e12, 8.0, SlopeSign::Positive, 2e7, 512).unwrap();
        assert!(rel_eq(up, 1.40625e13, 1e-12));
        let down = interferer_slope(7.8125e12, 8.0, SlopeSign::Negative, 2e7, 512).unwrap();
        assert!(rel_eq(down, 1.5625e12, 1e-12));
        let tiny = interferer_slope(7.8125e12, 0.1 + 1e-12, SlopeSign::Positive, 2e7, 512).unwrap();
        assert!(rel_eq(tiny, 7.8125e12 + 7.8125e10, 1e-9));
        assert!(matches!(
            interferer_slope(7.8125e12, 0.1, SlopeSign::Positive, 2e7, 512),
            Err(Error::GammaOutOfRange(_))
        ));
        assert!(interferer_slope(7.8125e12, 10.5, SlopeSign::Positive, 2e7, 512).is_err());
    }

    #[test]
    fn duration_examples() {
        assert!(rel_eq(interference_duration(6.25e12, 5e-8).unwrap(), 3.2e-6, 1e-12));
        assert!(rel_eq(interference_duration(3.90625e11, 5e-8).unwrap(), 5.12e-5, 1e-12));
        let d1 = interference_duration(1e12, 5e-8).unwrap();
        let d2 = interference_duration(2e12, 5e-8).unwrap();
        assert!(rel_eq(d1, 2.0 * d2, 1e-15));
        assert!(matches!(interference_duration(0.0, 5e-8), Err(Error::ZeroSlopeDifference)));
    }

    #[test]
    fn corrupted_fraction_examples() {
        assert_eq!(corrupted_fraction(8.0).unwrap(), 0.125);
        assert_eq!(corrupted_fraction(1.0).unwrap(), 1.0);
        assert_eq!(corrupted_fraction(0.5).unwrap(), 1.0);
        assert!(corrupted_fraction(0.05).is_err());
    }

    #[test]
    fn classification_bands() {
        use InterferenceCategory::*;
        assert_eq!(classify_interference(8.0).unwrap(), Uncorrelated);
        assert_eq!(classify_interference(1.0).unwrap(), SemiCorrelated);
        assert_eq!(classify_interference(0.5).unwrap(), HighlyCorrelated);
        assert_eq!(classify_interference(2.0).unwrap(), SemiCorrelated);
        assert_eq!(classify_interference(0.75).unwrap(), HighlyCorrelated);
        assert_eq!(classify_interference(10.0).unwrap(), Uncorrelated);
        assert!(classify_interference(0.1).is_err());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        let cfg = RadarConfig::default();
        assert!(RadarConfig { pri_s: 25.6e-6, ..cfg }.validate().is_err());
        assert!(RadarConfig { samples_per_chirp: 511, ..cfg }.validate().is_err());
        assert!(RadarConfig { carrier_freq_hz: -1.0, ..cfg }.validate().is_err());
        assert!(RadarConfig { noise_variance: f64::NAN, ..cfg }.validate().is_err());
    }

    #[test]
    fn waveform_checks_category_and_offset() {
        let cfg = RadarConfig::default();
        let wf = InterfererWaveform::new(&cfg, 4.0, SlopeSign::Negative, 40e-6, 1e-6).unwrap();
        assert_eq!(wf.category, InterferenceCategory::Uncorrelated);
        assert!(rel_eq(wf.active_time_s(&cfg), 25.6e-6, 1e-12));
        assert!(InterfererWaveform::new(&cfg, 4.0, SlopeSign::Negative, 40e-6, 40e-6).is_err());
        let bad = InterfererWaveform { category: InterferenceCategory::HighlyCorrelated, ..wf };
        assert!(bad.validate(&cfg).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        fn radar() -> impl Strategy<Value = RadarConfig> {
            (1e8..1e9f64, 64usize..2048, 1e6..5e7f64, 1.2..3.0f64).prop_map(|(bw, n, fs, pri_ratio)| {
                let ts = 1.0 / fs;
                let ta = n as f64 * ts;
                RadarConfig {
                    sweep_bandwidth_hz: bw,
                    active_time_s: ta,
                    pri_s: ta * pri_ratio,
                    sample_period_s: ts,
                    samples_per_chirp: n,
                    ..RadarConfig::default()
                }
            })
        }

        proptest! {
            #[test]
            fn duration_over_active_time_is_inverse_gamma(cfg in radar(), gamma in 0.1001..10.0f64, up in any::<bool>()) {
                prop_assume!(cfg.validate().is_ok());
                let sign = if up { SlopeSign::Positive } else { SlopeSign::Negative };
                let alpha = cfg.chirp_slope();
                let tilde = interferer_slope(alpha, gamma, sign, cfg.sample_rate_hz(), cfg.samples_per_chirp).unwrap();
                let delta = interference_duration((tilde - alpha).abs(), cfg.sample_period_s).unwrap();
                let ratio = delta / cfg.active_time_s;
                prop_assert!((ratio * gamma - 1.0).abs() < 1e-9, "ratio {} gamma {}", ratio, gamma);
            }

            #[test]
            fn corrupted_fraction_non_increasing(a in 0.1001..10.0f64, b in 0.1001..10.0f64) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(corrupted_fraction(lo).unwrap() >= corrupted_fraction(hi).unwrap());
            }

            #[test]
            fn classification_is_total(gamma in 0.1000001..=10.0f64) {
                let cat = classify_interference(gamma).unwrap();
                let (lo, hi) = cat.gamma_band();
                prop_assert!(gamma > lo && gamma <= hi);
            }
        }
    }
}
