//! Centered STFT with reflective edge padding and its weighted overlap-add
//! inverse.
//!
//! Frame `c` is centered on input sample `c * hop`; the signal is extended by
//! `window_length / 2` reflected samples on each side (mirror about the first
//! and last sample, edge sample not repeated). The inverse divides the
//! overlap-added, synthesis-windowed frames by the summed squared window, so
//! an unmodified matrix reconstructs its input to rounding error.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::window::WindowKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StftConfig {
    pub window_length: usize,
    pub hop: usize,
    #[serde(default)]
    pub window_kind: WindowKind,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { window_length: 64, hop: 16, window_kind: WindowKind::Hann }
    }
}

impl StftConfig {
    pub fn validate(&self) -> Result<()> {
        let (w, h) = (self.window_length, self.hop);
        if w < 2 || w % 2 != 0 {
            return Err(Error::InvalidConfig(format!("window_length must be even and >= 2, got {w}")));
        }
        if h == 0 || h > w {
            return Err(Error::InvalidConfig(format!("hop must satisfy 0 < hop <= window_length, got {h}")));
        }
        let win = self.window_kind.periodic(w);
        let sums: Vec<f64> = (0..h).map(|n| win.iter().skip(n).step_by(h).sum()).collect();
        let first = sums[0];
        if first <= 0.0 || sums.iter().any(|s| (s - first).abs() > 1e-9 * first) {
            return Err(Error::InvalidConfig(format!(
                "window {:?} of length {w} is not constant-overlap-add at hop {h}",
                self.window_kind
            )));
        }
        Ok(())
    }

    pub fn frame_count(&self, len: usize) -> usize {
        len.div_ceil(self.hop)
    }
}

/// Frequency rows by time-frame columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TfMatrix {
    pub data: Array2<Complex64>,
    pub config: StftConfig,
    pub original_length: usize,
}

impl TfMatrix {
    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    /// Frame energy normalized by the window's power overlap, equal to the
    /// input energy for signals away from the padded edges.
    pub fn weighted_energy(&self) -> f64 {
        let w = self.config.window_kind.periodic(self.config.window_length);
        let power_overlap: f64 = w.iter().map(|v| v * v).sum::<f64>() / self.config.hop as f64;
        let total: f64 = self.data.iter().map(|z| z.norm_sqr()).sum();
        total / (self.config.window_length as f64 * power_overlap)
    }
}

/// Reusable forward/inverse plans and window for one [`StftConfig`].
#[derive(Clone)]
pub struct StftProcessor {
    config: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for StftProcessor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StftProcessor").field("config", &self.config).finish()
    }
}

impl StftProcessor {
    pub fn new(config: StftConfig) -> Result<Self> {
        config.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            window: config.window_kind.periodic(config.window_length),
            forward: planner.plan_fft_forward(config.window_length),
            inverse: planner.plan_fft_inverse(config.window_length),
        })
    }

    pub fn config(&self) -> &StftConfig {
        &self.config
    }

    fn padded(&self, x: &[Complex64]) -> Vec<Complex64> {
        let half = self.config.window_length / 2;
        let n = x.len();
        let mut out = Vec::with_capacity(n + 2 * half);
        out.extend((0..half).map(|i| x[half - i]));
        out.extend_from_slice(x);
        out.extend((0..half).map(|j| x[n - 2 - j]));
        out
    }

    pub fn stft(&self, x: &[Complex64]) -> Result<TfMatrix> {
        let w = self.config.window_length;
        if x.len() < w {
            return Err(Error::SignalTooShort { len: x.len(), window: w });
        }
        let padded = self.padded(x);
        let cols = self.config.frame_count(x.len());
        let mut data = Array2::<Complex64>::zeros((w, cols));
        let mut buf = vec![Complex64::new(0.0, 0.0); w];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for c in 0..cols {
            let start = c * self.config.hop;
            for (k, b) in buf.iter_mut().enumerate() {
                *b = padded[start + k] * self.window[k];
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            data.column_mut(c).iter_mut().zip(&buf).for_each(|(d, v)| *d = *v);
        }
        Ok(TfMatrix { data, config: self.config, original_length: x.len() })
    }

    pub fn istft(&self, tf: &TfMatrix) -> Result<Vec<Complex64>> {
        let w = self.config.window_length;
        if tf.config != self.config {
            return Err(Error::InconsistentDimensions("matrix built with a different STFT config".into()));
        }
        if tf.original_length < w {
            return Err(Error::InconsistentDimensions(format!(
                "original length {} shorter than window {w}",
                tf.original_length
            )));
        }
        let cols = self.config.frame_count(tf.original_length);
        if tf.data.dim() != (w, cols) {
            return Err(Error::InconsistentDimensions(format!(
                "expected {w} x {cols}, found {} x {}",
                tf.rows(),
                tf.cols()
            )));
        }
        let half = w / 2;
        let padded_len = tf.original_length + w;
        let mut num = vec![Complex64::new(0.0, 0.0); padded_len];
        let mut den = vec![0.0f64; padded_len];
        let mut buf = vec![Complex64::new(0.0, 0.0); w];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        let norm = 1.0 / w as f64;
        for c in 0..cols {
            buf.iter_mut().zip(tf.data.column(c)).for_each(|(b, v)| *b = *v);
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let start = c * self.config.hop;
            for k in 0..w {
                let wk = self.window[k];
                num[start + k] += buf[k] * (wk * norm);
                den[start + k] += wk * wk;
            }
        }
        Ok((half..half + tf.original_length)
            .map(|p| if den[p] > 0.0 { num[p] / den[p] } else { Complex64::new(0.0, 0.0) })
            .collect())
    }
}

pub fn stft(x: &[Complex64], cfg: &StftConfig) -> Result<TfMatrix> {
    StftProcessor::new(*cfg)?.stft(x)
}

pub fn istft(tf: &TfMatrix) -> Result<Vec<Complex64>> {
    StftProcessor::new(tf.config)?.istft(tf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn noise(len: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect()
    }

    fn tone(len: usize, f: f64) -> Vec<Complex64> {
        (0..len).map(|n| Complex64::from_polar(1.0, -TAU * f * n as f64)).collect()
    }

    fn rel_l2(a: &[Complex64], b: &[Complex64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den).sqrt()
    }

    #[test]
    fn dimensions() {
        let tf = stft(&noise(512, 1), &StftConfig::default()).unwrap();
        assert_eq!(tf.data.dim(), (64, 32));
        let tf = stft(&noise(500, 1), &StftConfig::default()).unwrap();
        assert_eq!(tf.cols(), 32);
        assert!(matches!(stft(&noise(63, 1), &StftConfig::default()), Err(Error::SignalTooShort { .. })));
    }

    #[test]
    fn zero_in_zero_out() {
        let z = vec![Complex64::new(0.0, 0.0); 512];
        let tf = stft(&z, &StftConfig::default()).unwrap();
        assert!(tf.data.iter().all(|v| v.norm() == 0.0));
        let mut zeroed = tf.clone();
        zeroed.data.fill(Complex64::new(0.0, 0.0));
        assert!(istft(&zeroed).unwrap().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn round_trip_white_noise() {
        let x = noise(512, 7);
        let y = istft(&stft(&x, &StftConfig::default()).unwrap()).unwrap();
        assert!(rel_l2(&y, &x) < 1e-10);
    }

    #[test]
    fn round_trip_other_configs() {
        for cfg in [
            StftConfig { window_length: 32, hop: 16, window_kind: WindowKind::Hann },
            StftConfig { window_length: 64, hop: 8, window_kind: WindowKind::Hann },
            StftConfig { window_length: 16, hop: 8, window_kind: WindowKind::Rectangular },
        ] {
            let x = noise(300, 3);
            let y = istft(&stft(&x, &cfg).unwrap()).unwrap();
            assert!(rel_l2(&y, &x) < 1e-10, "{cfg:?}");
        }
    }

    #[test]
    fn rejects_non_cola_configs() {
        assert!(StftConfig { window_length: 64, hop: 24, window_kind: WindowKind::Hann }.validate().is_err());
        assert!(StftConfig { window_length: 64, hop: 0, window_kind: WindowKind::Hann }.validate().is_err());
        assert!(StftConfig { window_length: 63, hop: 16, window_kind: WindowKind::Hann }.validate().is_err());
    }

    /// Energy share of the strongest row and of the three rows around it,
    /// over frames that lie entirely inside the signal.
    fn row_concentration(tf: &TfMatrix) -> (usize, f64, f64) {
        let edge = tf.config.window_length / (2 * tf.config.hop);
        let inner = tf.data.slice(ndarray::s![.., edge..tf.cols() - edge]);
        let row_energy: Vec<f64> = inner.rows().into_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect();
        let total: f64 = row_energy.iter().sum();
        let (best, peak) =
            row_energy.iter().enumerate().max_by(|a, b| a.1.partial_cmp(b.1).unwrap()).map(|(i, e)| (i, *e)).unwrap();
        let r = row_energy.len();
        let lobe = row_energy[(best + r - 1) % r] + peak + row_energy[(best + 1) % r];
        (best, peak / total, lobe / total)
    }

    #[test]
    fn tone_energy_concentrates_in_nearest_row() {
        // exp(-j 2 pi 0.125 n) sits on bin -8, i.e. row 56 of a 64-point forward FFT
        let x = tone(512, 0.125);
        let rect = StftConfig { window_kind: WindowKind::Rectangular, ..StftConfig::default() };
        let (row, share, _) = row_concentration(&stft(&x, &rect).unwrap());
        assert_eq!(row, 56);
        assert!(share >= 0.95, "rectangular single-row share {share}");

        // Hann splits an on-bin tone 1/2 : 1/4 : 1/4 in amplitude, so the
        // nearest row alone holds 2/3 of the energy and the main lobe the rest
        let (row, share, lobe) = row_concentration(&stft(&x, &StftConfig::default()).unwrap());
        assert_eq!(row, 56);
        assert!((share - 2.0 / 3.0).abs() < 0.02, "hann single-row share {share}");
        assert!(lobe >= 0.95, "hann main-lobe share {lobe}");
    }

    #[test]
    fn zeroing_far_rows_preserves_tone_power() {
        let x: Vec<Complex64> = (0..512).map(|n| Complex64::from_polar(1.0, TAU * 8.0 / 64.0 * n as f64)).collect();
        let mut tf = stft(&x, &StftConfig::default()).unwrap();
        for k in 20..=40 {
            tf.data.row_mut(k).fill(Complex64::new(0.0, 0.0));
        }
        let y = istft(&tf).unwrap();
        let p_in: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let p_out: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        let db = 10.0 * (p_out / p_in).log10();
        assert!(db.abs() < 0.1, "{db} dB");
    }

    #[test]
    fn weighted_energy_matches_interior_signal_energy() {
        let mut x = noise(512, 11);
        for z in x.iter_mut().take(64) {
            *z = Complex64::new(0.0, 0.0);
        }
        for z in x.iter_mut().skip(448) {
            *z = Complex64::new(0.0, 0.0);
        }
        let tf = stft(&x, &StftConfig::default()).unwrap();
        let e: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        assert!((tf.weighted_energy() - e).abs() < 1e-9 * e);
    }

    #[test]
    fn inconsistent_matrix_rejected() {
        let mut tf = stft(&noise(512, 1), &StftConfig::default()).unwrap();
        tf.original_length = 700;
        assert!(matches!(istft(&tf), Err(Error::InconsistentDimensions(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn perfect_reconstruction(len in 64usize..700, seed in any::<u64>()) {
                let x = noise(len, seed);
                let y = istft(&stft(&x, &StftConfig::default()).unwrap()).unwrap();
                prop_assert!(rel_l2(&y, &x) < 1e-10);
            }
        }
    }
}
