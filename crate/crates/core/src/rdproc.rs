//! Range-Doppler processing and target-bin bookkeeping.
//!
//! The map is the 2D transform of the windowed frame under the
//! `exp(+j 2 pi k n / N)` kernel, which is matched to the `exp(-j 2 pi f n)`
//! tones the synthesizer writes: a target with normalized frequencies
//! `(f_d, f_r)` peaks at range bin `f_r * N` and, after centering zero
//! Doppler, at Doppler bin `M / 2 + f_d * M` (both modulo the axis length).

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dsp::WindowKind;
use crate::error::{Error, Result};
use crate::matrix_io;
use crate::scene::Scene;
use crate::rfconfig::RadarConfig;
use crate::synth::AdcFrame;

/// Doppler rows (zero Doppler at row `M / 2`) by range columns.
#[derive(Debug, Clone, PartialEq)]
pub struct RdMap {
    pub data: Array2<Complex64>,
    pub window: WindowKind,
}

impl RdMap {
    pub fn shape(&self) -> (usize, usize) {
        self.data.dim()
    }

    pub fn power(&self, bin: (usize, usize)) -> f64 {
        self.data[bin].norm_sqr()
    }

    pub fn total_power(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Bin of largest power; the first one wins ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = ((0, 0), f64::NEG_INFINITY);
        for (idx, z) in self.data.indexed_iter() {
            let p = z.norm_sqr();
            if p > best.1 {
                best = (idx, p);
            }
        }
        best.0
    }

    pub fn write_binary(&self, path: &Path, config_hash: &str) -> Result<()> {
        matrix_io::write(path, &self.data, config_hash)
    }
}

/// Window each axis with the symmetric form of `window` and transform.
pub fn range_doppler_map_with(frame: &AdcFrame, window: WindowKind) -> RdMap {
    let (m_count, n_count) = frame.shape();
    let w_fast = window.symmetric(n_count);
    let w_slow = window.symmetric(m_count);
    let mut planner = FftPlanner::<f64>::new();
    let range_fft = planner.plan_fft_inverse(n_count);
    let doppler_fft = planner.plan_fft_inverse(m_count);

    let mut data = frame.data.clone();
    for (m, mut row) in data.axis_iter_mut(Axis(0)).enumerate() {
        let row = row.as_slice_mut().expect("frame rows are contiguous");
        for (z, w) in row.iter_mut().zip(&w_fast) {
            *z *= w * w_slow[m];
        }
        range_fft.process(row);
    }

    let mut out = Array2::<Complex64>::zeros((m_count, n_count));
    let mut col = vec![Complex64::new(0.0, 0.0); m_count];
    let half = m_count / 2;
    for n in 0..n_count {
        col.iter_mut().zip(data.column(n)).for_each(|(c, v)| *c = *v);
        doppler_fft.process(&mut col);
        for (k, v) in col.iter().enumerate() {
            out[((k + half) % m_count, n)] = *v;
        }
    }
    RdMap { data: out, window }
}

/// Hann-windowed range-Doppler map.
pub fn range_doppler_map(frame: &AdcFrame) -> RdMap {
    range_doppler_map_with(frame, WindowKind::Hann)
}

/// The target bins `Θ`, each with the indices of the scene targets it holds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TargetBinSet {
    bins: BTreeMap<(usize, usize), Vec<usize>>,
}

impl TargetBinSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, bin: (usize, usize), target_index: usize) {
        let ids = self.bins.entry(bin).or_default();
        if !ids.contains(&target_index) {
            ids.push(target_index);
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn contains(&self, bin: (usize, usize)) -> bool {
        self.bins.contains_key(&bin)
    }

    pub fn targets_at(&self, bin: (usize, usize)) -> &[usize] {
        self.bins.get(&bin).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Bins in ascending `(doppler, range)` order.
    pub fn bins(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bins.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), &[usize])> + '_ {
        self.bins.iter().map(|(k, v)| (*k, v.as_slice()))
    }

    pub fn retain(&mut self, mut keep: impl FnMut((usize, usize)) -> bool) {
        self.bins.retain(|k, _| keep(*k));
    }
}

/// Predicted bin of every scene target.
pub fn expected_target_bins(scene: &Scene, cfg: &RadarConfig) -> TargetBinSet {
    let (m_count, n_count) = cfg.shape();
    let mut set = TargetBinSet::new();
    for (idx, t) in scene.targets.iter().enumerate() {
        let fd = cfg.doppler_frequency(t.radial_velocity_mps);
        let fr = cfg.range_frequency(t.range_m);
        let d = (m_count as f64 / 2.0 + fd * m_count as f64).round().rem_euclid(m_count as f64) as usize;
        let r = (fr * n_count as f64).round().rem_euclid(n_count as f64) as usize;
        // rounding up to exactly the axis length wraps to 0
        set.insert((d % m_count, r % n_count), idx);
    }
    set
}

/// Detection threshold calibrated on the interference-free map.
///
/// A map under test is thresholded at `-ln(pfa)` times its own median-based
/// floor, never below the nominal floor: interference that raises the floor
/// raises the threshold with it, while excision that zeroes samples (and
/// with them some thermal noise) cannot make detection easier than nominal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdModel {
    /// Per-bin noise power of the clean map.
    pub noise_power: f64,
    pub pfa: f64,
    /// Threshold on the clean map.
    pub threshold: f64,
}

impl ThresholdModel {
    pub fn new(noise_power: f64, pfa: f64) -> Result<Self> {
        if !(pfa > 0.0 && pfa <= 1.0) {
            return Err(Error::InvalidProbability(pfa));
        }
        Ok(Self { noise_power, pfa, threshold: -noise_power * pfa.ln() })
    }

    /// Threshold for a map whose measured floor is `floor`.
    pub fn threshold_for_floor(&self, floor: f64) -> f64 {
        -self.noise_power.max(floor) * self.pfa.ln()
    }
}

/// Median-based noise power over the bins not in `exclude`.
///
/// The power of a complex Gaussian bin is exponential, whose median is
/// `ln 2` times its mean.
pub fn noise_power_estimate(map: &RdMap, exclude: &TargetBinSet) -> Result<f64> {
    let total = map.data.len();
    if 2 * exclude.len() >= total {
        return Err(Error::DegenerateNoiseEstimate { target_bins: exclude.len(), total_bins: total });
    }
    let mut powers: Vec<f64> =
        map.data.indexed_iter().filter(|(idx, _)| !exclude.contains(*idx)).map(|(_, z)| z.norm_sqr()).collect();
    let n = powers.len();
    let mid = n / 2;
    let (_, upper, _) = powers.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    let median = if n % 2 == 1 {
        upper
    } else {
        let lower = powers[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    Ok(median / std::f64::consts::LN_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NominalDetection {
    pub detectable: TargetBinSet,
    pub threshold: ThresholdModel,
}

/// Keeps the expected bins whose clean-map power exceeds the threshold set
/// for false-alarm probability `pfa`.
pub fn nominal_detectable_set(clean_map: &RdMap, expected: &TargetBinSet, pfa: f64) -> Result<NominalDetection> {
    let noise = noise_power_estimate(clean_map, expected)?;
    let threshold = ThresholdModel::new(noise, pfa)?;
    let mut detectable = expected.clone();
    detectable.retain(|bin| clean_map.power(bin) > threshold.threshold);
    Ok(NominalDetection { detectable, threshold })
}

/// Detection flag per bin of `bins`, in the set's bin order. The floor of
/// `map` is measured outside `target_bins`.
pub fn detect(map: &RdMap, bins: &TargetBinSet, target_bins: &TargetBinSet, model: &ThresholdModel) -> Result<Vec<bool>> {
    let threshold = model.threshold_for_floor(noise_power_estimate(map, target_bins)?);
    Ok(bins.bins().map(|b| map.power(b) > threshold).collect())
}
