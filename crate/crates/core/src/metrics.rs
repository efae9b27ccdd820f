//! Detection probability, SINR and phase-error statistics on RD maps.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mitigation::Method;
use crate::rdproc::{detect, noise_power_estimate, RdMap, TargetBinSet, ThresholdModel};

/// Largest representable phase error; a half-turn maps here so that every
/// error lies in `[0, 180)`.
const MAX_PHASE_ERROR_DEG: f64 = 179.99999999999997;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub method: Method,
    pub p_interference: f64,
    pub pd: f64,
    pub sinr_db: f64,
    /// Degrees, one per target bin.
    pub phase_error_samples: Vec<f64>,
}

/// Fraction of the detectable bins flagged on `map`; the floor of `map` is
/// measured outside `target_bins`.
pub fn probability_of_detection(
    map: &RdMap,
    detectable: &TargetBinSet,
    target_bins: &TargetBinSet,
    model: &ThresholdModel,
) -> Result<f64> {
    if detectable.is_empty() {
        return Err(Error::EmptyDetectableSet);
    }
    let flags = detect(map, detectable, target_bins, model)?;
    Ok(flags.iter().filter(|&&f| f).count() as f64 / flags.len() as f64)
}

/// Mean detectable-bin power over the median-based noise power of the bins
/// outside `target_bins`, in dB.
pub fn sinr_db(map: &RdMap, detectable: &TargetBinSet, target_bins: &TargetBinSet) -> Result<f64> {
    if detectable.is_empty() {
        return Err(Error::EmptyDetectableSet);
    }
    let signal = detectable.bins().map(|b| map.power(b)).sum::<f64>() / detectable.len() as f64;
    let noise = noise_power_estimate(map, target_bins)?;
    Ok(10.0 * (signal / noise).log10())
}

/// Absolute phase difference per bin, in degrees within `[0, 180)`.
pub fn phase_errors(reference: &RdMap, mitigated: &RdMap, bins: &TargetBinSet) -> Result<Vec<f64>> {
    if reference.shape() != mitigated.shape() {
        return Err(Error::DimensionMismatch { expected: reference.shape(), got: mitigated.shape() });
    }
    if bins.is_empty() {
        return Err(Error::EmptyBinSet);
    }
    Ok(bins
        .bins()
        .map(|b| {
            let d = (reference.data[b] * mitigated.data[b].conj()).arg().abs().to_degrees();
            d.min(MAX_PHASE_ERROR_DEG)
        })
        .collect())
}

/// Empirical CDF of `samples` at each grid point: fraction `<= e`.
pub fn cdf_on_grid(samples: &[f64], e_grid: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    e_grid.iter().map(|e| sorted.partition_point(|s| s <= e) as f64 / n).collect()
}

pub fn phase_error_cdf(reference: &RdMap, mitigated: &RdMap, bins: &TargetBinSet, e_grid: &[f64]) -> Result<Vec<f64>> {
    Ok(cdf_on_grid(&phase_errors(reference, mitigated, bins)?, e_grid))
}

/// `step`-degree grid over `[0, 180)`.
pub fn e_grid(step_deg: f64) -> Vec<f64> {
    let count = (180.0 / step_deg).ceil() as usize;
    (0..count).map(|i| i as f64 * step_deg).filter(|e| *e < 180.0).collect()
}

/// Default half-degree grid: 360 points.
pub fn default_e_grid() -> Vec<f64> {
    e_grid(0.5)
}
