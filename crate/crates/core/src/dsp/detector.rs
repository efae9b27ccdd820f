//! Interference detectors that turn a magnitude sequence into a per-cell
//! threshold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Consistency constant relating the MAD to the standard deviation of a
/// Gaussian.
pub const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    CellAveragingCfar,
    MedianMad,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfarParams {
    /// Per side.
    pub training_cells: usize,
    /// Per side.
    pub guard_cells: usize,
    pub scale_factor: f64,
}

impl Default for CfarParams {
    fn default() -> Self {
        Self { training_cells: 16, guard_cells: 4, scale_factor: 10.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MadParams {
    pub k: f64,
}

impl Default for MadParams {
    fn default() -> Self {
        Self { k: 6.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    pub kind: DetectorKind,
    #[serde(default)]
    pub cfar: CfarParams,
    #[serde(default)]
    pub mad: MadParams,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self::ca_cfar(CfarParams::default())
    }
}

impl DetectorConfig {
    pub fn ca_cfar(cfar: CfarParams) -> Self {
        Self { kind: DetectorKind::CellAveragingCfar, cfar, mad: MadParams::default() }
    }

    pub fn median_mad(k: f64) -> Self {
        Self { kind: DetectorKind::MedianMad, cfar: CfarParams::default(), mad: MadParams { k } }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.cfar;
        if c.training_cells < 1 {
            return Err(Error::InvalidConfig("CFAR training_cells must be >= 1".into()));
        }
        if !(c.scale_factor.is_finite() && c.scale_factor > 1.0) {
            return Err(Error::InvalidConfig(format!("CFAR scale_factor must be > 1, got {}", c.scale_factor)));
        }
        if !(self.mad.k.is_finite() && self.mad.k > 0.0) {
            return Err(Error::InvalidConfig(format!("MAD multiplier must be > 0, got {}", self.mad.k)));
        }
        Ok(())
    }
}

/// Per-cell threshold for `mag`.
///
/// Cell-averaging CFAR averages the training cells on both sides of each cell,
/// skipping the guard cells; near the edges only the cells that exist are
/// averaged. A cell with no training cells at all gets an infinite threshold.
/// Median/MAD produces one robust threshold broadcast to every cell.
pub fn detector_threshold(mag: &[f64], cfg: &DetectorConfig) -> Result<Vec<f64>> {
    if mag.is_empty() {
        return Err(Error::EmptyInput);
    }
    cfg.validate()?;
    Ok(match cfg.kind {
        DetectorKind::CellAveragingCfar => ca_cfar(mag, &cfg.cfar),
        DetectorKind::MedianMad => vec![median_mad(mag, cfg.mad.k); mag.len()],
    })
}

fn ca_cfar(mag: &[f64], p: &CfarParams) -> Vec<f64> {
    let n = mag.len();
    let reach = p.guard_cells + p.training_cells;
    (0..n)
        .map(|i| {
            let mut sum = 0.0;
            let mut count = 0usize;
            if i > p.guard_cells {
                let hi = i - p.guard_cells;
                let lo = i.saturating_sub(reach);
                sum += mag[lo..hi].iter().sum::<f64>();
                count += hi - lo;
            }
            let lo = i + p.guard_cells + 1;
            if lo < n {
                let hi = (i + reach + 1).min(n);
                sum += mag[lo..hi].iter().sum::<f64>();
                count += hi - lo;
            }
            if count == 0 {
                f64::INFINITY
            } else {
                p.scale_factor * sum / count as f64
            }
        })
        .collect()
}

fn median_of(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn median_mad(mag: &[f64], k: f64) -> f64 {
    let mut buf = mag.to_vec();
    let median = median_of(&mut buf);
    for (b, m) in buf.iter_mut().zip(mag) {
        *b = (m - median).abs();
    }
    let mad = median_of(&mut buf);
    median + k * MAD_SCALE * mad
}

/// Indices whose magnitude strictly exceeds its threshold.
pub fn exceedances(mag: &[f64], threshold: &[f64]) -> Vec<usize> {
    mag.iter().zip(threshold).enumerate().filter(|(_, (m, t))| m > t).map(|(i, _)| i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rayleigh(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| (-2.0 * (1.0 - rng.random::<f64>()).ln()).sqrt()).collect()
    }

    #[test]
    fn constant_input_cfar() {
        let t = detector_threshold(&[0.7; 100], &DetectorConfig::default()).unwrap();
        assert!(t.iter().all(|v| (v - 7.0).abs() < 1e-12));
    }

    #[test]
    fn single_spike_not_self_masked() {
        let mut mag = vec![0.0; 512];
        mag[256] = 100.0;
        let t = detector_threshold(&mag, &DetectorConfig::default()).unwrap();
        assert_eq!(t[256], 0.0);
        assert_eq!(exceedances(&mag, &t), vec![256]);
        for i in 252..=260 {
            assert_eq!(t[i], 0.0, "guard neighbour {i}");
        }
        // cells whose training window reaches the spike see it in their mean
        assert!((t[261] - 10.0 * 100.0 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn edge_windows_shrink() {
        let mag: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let p = CfarParams { training_cells: 3, guard_cells: 1, scale_factor: 2.0 };
        let t = detector_threshold(&mag, &DetectorConfig::ca_cfar(p)).unwrap();
        // cell 0: only right side cells 2..=4
        assert!((t[0] - 2.0 * 3.0).abs() < 1e-12);
        // cell 2: left cell 0, right 4..=6
        assert!((t[2] - 2.0 * (0.0 + 4.0 + 5.0 + 6.0) / 4.0).abs() < 1e-12);
        // interior cell 10: 6..=8 and 12..=14
        assert!((t[10] - 2.0 * 10.0).abs() < 1e-12);
    }

    #[test]
    fn no_training_cells_means_no_detection() {
        let p = CfarParams { training_cells: 2, guard_cells: 5, scale_factor: 3.0 };
        let t = detector_threshold(&[1.0, 50.0, 1.0], &DetectorConfig::ca_cfar(p)).unwrap();
        assert!(t.iter().all(|v| v.is_infinite()));
    }

    #[test]
    fn median_mad_threshold_value() {
        let mag = [1.0, 2.0, 3.0, 4.0, 100.0];
        let t = detector_threshold(&mag, &DetectorConfig::median_mad(2.0)).unwrap();
        // median 3, deviations [2,1,0,1,97] -> MAD 1
        assert!(t.iter().all(|v| (v - (3.0 + 2.0 * MAD_SCALE)).abs() < 1e-12));
        assert_eq!(exceedances(&mag, &t), vec![4]);
    }

    #[test]
    fn median_mad_rayleigh_false_alarm_rate() {
        let mag = rayleigh(100_000, 5);
        let t = detector_threshold(&mag, &DetectorConfig::median_mad(5.0)).unwrap();
        let rate = exceedances(&mag, &t).len() as f64 / mag.len() as f64;
        assert!(rate < 0.01, "{rate}");
    }

    #[test]
    fn errors() {
        assert!(matches!(detector_threshold(&[], &DetectorConfig::default()), Err(Error::EmptyInput)));
        let bad = DetectorConfig::ca_cfar(CfarParams { scale_factor: 1.0, ..CfarParams::default() });
        assert!(detector_threshold(&[1.0], &bad).is_err());
        let bad = DetectorConfig::ca_cfar(CfarParams { training_cells: 0, ..CfarParams::default() });
        assert!(detector_threshold(&[1.0], &bad).is_err());
        assert!(detector_threshold(&[1.0], &DetectorConfig::median_mad(0.0)).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn cfar_scale_equivariance(seed in any::<u64>(), len in 1usize..300, scale in 0.01..100.0f64) {
                let mag = rayleigh(len, seed);
                let cfg = DetectorConfig::default();
                let t1 = detector_threshold(&mag, &cfg).unwrap();
                let scaled: Vec<f64> = mag.iter().map(|m| m * scale).collect();
                let t2 = detector_threshold(&scaled, &cfg).unwrap();
                for (a, b) in t1.iter().zip(&t2) {
                    if a.is_infinite() {
                        prop_assert!(b.is_infinite());
                        continue;
                    }
                    prop_assert!((a * scale - b).abs() <= 1e-12 * b.abs().max(1e-300));
                }
                prop_assert_eq!(exceedances(&mag, &t1), exceedances(&scaled, &t2));
            }
        }
    }
}
