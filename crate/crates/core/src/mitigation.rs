//! Thresholding interference mitigation.
//!
//! Both methods process chirps independently. Time-domain thresholding runs
//! the detector over the magnitudes of a chirp and zeroes every sample above
//! its threshold. Time-frequency thresholding takes the STFT of the chirp,
//! runs the detector along the time-frame axis of each frequency row, zeroes
//! the exceedances and inverts the STFT. Excised cells are set to exactly
//! zero; nothing is interpolated back.

use ndarray::Axis;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dsp::detector::{detector_threshold, DetectorConfig};
use crate::dsp::stft::{StftConfig, StftProcessor};
use crate::error::Result;
use crate::synth::AdcFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    None,
    TdTh,
    TfdTh,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::None, Method::TdTh, Method::TfdTh];

    pub fn label(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::TdTh => "td_th",
            Method::TfdTh => "tfd_th",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Zeroes the samples of one chirp whose magnitude exceeds the detector
/// threshold; returns the number of zeroed samples.
pub fn td_th_row(row: &mut [Complex64], det: &DetectorConfig) -> Result<usize> {
    let mag: Vec<f64> = row.iter().map(|z| z.norm()).collect();
    let threshold = detector_threshold(&mag, det)?;
    let mut zeroed = 0;
    for ((z, m), t) in row.iter_mut().zip(&mag).zip(&threshold) {
        if m > t {
            *z = Complex64::new(0.0, 0.0);
            zeroed += 1;
        }
    }
    Ok(zeroed)
}

/// Time-frequency thresholding of one chirp; returns the number of zeroed
/// time-frequency cells.
pub fn tfd_th_row(row: &mut [Complex64], stft: &StftProcessor, det: &DetectorConfig) -> Result<usize> {
    let mut tf = stft.stft(row)?;
    let mut zeroed = 0;
    let mut mag = Vec::with_capacity(tf.cols());
    for mut freq_row in tf.data.rows_mut() {
        mag.clear();
        mag.extend(freq_row.iter().map(|z| z.norm()));
        let threshold = detector_threshold(&mag, det)?;
        for ((z, m), t) in freq_row.iter_mut().zip(&mag).zip(&threshold) {
            if m > t {
                *z = Complex64::new(0.0, 0.0);
                zeroed += 1;
            }
        }
    }
    if zeroed > 0 {
        let rebuilt = stft.istft(&tf)?;
        row.copy_from_slice(&rebuilt);
    } else {
        // unmodified matrix: keep the input bits rather than the round trip
    }
    Ok(zeroed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mitigated {
    pub frame: AdcFrame,
    /// Zeroed samples (TD-TH) or time-frequency cells (TFD-TH) per chirp.
    pub excised_per_chirp: Vec<usize>,
}

fn map_rows<F>(frame: &AdcFrame, f: F) -> Result<Mitigated>
where
    F: Fn(&mut [Complex64]) -> Result<usize> + Sync,
{
    let mut out = frame.clone();
    let counts: Vec<Result<usize>> = out
        .data
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .map(|mut row| {
            let slice = row.as_slice_mut().expect("frame rows are contiguous");
            f(slice)
        })
        .collect();
    let excised_per_chirp = counts.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Mitigated { frame: out, excised_per_chirp })
}

pub fn td_th_detailed(frame: &AdcFrame, det: &DetectorConfig) -> Result<Mitigated> {
    det.validate()?;
    map_rows(frame, |row| td_th_row(row, det))
}

pub fn tfd_th_detailed(frame: &AdcFrame, stft_cfg: &StftConfig, det: &DetectorConfig) -> Result<Mitigated> {
    det.validate()?;
    let stft = StftProcessor::new(*stft_cfg)?;
    map_rows(frame, |row| tfd_th_row(row, &stft, det))
}

pub fn td_th(frame: &AdcFrame, det: &DetectorConfig) -> Result<AdcFrame> {
    td_th_detailed(frame, det).map(|m| m.frame)
}

pub fn tfd_th(frame: &AdcFrame, stft_cfg: &StftConfig, det: &DetectorConfig) -> Result<AdcFrame> {
    tfd_th_detailed(frame, stft_cfg, det).map(|m| m.frame)
}

/// Detector and STFT settings for both methods.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationConfig {
    pub td_detector: DetectorConfig,
    pub tfd_detector: DetectorConfig,
    pub stft: StftConfig,
}

impl MitigationConfig {
    pub fn validate(&self) -> Result<()> {
        self.td_detector.validate()?;
        self.tfd_detector.validate()?;
        self.stft.validate()
    }
}

pub fn apply(method: Method, frame: &AdcFrame, cfg: &MitigationConfig) -> Result<AdcFrame> {
    match method {
        Method::None => Ok(frame.clone()),
        Method::TdTh => td_th(frame, &cfg.td_detector),
        Method::TfdTh => tfd_th(frame, &cfg.stft, &cfg.tfd_detector),
    }
}
