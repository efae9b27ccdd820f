//! Signal-processing primitives shared by mitigation and range-Doppler processing.

pub mod detector;
pub mod stft;
pub mod window;

pub use detector::{detector_threshold, CfarParams, DetectorConfig, DetectorKind, MadParams};
pub use stft::{istft, stft, StftConfig, StftProcessor, TfMatrix};
pub use window::WindowKind;
