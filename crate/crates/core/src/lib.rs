//! FMCW automotive radar mutual-interference laboratory.
//!
//! Synthesizes dechirped ADC frames containing targets, noise and FMCW
//! interference, mitigates the interference by time-domain or
//! time-frequency thresholding, and scores the result on the range-Doppler
//! map.

pub mod dsp;
pub mod error;
pub mod harness;
pub mod matrix_io;
pub mod metrics;
pub mod mitigation;
pub mod rdproc;
pub mod rfconfig;
pub mod scene;
pub mod synth;

pub use error::{Error, Result};
