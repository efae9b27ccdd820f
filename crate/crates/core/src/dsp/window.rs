use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    #[default]
    Hann,
    Rectangular,
}

impl WindowKind {
    /// Periodic form (denominator `len`), which overlap-adds to a constant
    /// at hops of `len / 4` for Hann.
    pub fn periodic(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Hann => (0..len).map(|i| 0.5 - 0.5 * (TAU * i as f64 / len as f64).cos()).collect(),
            WindowKind::Rectangular => vec![1.0; len],
        }
    }

    /// Symmetric form (denominator `len - 1`) for spectral analysis.
    pub fn symmetric(self, len: usize) -> Vec<f64> {
        match self {
            WindowKind::Hann if len > 1 => {
                (0..len).map(|i| 0.5 - 0.5 * (TAU * i as f64 / (len - 1) as f64).cos()).collect()
            }
            _ => vec![1.0; len],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hann_periodic_cola_at_quarter_hop() {
        let w = WindowKind::Hann.periodic(64);
        for n in 0..16 {
            let s: f64 = (0..4).map(|k| w[n + 16 * k]).sum();
            assert!((s - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hann_symmetric_endpoints() {
        let w = WindowKind::Hann.symmetric(9);
        assert!(w[0].abs() < 1e-15 && w[8].abs() < 1e-15);
        assert!((w[4] - 1.0).abs() < 1e-15);
    }
}
