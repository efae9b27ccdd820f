//! Randomized highway scenes: vehicles, guardrail scatterers and interferers.
//!
//! Geometry is a straight highway of `lane_count` lanes running along +x.
//! Lanes are numbered from 1 at the left edge (y = 0). The victim sits at
//! x = 0 in the center of `ego_lane` and moves at `ego_speed_mps` along +x.
//! Lanes on the victim's half of the road carry traffic in the same
//! direction; the remaining lanes carry oncoming traffic.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rfconfig::{InterferenceCategory, InterfererWaveform, RadarConfig, SlopeSign};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    Vehicle,
    Guardrail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub range_m: f64,
    pub radial_velocity_mps: f64,
    pub amplitude: Complex64,
    pub kind: TargetKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interferer {
    /// Index of the vehicle in `Scene::targets` carrying this radar.
    pub vehicle_index: usize,
    pub range_m: f64,
    pub amplitude: Complex64,
    pub waveform: InterfererWaveform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub targets: Vec<Target>,
    pub interferers: Vec<Interferer>,
    pub seed: u64,
}

impl Scene {
    pub fn vehicle_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets
            .iter()
            .enumerate()
            .filter(|(_, t)| t.kind == TargetKind::Vehicle)
            .map(|(i, _)| i)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn from_json(text: &str) -> Result<Scene> {
        serde_json::from_str(text).map_err(|e| Error::Parse { path: "<scene>".into(), message: e.to_string() })
    }
}

/// Fractions of interferers drawn from each correlation category.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategoryMix {
    pub uncorrelated: f64,
    pub semi_correlated: f64,
    pub highly_correlated: f64,
}

impl CategoryMix {
    pub const S1: CategoryMix = CategoryMix { uncorrelated: 0.90, semi_correlated: 0.05, highly_correlated: 0.05 };
    pub const S2: CategoryMix = CategoryMix { uncorrelated: 0.05, semi_correlated: 0.05, highly_correlated: 0.90 };

    pub fn weights(&self) -> [f64; 3] {
        [self.uncorrelated, self.semi_correlated, self.highly_correlated]
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.weights();
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::InvalidConfig(format!("category weights must be non-negative, got {w:?}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("category weights must sum to 1, got {sum}")));
        }
        Ok(())
    }

    fn sample(&self, u: f64) -> InterferenceCategory {
        let w = self.weights();
        let mut acc = 0.0;
        for (cat, weight) in InterferenceCategory::ALL.iter().zip(w) {
            acc += weight;
            if u < acc {
                return *cat;
            }
        }
        // u landed in the rounding slack above the cumulative sum
        *InterferenceCategory::ALL
            .iter()
            .zip(w)
            .rev()
            .find(|(_, w)| *w > 0.0)
            .map(|(c, _)| c)
            .unwrap_or(&InterferenceCategory::Uncorrelated)
    }
}

/// Radar-equation amplitude calibration.
///
/// Target power per ADC sample scales as `RCS / r^4`, interference power as
/// `1 / r^2`; both are pinned at `reference_range_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeModel {
    pub reference_range_m: f64,
    /// Per-sample SNR of a `reference_rcs_m2` target at the reference range.
    pub reference_snr_db: f64,
    /// Per-sample INR of an interferer at the reference range.
    pub reference_inr_db: f64,
    pub reference_rcs_m2: f64,
    pub vehicle_rcs_m2: f64,
    pub guardrail_rcs_m2: f64,
}

impl Default for AmplitudeModel {
    fn default() -> Self {
        Self {
            reference_range_m: 100.0,
            reference_snr_db: -10.0,
            reference_inr_db: 20.0,
            reference_rcs_m2: 10.0,
            vehicle_rcs_m2: 10.0,
            guardrail_rcs_m2: 1.0,
        }
    }
}

impl AmplitudeModel {
    pub fn target_magnitude(&self, noise_variance: f64, rcs_m2: f64, range_m: f64) -> f64 {
        let snr = 10f64.powf(self.reference_snr_db / 10.0);
        (noise_variance * snr * rcs_m2 / self.reference_rcs_m2).sqrt() * (self.reference_range_m / range_m).powi(2)
    }

    pub fn interferer_magnitude(&self, noise_variance: f64, range_m: f64) -> f64 {
        let inr = 10f64.powf(self.reference_inr_db / 10.0);
        (noise_variance * inr).sqrt() * self.reference_range_m / range_m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub lane_count: usize,
    pub vehicle_count: usize,
    pub guardrail_scatterer_count: usize,
    pub category_mix: CategoryMix,
    pub highway_length_m: f64,
    pub lane_width_m: f64,
    /// 1-based lane of the victim.
    pub ego_lane: usize,
    pub ego_speed_mps: f64,
    pub vehicle_speed_min_mps: f64,
    pub vehicle_speed_max_mps: f64,
    /// Vehicles are placed at x in `[min_vehicle_distance_m, highway_length_m]`.
    pub min_vehicle_distance_m: f64,
    /// Give guardrails the radial velocity induced by ego motion; zero Doppler otherwise.
    pub guardrail_ego_doppler: bool,
    pub amplitude: AmplitudeModel,
}

impl ScenarioConfig {
    fn highway(name: &str, mix: CategoryMix) -> Self {
        Self {
            name: name.to_string(),
            lane_count: 6,
            vehicle_count: 34,
            guardrail_scatterer_count: 74,
            category_mix: mix,
            highway_length_m: 200.0,
            lane_width_m: 3.5,
            ego_lane: 3,
            ego_speed_mps: 25.0,
            vehicle_speed_min_mps: 15.0,
            vehicle_speed_max_mps: 40.0,
            min_vehicle_distance_m: 5.0,
            guardrail_ego_doppler: false,
            amplitude: AmplitudeModel::default(),
        }
    }

    /// Uncorrelated interference dominates.
    pub fn s1() -> Self {
        Self::highway("S1", CategoryMix::S1)
    }

    /// Highly correlated interference dominates.
    pub fn s2() -> Self {
        Self::highway("S2", CategoryMix::S2)
    }

    pub fn validate(&self) -> Result<()> {
        self.category_mix.validate()?;
        if self.lane_count == 0 || self.ego_lane == 0 || self.ego_lane > self.lane_count {
            return Err(Error::InvalidConfig(format!(
                "ego_lane {} must lie in 1..={}",
                self.ego_lane, self.lane_count
            )));
        }
        let positive = [
            ("highway_length_m", self.highway_length_m),
            ("lane_width_m", self.lane_width_m),
            ("reference_range_m", self.amplitude.reference_range_m),
            ("reference_rcs_m2", self.amplitude.reference_rcs_m2),
            ("vehicle_rcs_m2", self.amplitude.vehicle_rcs_m2),
            ("guardrail_rcs_m2", self.amplitude.guardrail_rcs_m2),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.min_vehicle_distance_m > 0.0 && self.min_vehicle_distance_m <= self.highway_length_m) {
            return Err(Error::InvalidConfig("min_vehicle_distance_m must lie in (0, highway_length_m]".into()));
        }
        if !(self.vehicle_speed_min_mps >= 0.0 && self.vehicle_speed_min_mps <= self.vehicle_speed_max_mps) {
            return Err(Error::InvalidConfig("vehicle speed range must satisfy 0 <= min <= max".into()));
        }
        if !(self.ego_speed_mps.is_finite() && self.amplitude.reference_snr_db.is_finite() && self.amplitude.reference_inr_db.is_finite()) {
            return Err(Error::InvalidConfig("ego speed and reference levels must be finite".into()));
        }
        Ok(())
    }

    fn lane_center_y(&self, lane: usize) -> f64 {
        (lane as f64 - 0.5) * self.lane_width_m
    }

    fn same_direction(&self, lane: usize) -> bool {
        let ego_side_low = self.ego_lane <= self.lane_count.div_ceil(2);
        let lane_side_low = lane <= self.lane_count.div_ceil(2);
        ego_side_low == lane_side_low
    }
}

fn random_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, TAU * rng.random::<f64>())
}

/// Places vehicles and guardrail scatterers; the scene has no interferers yet.
pub fn generate_scene(scenario: &ScenarioConfig, radar: &RadarConfig, seed: u64) -> Result<Scene> {
    scenario.validate()?;
    radar.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ego_y = scenario.lane_center_y(scenario.ego_lane);
    let amp = &scenario.amplitude;
    let mut targets = Vec::with_capacity(scenario.vehicle_count + scenario.guardrail_scatterer_count);

    for _ in 0..scenario.vehicle_count {
        let lane = rng.random_range(1..=scenario.lane_count);
        let x = scenario.min_vehicle_distance_m
            + (scenario.highway_length_m - scenario.min_vehicle_distance_m) * rng.random::<f64>();
        let speed = scenario.vehicle_speed_min_mps
            + (scenario.vehicle_speed_max_mps - scenario.vehicle_speed_min_mps) * rng.random::<f64>();
        let vx = if scenario.same_direction(lane) { speed } else { -speed };
        let dy = scenario.lane_center_y(lane) - ego_y;
        let range_m = x.hypot(dy);
        let radial_velocity_mps = x * (vx - scenario.ego_speed_mps) / range_m;
        let magnitude = amp.target_magnitude(radar.noise_variance, amp.vehicle_rcs_m2, range_m);
        targets.push(Target {
            range_m,
            radial_velocity_mps,
            amplitude: magnitude * random_phase(&mut rng),
            kind: TargetKind::Vehicle,
        });
    }

    let left = scenario.guardrail_scatterer_count.div_ceil(2);
    let right = scenario.guardrail_scatterer_count - left;
    let road_width = scenario.lane_count as f64 * scenario.lane_width_m;
    for (count, edge_y) in [(left, 0.0), (right, road_width)] {
        let dy = edge_y - ego_y;
        for j in 0..count {
            let x = scenario.highway_length_m * (j as f64 + 0.5) / count as f64;
            let range_m = x.hypot(dy);
            let radial_velocity_mps =
                if scenario.guardrail_ego_doppler { -scenario.ego_speed_mps * x / range_m } else { 0.0 };
            let magnitude = amp.target_magnitude(radar.noise_variance, amp.guardrail_rcs_m2, range_m);
            targets.push(Target {
                range_m,
                radial_velocity_mps,
                amplitude: magnitude * random_phase(&mut rng),
                kind: TargetKind::Guardrail,
            });
        }
    }

    for (index, t) in targets.iter().enumerate() {
        let range_freq = radar.range_frequency(t.range_m);
        if !(t.range_m > 0.0 && range_freq < 1.0) {
            return Err(Error::InfeasibleGeometry { index, range_m: t.range_m, range_freq });
        }
    }

    Ok(Scene { targets, interferers: Vec::new(), seed })
}

/// Turns each vehicle into an interferer with probability `p`.
///
/// Category, gamma, slope sign, PRI and start offset are drawn per interferer;
/// amplitude follows one-way propagation from the vehicle's range.
pub fn assign_interferers(
    mut scene: Scene,
    scenario: &ScenarioConfig,
    radar: &RadarConfig,
    p_interference: f64,
    rng_seed: u64,
) -> Result<Scene> {
    if !(0.0..=1.0).contains(&p_interference) {
        return Err(Error::InvalidProbability(p_interference));
    }
    scenario.category_mix.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut interferers = Vec::new();
    let vehicles: Vec<usize> = scene.vehicle_indices().collect();
    for vehicle_index in vehicles {
        // Draw every variate for every vehicle so that the realization for a
        // given vehicle does not depend on earlier acceptance decisions.
        let u_select = rng.random::<f64>();
        let u_cat = rng.random::<f64>();
        let u_gamma = rng.random::<f64>();
        let up = rng.random_bool(0.5);
        let pri_scale = 0.5 + rng.random::<f64>();
        let u_offset = rng.random::<f64>();
        let phase = random_phase(&mut rng);
        if u_select >= p_interference {
            continue;
        }
        let category = scenario.category_mix.sample(u_cat);
        let (lo, hi) = category.gamma_band();
        // (lo, hi]
        let gamma = hi - (hi - lo) * u_gamma;
        let gamma = if gamma <= lo { hi } else { gamma };
        let pri_s = radar.pri_s * pri_scale;
        let start_offset_s = (pri_s * u_offset).min(pri_s * (1.0 - f64::EPSILON));
        let sign = if up { SlopeSign::Positive } else { SlopeSign::Negative };
        let waveform = InterfererWaveform::new(radar, gamma, sign, pri_s, start_offset_s)?;
        let range_m = scene.targets[vehicle_index].range_m;
        let magnitude = scenario.amplitude.interferer_magnitude(radar.noise_variance, range_m);
        interferers.push(Interferer { vehicle_index, range_m, amplitude: magnitude * phase, waveform });
    }
    scene.interferers = interferers;
    Ok(scene)
}
