//! Monte Carlo trials and sweeps over the interference probability.

use rayon::prelude::*;

use super::config::SweepConfig;
use super::seed::{stream_seed, trial_seed, Stream};
use crate::error::{Error, Result};
use crate::metrics::{cdf_on_grid, e_grid, phase_errors, probability_of_detection, sinr_db, TrialMetrics};
use crate::mitigation::{apply, Method};
use crate::rdproc::{expected_target_bins, nominal_detectable_set, range_doppler_map, NominalDetection, RdMap, TargetBinSet};
use crate::scene::{assign_interferers, generate_scene, Scene};
use crate::synth::{synthesize_scene, AdcFrame, AssembledFrame};

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub p: f64,
    pub trial_index: usize,
    pub seed: u64,
    pub interferer_count: usize,
    pub target_bins: usize,
    pub detectable_bins: usize,
    /// One entry per configured method, in config order; empty when the trial
    /// had no detectable target and is excluded from the means.
    pub metrics: Vec<TrialMetrics>,
}

impl TrialOutcome {
    pub fn excluded(&self) -> bool {
        self.metrics.is_empty()
    }
}

/// Intermediate products of one trial, kept for debugging dumps.
#[derive(Debug, Clone)]
pub struct TrialArtifacts {
    pub scene: Scene,
    pub frames: AssembledFrame,
    pub clean_map: RdMap,
    pub expected: TargetBinSet,
    pub nominal: NominalDetection,
    pub mitigated: Vec<(Method, AdcFrame, RdMap)>,
}

fn trial_inner(cfg: &SweepConfig, p: f64, trial_index: usize, seed: u64, keep: bool) -> Result<(TrialOutcome, Option<TrialArtifacts>)> {
    let radar = &cfg.radar;
    let scene = generate_scene(&cfg.scenario, radar, stream_seed(seed, Stream::Scene))?;
    let scene = assign_interferers(scene, &cfg.scenario, radar, p, stream_seed(seed, Stream::Interferers))?;
    let frames = synthesize_scene(&scene, radar, stream_seed(seed, Stream::Noise))?;
    let clean_map = range_doppler_map(&frames.clean);
    let expected = expected_target_bins(&scene, radar);
    let nominal = nominal_detectable_set(&clean_map, &expected, cfg.pfa)?;

    let mut outcome = TrialOutcome {
        p,
        trial_index,
        seed,
        interferer_count: scene.interferers.len(),
        target_bins: expected.len(),
        detectable_bins: nominal.detectable.len(),
        metrics: Vec::new(),
    };
    let mut mitigated = Vec::new();
    if !nominal.detectable.is_empty() {
        for &method in &cfg.methods {
            let out = apply(method, &frames.full, &cfg.mitigation)?;
            let map = range_doppler_map(&out);
            outcome.metrics.push(TrialMetrics {
                method,
                p_interference: p,
                pd: probability_of_detection(&map, &nominal.detectable, &expected, &nominal.threshold)?,
                sinr_db: sinr_db(&map, &nominal.detectable, &expected)?,
                phase_error_samples: phase_errors(&clean_map, &map, &expected)?,
            });
            if keep {
                mitigated.push((method, out, map));
            }
        }
    }
    let artifacts = keep.then(|| TrialArtifacts { scene, frames, clean_map, expected, nominal, mitigated });
    Ok((outcome, artifacts))
}

fn wrap(p: f64, trial_index: usize, seed: u64, e: Error) -> Error {
    Error::Trial { p, trial_index: trial_index as u64, seed, source: Box::new(e) }
}

/// One trial; bit-deterministic in `(cfg, p, trial_index)`.
pub fn run_trial(cfg: &SweepConfig, p: f64, trial_index: usize) -> Result<TrialOutcome> {
    let seed = trial_seed(cfg.master_seed, p, trial_index);
    trial_inner(cfg, p, trial_index, seed, false).map(|(o, _)| o).map_err(|e| wrap(p, trial_index, seed, e))
}

pub fn run_trial_detailed(cfg: &SweepConfig, p: f64, trial_index: usize) -> Result<(TrialOutcome, TrialArtifacts)> {
    let seed = trial_seed(cfg.master_seed, p, trial_index);
    let (o, a) = trial_inner(cfg, p, trial_index, seed, true).map_err(|e| wrap(p, trial_index, seed, e))?;
    Ok((o, a.expect("artifacts requested")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub p: f64,
    pub method: Method,
    pub mean_pd: f64,
    pub mean_sinr_db: f64,
    /// Trials that entered the means.
    pub trial_count: usize,
    /// Pooled phase-error CDF on the result's `e_grid`.
    pub cdf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Ordered by `p`, then by the configured method order.
    pub rows: Vec<SweepRow>,
    pub e_grid: Vec<f64>,
    /// `(p, excluded trial count)` per grid point.
    pub excluded: Vec<(f64, usize)>,
    pub config_hash: String,
    pub master_seed: u64,
}

impl SweepResult {
    pub fn row(&self, p: f64, method: Method) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.p == p && r.method == method)
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Runs every `(p, trial)` pair, in parallel on `threads` workers (rayon's
/// default when `None`), and reduces in grid order.
pub fn run_sweep_with_threads(cfg: &SweepConfig, threads: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    let jobs: Vec<(f64, usize)> =
        cfg.p_grid.iter().flat_map(|&p| (0..cfg.trials_per_point).map(move |t| (p, t))).collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let results: Vec<Result<TrialOutcome>> =
        pool.install(|| jobs.par_iter().map(|&(p, t)| run_trial(cfg, p, t)).collect());
    let outcomes = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(aggregate(cfg, &outcomes))
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    run_sweep_with_threads(cfg, None)
}

/// Means and pooled CDFs; `outcomes` must be in grid order.
pub fn aggregate(cfg: &SweepConfig, outcomes: &[TrialOutcome]) -> SweepResult {
    let grid = e_grid(cfg.e_grid_step_deg);
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for &p in &cfg.p_grid {
        let at_p: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.p == p).collect();
        excluded.push((p, at_p.iter().filter(|o| o.excluded()).count()));
        for (k, &method) in cfg.methods.iter().enumerate() {
            let per_trial: Vec<&TrialMetrics> = at_p.iter().filter(|o| !o.excluded()).map(|o| &o.metrics[k]).collect();
            debug_assert!(per_trial.iter().all(|m| m.method == method));
            let pooled: Vec<f64> = per_trial.iter().flat_map(|m| m.phase_error_samples.iter().copied()).collect();
            let cdf = if pooled.is_empty() { vec![f64::NAN; grid.len()] } else { cdf_on_grid(&pooled, &grid) };
            rows.push(SweepRow {
                p,
                method,
                mean_pd: mean(per_trial.iter().map(|m| m.pd)),
                mean_sinr_db: mean(per_trial.iter().map(|m| m.sinr_db)),
                trial_count: per_trial.len(),
                cdf,
            });
        }
    }
    SweepResult { rows, e_grid: grid, excluded, config_hash: cfg.config_hash(), master_seed: cfg.master_seed }
}
