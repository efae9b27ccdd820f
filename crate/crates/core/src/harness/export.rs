//! CSV and metadata output.
//!
//! `sweep.csv`: `p,method,mean_pd,mean_sinr_db,trial_count`, one row per
//! `(p, method)`. `cdf.csv`: `p,method,e_deg,cdf`, one row per grid point of
//! each `(p, method)`. Floats use Rust's shortest round-trip formatting.
//! The metadata file is TOML holding the version, config hash, seed,
//! exclusion counts and the full config.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{seed_repr, SweepConfig};
use super::sweep::SweepResult;
use crate::error::{Error, Result};

pub const SWEEP_HEADER: [&str; 5] = ["p", "method", "mean_pd", "mean_sinr_db", "trial_count"];
pub const CDF_HEADER: [&str; 4] = ["p", "method", "e_deg", "cdf"];

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse { path: path.to_path_buf(), message: format!("{other:?}") },
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_sweep_csv(path: &Path, result: &SweepResult) -> Result<()> {
    write_csv(
        path,
        &SWEEP_HEADER,
        result.rows.iter().map(|r| {
            vec![
                r.p.to_string(),
                r.method.to_string(),
                r.mean_pd.to_string(),
                r.mean_sinr_db.to_string(),
                r.trial_count.to_string(),
            ]
        }),
    )
}

pub fn write_cdf_csv(path: &Path, result: &SweepResult) -> Result<()> {
    write_csv(
        path,
        &CDF_HEADER,
        result.rows.iter().flat_map(|r| {
            result.e_grid.iter().zip(&r.cdf).map(move |(e, c)| vec![r.p.to_string(), r.method.to_string(), e.to_string(), c.to_string()])
        }),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedTrials {
    pub p: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMetadata {
    pub version: String,
    pub config_hash: String,
    #[serde(with = "seed_repr")]
    pub master_seed: u64,
    pub trials_per_point: usize,
    pub excluded: Vec<ExcludedTrials>,
    pub config: SweepConfig,
}

impl RunMetadata {
    pub fn new(cfg: &SweepConfig, result: &SweepResult) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: result.config_hash.clone(),
            master_seed: cfg.master_seed,
            trials_per_point: cfg.trials_per_point,
            excluded: result.excluded.iter().map(|&(p, count)| ExcludedTrials { p, count }).collect(),
            config: cfg.clone(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportPaths {
    pub sweep_csv: PathBuf,
    pub cdf_csv: PathBuf,
    pub metadata: PathBuf,
}

/// Writes all three files into `cfg.output.dir`, creating it if needed.
pub fn export(cfg: &SweepConfig, result: &SweepResult) -> Result<ExportPaths> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = ExportPaths {
        sweep_csv: dir.join(&cfg.output.sweep_csv),
        cdf_csv: dir.join(&cfg.output.cdf_csv),
        metadata: dir.join(&cfg.output.metadata),
    };
    write_sweep_csv(&paths.sweep_csv, result)?;
    write_cdf_csv(&paths.cdf_csv, result)?;
    RunMetadata::new(cfg, result).write(&paths.metadata)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::SweepRow;
    use crate::metrics::default_e_grid;
    use crate::mitigation::Method;

    fn fake_result(cfg: &SweepConfig) -> SweepResult {
        let grid = default_e_grid();
        let mut rows = Vec::new();
        for &p in &[0.0, 0.5, 1.0] {
            for m in Method::ALL {
                rows.push(SweepRow {
                    p,
                    method: m,
                    mean_pd: 1.0 - p / 3.0,
                    mean_sinr_db: 20.0 - p,
                    trial_count: 4,
                    cdf: grid.iter().map(|e| (e / 179.5).min(1.0)).collect(),
                });
            }
        }
        SweepResult { rows, e_grid: grid, excluded: vec![(0.0, 0), (0.5, 1), (1.0, 0)], config_hash: cfg.config_hash(), master_seed: 3 }
    }

    #[test]
    fn row_counts_and_headers() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SweepConfig::preset("s1").unwrap();
        cfg.output.dir = dir.path().join("nested");
        let paths = export(&cfg, &fake_result(&cfg)).unwrap();

        let sweep = fs::read_to_string(&paths.sweep_csv).unwrap();
        let lines: Vec<&str> = sweep.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "p,method,mean_pd,mean_sinr_db,trial_count");
        assert_eq!(lines[1], "0,none,1,20,4");
        assert!(!sweep.contains('\r'));

        let cdf = fs::read_to_string(&paths.cdf_csv).unwrap();
        assert_eq!(cdf.lines().count(), 3241);
        assert_eq!(cdf.lines().next().unwrap(), "p,method,e_deg,cdf");
        assert_eq!(cdf.lines().nth(2).unwrap(), format!("0,none,0.5,{}", 0.5 / 179.5));
    }

    #[test]
    fn metadata_round_trip_reproduces_hash() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SweepConfig::preset("s2").unwrap();
        cfg.output.dir = dir.path().to_path_buf();
        let paths = export(&cfg, &fake_result(&cfg)).unwrap();
        let meta = RunMetadata::read(&paths.metadata).unwrap();
        assert_eq!(meta.config, cfg);
        assert_eq!(meta.config.config_hash(), meta.config_hash);
        assert_eq!(meta.excluded[1], ExcludedTrials { p: 0.5, count: 1 });
    }

    #[test]
    fn io_errors_carry_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let mut cfg = SweepConfig::preset("s1").unwrap();
        cfg.output.dir = blocker.join("sub");
        let err = export(&cfg, &fake_result(&cfg)).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
