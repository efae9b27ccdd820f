//! Sweep configuration, stored as TOML.
//!
//! ```toml
//! p_grid = [0.0, 0.5, 1.0]
//! trials_per_point = 100
//! methods = ["none", "td_th", "tfd_th"]
//! pfa = 0.001
//! e_grid_step_deg = 0.5
//! master_seed = 1
//!
//! [radar]        # RadarConfig fields; defaults when omitted
//! [scenario]     # ScenarioConfig fields, see presets/
//! [mitigation.td_detector]
//! [mitigation.tfd_detector]
//! [mitigation.stft]
//! [output]       # dir, sweep_csv, cdf_csv, metadata
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_io::short_hash;
use crate::mitigation::{Method, MitigationConfig};
use crate::rfconfig::RadarConfig;
use crate::scene::ScenarioConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub sweep_csv: String,
    pub cdf_csv: String,
    pub metadata: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            sweep_csv: "sweep.csv".into(),
            cdf_csv: "cdf.csv".into(),
            metadata: "metadata.toml".into(),
        }
    }
}

pub const DEFAULT_TRIALS: usize = 100;
pub const FAST_TRIALS: usize = 10;

fn default_p_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_pfa() -> f64 {
    1e-3
}

fn default_e_step() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_p_grid")]
    pub p_grid: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials_per_point: usize,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// False-alarm probability of the nominal detection threshold.
    #[serde(default = "default_pfa")]
    pub pfa: f64,
    #[serde(default = "default_e_step")]
    pub e_grid_step_deg: f64,
    #[serde(default, with = "seed_repr")]
    pub master_seed: u64,
    #[serde(default)]
    pub radar: RadarConfig,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub mitigation: MitigationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl SweepConfig {
    pub fn new(scenario: ScenarioConfig) -> Self {
        Self {
            p_grid: default_p_grid(),
            trials_per_point: DEFAULT_TRIALS,
            methods: default_methods(),
            pfa: default_pfa(),
            e_grid_step_deg: default_e_step(),
            master_seed: 0,
            radar: RadarConfig::default(),
            scenario,
            mitigation: MitigationConfig::default(),
            output: OutputConfig::default(),
        }
    }

    /// `"s1"` or `"s2"` (case-insensitive).
    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "s1" => Ok(Self::new(ScenarioConfig::s1())),
            "s2" => Ok(Self::new(ScenarioConfig::s2())),
            other => Err(Error::InvalidConfig(format!("unknown preset {other:?}; expected s1 or s2"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.radar.validate()?;
        self.scenario.validate()?;
        self.mitigation.validate()?;
        if self.p_grid.is_empty() {
            return Err(Error::InvalidConfig("p_grid is empty".into()));
        }
        if let Some(p) = self.p_grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidProbability(*p));
        }
        if self.p_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("p_grid must be strictly ascending".into()));
        }
        if self.trials_per_point < 1 {
            return Err(Error::InvalidConfig("trials_per_point must be >= 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        let mut sorted = self.methods.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.methods.len() {
            return Err(Error::InvalidConfig("methods contain duplicates".into()));
        }
        if !(self.pfa > 0.0 && self.pfa <= 1.0) {
            return Err(Error::InvalidProbability(self.pfa));
        }
        if !(self.e_grid_step_deg > 0.0 && self.e_grid_step_deg < 180.0) {
            return Err(Error::InvalidConfig("e_grid_step_deg must lie in (0, 180)".into()));
        }
        if self.mitigation.stft.window_length > self.radar.samples_per_chirp {
            return Err(Error::InvalidConfig("STFT window longer than a chirp".into()));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse { path: "<config>".into(), message: e.to_string() })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("sweep config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    /// Hash of everything that affects results; output locations are left out.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        short_hash(&c.to_toml_string())
    }
}

/// TOML integers are signed 64-bit; seeds above `i64::MAX` are written as
/// strings.
pub(crate) mod seed_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*v) {
            Ok(i) => s.serialize_i64(i),
            Err(_) => s.serialize_str(&v.to_string()),
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn preset_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("presets")
    }

    #[test]
    fn preset_files_match_builtin_presets() {
        for name in ["s1", "s2"] {
            let file = SweepConfig::load(&preset_dir().join(format!("{name}.toml"))).unwrap();
            assert_eq!(file, SweepConfig::preset(name).unwrap(), "{name}");
            file.validate().unwrap();
        }
    }

    #[test]
    fn toml_round_trip_and_defaults() {
        let mut cfg = SweepConfig::preset("s2").unwrap();
        cfg.master_seed = u64::MAX - 3;
        let back = SweepConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.config_hash(), cfg.config_hash());

        let mut table = toml::Table::new();
        table.insert("scenario".into(), toml::Value::try_from(ScenarioConfig::s1()).unwrap());
        let minimal = toml::to_string(&table).unwrap();
        let parsed = SweepConfig::from_toml_str(&minimal).unwrap();
        assert_eq!(parsed, SweepConfig::preset("s1").unwrap());
        assert_eq!(parsed.p_grid.len(), 11);
        assert_eq!(parsed.trials_per_point, 100);
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = SweepConfig::preset("s1").unwrap();
        let mut b = a.clone();
        b.output.dir = PathBuf::from("/elsewhere");
        assert_eq!(a.config_hash(), b.config_hash());
        b.master_seed = 9;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn validation_failures() {
        let base = SweepConfig::preset("s1").unwrap();
        let cases: Vec<Box<dyn Fn(&mut SweepConfig)>> = vec![
            Box::new(|c| c.p_grid = vec![]),
            Box::new(|c| c.p_grid = vec![0.5, 0.2]),
            Box::new(|c| c.p_grid = vec![0.0, 1.5]),
            Box::new(|c| c.trials_per_point = 0),
            Box::new(|c| c.methods = vec![]),
            Box::new(|c| c.methods = vec![Method::None, Method::None]),
            Box::new(|c| c.pfa = 0.0),
        ];
        for (i, f) in cases.iter().enumerate() {
            let mut c = base.clone();
            f(&mut c);
            assert!(c.validate().is_err(), "case {i}");
        }
        assert!(SweepConfig::from_toml_str("bogus = 1\n[scenario]\nname='x'").is_err());
        assert!(SweepConfig::preset("s3").is_err());
    }
}
