use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail};
use clap::{Args, Parser, Subcommand};

use intflab::harness::{self, SweepConfig};
use intflab::harness::config::FAST_TRIALS;

#[derive(Parser)]
#[command(name = "intflab", version, about = "FMCW radar interference mitigation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo sweep and write sweep.csv, cdf.csv and metadata.
    Sweep(Common),
    /// Run one trial and dump its scene, frames, maps and metrics.
    Trial {
        #[command(flatten)]
        common: Common,
        /// Interference probability.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        index: usize,
    },
    /// Parse and validate a configuration.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Sweep configuration (TOML).
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario instead of a file: s1 or s2.
    #[arg(long)]
    preset: Option<String>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Use the reduced trial count.
    #[arg(long)]
    fast: bool,
}

impl Common {
    fn load(&self) -> anyhow::Result<SweepConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => SweepConfig::load(path)?,
            (None, Some(name)) => SweepConfig::preset(name)?,
            (None, None) => bail!("either --config or --preset is required"),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(dir) = &self.out {
            cfg.output.dir = dir.clone();
        }
        if self.fast {
            cfg.trials_per_point = FAST_TRIALS;
        }
        if self.threads == Some(0) {
            bail!("--threads must be >= 1");
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn sweep(common: &Common) -> anyhow::Result<()> {
    let cfg = common.load()?;
    let result = harness::run_sweep_with_threads(&cfg, common.threads)?;
    let paths = harness::export(&cfg, &result)?;
    for (p, n) in result.excluded.iter().filter(|(_, n)| *n > 0) {
        eprintln!("p = {p}: {n} trial(s) without detectable targets excluded");
    }
    println!("{}", paths.sweep_csv.display());
    println!("{}", paths.cdf_csv.display());
    println!("{}", paths.metadata.display());
    Ok(())
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn trial(common: &Common, p: f64, index: usize) -> anyhow::Result<()> {
    let cfg = common.load()?;
    if !(0.0..=1.0).contains(&p) {
        bail!("--p {p} outside [0, 1]");
    }
    let (outcome, art) = harness::run_trial_detailed(&cfg, p, index)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| anyhow!("{}: {e}", dir.display()))?;
    let hash = cfg.radar.config_hash();

    write_text(&dir.join("scene.json"), &art.scene.to_json())?;
    art.frames.full.write_binary(&dir.join("frame_full.bin"))?;
    art.frames.clean.write_binary(&dir.join("frame_clean.bin"))?;
    art.frames.interference.write_binary(&dir.join("frame_interference.bin"))?;
    art.clean_map.write_binary(&dir.join("rd_clean.bin"), &hash)?;
    for (method, frame, map) in &art.mitigated {
        frame.write_binary(&dir.join(format!("frame_{method}.bin")))?;
        map.write_binary(&dir.join(format!("rd_{method}.bin")), &hash)?;
    }

    let mut csv = String::from("method,pd,sinr_db,phase_error_median_deg\n");
    for m in &outcome.metrics {
        let mut e = m.phase_error_samples.clone();
        e.sort_by(f64::total_cmp);
        let median = e.get(e.len() / 2).copied().unwrap_or(f64::NAN);
        csv += &format!("{},{},{},{}\n", m.method, m.pd, m.sinr_db, median);
    }
    write_text(&dir.join("trial_metrics.csv"), &csv)?;

    println!(
        "p = {p}, trial {index}, seed {:#018x}: {} interferers, {} target bins, {} detectable",
        outcome.seed, outcome.interferer_count, outcome.target_bins, outcome.detectable_bins
    );
    if outcome.excluded() {
        println!("no detectable targets; metrics skipped");
    }
    print!("{csv}");
    Ok(())
}

fn validate(common: &Common) -> anyhow::Result<()> {
    let cfg = common.load()?;
    println!(
        "ok: {} ({} p values x {} trials, {} methods), hash {}",
        cfg.scenario.name,
        cfg.p_grid.len(),
        cfg.trials_per_point,
        cfg.methods.len(),
        cfg.config_hash()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(c) => sweep(c),
        Command::Trial { common, p, index } => trial(common, *p, *index),
        Command::Validate(c) => validate(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // library errors already embed their causes
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
